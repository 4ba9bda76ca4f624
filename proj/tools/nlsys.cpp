#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlsys/cli/commands.hpp"
#include "nlsys/error.hpp"

namespace {

using nlsys::cli::RunConfig;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string u;
    std::string v;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nlsys - ground states, mass landscape and orbital stability of a coupled NLS system"};
    app.require_subcommand(1);

    Options opts;
    using Command = std::function<int(const RunConfig&, std::ostream&)>;
    struct Entry {
        const char* name;
        const char* help;
        Command run;
        bool needs_model;
    };
    const Entry entries[] = {
        {"solve", "compute a constrained ground state", nlsys::cli::cmd_solve, true},
        {"scan", "tabulate m(a1, a2) and check the landscape inequalities", nlsys::cli::cmd_scan, true},
        {"rearrange", "rearrange snapshots and check the lemma properties", nlsys::cli::cmd_rearrange, false},
        {"evolve", "integrate the evolution system from a ground state or snapshots", nlsys::cli::cmd_evolve, true},
        {"stability", "orbital stability sweep over perturbation sizes", nlsys::cli::cmd_stability, true},
        {"splitcheck", "energy splitting of separated profiles", nlsys::cli::cmd_splitcheck, true},
        {"gncert", "Gagliardo-Nirenberg certificate of a ground state", nlsys::cli::cmd_gncert, true},
    };

    const Entry* chosen = nullptr;
    for (const auto& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        sub->add_option("--config", opts.config, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "output directory");
        sub->add_option("--seed", opts.seed, "random seed");
        sub->add_option("--threads", opts.threads, "worker threads (overrides NLSYS_THREADS)")
            ->check(CLI::PositiveNumber);
        if (std::string(e.name) == "rearrange") {
            sub->add_option("--u", opts.u, "snapshot of u");
            sub->add_option("--v", opts.v, "snapshot of v (omit for the Schwarz rearrangement)");
        }
        sub->callback([&chosen, &e] { chosen = &e; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nlsys::cli::exit_usage;
    }

    try {
        nlsys::cli::KeyValues kv;
        if (!opts.config.empty()) kv = nlsys::cli::read_key_values(opts.config);
        if (!opts.u.empty()) kv["rearrange.u"] = opts.u;
        if (!opts.v.empty()) kv["rearrange.v"] = opts.v;
        nlsys::cli::Overrides overrides;
        if (opts.out) overrides.out = *opts.out;
        overrides.seed = opts.seed;
        overrides.threads = opts.threads;
        const RunConfig cfg = nlsys::cli::resolve(std::move(kv), overrides, chosen->needs_model);
        return chosen->run(cfg, std::cout);
    } catch (const nlsys::Error& e) {
        std::cerr << "error (" << nlsys::to_string(e.kind()) << "): " << e.what() << '\n';
        return nlsys::cli::exit_code_for(e);
    }
}
