#include "nlsys/cli/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nlsys/error.hpp"

namespace nlsys::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw Error(ErrorKind::configuration, "config key '" + key + "': " + what);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || errno == ERANGE) bad(key, "'" + text + "' is not a number");
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || *end != '\0' || errno == ERANGE) bad(key, "'" + text + "' is not an integer");
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const long long v = to_integer(key, text);
    if (v < -2147483647LL || v > 2147483647LL) bad(key, "value out of range");
    return static_cast<int>(v);
}

std::uint64_t to_seed(const std::string& key, const std::string& text) {
    const long long v = to_integer(key, text);
    if (v < 0) bad(key, "seed must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    bad(key, "expected true or false");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_double(key, item));
    return out;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::configuration, "config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw Error(ErrorKind::configuration, "config line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second) bad(key, "given twice");
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::configuration, "cannot open config file " + path.string());
    return parse_key_values(in);
}

const std::vector<KeyInfo>& config_schema() {
    static const std::vector<KeyInfo> schema = {
        {"model.dim", nullptr, "spatial dimension N (1, 2 or 3)"},
        {"model.mu1", "1", "self-interaction strength of component 1"},
        {"model.mu2", "1", "self-interaction strength of component 2"},
        {"model.p1", "4", "self-interaction exponent of component 1"},
        {"model.p2", "4", "self-interaction exponent of component 2"},
        {"model.r1", "2", "coupling exponent of component 1"},
        {"model.r2", "2", "coupling exponent of component 2"},
        {"model.beta", "1", "coupling strength"},
        {"model.components", "both", "both, first_only or second_only"},
        {"model.a1", nullptr, "mass of component 1"},
        {"model.a2", nullptr, "mass of component 2"},
        {"grid.extent", nullptr, "box side L"},
        {"grid.points", nullptr, "points per axis"},
        {"solver.step", "0.5", "initial flow step"},
        {"solver.max_iters", "20000", "iteration cap"},
        {"solver.tol_residual", "1e-8", "stationary residual tolerance"},
        {"solver.tol_energy", "1e-12", "energy change counted as a stall"},
        {"solver.stall_window", "200", "consecutive stalled steps that stop the flow"},
        {"solver.init", "gaussian", "gaussian, noise or file"},
        {"solver.noise_amplitude", "0.3", "relative noise for init = noise"},
        {"solver.start1", "", "snapshot of component 1 for init = file"},
        {"solver.start2", "", "snapshot of component 2 for init = file"},
        {"evolve.dt", "1e-3", "time step"},
        {"evolve.t_final", "10", "final time"},
        {"evolve.record_every", "100", "steps between trace samples"},
        {"evolve.perturbation_size", "0", "H1 size of the initial perturbation"},
        {"evolve.initial1", "", "snapshot of the initial component 1 (default: ground state)"},
        {"evolve.initial2", "", "snapshot of the initial component 2 (default: ground state)"},
        {"stability.deltas", "0,1e-3,1e-2,5e-2", "perturbation sizes, one trace each"},
        {"stability.reference1", "", "reference ground state component 1 (default: solve)"},
        {"stability.reference2", "", "reference ground state component 2 (default: solve)"},
        {"scan.a1_values", "0,0.5,1", "component 1 masses, ascending"},
        {"scan.a2_values", "0,0.5,1", "component 2 masses, ascending"},
        {"scan.strict_margin", "1e-4", "margin reported as strict subadditivity"},
        {"scan.warm_start", "true", "warm-start along each row"},
        {"scan.table", "", "existing mass table to re-check instead of solving"},
        {"split.separations", "", "shifts in cells (default: n/16, n/8, n/4)"},
        {"split.width", "1", "Gaussian width of the split profiles"},
        {"rearrange.u", "", "snapshot of u"},
        {"rearrange.v", "", "snapshot of v (empty: Schwarz rearrangement of u)"},
        {"rearrange.gamma", "2", "exponent of the monotone map in the commutation check"},
        {"run.seed", "0", "random seed"},
        {"run.threads", "", "worker threads (default: NLSYS_THREADS or 1)"},
        {"output.dir", "out", "output directory"},
    };
    return schema;
}

int default_threads() {
    const char* env = std::getenv("NLSYS_THREADS");
    if (!env || !*env) return 1;
    const int n = to_int("NLSYS_THREADS", env);
    if (n < 1) bad("NLSYS_THREADS", "must be at least 1");
    return n;
}

RunConfig resolve(KeyValues values, const Overrides& overrides, bool require_model) {
    const auto& schema = config_schema();
    for (const auto& [key, value] : values) {
        bool known = false;
        for (const auto& info : schema) known = known || key == info.key;
        if (!known) bad(key, "unknown key");
    }
    if (overrides.out) values["output.dir"] = overrides.out->string();
    if (overrides.seed) values["run.seed"] = std::to_string(*overrides.seed);
    if (overrides.threads) values["run.threads"] = std::to_string(*overrides.threads);

    const bool model_given = values.count("model.dim") != 0;
    for (const auto& info : schema) {
        if (values.count(info.key)) continue;
        if (info.fallback) {
            values[info.key] = info.fallback;
        } else if (require_model || model_given) {
            bad(info.key, "mandatory key missing");
        }
    }
    if (values["run.threads"].empty()) values["run.threads"] = std::to_string(default_threads());

    RunConfig cfg;
    auto get = [&](const char* key) -> const std::string& { return values[key]; };
    auto num = [&](const char* key) { return to_double(key, get(key)); };

    if (values.count("model.dim")) {
        cfg.model.dim = to_int("model.dim", get("model.dim"));
        cfg.model.mu1 = num("model.mu1");
        cfg.model.mu2 = num("model.mu2");
        cfg.model.p1 = num("model.p1");
        cfg.model.p2 = num("model.p2");
        cfg.model.r1 = num("model.r1");
        cfg.model.r2 = num("model.r2");
        cfg.model.beta = num("model.beta");
        const std::string& comp = get("model.components");
        if (comp == "both")
            cfg.model.active = Components::both;
        else if (comp == "first_only")
            cfg.model.active = Components::first_only;
        else if (comp == "second_only")
            cfg.model.active = Components::second_only;
        else
            bad("model.components", "expected both, first_only or second_only");
        cfg.model.a1 = num("model.a1");
        cfg.model.a2 = num("model.a2");
        // a zero mass in a two-component model switches that component off
        if (cfg.model.active == Components::both && (cfg.model.a1 == 0.0 || cfg.model.a2 == 0.0))
            cfg.model = cfg.model.with_masses(cfg.model.a1, cfg.model.a2);
        cfg.grid.dim = cfg.model.dim;
        cfg.grid.extent = num("grid.extent");
        cfg.grid.points = to_int("grid.points", get("grid.points"));
        cfg.grid.validate();
    }

    cfg.solver.step = num("solver.step");
    cfg.solver.max_iters = to_int("solver.max_iters", get("solver.max_iters"));
    cfg.solver.tol_residual = num("solver.tol_residual");
    cfg.solver.tol_energy = num("solver.tol_energy");
    cfg.solver.stall_window = to_int("solver.stall_window", get("solver.stall_window"));
    cfg.solver.noise_amplitude = num("solver.noise_amplitude");
    const std::string& init = get("solver.init");
    if (init == "gaussian")
        cfg.solver.init = InitKind::gaussian;
    else if (init == "noise")
        cfg.solver.init = InitKind::noise;
    else if (init == "file")
        cfg.solver.init = InitKind::file;
    else
        bad("solver.init", "expected gaussian, noise or file");
    cfg.start1 = get("solver.start1");
    cfg.start2 = get("solver.start2");
    if (cfg.solver.init == InitKind::file && cfg.start1.empty() && cfg.start2.empty())
        bad("solver.init", "file initialization needs solver.start1 or solver.start2");

    cfg.evolve.dt = num("evolve.dt");
    cfg.evolve.t_final = num("evolve.t_final");
    cfg.evolve.record_every = to_int("evolve.record_every", get("evolve.record_every"));
    cfg.evolve.perturbation_size = num("evolve.perturbation_size");
    cfg.evolve.validate();
    cfg.initial1 = get("evolve.initial1");
    cfg.initial2 = get("evolve.initial2");

    cfg.deltas = to_doubles("stability.deltas", get("stability.deltas"));
    for (double d : cfg.deltas)
        if (!(d >= 0.0)) bad("stability.deltas", "perturbation sizes must be nonnegative");
    cfg.reference1 = get("stability.reference1");
    cfg.reference2 = get("stability.reference2");

    cfg.scan_a1 = to_doubles("scan.a1_values", get("scan.a1_values"));
    cfg.scan_a2 = to_doubles("scan.a2_values", get("scan.a2_values"));
    cfg.strict_margin = num("scan.strict_margin");
    cfg.warm_start = to_bool("scan.warm_start", get("scan.warm_start"));
    cfg.scan_table = get("scan.table");

    for (const auto& item : split_list(get("split.separations")))
        cfg.separations.push_back(to_int("split.separations", item));
    cfg.split_width = num("split.width");
    if (!(cfg.split_width > 0.0)) bad("split.width", "must be positive");

    cfg.rearrange_u = get("rearrange.u");
    cfg.rearrange_v = get("rearrange.v");
    cfg.rearrange_gamma = num("rearrange.gamma");

    cfg.seed = to_seed("run.seed", get("run.seed"));
    cfg.solver.seed = cfg.seed;
    cfg.evolve.seed = cfg.seed;
    cfg.threads = to_int("run.threads", get("run.threads"));
    if (cfg.threads < 1) bad("run.threads", "must be at least 1");
    cfg.out_dir = get("output.dir");
    if (cfg.out_dir.empty()) bad("output.dir", "must not be empty");

    cfg.resolved = std::move(values);
    return cfg;
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const auto& info : config_schema()) {
        const auto it = resolved.find(info.key);
        if (it == resolved.end()) continue;
        out += std::string(info.key) + " = " + it->second + '\n';
    }
    return out;
}

}  // namespace nlsys::cli
