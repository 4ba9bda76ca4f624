#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "nlsys/landscape.hpp"
#include "nlsys/rearrange.hpp"
#include "nlsys/snapshot.hpp"

using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string output;
};

fs::path scratch_root() { return fs::temp_directory_path() / ("nlsys_cli_test_" + std::to_string(::getpid())); }

struct RemoveScratch {
    ~RemoveScratch() {
        std::error_code ec;
        fs::remove_all(scratch_root(), ec);
    }
} remove_scratch;

fs::path scratch(const std::string& name) {
    const fs::path dir = scratch_root() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

/// Runs the tool with `args`; `env` is prepended to the command line.
Outcome tool(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() / ("nlsys_cli_log_" + std::to_string(::getpid()) + "_" +
                                                       std::to_string(counter++));
    const std::string cmd = "env -u NLSYS_THREADS " + env + " '" NLSYS_TOOL "' " + args + " > '" + log.string() +
                            "' 2>&1";
    const int status = std::system(cmd.c_str());
    Outcome out;
    out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    out.output = slurp(log);
    fs::remove(log);
    return out;
}

const std::string soliton_config =
    "# single soliton\n"
    "model.dim = 1\n"
    "model.components = first_only\n"
    "model.a1 = 1\n"
    "model.a2 = 0\n"
    "grid.extent = 64\n"
    "grid.points = 1024\n";

const std::string benchmark_config =
    "model.dim = 1\n"
    "model.a1 = 1\n"
    "model.a2 = 1\n"
    "grid.extent = 32\n"
    "grid.points = 256\n";

std::string value_of(const std::string& resolved, const std::string& key) {
    std::istringstream in(resolved);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
    return "<missing>";
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(tool("").code == 1);
    CHECK(tool("frobnicate").code == 1);
    const fs::path dir = scratch("usage");
    CHECK(tool("solve --config '" + (dir / "absent.cfg").string() + "'").code == 1);

    spit(dir / "missing.cfg", "model.dim = 1\nmodel.a1 = 1\ngrid.extent = 32\ngrid.points = 256\n");
    const Outcome missing = tool("solve --config '" + (dir / "missing.cfg").string() + "' --out '" +
                                 (dir / "o1").string() + "'");
    CHECK(missing.code == 1);
    CHECK(missing.output.find("model.a2") != std::string::npos);

    spit(dir / "unknown.cfg", benchmark_config + "solver.tolerance = 1e-3\n");
    const Outcome unknown = tool("solve --config '" + (dir / "unknown.cfg").string() + "' --out '" +
                                 (dir / "o2").string() + "'");
    CHECK(unknown.code == 1);
    CHECK(unknown.output.find("solver.tolerance") != std::string::npos);

    spit(dir / "dup.cfg", benchmark_config + "grid.points = 512\n");
    CHECK(tool("solve --config '" + (dir / "dup.cfg").string() + "' --out '" + (dir / "o3").string() + "'").code == 1);
    CHECK(tool("solve --config '" + (dir / "unknown.cfg").string() + "' --threads 0").code == 1);
}

TEST_CASE("solve writes the soliton summary") {
    const fs::path dir = scratch("solve");
    spit(dir / "soliton.cfg", soliton_config);
    const Outcome r = tool("solve --config '" + (dir / "soliton.cfg").string() + "' --out '" + (dir / "out").string() + "'");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("converged=1") != std::string::npos);

    std::istringstream summary(slurp(dir / "out" / "summary.csv"));
    std::string header, row;
    std::getline(summary, header);
    std::getline(summary, row);
    CHECK(header == "energy,lambda1,lambda2,residual,iters,converged");
    const double e = std::stod(row.substr(0, row.find(',')));
    CHECK(std::abs(e + 0.0104167) < 1e-5);

    for (const char* f : {"ground_u1.nlsf", "ground_u2.nlsf", "iterations.csv", "config.resolved", "schema_version"})
        CHECK(fs::exists(dir / "out" / f));
    CHECK(slurp(dir / "out" / "schema_version").find("output_schema_version = ") == 0);
    const std::string resolved = slurp(dir / "out" / "config.resolved");
    CHECK(value_of(resolved, "solver.step") == "0.5");
    CHECK(value_of(resolved, "model.components") == "first_only");

    const nlsys::Field u = nlsys::read_snapshot(dir / "out" / "ground_u1.nlsf");
    CHECK(std::abs(nlsys::mass(u) - 1.0) < 1e-10);
}

TEST_CASE("identical configuration and seed give byte-identical CSV") {
    const fs::path dir = scratch("determinism");
    spit(dir / "noise.cfg", benchmark_config + "solver.init = noise\n");
    const std::string base = "solve --config '" + (dir / "noise.cfg").string() + "' --seed 11 --out ";
    REQUIRE(tool(base + "'" + (dir / "a").string() + "'").code == 0);
    REQUIRE(tool(base + "'" + (dir / "b").string() + "' --threads 3").code == 0);
    CHECK(slurp(dir / "a" / "iterations.csv") == slurp(dir / "b" / "iterations.csv"));
    CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));
    CHECK(slurp(dir / "a" / "ground_u1.nlsf") == slurp(dir / "b" / "ground_u1.nlsf"));

    REQUIRE(tool(base.substr(0, base.find("--seed")) + "--seed 12 --out '" + (dir / "c").string() + "'").code == 0);
    CHECK(slurp(dir / "a" / "iterations.csv") != slurp(dir / "c" / "iterations.csv"));
}

TEST_CASE("thread count precedence") {
    const fs::path dir = scratch("threads");
    spit(dir / "plain.cfg", benchmark_config + "solver.max_iters = 5\n");
    spit(dir / "pinned.cfg", benchmark_config + "solver.max_iters = 5\nrun.threads = 2\n");
    auto threads = [&](const std::string& cfg, const std::string& flag, const std::string& env) {
        const fs::path out = dir / "o";
        fs::remove_all(out);
        tool("solve --config '" + (dir / cfg).string() + "' --out '" + out.string() + "' " + flag, env);
        return value_of(slurp(out / "config.resolved"), "run.threads");
    };
    CHECK(threads("plain.cfg", "", "") == "1");
    CHECK(threads("plain.cfg", "", "NLSYS_THREADS=5") == "5");
    CHECK(threads("pinned.cfg", "", "NLSYS_THREADS=5") == "2");
    CHECK(threads("pinned.cfg", "--threads 7", "NLSYS_THREADS=5") == "7");
    CHECK(threads("plain.cfg", "--threads 3", "") == "3");
    CHECK(tool("solve --config '" + (dir / "plain.cfg").string() + "' --out '" + (dir / "bad").string() + "'",
               "NLSYS_THREADS=zero")
              .code == 1);
}

TEST_CASE("non-convergence exits with 2") {
    const fs::path dir = scratch("capped");
    spit(dir / "capped.cfg", benchmark_config + "solver.max_iters = 3\n");
    const Outcome r = tool("solve --config '" + (dir / "capped.cfg").string() + "' --out '" + (dir / "o").string() + "'");
    CHECK(r.code == 2);
    CHECK(r.output.find("converged=0") != std::string::npos);
}

TEST_CASE("scan and fault injection") {
    const fs::path dir = scratch("scan");
    spit(dir / "scan.cfg", benchmark_config + "scan.a1_values = 0,0.5,1\nscan.a2_values = 0,0.5,1\n");
    const Outcome ok = tool("scan --config '" + (dir / "scan.cfg").string() + "' --out '" + (dir / "o").string() +
                            "' --threads 3");
    REQUIRE(ok.code == 0);
    for (const char* f : {"mass_table.csv", "violations.csv", "strict_subadditivity.csv", "continuity.csv", "checks.csv"})
        CHECK(fs::exists(dir / "o" / f));
    const std::string table = slurp(dir / "o" / "mass_table.csv");
    CHECK(table.rfind("a1,a2,energy,lambda1,lambda2,residual,converged\n", 0) == 0);
    CHECK(slurp(dir / "o" / "violations.csv") == "kind,a1,a2,b1,b2,value,bound\n");

    // raise m(1, 1) above zero and re-check the stored table
    std::istringstream in(table);
    nlsys::MassGrid grid = nlsys::MassGrid::from_csv(in, 1e-8);
    grid.at(2, 2).energy = 0.25;
    spit(dir / "corrupt.csv", grid.to_csv());
    spit(dir / "recheck.cfg", benchmark_config + "scan.a1_values = 0,0.5,1\nscan.a2_values = 0,0.5,1\nscan.table = " +
                                  (dir / "corrupt.csv").string() + "\n");
    const Outcome bad = tool("scan --config '" + (dir / "recheck.cfg").string() + "' --out '" + (dir / "o2").string() + "'");
    CHECK(bad.code == 2);
    CHECK(bad.output.find("violation: negativity") != std::string::npos);
    CHECK(bad.output.find("violation: subadditivity") != std::string::npos);
    CHECK(slurp(dir / "o2" / "violations.csv").find("negativity,1,1") != std::string::npos);

    spit(dir / "broken.csv", "a1,a2,energy,lambda1,lambda2,residual,converged\n0,0,zero,0,0,0,1\n");
    spit(dir / "broken.cfg", benchmark_config + "scan.table = " + (dir / "broken.csv").string() + "\n");
    const Outcome broken = tool("scan --config '" + (dir / "broken.cfg").string() + "' --out '" + (dir / "o3").string() + "'");
    CHECK(broken.code == 1);
    CHECK(broken.output.find("line 2") != std::string::npos);
}

TEST_CASE("single-row scan follows the cubic law") {
    const fs::path dir = scratch("row");
    spit(dir / "row.cfg", "model.dim = 1\nmodel.a1 = 1\nmodel.a2 = 1\ngrid.extent = 128\ngrid.points = 2048\n"
                          "scan.a1_values = 0,0.5,1\nscan.a2_values = 0\n");
    REQUIRE(tool("scan --config '" + (dir / "row.cfg").string() + "' --out '" + (dir / "o").string() + "'").code == 0);
    std::ifstream in(dir / "o" / "mass_table.csv");
    const nlsys::MassGrid t = nlsys::MassGrid::from_csv(in, 1e-8);
    for (std::size_t i = 1; i < t.a1_values.size(); ++i) {
        const double a = t.a1_values[i];
        CHECK(rel(t.at(i, 0).energy, -a * a * a / 96) < 1e-4);
    }
}

TEST_CASE("rearrange") {
    const fs::path dir = scratch("rearrange");
    const GridSpec g = grid1(32, 256);
    std::mt19937_64 rng(3);
    Field u = random_noise(g, rng, true), v = random_noise(g, rng, true);
    for (std::size_t i = 0; i < g.size(); i += 2) u[i] = 0.0;
    for (std::size_t i = 1; i < g.size(); i += 2) v[i] = 0.0;
    nlsys::write_snapshot(dir / "u.nlsf", u);
    nlsys::write_snapshot(dir / "v.nlsf", v);
    nlsys::write_snapshot(dir / "small.nlsf", Field(grid1(32, 128)));
    nlsys::write_snapshot(dir / "full.nlsf", random_noise(g, rng, true));

    const Outcome pair = tool("rearrange --u '" + (dir / "u.nlsf").string() + "' --v '" + (dir / "v.nlsf").string() +
                              "' --out '" + (dir / "o").string() + "'");
    REQUIRE(pair.code == 0);
    CHECK(pair.output.find("additivity=1") != std::string::npos);
    const std::string report = slurp(dir / "o" / "lemma_report.csv");
    CHECK(report.rfind("resolved,truncated_fraction,monotone,", 0) == 0);
    const Field s = nlsys::read_snapshot(dir / "o" / "rearranged.nlsf");
    CHECK(rel(nlsys::lp_integral(s, 2.0), nlsys::lp_integral(u, 2.0) + nlsys::lp_integral(v, 2.0)) < 1e-13);

    const Outcome schwarz = tool("rearrange --u '" + (dir / "u.nlsf").string() + "' --out '" + (dir / "s").string() + "'");
    REQUIRE(schwarz.code == 0);
    CHECK(schwarz.output.find("schwarz") != std::string::npos);
    const Field expected = nlsys::schwarz(u);
    const Field got = nlsys::read_snapshot(dir / "s" / "rearranged.nlsf");
    bool same = true;
    for (std::size_t i = 0; i < g.size(); ++i) same = same && got[i] == expected[i];
    CHECK(same);

    CHECK(tool("rearrange --u '" + (dir / "u.nlsf").string() + "' --v '" + (dir / "small.nlsf").string() +
               "' --out '" + (dir / "m").string() + "'")
              .code == 1);
    CHECK(tool("rearrange --u '" + (dir / "full.nlsf").string() + "' --v '" + (dir / "full.nlsf").string() +
               "' --out '" + (dir / "c").string() + "'")
              .code == 2);
    CHECK(tool("rearrange --out '" + (dir / "n").string() + "'").code == 1);
}

TEST_CASE("stability sweep") {
    const fs::path dir = scratch("stability");
    spit(dir / "stab.cfg", benchmark_config + "evolve.dt = 1e-3\nevolve.t_final = 1\nevolve.record_every = 100\n"
                                              "stability.deltas = 0,1e-2\n");
    const Outcome r = tool("stability --config '" + (dir / "stab.cfg").string() + "' --out '" + (dir / "o").string() + "'");
    REQUIRE(r.code == 0);
    for (const char* f : {"trace_0.csv", "trace_1.csv", "stability.csv", "reference_u1.nlsf", "reference_u2.nlsf"})
        CHECK(fs::exists(dir / "o" / f));
    CHECK(slurp(dir / "o" / "trace_0.csv").rfind("t,mass1,mass2,energy,orbit_distance\n", 0) == 0);

    std::istringstream summary(slurp(dir / "o" / "stability.csv"));
    std::string line;
    std::getline(summary, line);
    CHECK(line == "index,delta,sup_distance,blowup,blowup_time");
    std::getline(summary, line);
    const double sup0 = std::stod(line.substr(line.find(',', line.find(',') + 1) + 1));
    CHECK(sup0 <= 1e-5);

    // reloading the written reference
    spit(dir / "reload.cfg", benchmark_config + "evolve.dt = 1e-2\nevolve.t_final = 0.1\nstability.deltas = 0\n"
                                                "stability.reference1 = " + (dir / "o" / "reference_u1.nlsf").string() +
                                                "\nstability.reference2 = " +
                                                (dir / "o" / "reference_u2.nlsf").string() + "\n");
    CHECK(tool("stability --config '" + (dir / "reload.cfg").string() + "' --out '" + (dir / "o2").string() + "'").code == 0);

    spit(dir / "missing.cfg", benchmark_config + "stability.reference1 = " + (dir / "nope.nlsf").string() +
                                  "\nstability.reference2 = " + (dir / "nope.nlsf").string() + "\n");
    const Outcome missing =
        tool("stability --config '" + (dir / "missing.cfg").string() + "' --out '" + (dir / "o3").string() + "'");
    CHECK(missing.code == 1);
    CHECK(missing.output.find("not found") != std::string::npos);
}

TEST_CASE("evolve, splitcheck and gncert") {
    const fs::path dir = scratch("misc");
    spit(dir / "ev.cfg", benchmark_config + "evolve.dt = 1e-2\nevolve.t_final = 0.5\nevolve.perturbation_size = 1e-2\n");
    REQUIRE(tool("evolve --config '" + (dir / "ev.cfg").string() + "' --out '" + (dir / "e").string() + "'").code == 0);
    CHECK(fs::exists(dir / "e" / "trace.csv"));
    CHECK(fs::exists(dir / "e" / "final_u2.nlsf"));

    spit(dir / "split.cfg", "model.dim = 1\nmodel.a1 = 1\nmodel.a2 = 1\ngrid.extent = 64\ngrid.points = 1024\n");
    const Outcome split = tool("splitcheck --config '" + (dir / "split.cfg").string() + "' --out '" + (dir / "s").string() + "'");
    REQUIRE(split.code == 0);
    CHECK(std::count(split.output.begin(), split.output.end(), '\n') == 3);

    const Outcome cert = tool("gncert --config '" + (dir / "ev.cfg").string() + "' --out '" + (dir / "g").string() + "'");
    CHECK(cert.code == 0);
    CHECK(fs::exists(dir / "g" / "gn_certificate.csv"));
}
