#include "nlsys/cli/commands.hpp"

#include <fstream>
#include <ostream>

#include "nlsys/csv.hpp"
#include "nlsys/error.hpp"
#include "nlsys/evolve.hpp"
#include "nlsys/landscape.hpp"
#include "nlsys/rearrange.hpp"
#include "nlsys/snapshot.hpp"

namespace nlsys::cli {

namespace fs = std::filesystem;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::invalid_field:
        case ErrorKind::domain:
        case ErrorKind::grid_mismatch:
        case ErrorKind::hypothesis_violation:
        case ErrorKind::wraparound:
        case ErrorKind::configuration:
        case ErrorKind::io:
            return exit_usage;
        case ErrorKind::overflow:
        case ErrorKind::division_guard:
        case ErrorKind::capacity:
        case ErrorKind::collapse:
        case ErrorKind::numerical_blowup:
            return exit_numerical;
    }
    return exit_numerical;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

void prepare_output(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + cfg.out_dir.string() + ": " + ec.message());
    write_text(cfg.out_dir / "config.resolved", cfg.to_text());
    write_text(cfg.out_dir / "schema_version", "output_schema_version = " + std::to_string(output_schema_version) + "\n");
}

Field load_field(const std::string& path, const GridSpec& grid, const char* what) {
    if (!fs::exists(path)) throw Error(ErrorKind::io, std::string(what) + " file not found: " + path);
    Field f = read_snapshot(fs::path(path));
    if (!(f.grid() == grid))
        throw Error(ErrorKind::grid_mismatch, std::string(what) + " snapshot grid differs from the configured grid");
    return f;
}

// Components of inactive species may be omitted; an active one needs a file.
Pair load_pair(const RunConfig& cfg, const std::string& p1, const std::string& p2, const char* what) {
    Pair out(cfg.grid);
    const std::string* paths[2] = {&p1, &p2};
    for (int c = 0; c < 2; ++c) {
        if (paths[c]->empty()) {
            if (cfg.model.is_active(c))
                throw Error(ErrorKind::configuration,
                            std::string(what) + " of component " + std::to_string(c + 1) + " not given");
            continue;
        }
        out.component(c) = load_field(*paths[c], cfg.grid, what);
    }
    return out;
}

void save_pair(const fs::path& dir, const std::string& stem, const Pair& p) {
    write_snapshot(dir / (stem + "_u1.nlsf"), p.first);
    write_snapshot(dir / (stem + "_u2.nlsf"), p.second);
}

SolverConfig solver_config(const RunConfig& cfg) {
    SolverConfig s = cfg.solver;
    if (s.init == InitKind::file) s.start = load_pair(cfg, cfg.start1, cfg.start2, "solver start");
    return s;
}

std::string summary_header() { return "energy,lambda1,lambda2,residual,iters,converged"; }

std::string summary_row(const GroundState& gs) {
    return format_double(gs.energy) + ',' + format_double(gs.lambda1) + ',' + format_double(gs.lambda2) + ',' +
           format_double(gs.residual) + ',' + std::to_string(gs.iters) + ',' + format_bool(gs.converged);
}

void log_summary(std::ostream& log, const GroundState& gs) {
    log << "energy=" << format_double(gs.energy) << " lambda1=" << format_double(gs.lambda1)
        << " lambda2=" << format_double(gs.lambda2) << " residual=" << format_double(gs.residual)
        << " iters=" << gs.iters << " converged=" << format_bool(gs.converged) << '\n';
}

GroundState solve_reference(const RunConfig& cfg) {
    cfg.model.validate();
    return solve(cfg.model, cfg.grid, solver_config(cfg));
}

template <class Body>
int guarded(std::ostream& log, Body body) {
    try {
        return body();
    } catch (const Error& e) {
        log << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        prepare_output(cfg);
        const GroundState gs = solve_reference(cfg);
        save_pair(cfg.out_dir, "ground", gs.state);
        write_text(cfg.out_dir / "iterations.csv", gs.history_csv());
        write_text(cfg.out_dir / "summary.csv", summary_header() + '\n' + summary_row(gs) + '\n');
        log_summary(log, gs);
        if (gs.converged && !gs.negative_multipliers(cfg.model)) log << "warning: nonnegative multiplier\n";
        return gs.converged ? exit_ok : exit_numerical;
    });
}

int cmd_scan(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        prepare_output(cfg);
        MassGrid table;
        if (!cfg.scan_table.empty()) {
            std::ifstream in(cfg.scan_table);
            if (!in) throw Error(ErrorKind::io, "mass table not found: " + cfg.scan_table);
            table = MassGrid::from_csv(in, cfg.solver.tol_residual);
        } else {
            table = scan(cfg.model, cfg.grid, cfg.scan_a1, cfg.scan_a2, cfg.solver, {cfg.warm_start, cfg.threads});
        }
        write_text(cfg.out_dir / "mass_table.csv", table.to_csv());

        const auto neg = check_negativity(table);
        const auto sub = check_subadditivity(table, cfg.strict_margin);
        const auto mono = check_monotonicity(table);
        const auto cont = check_continuity(table);
        write_text(cfg.out_dir / "violations.csv", violations_csv(neg, sub, mono, table.tol_solver));

        std::string strict = "a1,a2,b1,b2,lhs,rhs\n";
        for (const auto& c : sub.strict)
            strict += format_double(c.a1) + ',' + format_double(c.a2) + ',' + format_double(c.b1) + ',' +
                      format_double(c.b2) + ',' + format_double(c.lhs) + ',' + format_double(c.rhs) + '\n';
        write_text(cfg.out_dir / "strict_subadditivity.csv", strict);

        std::string continuity = "along,a_lo,a_mid,a_hi,m_lo,m_mid,m_hi,discrepancy\n";
        for (const auto& s : cont.samples)
            continuity += s.along + ',' + format_double(s.a_lo) + ',' + format_double(s.a_mid) + ',' +
                          format_double(s.a_hi) + ',' + format_double(s.m_lo) + ',' + format_double(s.m_mid) + ',' +
                          format_double(s.m_hi) + ',' + format_double(s.discrepancy) + '\n';
        write_text(cfg.out_dir / "continuity.csv", continuity);

        std::string checks = "check,passed,checked,skipped,violations\n";
        checks += "negativity," + format_bool(neg.passed) + ',' + std::to_string(neg.checked) + ',' +
                  std::to_string(neg.skipped) + ',' + std::to_string(neg.violations.size()) + '\n';
        checks += "subadditivity," + format_bool(sub.passed) + ',' + std::to_string(sub.checked) + ',' +
                  std::to_string(sub.skipped) + ',' + std::to_string(sub.violations.size()) + '\n';
        checks += "monotonicity," + format_bool(mono.passed) + ',' +
                  std::to_string(mono.confirmed + mono.inconclusive.size() + mono.violations.size()) + ",0," +
                  std::to_string(mono.violations.size()) + '\n';
        write_text(cfg.out_dir / "checks.csv", checks);

        for (const auto& v : neg.violations)
            log << "violation: negativity at (" << format_double(v.a1) << ", " << format_double(v.a2)
                << ") energy=" << format_double(v.energy) << '\n';
        for (const auto& v : sub.violations)
            log << "violation: subadditivity at a=(" << format_double(v.a1) << ", " << format_double(v.a2) << ") b=("
                << format_double(v.b1) << ", " << format_double(v.b2) << ") " << format_double(v.lhs) << " > "
                << format_double(v.rhs) << '\n';
        for (const auto& v : mono.violations)
            log << "violation: monotonicity from (" << format_double(v.a1_from) << ", " << format_double(v.a2_from)
                << ") to (" << format_double(v.a1_to) << ", " << format_double(v.a2_to) << ") "
                << format_double(v.m_from) << " -> " << format_double(v.m_to) << '\n';
        log << "points=" << table.entries.size() << " strict_splits=" << sub.strict.size() << '/' << sub.nontrivial
            << " continuity_constant=" << format_double(cont.constant) << '\n';
        return neg.passed && sub.passed && mono.passed ? exit_ok : exit_numerical;
    });
}

int cmd_rearrange(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        if (cfg.rearrange_u.empty()) throw Error(ErrorKind::configuration, "rearrange needs --u (or rearrange.u)");
        prepare_output(cfg);
        if (!fs::exists(cfg.rearrange_u)) throw Error(ErrorKind::io, "u file not found: " + cfg.rearrange_u);
        const Field u = read_snapshot(fs::path(cfg.rearrange_u));
        Field v(u.grid());
        if (!cfg.rearrange_v.empty()) {
            if (!fs::exists(cfg.rearrange_v)) throw Error(ErrorKind::io, "v file not found: " + cfg.rearrange_v);
            v = read_snapshot(fs::path(cfg.rearrange_v));
            require_same_grid(u, v);
        }
        const Field out = cfg.rearrange_v.empty() ? schwarz(u) : shibata(u, v);
        write_snapshot(cfg.out_dir / "rearranged.nlsf", out);

        LemmaCheckOptions options;
        options.gamma = cfg.rearrange_gamma;
        const LemmaReport rep = check_lemma_properties(u, v, options);
        write_text(cfg.out_dir / "lemma_report.csv", LemmaReport::csv_header() + '\n' + rep.csv_row() + '\n');
        log << (cfg.rearrange_v.empty() ? "schwarz" : "shibata") << " additivity=" << format_bool(rep.additivity_ok())
            << " monotone=" << format_bool(rep.monotone) << " gradient=" << format_bool(rep.gradient_ok)
            << " hardy_littlewood=" << format_bool(rep.hl_ok) << " resolved=" << format_bool(rep.resolved) << '\n';
        return exit_ok;
    });
}

int cmd_evolve(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        prepare_output(cfg);
        cfg.model.validate();
        Pair initial;
        std::optional<GroundState> reference;
        if (cfg.initial1.empty() && cfg.initial2.empty()) {
            reference = solve_reference(cfg);
            if (!reference->converged) {
                log << "ground state did not converge (residual " << format_double(reference->residual) << ")\n";
                return static_cast<int>(exit_numerical);
            }
            initial = perturb(cfg.model, reference->state, cfg.evolve.perturbation_size, cfg.evolve.seed);
        } else {
            initial = perturb(cfg.model, load_pair(cfg, cfg.initial1, cfg.initial2, "initial state"),
                              cfg.evolve.perturbation_size, cfg.evolve.seed);
        }
        try {
            const EvolveResult result = run(cfg.model, initial, cfg.evolve, reference ? &reference->state : nullptr);
            write_text(cfg.out_dir / "trace.csv", result.trace.to_csv());
            save_pair(cfg.out_dir, "final", result.final_state);
            const auto& e = result.trace.energy;
            log << "steps=" << cfg.evolve.steps() << " max_step_mass_change="
                << format_double(result.trace.max_step_mass_change)
                << " energy_drift=" << format_double(e.back() - e.front()) << '\n';
            return static_cast<int>(exit_ok);
        } catch (const BlowupError& b) {
            save_pair(cfg.out_dir, "last_valid", b.last_valid());
            log << "blowup at t=" << format_double(b.time()) << '\n';
            return static_cast<int>(exit_numerical);
        }
    });
}

int cmd_stability(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        prepare_output(cfg);
        cfg.model.validate();
        if (cfg.deltas.empty()) throw Error(ErrorKind::configuration, "stability.deltas is empty");
        GroundState reference;
        if (!cfg.reference1.empty() || !cfg.reference2.empty()) {
            reference.state = load_pair(cfg, cfg.reference1, cfg.reference2, "reference");
            reference.state = normalize_to_masses(cfg.model, reference.state);
            reference.energy = energy(cfg.model, reference.state).total;
            std::tie(reference.lambda1, reference.lambda2) = multipliers(cfg.model, reference.state);
            reference.residual = residual(cfg.model, reference.state, reference.lambda1, reference.lambda2);
            reference.converged = true;
        } else {
            reference = solve_reference(cfg);
            if (!reference.converged) {
                log << "reference did not converge (residual " << format_double(reference.residual) << ")\n";
                return static_cast<int>(exit_numerical);
            }
        }
        save_pair(cfg.out_dir, "reference", reference.state);

        std::string summary = "index,delta,sup_distance,blowup,blowup_time\n";
        bool any_blowup = false;
        for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
            EvolveConfig ev = cfg.evolve;
            ev.perturbation_size = cfg.deltas[i];
            const StabilityTrace trace = stability_experiment(cfg.model, reference, ev);
            write_text(cfg.out_dir / ("trace_" + std::to_string(i) + ".csv"), trace.to_csv());
            summary += std::to_string(i) + ',' + format_double(cfg.deltas[i]) + ',' +
                       format_double(trace.sup_distance) + ',' + format_bool(trace.blowup) + ',' +
                       format_double(trace.blowup_time) + '\n';
            log << "delta=" << format_double(cfg.deltas[i]) << " sup_distance=" << format_double(trace.sup_distance)
                << (trace.blowup ? " blowup" : "") << '\n';
            any_blowup = any_blowup || trace.blowup;
        }
        write_text(cfg.out_dir / "stability.csv", summary);
        return any_blowup ? exit_numerical : exit_ok;
    });
}

int cmd_splitcheck(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        prepare_output(cfg);
        cfg.model.validate();
        Field g(cfg.grid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto idx = cfg.grid.multi_index(i);
            double r2 = 0.0;
            for (int d = 0; d < cfg.grid.dim; ++d) r2 += cfg.grid.coordinate(idx[d]) * cfg.grid.coordinate(idx[d]);
            g[i] = std::exp(-r2 / (2.0 * cfg.split_width * cfg.split_width));
        }
        const Pair profile = normalize_to_masses(cfg.model, Pair(g, g));
        std::vector<int> separations = cfg.separations;
        if (separations.empty()) separations = {cfg.grid.points / 16, cfg.grid.points / 8, cfg.grid.points / 4};

        std::string csv = SplittingReport::csv_header() + '\n';
        for (int s : separations) {
            const SplittingReport rep = splitting_test(cfg.model, profile, profile, s);
            csv += rep.csv_row() + '\n';
            log << "separation=" << s << " energy_defect=" << format_double(rep.energy_defect)
                << " coupling_defect=" << format_double(rep.coupling_defect) << '\n';
        }
        write_text(cfg.out_dir / "splitting.csv", csv);
        return exit_ok;
    });
}

int cmd_gncert(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        prepare_output(cfg);
        const GroundState gs = solve_reference(cfg);
        const GnCertificate cert = gn_certificate(cfg.model, gs.state);
        write_text(cfg.out_dir / "gn_certificate.csv", GnCertificate::csv_header() + '\n' + cert.csv_row() + '\n');
        log << "q=" << format_double(cert.holder.q) << " exponent_sum=" << format_double(cert.coupling_exponent_sum)
            << " exponents_ok=" << format_bool(cert.exponents_ok) << " holder_ok=" << format_bool(cert.holder_ok)
            << '\n';
        return cert.exponents_ok && cert.holder_ok ? exit_ok : exit_numerical;
    });
}

}  // namespace nlsys::cli
