#include "nlsys/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <sstream>

#include "nlsys/csv.hpp"
#include "nlsys/error.hpp"
#include "parallel.hpp"

namespace nlsys {

std::string MassGrid::csv_header() { return "a1,a2,energy,lambda1,lambda2,residual,converged"; }

std::string MassGrid::to_csv() const {
    std::string out = csv_header() + '\n';
    for (const auto& e : entries) {
        out += format_double(e.a1) + ',' + format_double(e.a2) + ',' + format_double(e.energy) + ',' +
               format_double(e.lambda1) + ',' + format_double(e.lambda2) + ',' + format_double(e.residual) + ',' +
               format_bool(e.converged) + '\n';
    }
    return out;
}

MassGrid MassGrid::from_csv(std::istream& in, double tol_solver) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header())
        throw Error(ErrorKind::io, "mass table header does not match '" + csv_header() + "'");
    MassGrid table;
    table.tol_solver = tol_solver;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) throw Error(ErrorKind::io, "mass table line " + std::to_string(line_no) + " malformed");
        MassPoint p;
        try {
            p.a1 = std::stod(cells[0]);
            p.a2 = std::stod(cells[1]);
            p.energy = std::stod(cells[2]);
            p.lambda1 = std::stod(cells[3]);
            p.lambda2 = std::stod(cells[4]);
            p.residual = std::stod(cells[5]);
            p.converged = cells[6] == "1";
        } catch (const std::exception&) {
            throw Error(ErrorKind::io, "mass table line " + std::to_string(line_no) + " has a bad number");
        }
        table.entries.push_back(p);
    }
    for (const auto& e : table.entries) {
        if (std::find(table.a1_values.begin(), table.a1_values.end(), e.a1) == table.a1_values.end())
            table.a1_values.push_back(e.a1);
        if (std::find(table.a2_values.begin(), table.a2_values.end(), e.a2) == table.a2_values.end())
            table.a2_values.push_back(e.a2);
    }
    std::sort(table.a1_values.begin(), table.a1_values.end());
    std::sort(table.a2_values.begin(), table.a2_values.end());
    if (table.entries.size() != table.a1_values.size() * table.a2_values.size())
        throw Error(ErrorKind::io, "mass table is not a complete product grid");
    std::vector<MassPoint> ordered(table.entries.size());
    for (const auto& e : table.entries) {
        const auto i1 = std::find(table.a1_values.begin(), table.a1_values.end(), e.a1) - table.a1_values.begin();
        const auto i2 = std::find(table.a2_values.begin(), table.a2_values.end(), e.a2) - table.a2_values.begin();
        ordered[static_cast<std::size_t>(i1) * table.a2_values.size() + static_cast<std::size_t>(i2)] = e;
    }
    table.entries = std::move(ordered);
    return table;
}

namespace {

void require_mass_list(std::span<const double> values, const char* name) {
    if (values.empty()) throw Error(ErrorKind::configuration, std::string(name) + " mass list is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
            throw Error(ErrorKind::configuration, std::string(name) + " masses must be finite and nonnegative");
        if (i > 0 && !(values[i] > values[i - 1]))
            throw Error(ErrorKind::configuration, std::string(name) + " masses must be strictly ascending");
    }
}

}  // namespace

MassGrid scan(const ModelParams& base, const GridSpec& grid, std::span<const double> a1_values,
              std::span<const double> a2_values, const SolverConfig& cfg, const ScanOptions& options) {
    base.validate_hypotheses();
    require_mass_list(a1_values, "a1");
    require_mass_list(a2_values, "a2");
    cfg.validate();

    MassGrid table;
    table.a1_values.assign(a1_values.begin(), a1_values.end());
    table.a2_values.assign(a2_values.begin(), a2_values.end());
    table.entries.resize(a1_values.size() * a2_values.size());
    table.tol_solver = cfg.tol_residual;

    // Gaussian profile used for components that have no predecessor state.
    SolverConfig gaussian_cfg = cfg;
    gaussian_cfg.init = InitKind::gaussian;
    gaussian_cfg.start.reset();
    const Pair fresh = initial_state(base.with_masses(1.0, 1.0), grid, gaussian_cfg);

    detail::parallel_for(a1_values.size(), options.threads, [&](std::size_t i1) {
        std::optional<Pair> previous;
        for (std::size_t i2 = 0; i2 < a2_values.size(); ++i2) {
            MassPoint& point = table.entries[i1 * a2_values.size() + i2];
            point.a1 = a1_values[i1];
            point.a2 = a2_values[i2];
            if (point.a1 == 0.0 && point.a2 == 0.0) {
                point.converged = true;
                continue;
            }
            const ModelParams params = base.with_masses(point.a1, point.a2);
            SolverConfig local = cfg;
            const bool warm = options.warm_start && previous;
            if (warm) {
                Pair start = *previous;
                for (int c = 0; c < 2; ++c)
                    if (params.is_active(c) && start.component(c).is_zero()) start.component(c) = fresh.component(c);
                local.init = InitKind::file;
                local.start = std::move(start);
            } else if (local.init == InitKind::file) {
                local.init = InitKind::gaussian;
                local.start.reset();
            }
            GroundState gs = solve(params, grid, local);
            // a warm start can sit on a translation-invariant critical point
            // (e.g. the constant state); fall back to a cold start
            if (warm && !gs.converged) {
                local.init = cfg.init == InitKind::file ? InitKind::gaussian : cfg.init;
                local.start.reset();
                GroundState cold = solve(params, grid, local);
                if (cold.converged || cold.energy < gs.energy) gs = std::move(cold);
            }
            point.energy = gs.energy;
            point.lambda1 = gs.lambda1;
            point.lambda2 = gs.lambda2;
            point.residual = gs.residual;
            point.converged = gs.converged;
            previous = gs.state;
        }
    });
    return table;
}

NegativityReport check_negativity(const MassGrid& table) {
    NegativityReport rep;
    for (const auto& e : table.entries) {
        if (e.a1 + e.a2 == 0.0) continue;
        if (!e.converged) {
            ++rep.skipped;
            continue;
        }
        ++rep.checked;
        if (!(e.energy < -1e-10)) rep.violations.push_back(e);
    }
    rep.passed = rep.violations.empty();
    return rep;
}

namespace {

std::optional<std::size_t> find_mass(const std::vector<double>& values, double a) {
    const double scale = values.empty() ? 1.0 : std::max(1.0, values.back());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::abs(values[i] - a) <= 1e-9 * scale) return i;
    return std::nullopt;
}

void require_difference_closed(const std::vector<double>& values, const char* name) {
    if (!find_mass(values, 0.0))
        throw Error(ErrorKind::configuration, std::string(name) + " mass list must contain 0");
    for (double a : values)
        for (double b : values)
            if (b <= a && !find_mass(values, a - b))
                throw Error(ErrorKind::configuration,
                            std::string(name) + " mass list is not closed under differences");
}

}  // namespace

SubadditivityReport check_subadditivity(const MassGrid& table, double strict_margin) {
    require_difference_closed(table.a1_values, "a1");
    require_difference_closed(table.a2_values, "a2");
    const double slack = 2.0 * table.tol_solver;

    SubadditivityReport rep;
    const auto& A1 = table.a1_values;
    const auto& A2 = table.a2_values;
    for (std::size_t i1 = 0; i1 < A1.size(); ++i1) {
        for (std::size_t i2 = 0; i2 < A2.size(); ++i2) {
            const MassPoint& whole = table.at(i1, i2);
            for (std::size_t j1 = 0; j1 <= i1; ++j1) {
                for (std::size_t j2 = 0; j2 <= i2; ++j2) {
                    const auto k1 = find_mass(A1, A1[i1] - A1[j1]);
                    const auto k2 = find_mass(A2, A2[i2] - A2[j2]);
                    const MassPoint& part = table.at(j1, j2);
                    const MassPoint& rest = table.at(*k1, *k2);
                    if (!whole.converged || !part.converged || !rest.converged) {
                        ++rep.skipped;
                        continue;
                    }
                    ++rep.checked;
                    const SubadditivityCase c{A1[i1], A2[i2], A1[j1], A2[j2], whole.energy,
                                              part.energy + rest.energy};
                    if (c.lhs > c.rhs + slack) rep.violations.push_back(c);
                    const bool trivial = (j1 == 0 && j2 == 0) || (j1 == i1 && j2 == i2);
                    if (!trivial) {
                        ++rep.nontrivial;
                        if (c.rhs - c.lhs > strict_margin) rep.strict.push_back(c);
                    }
                }
            }
        }
    }
    rep.passed = rep.violations.empty();
    return rep;
}

MonotonicityReport check_monotonicity(const MassGrid& table) {
    MonotonicityReport rep;
    const double slack = 2.0 * table.tol_solver;
    auto step = [&](const MassPoint& from, const MassPoint& to) {
        if (!from.converged || !to.converged) return;
        const MonotoneStep s{from.a1, from.a2, to.a1, to.a2, from.energy, to.energy};
        if (to.energy > from.energy + slack)
            rep.violations.push_back(s);
        else if (from.energy - to.energy > slack)
            ++rep.confirmed;
        else
            rep.inconclusive.push_back(s);
    };
    for (std::size_t i1 = 0; i1 < table.a1_values.size(); ++i1)
        for (std::size_t i2 = 0; i2 + 1 < table.a2_values.size(); ++i2) step(table.at(i1, i2), table.at(i1, i2 + 1));
    for (std::size_t i2 = 0; i2 < table.a2_values.size(); ++i2)
        for (std::size_t i1 = 0; i1 + 1 < table.a1_values.size(); ++i1) step(table.at(i1, i2), table.at(i1 + 1, i2));
    rep.passed = rep.violations.empty();
    return rep;
}

double interpolation_defect(double a_lo, double m_lo, double a_mid, double m_mid, double a_hi, double m_hi) {
    if (a_hi == a_lo) return std::abs(m_mid - m_lo);
    const double interp = m_lo + (m_hi - m_lo) * (a_mid - a_lo) / (a_hi - a_lo);
    return std::abs(m_mid - interp);
}

ContinuityReport check_continuity(const MassGrid& table) {
    ContinuityReport rep;
    auto sample = [&](const char* along, double lo, double mid, double hi, const MassPoint& p_lo,
                      const MassPoint& p_mid, const MassPoint& p_hi) {
        if (!p_lo.converged || !p_mid.converged || !p_hi.converged) return;
        ContinuitySample s{along, lo, mid, hi, p_lo.energy, p_mid.energy, p_hi.energy,
                           interpolation_defect(lo, p_lo.energy, mid, p_mid.energy, hi, p_hi.energy)};
        const double spacing = hi - lo;
        if (spacing > 0.0) rep.constant = std::max(rep.constant, s.discrepancy / spacing);
        rep.samples.push_back(std::move(s));
    };
    const auto& A1 = table.a1_values;
    const auto& A2 = table.a2_values;
    for (std::size_t i1 = 0; i1 < A1.size(); ++i1)
        for (std::size_t i2 = 1; i2 + 1 < A2.size(); ++i2)
            sample("a2", A2[i2 - 1], A2[i2], A2[i2 + 1], table.at(i1, i2 - 1), table.at(i1, i2),
                   table.at(i1, i2 + 1));
    for (std::size_t i2 = 0; i2 < A2.size(); ++i2)
        for (std::size_t i1 = 1; i1 + 1 < A1.size(); ++i1)
            sample("a1", A1[i1 - 1], A1[i1], A1[i1 + 1], table.at(i1 - 1, i2), table.at(i1, i2),
                   table.at(i1 + 1, i2));
    if (A1 == A2) {
        for (std::size_t i = 1; i + 1 < A1.size(); ++i)
            sample("diagonal", A1[i - 1], A1[i], A1[i + 1], table.at(i - 1, i - 1), table.at(i, i),
                   table.at(i + 1, i + 1));
    }
    return rep;
}

std::string violations_csv(const NegativityReport& neg, const SubadditivityReport& sub,
                           const MonotonicityReport& mono, double tol_solver) {
    std::string out = "kind,a1,a2,b1,b2,value,bound\n";
    auto row = [&](const char* kind, double a1, double a2, double b1, double b2, double value, double bound) {
        out += std::string(kind) + ',' + format_double(a1) + ',' + format_double(a2) + ',' + format_double(b1) + ',' +
               format_double(b2) + ',' + format_double(value) + ',' + format_double(bound) + '\n';
    };
    for (const auto& v : neg.violations) row("negativity", v.a1, v.a2, 0.0, 0.0, v.energy, -1e-10);
    for (const auto& v : sub.violations)
        row("subadditivity", v.a1, v.a2, v.b1, v.b2, v.lhs, v.rhs + 2.0 * tol_solver);
    for (const auto& v : mono.violations)
        row("monotonicity", v.a1_to, v.a2_to, v.a1_from, v.a2_from, v.m_to, v.m_from + 2.0 * tol_solver);
    return out;
}

}  // namespace nlsys
