#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nlsys/grid.hpp"
#include "nlsys/minimizer.hpp"
#include "nlsys/model.hpp"

namespace nlsys {

struct MassPoint {
    double a1 = 0.0;
    double a2 = 0.0;
    double energy = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double residual = 0.0;
    bool converged = false;
};

/// Table of ground-state energies m(a1, a2) over a product grid of masses.
/// Entries are row-major: index (i1, i2) -> i1 * a2_values.size() + i2.
struct MassGrid {
    std::vector<double> a1_values;
    std::vector<double> a2_values;
    std::vector<MassPoint> entries;
    /// Per-entry energy accuracy; checks inflate inequalities by 2 * tol_solver.
    double tol_solver = 1e-8;

    const MassPoint& at(std::size_t i1, std::size_t i2) const { return entries.at(i1 * a2_values.size() + i2); }
    MassPoint& at(std::size_t i1, std::size_t i2) { return entries.at(i1 * a2_values.size() + i2); }

    static std::string csv_header();
    std::string to_csv() const;
    /// Parses a table written by to_csv(); the mass lists are recovered from the rows.
    static MassGrid from_csv(std::istream& in, double tol_solver);
};

struct ScanOptions {
    bool warm_start = true;
    int threads = 1;
};

/// Solves every mass point. Rows (fixed a1) run concurrently; within a row
/// each point is warm-started from its predecessor when enabled, with a cold
/// retry if the warm start does not converge. m(0,0) = 0.
MassGrid scan(const ModelParams& base, const GridSpec& grid, std::span<const double> a1_values,
              std::span<const double> a2_values, const SolverConfig& cfg, const ScanOptions& options = {});

struct NegativityReport {
    bool passed = true;
    int checked = 0;
    int skipped = 0;
    std::vector<MassPoint> violations;
};

NegativityReport check_negativity(const MassGrid& table);

struct SubadditivityCase {
    double a1 = 0, a2 = 0, b1 = 0, b2 = 0;
    double lhs = 0;  ///< m(a1, a2)
    double rhs = 0;  ///< m(b1, b2) + m(a1 - b1, a2 - b2)
};

struct SubadditivityReport {
    bool passed = true;
    int checked = 0;
    int skipped = 0;
    std::vector<SubadditivityCase> violations;
    /// Nontrivial splits where rhs - lhs exceeds the strict margin (evidence only).
    std::vector<SubadditivityCase> strict;
    int nontrivial = 0;
};

/// Weak subadditivity over every quadruple b <= a of the grid. Throws
/// configuration unless each mass list contains 0 and is closed under differences.
SubadditivityReport check_subadditivity(const MassGrid& table, double strict_margin);

struct MonotoneStep {
    double a1_from = 0, a2_from = 0, a1_to = 0, a2_to = 0;
    double m_from = 0, m_to = 0;
};

struct MonotonicityReport {
    bool passed = true;
    int confirmed = 0;
    std::vector<MonotoneStep> inconclusive;
    std::vector<MonotoneStep> violations;
};

MonotonicityReport check_monotonicity(const MassGrid& table);

struct ContinuitySample {
    std::string along;  ///< "a1", "a2" or "diagonal"
    double a_lo = 0, a_mid = 0, a_hi = 0;
    double m_lo = 0, m_mid = 0, m_hi = 0;
    double discrepancy = 0;
};

struct ContinuityReport {
    std::vector<ContinuitySample> samples;
    double constant = 0.0;  ///< max discrepancy / spacing
};

/// |m_mid - linear interpolation between (a_lo, m_lo) and (a_hi, m_hi)|.
double interpolation_defect(double a_lo, double m_lo, double a_mid, double m_mid, double a_hi, double m_hi);

ContinuityReport check_continuity(const MassGrid& table);

/// CSV of every failing check: kind,a1,a2,b1,b2,value,bound.
std::string violations_csv(const NegativityReport& neg, const SubadditivityReport& sub,
                           const MonotonicityReport& mono, double tol_solver);

}  // namespace nlsys
