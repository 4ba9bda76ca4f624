#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nlsys/grid.hpp"

namespace nlsys {

/// Cells ordered by distance of the lattice point from the origin, ties broken
/// by flat index. Plays the role of the centred balls in the continuum
/// construction: the first m cells are the discrete ball of volume m h^N.
struct RearrangeOrder {
    GridSpec grid;
    std::vector<std::size_t> cell_ranking;
    std::vector<long long> distance_sq;  ///< squared lattice distance, aligned with cell_ranking

    static RearrangeOrder build(const GridSpec& grid);
};

/// Shared, lazily built order for a grid.
const RearrangeOrder& rearrange_order(const GridSpec& grid);

/// Symmetric-decreasing rearrangement of |u|.
Field schwarz(const Field& u);

enum class Overflow {
    error,     ///< throw capacity
    truncate,  ///< drop the smallest values that do not fit
};

/// Two-function rearrangement {u, v}*: the merged multiset of |u| and |v|
/// values sorted descending and laid out along the cell ranking, so that the
/// count of cells above any threshold t equals #{|u| > t} + #{|v| > t}.
/// By default throws capacity when the combined nonzero support exceeds the grid.
Field shibata(const Field& u, const Field& v, Overflow overflow = Overflow::error);

struct LemmaCheckOptions {
    double gamma = 2.0;            ///< Phi(s) = s^gamma for the commutation check
    double gradient_slack = 1e-2;  ///< relative slack in the gradient inequality
    double hl_slack = 1e-10;       ///< relative slack in the paired Hardy-Littlewood inequality
    std::vector<double> exponents{2.0, 3.0, 4.0};
    /// Second pair (u2, v2) for the paired Hardy-Littlewood check; when
    /// absent the check uses u1 = u, v1 = v, u2 = v, v2 = u.
    std::optional<std::pair<Field, Field>> partner;
};

struct LemmaReport {
    bool resolved = true;                 ///< spectral tail below 1e-8 (warning only)
    /// Share of sum |u|^2 + |v|^2 that did not fit into the box. The checks
    /// run on the truncated rearrangement; nonzero values are reported, not fatal.
    double truncated_fraction = 0.0;
    bool monotone = false;                ///< (i) output non-increasing along the ranking
    double commutation_defect = 0.0;      ///< (ii) max |{Phi u, Phi v}* - Phi({u,v}*)|
    std::vector<double> exponents;        ///< (iii) exponents checked
    std::vector<double> additivity_error; ///< (iii) relative error per exponent
    double gradient_lhs = 0.0;            ///< (iv) ||grad {u,v}*||^2
    double gradient_rhs = 0.0;            ///< (iv) ||grad u||^2 + ||grad v||^2
    double gradient_margin = 0.0;         ///< (iv) (rhs - lhs) / rhs
    bool gradient_ok = false;
    double hl_lhs = 0.0;                  ///< (v) int u1 u2 + v1 v2
    double hl_rhs = 0.0;                  ///< (v) int {u1,v1}* {u2,v2}*
    bool hl_ok = false;

    bool additivity_ok(double tolerance = 1e-13) const;
    bool passed(double additivity_tolerance = 1e-13) const;

    static std::string csv_header();
    std::string csv_row() const;
};

/// Discrete analogues of the rearrangement lemma on (u, v).
LemmaReport check_lemma_properties(const Field& u, const Field& v, const LemmaCheckOptions& options = {});

/// Fraction of spectral power in modes with some |m| > n/4.
double spectral_tail_fraction(const Field& f);

}  // namespace nlsys
