#include "nlsys/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <tuple>

#include "nlsys/csv.hpp"
#include "nlsys/error.hpp"
#include "reduce.hpp"

namespace nlsys {

RearrangeOrder RearrangeOrder::build(const GridSpec& grid) {
    grid.validate();
    RearrangeOrder order;
    order.grid = grid;
    const std::size_t n = grid.size();
    std::vector<long long> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = grid.multi_index(i);
        long long d2 = 0;
        for (int d = 0; d < grid.dim; ++d) {
            const long long off = idx[d] - grid.points / 2;
            d2 += off * off;
        }
        dist[i] = d2;
    }
    order.cell_ranking.resize(n);
    std::iota(order.cell_ranking.begin(), order.cell_ranking.end(), std::size_t{0});
    std::sort(order.cell_ranking.begin(), order.cell_ranking.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(dist[a], a) < std::tie(dist[b], b);
    });
    order.distance_sq.resize(n);
    for (std::size_t k = 0; k < n; ++k) order.distance_sq[k] = dist[order.cell_ranking[k]];
    return order;
}

const RearrangeOrder& rearrange_order(const GridSpec& grid) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<RearrangeOrder>> cache;
    std::lock_guard lock(mutex);
    // The ranking only depends on the lattice, not on the extent.
    auto& slot = cache[{grid.dim, grid.points}];
    if (!slot) slot = std::make_unique<RearrangeOrder>(RearrangeOrder::build(grid));
    return *slot;
}

namespace {

// Sorts the moduli descending and lays them along the ranking. Values that
// do not fit are dropped under Overflow::truncate; `dropped` receives their
// share of sum |.|^2.
Field lay_out(const GridSpec& grid, std::vector<double> values, Overflow overflow, double* dropped = nullptr) {
    const std::size_t cells = grid.size();
    const auto nonzero = static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                                [](double x) { return x != 0.0; }));
    if (nonzero > cells && overflow == Overflow::error)
        throw Error(ErrorKind::capacity, "combined support of " + std::to_string(nonzero) +
                                             " cells exceeds the grid of " + std::to_string(cells) + " cells");
    std::sort(values.begin(), values.end(), std::greater<>());
    if (dropped) {
        double lost = 0.0;
        double total = 0.0;
        for (std::size_t k = values.size(); k-- > 0;) {
            const double w = values[k] * values[k];
            total += w;
            if (k >= cells) lost += w;
        }
        *dropped = total > 0.0 ? lost / total : 0.0;
    }
    const auto& ranking = rearrange_order(grid).cell_ranking;
    Field out(grid);
    for (std::size_t k = 0; k < cells && k < values.size(); ++k) out[ranking[k]] = values[k];
    return out;
}

void append_moduli(std::vector<double>& dst, const Field& f) {
    for (const auto& z : f.values()) dst.push_back(std::abs(z));
}

Field modulus_power(const Field& f, double gamma) {
    Field out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::pow(std::abs(f[i]), gamma);
    return out;
}

double product_integral(const Field& a, const Field& b) {
    return detail::pairwise_reduce(a.size(), [&](std::size_t i) { return std::abs(a[i]) * std::abs(b[i]); }) *
           a.grid().cell_volume();
}

}  // namespace

Field schwarz(const Field& u) {
    if (!u.all_finite()) throw Error(ErrorKind::invalid_field, "field contains NaN or Inf");
    std::vector<double> values;
    values.reserve(u.size());
    append_moduli(values, u);
    return lay_out(u.grid(), std::move(values), Overflow::error);
}

namespace {

Field merge(const Field& u, const Field& v, Overflow overflow, double* dropped = nullptr) {
    require_same_grid(u, v);
    if (!u.all_finite() || !v.all_finite()) throw Error(ErrorKind::invalid_field, "field contains NaN or Inf");
    std::vector<double> values;
    values.reserve(u.size() + v.size());
    append_moduli(values, u);
    append_moduli(values, v);
    return lay_out(u.grid(), std::move(values), overflow, dropped);
}

}  // namespace

Field shibata(const Field& u, const Field& v, Overflow overflow) { return merge(u, v, overflow); }

double spectral_tail_fraction(const Field& f) {
    const auto spec = forward_transform(f);
    const auto& g = f.grid();
    double tail = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto idx = g.multi_index(i);
        bool high = false;
        for (int d = 0; d < g.dim; ++d) {
            const int m = idx[d] < g.points / 2 ? idx[d] : idx[d] - g.points;
            high = high || std::abs(m) > g.points / 4;
        }
        const double w = std::norm(spec[i]);
        total += w;
        if (high) tail += w;
    }
    return total > 0.0 ? tail / total : 0.0;
}

bool LemmaReport::additivity_ok(double tolerance) const {
    return std::all_of(additivity_error.begin(), additivity_error.end(),
                       [&](double e) { return e <= tolerance; });
}

bool LemmaReport::passed(double additivity_tolerance) const {
    return monotone && commutation_defect == 0.0 && additivity_ok(additivity_tolerance) && gradient_ok && hl_ok;
}

std::string LemmaReport::csv_header() {
    return "resolved,truncated_fraction,monotone,commutation_defect,max_additivity_error,gradient_lhs,gradient_rhs,"
           "gradient_margin,gradient_ok,hl_lhs,hl_rhs,hl_ok,passed";
}

std::string LemmaReport::csv_row() const {
    const double worst = additivity_error.empty()
                             ? 0.0
                             : *std::max_element(additivity_error.begin(), additivity_error.end());
    return format_bool(resolved) + ',' + format_double(truncated_fraction) + ',' + format_bool(monotone) + ',' + format_double(commutation_defect) + ',' +
           format_double(worst) + ',' + format_double(gradient_lhs) + ',' + format_double(gradient_rhs) + ',' +
           format_double(gradient_margin) + ',' + format_bool(gradient_ok) + ',' + format_double(hl_lhs) + ',' +
           format_double(hl_rhs) + ',' + format_bool(hl_ok) + ',' + format_bool(passed());
}

LemmaReport check_lemma_properties(const Field& u, const Field& v, const LemmaCheckOptions& options) {
    require_same_grid(u, v);
    LemmaReport rep;
    rep.resolved = spectral_tail_fraction(u) < 1e-8 && spectral_tail_fraction(v) < 1e-8;

    const Field star = merge(u, v, Overflow::truncate, &rep.truncated_fraction);
    const auto& ranking = rearrange_order(u.grid()).cell_ranking;

    // (i)
    rep.monotone = true;
    for (std::size_t k = 1; k < ranking.size(); ++k)
        if (star[ranking[k]].real() > star[ranking[k - 1]].real()) rep.monotone = false;

    // (ii)
    const Field lhs =
        merge(modulus_power(u, options.gamma), modulus_power(v, options.gamma), Overflow::truncate);
    const Field rhs = modulus_power(star, options.gamma);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        rep.commutation_defect = std::max(rep.commutation_defect, std::abs(lhs[i] - rhs[i]));

    // (iii)
    rep.exponents = options.exponents;
    for (double p : options.exponents) {
        const double expected = lp_integral(u, p) + lp_integral(v, p);
        const double got = lp_integral(star, p);
        rep.additivity_error.push_back(expected > 0.0 ? std::abs(got - expected) / expected : std::abs(got));
    }

    // (iv)
    rep.gradient_lhs = grad_norm_sq(star);
    rep.gradient_rhs = grad_norm_sq(u) + grad_norm_sq(v);
    rep.gradient_margin = rep.gradient_rhs > 0.0 ? (rep.gradient_rhs - rep.gradient_lhs) / rep.gradient_rhs : 0.0;
    rep.gradient_ok = rep.gradient_lhs <= rep.gradient_rhs * (1.0 + options.gradient_slack);

    // (v)
    const Field& u1 = u;
    const Field& v1 = v;
    const Field& u2 = options.partner ? options.partner->first : v;
    const Field& v2 = options.partner ? options.partner->second : u;
    rep.hl_lhs = product_integral(u1, u2) + product_integral(v1, v2);
    rep.hl_rhs = product_integral(star, merge(u2, v2, Overflow::truncate));
    rep.hl_ok = rep.hl_lhs <= rep.hl_rhs * (1.0 + options.hl_slack);
    return rep;
}

}  // namespace nlsys
