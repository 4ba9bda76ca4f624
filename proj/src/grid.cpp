#include "nlsys/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "nlsys/error.hpp"
#include "reduce.hpp"

namespace nlsys {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_field: return "invalid-field";
        case ErrorKind::domain: return "domain";
        case ErrorKind::grid_mismatch: return "grid-mismatch";
        case ErrorKind::overflow: return "overflow";
        case ErrorKind::division_guard: return "division-guard";
        case ErrorKind::hypothesis_violation: return "hypothesis-violation";
        case ErrorKind::wraparound: return "wraparound";
        case ErrorKind::capacity: return "capacity";
        case ErrorKind::collapse: return "collapse";
        case ErrorKind::numerical_blowup: return "numerical-blowup";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

// -- GridSpec ------------------------------------------------------------------

void GridSpec::validate() const {
    if (dim < 1 || dim > 3) throw Error(ErrorKind::domain, "grid dimension must be 1, 2 or 3");
    if (points < 8) throw Error(ErrorKind::domain, "grid needs at least 8 points per axis");
    if (!(extent > 0.0) || !std::isfinite(extent))
        throw Error(ErrorKind::domain, "grid extent must be positive and finite");
}

std::size_t GridSpec::size() const noexcept {
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points);
    return total;
}

double GridSpec::cell_volume() const noexcept {
    double v = 1.0;
    for (int d = 0; d < dim; ++d) v *= spacing();
    return v;
}

std::array<int, 3> GridSpec::multi_index(std::size_t flat) const noexcept {
    std::array<int, 3> idx{0, 0, 0};
    const auto n = static_cast<std::size_t>(points);
    for (int d = dim - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

std::size_t GridSpec::flat_index(const std::array<int, 3>& idx) const noexcept {
    std::size_t flat = 0;
    for (int d = 0; d < dim; ++d) flat = flat * static_cast<std::size_t>(points) + idx[d];
    return flat;
}

// -- Field ---------------------------------------------------------------------

Field::Field(const GridSpec& grid) : grid_(grid) {
    grid_.validate();
    values_.assign(grid_.size(), complex{});
}

Field::Field(const GridSpec& grid, std::vector<complex> values)
    : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.size())
        throw Error(ErrorKind::invalid_field, "field length does not match grid size");
}

bool Field::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](complex z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

bool Field::is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](complex z) { return z == complex{}; });
}

void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw Error(ErrorKind::grid_mismatch, "fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(complex factor) noexcept {
    for (auto& v : values_) v *= factor;
    return *this;
}

Pair::Pair(Field a, Field b) : first(std::move(a)), second(std::move(b)) {
    require_same_grid(first, second);
}

double pairwise_sum(std::span<const double> terms) {
    return detail::pairwise_reduce(terms.size(), [&](std::size_t i) { return terms[i]; });
}

namespace {

// Modulus integrands are summed in sorted order so any permutation of the
// cell values (translation, rearrangement) reproduces the same bits.
double sorted_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    return pairwise_sum(terms);
}

void require_finite(const Field& f) {
    if (!f.all_finite()) throw Error(ErrorKind::invalid_field, "field contains NaN or Inf");
}

// -- FFTW plan and wavenumber cache ---------------------------------------------

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~Plans() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

std::mutex cache_mutex;

const Plans& plans_for(const GridSpec& grid) {
    static std::map<std::pair<int, int>, std::unique_ptr<Plans>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[{grid.dim, grid.points}];
    if (!slot) {
        slot = std::make_unique<Plans>();
        std::array<int, 3> dims{grid.points, grid.points, grid.points};
        const auto n = grid.size();
        auto* buffer = fftw_alloc_complex(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        slot->forward = fftw_plan_dft(grid.dim, dims.data(), buffer, buffer, FFTW_FORWARD, flags);
        slot->backward = fftw_plan_dft(grid.dim, dims.data(), buffer, buffer, FFTW_BACKWARD, flags);
        fftw_free(buffer);
    }
    return *slot;
}

void execute(fftw_plan plan, std::vector<complex>& data) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

int signed_mode(int j, int n) { return j < n / 2 ? j : j - n; }

}  // namespace

std::span<const double> wavenumber_sq(const GridSpec& grid) {
    static std::map<std::tuple<int, int, double>, std::unique_ptr<std::vector<double>>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[{grid.dim, grid.points, grid.extent}];
    if (!slot) {
        const double dk = 2.0 * std::numbers::pi / grid.extent;
        slot = std::make_unique<std::vector<double>>(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto idx = grid.multi_index(i);
            double k2 = 0.0;
            for (int d = 0; d < grid.dim; ++d) {
                const double k = dk * signed_mode(idx[d], grid.points);
                k2 += k * k;
            }
            (*slot)[i] = k2;
        }
    }
    return *slot;
}

std::vector<complex> forward_transform(const Field& f) {
    std::vector<complex> data(f.values().begin(), f.values().end());
    execute(plans_for(f.grid()).forward, data);
    return data;
}

Field inverse_transform(const GridSpec& grid, std::vector<complex> spectrum) {
    if (spectrum.size() != grid.size())
        throw Error(ErrorKind::invalid_field, "spectrum length does not match grid size");
    execute(plans_for(grid).backward, spectrum);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& v : spectrum) v *= scale;
    return Field(grid, std::move(spectrum));
}

Field apply_multiplier(const Field& f, std::span<const double> multiplier) {
    auto spec = forward_transform(f);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= multiplier[i];
    return inverse_transform(f.grid(), std::move(spec));
}

Field apply_multiplier(const Field& f, std::span<const complex> multiplier) {
    auto spec = forward_transform(f);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= multiplier[i];
    return inverse_transform(f.grid(), std::move(spec));
}

Field neg_laplacian(const Field& f) { return apply_multiplier(f, wavenumber_sq(f.grid())); }

// -- quadrature ------------------------------------------------------------------

double mass(const Field& f) {
    require_finite(f);
    std::vector<double> terms(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) terms[i] = std::norm(f[i]);
    return sorted_sum(std::move(terms)) * f.grid().cell_volume();
}

double spectral_mass(const Field& f) {
    require_finite(f);
    const auto spec = forward_transform(f);
    const double s = detail::pairwise_reduce(spec.size(), [&](std::size_t i) { return std::norm(spec[i]); });
    return s * f.grid().cell_volume() / static_cast<double>(f.size());
}

double grad_norm_sq(const Field& f) {
    require_finite(f);
    const auto spec = forward_transform(f);
    const auto k2 = wavenumber_sq(f.grid());
    const double s =
        detail::pairwise_reduce(spec.size(), [&](std::size_t i) { return std::norm(spec[i]) * k2[i]; });
    return s * f.grid().cell_volume() / static_cast<double>(f.size());
}

double lp_integral(const Field& f, double p) {
    if (!(p >= 1.0)) throw Error(ErrorKind::domain, "lp norm requires p >= 1");
    require_finite(f);
    std::vector<double> terms(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        terms[i] = p == 2.0 ? a * a : std::pow(a, p);
    }
    return sorted_sum(std::move(terms)) * f.grid().cell_volume();
}

double lp_norm(const Field& f, double p) { return std::pow(lp_integral(f, p), 1.0 / p); }

double real_inner(const Field& a, const Field& b) {
    require_same_grid(a, b);
    const auto x = a.values();
    const auto y = b.values();
    return detail::pairwise_reduce(x.size(), [&](std::size_t i) { return (std::conj(x[i]) * y[i]).real(); }) *
           a.grid().cell_volume();
}

// -- symmetries ------------------------------------------------------------------

Field translate(const Field& f, const LatticeShift& shift) {
    const auto& g = f.grid();
    Field out(g);
    const int n = g.points;
    std::array<int, 3> s{0, 0, 0};
    for (int d = 0; d < g.dim; ++d) s[d] = ((shift[d] % n) + n) % n;
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto idx = g.multi_index(i);
        for (int d = 0; d < g.dim; ++d) idx[d] = (idx[d] + s[d]) % n;
        out[g.flat_index(idx)] = f[i];
    }
    return out;
}

Pair translate(const Pair& p, const LatticeShift& shift) {
    return Pair(translate(p.first, shift), translate(p.second, shift));
}

complex h1_inner(const Field& a, const Field& b) {
    require_same_grid(a, b);
    const auto fa = forward_transform(a);
    const auto fb = forward_transform(b);
    const auto k2 = wavenumber_sq(a.grid());
    const double scale = a.grid().cell_volume() / static_cast<double>(a.size());
    const double re = detail::pairwise_reduce(fa.size(), [&](std::size_t i) {
        return (std::conj(fa[i]) * fb[i]).real() * (1.0 + k2[i]);
    });
    const double im = detail::pairwise_reduce(fa.size(), [&](std::size_t i) {
        return (std::conj(fa[i]) * fb[i]).imag() * (1.0 + k2[i]);
    });
    return complex(re, im) * scale;
}

double h1_norm_sq(const Field& f) {
    require_finite(f);
    const auto spec = forward_transform(f);
    const auto k2 = wavenumber_sq(f.grid());
    const double s = detail::pairwise_reduce(
        spec.size(), [&](std::size_t i) { return std::norm(spec[i]) * (1.0 + k2[i]); });
    return s * f.grid().cell_volume() / static_cast<double>(f.size());
}

double h1_distance(const Pair& a, const Pair& b) {
    require_same_grid(a.first, b.first);
    require_same_grid(a.second, b.second);
    return std::sqrt(h1_norm_sq(a.first - b.first) + h1_norm_sq(a.second - b.second));
}

Alignment align(const Pair& reference, const Pair& state) {
    require_same_grid(reference.first, state.first);
    require_same_grid(reference.second, state.second);
    const auto& g = reference.grid();

    // c(s) = sum_x |r|(x) |u|(x + s), accumulated over both components.
    std::vector<complex> corr(g.size(), complex{});
    for (int c = 0; c < 2; ++c) {
        Field rm(g), sm(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            rm[i] = std::abs(reference.component(c)[i]);
            sm[i] = std::abs(state.component(c)[i]);
        }
        const auto fr = forward_transform(rm);
        const auto fs = forward_transform(sm);
        for (std::size_t i = 0; i < corr.size(); ++i) corr[i] += std::conj(fr[i]) * fs[i];
    }
    const Field c = inverse_transform(g, std::move(corr));
    std::size_t peak = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i].real() > c[peak].real()) peak = i;
    const auto centre = g.multi_index(peak);

    Alignment best;
    best.distance = std::numeric_limits<double>::infinity();
    const int window = 2;
    const int span = 2 * window + 1;
    int candidates = 1;
    for (int d = 0; d < g.dim; ++d) candidates *= span;
    for (int k = 0; k < candidates; ++k) {
        LatticeShift shift{0, 0, 0};
        int rest = k;
        for (int d = 0; d < g.dim; ++d) {
            shift[d] = -(centre[d] + rest % span - window);
            rest /= span;
        }
        Pair moved = translate(state, shift);
        std::array<double, 2> phase{};
        double dist_sq = 0.0;
        for (int comp = 0; comp < 2; ++comp) {
            Field& m = moved.component(comp);
            phase[comp] = -std::arg(h1_inner(reference.component(comp), m));
            m *= std::polar(1.0, phase[comp]);
            dist_sq += h1_norm_sq(reference.component(comp) - m);
        }
        const double dist = std::sqrt(dist_sq);
        if (dist < best.distance) best = Alignment{shift, phase, {0.0, 0.0, 0.0}, dist};
    }

    // Sub-cell refinement: maximize sum_c |<ref_c, T_s moved_c>_H1| over the
    // spectral shift s in [-1, 1] cells per axis (coordinate golden section on
    // the spectral inner product), then keep it only if the directly computed
    // distance improves.
    const Pair moved = translate(state, best.shift);
    std::array<std::vector<complex>, 2> cross;
    for (int comp = 0; comp < 2; ++comp) {
        const auto fr = forward_transform(reference.component(comp));
        const auto fm = forward_transform(moved.component(comp));
        const auto k2 = wavenumber_sq(g);
        cross[comp].resize(fr.size());
        for (std::size_t i = 0; i < fr.size(); ++i) cross[comp][i] = std::conj(fr[i]) * fm[i] * (1.0 + k2[i]);
    }
    const double dk = 2.0 * std::acos(-1.0) / g.extent;
    const double h = g.spacing();
    auto mode = [&](int j) { return j < g.points / 2 ? j : j - g.points; };
    auto phase_factor = [&](std::size_t i, const std::array<double, 3>& s) {
        const auto idx = g.multi_index(i);
        double arg = 0.0;
        for (int d = 0; d < g.dim; ++d) arg -= dk * mode(idx[d]) * s[d] * h;
        return std::polar(1.0, arg);
    };
    auto overlap = [&](const std::array<double, 3>& s) {
        double total = 0.0;
        for (int comp = 0; comp < 2; ++comp) {
            complex acc{};
            for (std::size_t i = 0; i < cross[comp].size(); ++i) acc += cross[comp][i] * phase_factor(i, s);
            total += std::abs(acc);
        }
        return total;
    };
    std::array<double, 3> sub{0.0, 0.0, 0.0};
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (int d = 0; d < g.dim; ++d) {
            double lo = -1.0, hi = 1.0;
            auto at = [&](double x) {
                auto t = sub;
                t[d] = x;
                return overlap(t);
            };
            double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
            double f1 = at(x1), f2 = at(x2);
            for (int it = 0; it < 48; ++it) {
                if (f1 < f2) {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + golden * (hi - lo);
                    f2 = at(x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - golden * (hi - lo);
                    f1 = at(x1);
                }
            }
            sub[d] = 0.5 * (lo + hi);
        }
    }
    std::array<double, 2> phase{};
    double dist_sq = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        auto spec = forward_transform(moved.component(comp));
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= phase_factor(i, sub);
        Field m = inverse_transform(g, std::move(spec));
        phase[comp] = -std::arg(h1_inner(reference.component(comp), m));
        m *= std::polar(1.0, phase[comp]);
        dist_sq += h1_norm_sq(reference.component(comp) - m);
    }
    const double dist = std::sqrt(dist_sq);
    if (dist < best.distance) best = Alignment{best.shift, phase, sub, dist};
    return best;
}

}  // namespace nlsys
