#include "nlsys/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "nlsys/csv.hpp"
#include "nlsys/error.hpp"
#include "noise.hpp"

namespace nlsys {

void EvolveConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::configuration, "dt must be positive");
    if (!(t_final >= dt) || !std::isfinite(t_final)) throw Error(ErrorKind::configuration, "t_final must be >= dt");
    if (record_every < 1) throw Error(ErrorKind::configuration, "record_every must be at least 1");
    if (!(perturbation_size >= 0.0) || !std::isfinite(perturbation_size))
        throw Error(ErrorKind::configuration, "perturbation_size must be nonnegative");
}

long EvolveConfig::steps() const { return std::lround(t_final / dt); }

std::string StabilityTrace::csv_header() { return "t,mass1,mass2,energy,orbit_distance"; }

std::string StabilityTrace::to_csv() const {
    std::string out = csv_header() + '\n';
    for (std::size_t i = 0; i < times.size(); ++i) {
        const std::string dist = i < orbit_distance.size() ? format_double(orbit_distance[i]) : std::string();
        out += format_double(times[i]) + ',' + format_double(mass1[i]) + ',' + format_double(mass2[i]) + ',' +
               format_double(energy[i]) + ',' + dist + '\n';
    }
    return out;
}

namespace {

inline double power(double a, double e) {
    if (e == 2.0) return a * a;
    if (e == 0.0) return 1.0;
    if (e == 1.0) return a;
    return std::pow(a, e);
}

// exp(-i dt |k|^2), cached per (grid, dt); a trajectory reuses one dt.
std::span<const complex> free_propagator(const GridSpec& grid, double dt) {
    struct Key {
        int dim;
        int points;
        double extent;
        double dt;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            return std::hash<double>()(k.dt) ^ (std::hash<double>()(k.extent) << 1) ^
                   (static_cast<std::size_t>(k.points) << 3) ^ static_cast<std::size_t>(k.dim);
        }
    };
    static std::mutex lock;
    static std::unordered_map<Key, std::vector<complex>, KeyHash> cache;

    std::lock_guard guard(lock);
    if (cache.size() > 16) cache.clear();
    auto [it, inserted] = cache.try_emplace(Key{grid.dim, grid.points, grid.extent, dt});
    if (inserted) {
        const auto k2 = wavenumber_sq(grid);
        it->second.resize(k2.size());
        for (std::size_t i = 0; i < k2.size(); ++i) it->second[i] = std::polar(1.0, -dt * k2[i]);
    }
    return it->second;
}

// Psi_i <- Psi_i exp(i h V_i) with V_i = mu_i |Psi_i|^{p_i-2} + r_i beta |Psi_i|^{r_i-2} |Psi_j|^{r_j}.
// Both moduli are invariant, so freezing them over the substep is exact.
void nonlinear_rotation(const ModelParams& params, Pair& state, double h) {
    Field& u1 = state.first;
    Field& u2 = state.second;
    for (std::size_t i = 0; i < u1.size(); ++i) {
        const double m1 = std::abs(u1[i]);
        const double m2 = std::abs(u2[i]);
        if (m1 > 0.0) {
            const double v = params.mu1 * power(m1, params.p1 - 2.0) +
                             params.r1 * params.beta * power(m1, params.r1 - 2.0) * power(m2, params.r2);
            u1[i] *= std::polar(1.0, h * v);
        }
        if (m2 > 0.0) {
            const double v = params.mu2 * power(m2, params.p2 - 2.0) +
                             params.r2 * params.beta * power(m2, params.r2 - 2.0) * power(m1, params.r1);
            u2[i] *= std::polar(1.0, h * v);
        }
    }
}

Pair step_unchecked(const ModelParams& params, Pair state, double dt) {
    nonlinear_rotation(params, state, 0.5 * dt);
    const auto propagator = free_propagator(state.grid(), dt);
    state.first = apply_multiplier(state.first, propagator);
    state.second = apply_multiplier(state.second, propagator);
    nonlinear_rotation(params, state, 0.5 * dt);
    return state;
}

void record(StabilityTrace& trace, const ModelParams& params, const Pair& state, double t, double m1, double m2,
            const Pair* reference) {
    trace.times.push_back(t);
    trace.mass1.push_back(m1);
    trace.mass2.push_back(m2);
    trace.energy.push_back(hamiltonian(params, state));
    if (reference) {
        const double d = orbit_distance(*reference, state);
        trace.orbit_distance.push_back(d);
        trace.sup_distance = std::max(trace.sup_distance, d);
    }
}

double relative_change(double before, double after) {
    if (before == 0.0) return std::abs(after);
    return std::abs(after - before) / before;
}

// Fills `trace` as it goes so that a blowup leaves the samples taken so far.
Pair integrate(const ModelParams& params, const Pair& initial, const EvolveConfig& cfg, const Pair* reference,
               StabilityTrace& trace) {
    cfg.validate();
    if (!initial.all_finite()) throw Error(ErrorKind::invalid_field, "initial state contains NaN or Inf");
    require_same_grid(initial.first, initial.second);
    if (reference) require_same_grid(reference->first, initial.first);

    Pair state = initial;
    double m1 = mass(state.first);
    double m2 = mass(state.second);
    record(trace, params, state, 0.0, m1, m2, reference);

    const long steps = cfg.steps();
    for (long s = 1; s <= steps; ++s) {
        const double t = static_cast<double>(s) * cfg.dt;
        Pair next = step_unchecked(params, state, cfg.dt);
        if (!next.all_finite()) {
            trace.blowup = true;
            trace.blowup_time = t;
            throw BlowupError("non-finite state at t = " + format_double(t), std::move(state), t);
        }
        const double n1 = mass(next.first);
        const double n2 = mass(next.second);
        trace.max_step_mass_change =
            std::max({trace.max_step_mass_change, relative_change(m1, n1), relative_change(m2, n2)});
        state = std::move(next);
        m1 = n1;
        m2 = n2;
        if (s % cfg.record_every == 0 || s == steps) record(trace, params, state, t, m1, m2, reference);
    }
    return state;
}

}  // namespace

double hamiltonian(const ModelParams& params, const Pair& state) {
    require_same_grid(state.first, state.second);
    double e = 0.5 * (grad_norm_sq(state.first) + grad_norm_sq(state.second));
    if (params.mu1 != 0.0) e -= params.mu1 / params.p1 * lp_integral(state.first, params.p1);
    if (params.mu2 != 0.0) e -= params.mu2 / params.p2 * lp_integral(state.second, params.p2);
    if (params.beta != 0.0) e -= params.beta * coupling_integral(params, state);
    return e;
}

Pair strang_step(const ModelParams& params, const Pair& state, double dt) {
    require_same_grid(state.first, state.second);
    if (!state.all_finite()) throw Error(ErrorKind::invalid_field, "state contains NaN or Inf");
    if (!std::isfinite(dt)) throw Error(ErrorKind::domain, "dt must be finite");
    Pair next = step_unchecked(params, state, dt);
    if (!next.all_finite()) throw BlowupError("non-finite state after one step", state, dt);
    return next;
}

EvolveResult run(const ModelParams& params, const Pair& initial, const EvolveConfig& cfg,
                 const Pair* orbit_reference) {
    EvolveResult result;
    result.final_state = integrate(params, initial, cfg, orbit_reference, result.trace);
    return result;
}

double orbit_distance(const Pair& reference, const Pair& state) { return align(reference, state).distance; }

double orbit_distance(const GroundState& reference, const Pair& state) {
    return orbit_distance(reference.state, state);
}

Pair perturb(const ModelParams& params, const Pair& state, double delta, std::uint64_t seed) {
    if (!(delta >= 0.0)) throw Error(ErrorKind::domain, "perturbation size must be nonnegative");
    if (delta == 0.0) return state;
    std::mt19937_64 rng(seed);
    Pair out = state;
    for (int c = 0; c < 2; ++c) {
        if (!params.is_active(c)) continue;
        Field noise = detail::smooth_noise(state.grid(), rng);
        noise *= delta / std::sqrt(h1_norm_sq(noise));
        out.component(c) += noise;
    }
    return normalize_to_masses(params, std::move(out));
}

StabilityTrace stability_experiment(const ModelParams& params, const GroundState& reference,
                                    const EvolveConfig& cfg) {
    if (!reference.converged) throw Error(ErrorKind::domain, "stability reference is not converged");
    cfg.validate();
    const Pair initial = perturb(params, reference.state, cfg.perturbation_size, cfg.seed);
    StabilityTrace trace;
    try {
        integrate(params, initial, cfg, &reference.state, trace);
    } catch (const BlowupError&) {
        // trace already carries the flag and the samples taken before the blowup
    }
    return trace;
}

}  // namespace nlsys
