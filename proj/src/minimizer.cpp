#include "nlsys/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nlsys/csv.hpp"
#include "noise.hpp"
#include "parallel.hpp"

namespace nlsys {

void SolverConfig::validate() const {
    if (!(step > 0.0)) throw Error(ErrorKind::configuration, "solver step must be positive");
    if (!(tol_residual > 0.0) || !(tol_energy > 0.0))
        throw Error(ErrorKind::configuration, "solver tolerances must be positive");
    if (max_iters < 1) throw Error(ErrorKind::configuration, "max_iters must be at least 1");
    if (stall_window < 1) throw Error(ErrorKind::configuration, "stall_window must be at least 1");
    if (init == InitKind::file && !start) throw Error(ErrorKind::configuration, "file initialization needs a state");
}

std::string GroundState::history_csv_header() { return "iter,energy,residual,lambda1,lambda2"; }

std::string GroundState::history_csv() const {
    std::string out = history_csv_header() + '\n';
    for (const auto& r : history) {
        out += std::to_string(r.iter) + ',' + format_double(r.energy) + ',' + format_double(r.residual) + ',' +
               format_double(r.lambda1) + ',' + format_double(r.lambda2) + '\n';
    }
    return out;
}

Pair normalize_to_masses(const ModelParams& params, Pair state) {
    for (int c = 0; c < 2; ++c) {
        Field& u = state.component(c);
        if (!params.is_active(c)) {
            u = Field(u.grid());
            continue;
        }
        const double m = mass(u);
        if (!(m > 0.0))
            throw Error(ErrorKind::collapse, "component " + std::to_string(c + 1) + " collapsed to zero");
        u *= std::sqrt(params.mass_of(c) / m);
    }
    return state;
}

namespace {

struct Derivatives {
    Pair neg_lap;
    Pair force;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

Derivatives derivatives(const ModelParams& params, const Pair& state) {
    Derivatives d;
    d.neg_lap = Pair(neg_laplacian(state.first), neg_laplacian(state.second));
    d.force = nonlinear_force(params, state);
    std::tie(d.lambda1, d.lambda2) = multipliers(params, state);
    return d;
}

double residual_from(const Pair& state, const Derivatives& d, double lambda1, double lambda2) {
    double total = 0.0;
    for (int c = 0; c < 2; ++c) {
        const double lambda = c == 0 ? lambda1 : lambda2;
        Field r = d.neg_lap.component(c);
        const Field& u = state.component(c);
        const Field& f = d.force.component(c);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * u[i] + f[i];
        total += std::sqrt(mass(r));
    }
    return total;
}

Pair flow_step_from(const ModelParams& params, const Pair& state, const Derivatives& d, double tau) {
    const auto k2 = wavenumber_sq(state.grid());
    Pair next = state;
    for (int c = 0; c < 2; ++c) {
        if (!params.is_active(c)) continue;
        const double lambda = c == 0 ? d.lambda1 : d.lambda2;
        const double shift = std::max(0.0, -lambda);
        const Field& u = state.component(c);
        const Field& f = d.force.component(c);
        Field rhs(u.grid());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = u[i] + tau * (f[i] + (lambda + shift) * u[i]);
        auto spec = forward_transform(rhs);
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] /= 1.0 + tau * (k2[i] + shift);
        next.component(c) = inverse_transform(u.grid(), std::move(spec));
    }
    return normalize_to_masses(params, std::move(next));
}

Field gaussian(const GridSpec& grid, double width, const std::array<double, 3>& centre) {
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = grid.multi_index(i);
        double r2 = 0.0;
        for (int d = 0; d < grid.dim; ++d) {
            const double x = grid.coordinate(idx[d]) - centre[d];
            r2 += x * x;
        }
        f[i] = std::exp(-r2 / (2.0 * width * width));
    }
    return f;
}

}  // namespace

namespace detail {

Field smooth_noise(const GridSpec& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        f[i] = complex(re, im);
    }
    const auto k2 = wavenumber_sq(grid);
    std::vector<double> filter(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) filter[i] = std::exp(-0.5 * k2[i]);
    f = apply_multiplier(f, std::span<const double>(filter));
    f *= 1.0 / std::sqrt(mass(f));
    return f;
}

}  // namespace detail

Pair flow_step(const ModelParams& params, const Pair& state, double tau) {
    params.validate();
    if (!(tau > 0.0)) throw Error(ErrorKind::domain, "flow step must be positive");
    return flow_step_from(params, state, derivatives(params, state), tau);
}

double residual(const ModelParams& params, const Pair& state, double lambda1, double lambda2) {
    params.validate_hypotheses();
    Derivatives d;
    d.neg_lap = Pair(neg_laplacian(state.first), neg_laplacian(state.second));
    d.force = nonlinear_force(params, state);
    return residual_from(state, d, lambda1, lambda2);
}

Pair initial_state(const ModelParams& params, const GridSpec& grid, const SolverConfig& cfg) {
    params.validate();
    grid.validate();
    if (grid.dim != params.dim) throw Error(ErrorKind::configuration, "grid and model dimensions differ");
    const double width = grid.extent / 8.0;

    switch (cfg.init) {
        case InitKind::gaussian: {
            const Field g = gaussian(grid, width, {0.0, 0.0, 0.0});
            return normalize_to_masses(params, Pair(g, g));
        }
        case InitKind::noise: {
            std::mt19937_64 rng(cfg.seed);
            std::uniform_real_distribution<double> offset(-grid.extent / 16.0, grid.extent / 16.0);
            std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));
            Pair out(grid);
            for (int c = 0; c < 2; ++c) {
                std::array<double, 3> centre{0.0, 0.0, 0.0};
                for (int d = 0; d < grid.dim; ++d) centre[d] = offset(rng);
                Field g = gaussian(grid, width, centre);
                g *= 1.0 / std::sqrt(mass(g));
                Field noise = detail::smooth_noise(grid, rng);
                noise *= cfg.noise_amplitude;
                g += noise;
                g *= std::polar(1.0, angle(rng));
                out.component(c) = std::move(g);
            }
            return normalize_to_masses(params, std::move(out));
        }
        case InitKind::file: {
            if (!cfg.start) throw Error(ErrorKind::configuration, "file initialization needs a state");
            if (!(cfg.start->grid() == grid))
                throw Error(ErrorKind::grid_mismatch, "initial state grid differs from the solver grid");
            return normalize_to_masses(params, *cfg.start);
        }
    }
    throw Error(ErrorKind::configuration, "unknown initialization");
}

GroundState solve(const ModelParams& params, const GridSpec& grid, const SolverConfig& cfg) {
    cfg.validate();
    Pair state = initial_state(params, grid, cfg);
    double e = energy(params, state).total;
    double tau = cfg.step;
    int stall = 0;
    double stall_start_residual = 0.0;

    GroundState gs;
    for (int iter = 0;; ++iter) {
        const Derivatives d = derivatives(params, state);
        const double res = residual_from(state, d, d.lambda1, d.lambda2);
        gs.history.push_back({iter, e, res, d.lambda1, d.lambda2});
        gs.state = state;
        gs.energy = e;
        gs.lambda1 = d.lambda1;
        gs.lambda2 = d.lambda2;
        gs.residual = res;
        gs.iters = iter;
        gs.final_step = tau;

        if (res <= cfg.tol_residual) {
            gs.converged = true;
            break;
        }
        if (iter >= cfg.max_iters) break;
        if (stall == 1) stall_start_residual = res;
        if (stall >= cfg.stall_window) {
            // the energy is flat; stop only if the residual stopped improving too
            if (res > 0.9 * stall_start_residual) break;
            stall = 0;
        }

        Pair next;
        double e_next = 0.0;
        bool accepted = false;
        while (tau >= 1e-12) {
            next = flow_step_from(params, state, d, tau);
            if (!next.all_finite())
                throw BlowupError("non-finite iterate at iteration " + std::to_string(iter + 1), state);
            e_next = energy(params, next).total;
            if (e_next <= e + 1e-14 * std::max(1.0, std::abs(e))) {
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) break;

        stall = std::abs(e - e_next) < cfg.tol_energy ? stall + 1 : 0;
        state = std::move(next);
        e = e_next;
    }
    return gs;
}

MultistartReport multistart_compactness(const ModelParams& params, const GridSpec& grid, const SolverConfig& base,
                                        std::span<const std::uint64_t> seeds, int threads) {
    if (seeds.size() < 2) throw Error(ErrorKind::configuration, "multistart needs at least two runs");
    std::vector<GroundState> runs(seeds.size());
    detail::parallel_for(seeds.size(), threads, [&](std::size_t i) {
        SolverConfig cfg = base;
        cfg.init = InitKind::noise;
        cfg.seed = seeds[i];
        cfg.start.reset();
        runs[i] = solve(params, grid, cfg);
    });

    MultistartReport rep;
    rep.seeds.assign(seeds.begin(), seeds.end());
    rep.all_converged = true;
    for (const auto& r : runs) {
        rep.energies.push_back(r.energy);
        rep.converged.push_back(r.converged);
        rep.all_converged = rep.all_converged && r.converged;
    }
    const auto [lo, hi] = std::minmax_element(rep.energies.begin(), rep.energies.end());
    rep.energy_spread = *hi - *lo;
    for (const auto& r : runs) {
        const double d = align(runs.front().state, r.state).distance;
        rep.aligned_distances.push_back(d);
        rep.max_aligned_distance = std::max(rep.max_aligned_distance, d);
    }
    rep.passed = rep.all_converged && rep.energy_spread <= 1e-6 && rep.max_aligned_distance <= 1e-3;
    return rep;
}

MultistartReport multistart_compactness(const ModelParams& params, const GridSpec& grid, const SolverConfig& base,
                                        int k, std::uint64_t seed, int threads) {
    if (k < 2) throw Error(ErrorKind::configuration, "multistart needs k >= 2");
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < k; ++i) seeds.push_back(seed + static_cast<std::uint64_t>(i));
    return multistart_compactness(params, grid, base, seeds, threads);
}

}  // namespace nlsys
