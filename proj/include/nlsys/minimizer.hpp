#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlsys/error.hpp"
#include "nlsys/grid.hpp"
#include "nlsys/model.hpp"

namespace nlsys {

enum class InitKind { gaussian, noise, file };

struct SolverConfig {
    double step = 0.5;
    int max_iters = 20000;
    double tol_residual = 1e-8;
    double tol_energy = 1e-12;
    /// Consecutive accepted steps with |dE| < tol_energy after which the flow
    /// stops, unless the residual fell by 10% or more over those steps.
    int stall_window = 200;
    InitKind init = InitKind::gaussian;
    std::uint64_t seed = 0;
    /// Relative amplitude of the seeded perturbation used by InitKind::noise.
    double noise_amplitude = 0.3;
    /// Starting state for InitKind::file (rescaled to the prescribed masses).
    std::optional<Pair> start;

    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    double energy = 0.0;
    double residual = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

struct GroundState {
    Pair state;
    double energy = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double residual = 0.0;
    int iters = 0;
    bool converged = false;
    double final_step = 0.0;
    std::vector<IterationRecord> history;

    /// lambda_i < 0 for every active component. An empirical observation,
    /// reported but never enforced.
    bool negative_multipliers(const ModelParams& params) const {
        return (!params.is_active(0) || lambda1 < 0.0) && (!params.is_active(1) || lambda2 < 0.0);
    }

    static std::string history_csv_header();
    std::string history_csv() const;
};

/// Raised when an iterate turns non-finite; carries the last finite iterate.
class BlowupError : public Error {
public:
    BlowupError(const std::string& what, Pair last_valid, double time = 0.0)
        : Error(ErrorKind::numerical_blowup, what), last_valid_(std::move(last_valid)), time_(time) {}
    const Pair& last_valid() const noexcept { return last_valid_; }
    double time() const noexcept { return time_; }

private:
    Pair last_valid_;
    double time_;
};

/// Rescales every active component to its prescribed mass; absent
/// components are set to zero. Throws collapse for a vanished active component.
Pair normalize_to_masses(const ModelParams& params, Pair state);

/// One step of the normalized gradient flow. Linear part implicit, nonlinearity
/// explicit, with the current multiplier estimate folded into the implicit
/// operator so that solutions of the stationary system are exact fixed points:
///   (1 + tau (|k|^2 + s_i)) w_i = u_i + tau (N_i(u) + (lambda_i + s_i) u_i),
///   s_i = max(0, -lambda_i),
/// followed by rescaling each w_i to mass a_i.
Pair flow_step(const ModelParams& params, const Pair& state, double tau);

/// Sum over components of || -Delta u_i - lambda_i u_i - N_i(u) ||_2.
double residual(const ModelParams& params, const Pair& state, double lambda1, double lambda2);

/// Initial state described by cfg (Gaussians of width L/8 by default).
Pair initial_state(const ModelParams& params, const GridSpec& grid, const SolverConfig& cfg);

/// Normalized gradient flow until the Euler-Lagrange residual drops below
/// tol_residual, the energy stalls, or max_iters is hit. Steps that raise the
/// energy are rejected and retried with half the step.
GroundState solve(const ModelParams& params, const GridSpec& grid, const SolverConfig& cfg);

struct MultistartReport {
    std::vector<std::uint64_t> seeds;
    std::vector<double> energies;
    std::vector<bool> converged;
    double energy_spread = 0.0;
    /// Aligned H1 distance of every run to run 0 (translation + phases removed).
    std::vector<double> aligned_distances;
    double max_aligned_distance = 0.0;
    bool all_converged = false;
    bool passed = false;  ///< spread <= 1e-6 and distances <= 1e-3
};

/// Runs one noise-initialized solve per seed (concurrently, up to `threads`).
MultistartReport multistart_compactness(const ModelParams& params, const GridSpec& grid, const SolverConfig& base,
                                        std::span<const std::uint64_t> seeds, int threads = 1);

/// Seeds seed, seed + 1, ..., seed + k - 1. Requires k >= 2.
MultistartReport multistart_compactness(const ModelParams& params, const GridSpec& grid, const SolverConfig& base,
                                        int k, std::uint64_t seed, int threads = 1);

}  // namespace nlsys
