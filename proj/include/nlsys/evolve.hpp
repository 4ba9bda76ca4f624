#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlsys/grid.hpp"
#include "nlsys/minimizer.hpp"
#include "nlsys/model.hpp"

namespace nlsys {

struct EvolveConfig {
    double dt = 1e-3;
    double t_final = 10.0;
    int record_every = 100;
    /// H1 size of the initial perturbation in stability experiments.
    double perturbation_size = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    /// Number of steps, round(t_final / dt).
    long steps() const;
};

struct StabilityTrace {
    std::vector<double> times;
    /// Empty unless a reference orbit was supplied.
    std::vector<double> orbit_distance;
    std::vector<double> mass1;
    std::vector<double> mass2;
    std::vector<double> energy;
    /// Largest relative change of either mass over a single step.
    double max_step_mass_change = 0.0;
    double sup_distance = 0.0;
    bool blowup = false;
    double blowup_time = 0.0;

    static std::string csv_header();  ///< t,mass1,mass2,energy,orbit_distance
    std::string to_csv() const;
};

struct EvolveResult {
    StabilityTrace trace;
    Pair final_state;
};

/// Energy of the evolution system without hypothesis checks, so that the
/// linear case mu = beta = 0 is admissible.
double hamiltonian(const ModelParams& params, const Pair& state);

/// One Strang step of i dPsi/dt = dJ/dPsi*: half nonlinear phase rotation,
/// full free step exp(-i dt |k|^2), half nonlinear phase rotation. Negative
/// dt integrates backwards. Throws BlowupError if the result is not finite.
Pair strang_step(const ModelParams& params, const Pair& state, double dt);

/// Integrates to t_final, sampling every record_every steps (and at the end).
/// With an orbit reference, orbit distances are sampled too.
EvolveResult run(const ModelParams& params, const Pair& initial, const EvolveConfig& cfg,
                 const Pair* orbit_reference = nullptr);

/// H1 distance to the translation/phase orbit of the reference minimizer.
/// An upper bound for the distance to the full set of minimizers.
double orbit_distance(const GroundState& reference, const Pair& state);
double orbit_distance(const Pair& reference, const Pair& state);

/// Adds seeded smooth complex noise of H1 norm delta to each component,
/// then rescales both components back to the masses of `params`.
Pair perturb(const ModelParams& params, const Pair& state, double delta, std::uint64_t seed);

/// Perturbs the reference by cfg.perturbation_size, evolves, and records the
/// orbit distance. A blowup ends the trace early with the flag set.
StabilityTrace stability_experiment(const ModelParams& params, const GroundState& reference,
                                    const EvolveConfig& cfg);

}  // namespace nlsys
