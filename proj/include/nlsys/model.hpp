#pragma once

#include <array>
#include <string>
#include <utility>

#include "nlsys/grid.hpp"

namespace nlsys {

/// Which components take part in the functional. Single-component runs keep
/// the absent field identically zero, which reduces J to the one-field energy.
enum class Components { both, first_only, second_only };

/// Parameters of the coupled system
///   -Delta u_i = lambda_i u_i + mu_i |u_i|^{p_i-2} u_i + r_i beta |u_i|^{r_i-2} u_i |u_j|^{r_j}
/// with prescribed masses a_i.
struct ModelParams {
    int dim = 1;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double p1 = 4.0;
    double p2 = 4.0;
    double r1 = 2.0;
    double r2 = 2.0;
    double beta = 1.0;
    double a1 = 1.0;
    double a2 = 1.0;
    Components active = Components::both;

    /// Exponent/coupling hypotheses: beta > 0, mu_i > 0, r_i > 1,
    /// 2 < p_i < 2 + 4/N and r1 + r2 < 2 + 4/N. Throws hypothesis_violation.
    void validate_hypotheses() const;
    /// validate_hypotheses() plus the mass contract: active components carry
    /// a positive mass, absent ones carry mass 0.
    void validate() const;

    bool is_active(int component) const noexcept;
    double mass_of(int component) const noexcept { return component == 0 ? a1 : a2; }

    /// Copy with new masses; a zero mass switches that component off.
    /// Throws domain error for negative masses or (0, 0).
    ModelParams with_masses(double m1, double m2) const;

    /// Checked constructor: returns the parameters after validate().
    static ModelParams checked(const ModelParams& raw);
};

struct EnergyBreakdown {
    double kinetic = 0.0;   ///< 1/2 int |grad u1|^2 + |grad u2|^2
    double self1 = 0.0;     ///< mu1/p1 int |u1|^p1
    double self2 = 0.0;     ///< mu2/p2 int |u2|^p2
    double coupling = 0.0;  ///< beta int |u1|^r1 |u2|^r2
    double total = 0.0;     ///< kinetic - self1 - self2 - coupling
};

EnergyBreakdown energy(const ModelParams& params, const Pair& state);

/// Pointwise nonlinear force N_i(u) = mu_i |u_i|^{p_i-2} u_i + r_i beta |u_i|^{r_i-2} u_i |u_j|^{r_j}.
/// |u|^{r-2} u is evaluated as |u|^{r-1} (u/|u|) and taken as 0 where u = 0.
Pair nonlinear_force(const ModelParams& params, const Pair& state);

/// Unconstrained L2 gradient of J: g_i = -Delta u_i - N_i(u).
Pair constrained_gradient(const ModelParams& params, const Pair& state);

/// Lagrange multipliers from pairing the stationary equations with u_i.
/// Absent components report 0. Throws division_guard for an active
/// component with zero mass.
std::pair<double, double> multipliers(const ModelParams& params, const Pair& state);

/// Exponent pair (q, q') used in the Hölder split of the coupling term.
struct HolderExponents {
    double q = 2.0;
    double q_conj = 2.0;
};

/// Midpoint of the admissible interval for 1/q given 2 < r1 q <= 2*,
/// 2 < r2 q' <= 2* (2* = +inf for N <= 2).
HolderExponents choose_holder_exponents(int dim, double r1, double r2);

/// Sobolev critical exponent 2N/(N-2), +inf for N <= 2.
double critical_exponent(int dim);

struct GnComponent {
    double alpha = 0.0;          ///< N(p-2)/(2p)
    double lp = 0.0;             ///< ||u||_p
    double grad_factor = 0.0;    ///< ||grad u||^alpha ||u||_2^{1-alpha}
    double ratio = 0.0;          ///< lp / grad_factor, a measured GN constant
    double integral = 0.0;       ///< int |u|^p
    double power_bound = 0.0;    ///< ||grad u||^{N(p-2)/2}
    double exponent = 0.0;       ///< N(p-2)/2, must be < 2
};

struct GnCertificate {
    std::array<GnComponent, 2> components;
    HolderExponents holder;
    double coupling_integral = 0.0;   ///< int |u1|^r1 |u2|^r2
    double holder_bound = 0.0;        ///< ||u1||_{r1 q}^{r1} ||u2||_{r2 q'}^{r2}
    double gradient_bound = 0.0;      ///< ||grad u1||^{e1} ||grad u2||^{e2}
    double coupling_ratio = 0.0;      ///< holder_bound / gradient_bound
    std::array<double, 2> coupling_exponents{};  ///< e1 = N(r1 q-2)/(2q), e2 = N(r2 q'-2)/(2q')
    double coupling_exponent_sum = 0.0;
    bool exponents_ok = false;        ///< every coercivity exponent < 2
    bool holder_ok = false;           ///< coupling_integral <= holder_bound (to rounding)

    static std::string csv_header();
    std::string csv_row() const;
};

/// Both sides of the Gagliardo-Nirenberg bounds and the coercivity exponents.
/// Requires the state masses to match (a1, a2) within 1e-8 relative.
GnCertificate gn_certificate(const ModelParams& params, const Pair& state);

struct SplittingReport {
    int separation = 0;
    double energy_defect = 0.0;    ///< |J(s) - J(u) - J(w)|
    double coupling_defect = 0.0;  ///< |int coupling(s) - coupling(u) - coupling(w)|

    static std::string csv_header();
    std::string csv_row() const;
};

/// Energy splitting along s = u + translate(w, separation e_1). Throws
/// wraparound if |separation| > n/2 and domain error unless u and w are
/// concentrated (mass outside radius L/8 below 1e-10 of the total).
SplittingReport splitting_test(const ModelParams& params, const Pair& u, const Pair& w, int separation);

/// Integral of |u1|^r1 |u2|^r2 (without the beta factor).
double coupling_integral(const ModelParams& params, const Pair& state);

}  // namespace nlsys
