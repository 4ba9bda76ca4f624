#include "nlsys/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlsys/csv.hpp"
#include "nlsys/error.hpp"
#include "reduce.hpp"

namespace nlsys {

namespace {

// a^e with fast paths for the exponents that dominate the benchmarks.
inline double power(double a, double e) {
    if (e == 2.0) return a * a;
    if (e == 1.0) return a;
    if (e == 0.0) return 1.0;
    if (e == 4.0) return (a * a) * (a * a);
    return std::pow(a, e);
}

// |u|^{r-2} u, continuous extension 0 at u = 0 (r > 1).
inline complex signed_power(complex u, double r) {
    const double a = std::abs(u);
    if (a == 0.0) return {};
    if (r == 2.0) return u;
    return u * (power(a, r - 1.0) / a);
}

void require_finite_term(double value, const char* name) {
    if (!std::isfinite(value))
        throw Error(ErrorKind::overflow, std::string("energy term '") + name + "' is not finite");
}

}  // namespace

// -- ModelParams -------------------------------------------------------------------

void ModelParams::validate_hypotheses() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::hypothesis_violation, what); };
    if (dim < 1 || dim > 3) fail("dimension must be 1, 2 or 3");
    const double upper = 2.0 + 4.0 / dim;
    if (!(beta > 0.0)) fail("beta must be positive");
    if (!(mu1 > 0.0) || !(mu2 > 0.0)) fail("mu_i must be positive");
    if (!(r1 > 1.0) || !(r2 > 1.0)) fail("r_i must exceed 1");
    if (!(p1 > 2.0 && p1 < upper) || !(p2 > 2.0 && p2 < upper)) fail("p_i must lie in (2, 2 + 4/N)");
    if (!(r1 + r2 < upper)) fail("r1 + r2 must be below 2 + 4/N");
}

void ModelParams::validate() const {
    validate_hypotheses();
    auto check = [&](int c) {
        const double a = mass_of(c);
        if (!std::isfinite(a)) throw Error(ErrorKind::domain, "masses must be finite");
        if (is_active(c) && !(a > 0.0))
            throw Error(ErrorKind::domain, "active component " + std::to_string(c + 1) + " needs positive mass");
        if (!is_active(c) && a != 0.0)
            throw Error(ErrorKind::domain, "absent component " + std::to_string(c + 1) + " must carry mass 0");
    };
    check(0);
    check(1);
}

bool ModelParams::is_active(int component) const noexcept {
    switch (active) {
        case Components::both: return true;
        case Components::first_only: return component == 0;
        case Components::second_only: return component == 1;
    }
    return false;
}

ModelParams ModelParams::with_masses(double m1, double m2) const {
    if (m1 < 0.0 || m2 < 0.0) throw Error(ErrorKind::domain, "masses must be nonnegative");
    if (m1 == 0.0 && m2 == 0.0) throw Error(ErrorKind::domain, "at least one mass must be positive");
    ModelParams out = *this;
    out.a1 = m1;
    out.a2 = m2;
    out.active = m2 == 0.0 ? Components::first_only
               : m1 == 0.0 ? Components::second_only
                           : Components::both;
    return out;
}

ModelParams ModelParams::checked(const ModelParams& raw) {
    raw.validate();
    return raw;
}

// -- energy and gradient ---------------------------------------------------------------

double coupling_integral(const ModelParams& params, const Pair& state) {
    const auto& u1 = state.first;
    const auto& u2 = state.second;
    require_same_grid(u1, u2);
    const double s = detail::pairwise_reduce(u1.size(), [&](std::size_t i) {
        return power(std::abs(u1[i]), params.r1) * power(std::abs(u2[i]), params.r2);
    });
    return s * u1.grid().cell_volume();
}

EnergyBreakdown energy(const ModelParams& params, const Pair& state) {
    params.validate_hypotheses();
    require_same_grid(state.first, state.second);
    if (!state.all_finite()) throw Error(ErrorKind::invalid_field, "state contains NaN or Inf");

    EnergyBreakdown e;
    e.kinetic = 0.5 * (grad_norm_sq(state.first) + grad_norm_sq(state.second));
    require_finite_term(e.kinetic, "kinetic");
    e.self1 = params.mu1 / params.p1 * lp_integral(state.first, params.p1);
    require_finite_term(e.self1, "self1");
    e.self2 = params.mu2 / params.p2 * lp_integral(state.second, params.p2);
    require_finite_term(e.self2, "self2");
    e.coupling = params.beta * coupling_integral(params, state);
    require_finite_term(e.coupling, "coupling");
    e.total = e.kinetic - e.self1 - e.self2 - e.coupling;
    require_finite_term(e.total, "total");
    return e;
}

Pair nonlinear_force(const ModelParams& params, const Pair& state) {
    const auto& u1 = state.first;
    const auto& u2 = state.second;
    require_same_grid(u1, u2);
    Pair out(u1.grid());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        const double m1 = std::abs(u1[i]);
        const double m2 = std::abs(u2[i]);
        out.first[i] = params.mu1 * power(m1, params.p1 - 2.0) * u1[i] +
                       params.r1 * params.beta * power(m2, params.r2) * signed_power(u1[i], params.r1);
        out.second[i] = params.mu2 * power(m2, params.p2 - 2.0) * u2[i] +
                        params.r2 * params.beta * power(m1, params.r1) * signed_power(u2[i], params.r2);
    }
    return out;
}

Pair constrained_gradient(const ModelParams& params, const Pair& state) {
    params.validate_hypotheses();
    if (!state.all_finite()) throw Error(ErrorKind::invalid_field, "state contains NaN or Inf");
    Pair force = nonlinear_force(params, state);
    Pair g(neg_laplacian(state.first) - force.first, neg_laplacian(state.second) - force.second);
    if (!g.all_finite()) throw Error(ErrorKind::overflow, "gradient is not finite");
    return g;
}

std::pair<double, double> multipliers(const ModelParams& params, const Pair& state) {
    params.validate_hypotheses();
    const double coupling = coupling_integral(params, state);
    std::array<double, 2> lambda{0.0, 0.0};
    const std::array<double, 2> mu{params.mu1, params.mu2};
    const std::array<double, 2> p{params.p1, params.p2};
    const std::array<double, 2> r{params.r1, params.r2};
    for (int c = 0; c < 2; ++c) {
        if (!params.is_active(c)) continue;
        const Field& u = state.component(c);
        const double m = mass(u);
        if (!(m > 0.0))
            throw Error(ErrorKind::division_guard,
                        "multiplier of component " + std::to_string(c + 1) + " needs positive mass");
        lambda[c] = (grad_norm_sq(u) - mu[c] * lp_integral(u, p[c]) - r[c] * params.beta * coupling) / m;
    }
    return {lambda[0], lambda[1]};
}

// -- Gagliardo-Nirenberg certificate ------------------------------------------------------

double critical_exponent(int dim) {
    if (dim <= 2) return std::numeric_limits<double>::infinity();
    return 2.0 * dim / (dim - 2.0);
}

HolderExponents choose_holder_exponents(int dim, double r1, double r2) {
    const double inv_crit = 1.0 / critical_exponent(dim);  // 0 when 2* is infinite
    // theta = 1/q: r1 q > 2, r2 q' > 2, r1 q <= 2*, r2 q' <= 2*, q > 1, q' > 1.
    const double lower = std::max({0.0, 1.0 - r2 / 2.0, r1 * inv_crit});
    const double upper = std::min({1.0, r1 / 2.0, 1.0 - r2 * inv_crit});
    if (!(lower < upper))
        throw Error(ErrorKind::hypothesis_violation, "no admissible Hölder exponent for the coupling term");
    const double theta = 0.5 * (lower + upper);
    return {1.0 / theta, 1.0 / (1.0 - theta)};
}

std::string GnCertificate::csv_header() {
    return "alpha1,lp1,grad_factor1,ratio1,integral1,power_bound1,exponent1,"
           "alpha2,lp2,grad_factor2,ratio2,integral2,power_bound2,exponent2,"
           "q,q_conj,coupling_integral,holder_bound,gradient_bound,coupling_ratio,"
           "coupling_exponent1,coupling_exponent2,coupling_exponent_sum,exponents_ok,holder_ok";
}

std::string GnCertificate::csv_row() const {
    std::string row;
    auto add = [&](const std::string& s) {
        if (!row.empty()) row += ',';
        row += s;
    };
    for (const auto& c : components) {
        for (double v : {c.alpha, c.lp, c.grad_factor, c.ratio, c.integral, c.power_bound, c.exponent})
            add(format_double(v));
    }
    for (double v : {holder.q, holder.q_conj, coupling_integral, holder_bound, gradient_bound, coupling_ratio,
                     coupling_exponents[0], coupling_exponents[1], coupling_exponent_sum})
        add(format_double(v));
    add(format_bool(exponents_ok));
    add(format_bool(holder_ok));
    return row;
}

GnCertificate gn_certificate(const ModelParams& params, const Pair& state) {
    params.validate();
    const int n = params.dim;
    if (state.grid().dim != n) throw Error(ErrorKind::domain, "state dimension differs from model dimension");
    for (int c = 0; c < 2; ++c) {
        const double m = mass(state.component(c));
        const double target = params.mass_of(c);
        if (std::abs(m - target) > 1e-8 * std::max(target, 1.0))
            throw Error(ErrorKind::domain, "state mass of component " + std::to_string(c + 1) +
                                               " does not match the prescribed mass");
    }

    GnCertificate cert;
    const std::array<double, 2> p{params.p1, params.p2};
    std::array<double, 2> grad_norm{};
    bool ok = true;
    for (int c = 0; c < 2; ++c) {
        const Field& u = state.component(c);
        auto& out = cert.components[c];
        grad_norm[c] = std::sqrt(grad_norm_sq(u));
        const double l2 = std::sqrt(mass(u));
        out.alpha = n * (p[c] - 2.0) / (2.0 * p[c]);
        out.lp = lp_norm(u, p[c]);
        out.grad_factor = std::pow(grad_norm[c], out.alpha) * std::pow(l2, 1.0 - out.alpha);
        out.ratio = out.grad_factor > 0.0 ? out.lp / out.grad_factor : 0.0;
        out.integral = lp_integral(u, p[c]);
        out.exponent = n * (p[c] - 2.0) / 2.0;
        out.power_bound = std::pow(grad_norm[c], out.exponent);
        ok = ok && out.exponent < 2.0;
    }

    cert.holder = choose_holder_exponents(n, params.r1, params.r2);
    const double q = cert.holder.q;
    const double qc = cert.holder.q_conj;
    cert.coupling_integral = coupling_integral(params, state);
    cert.holder_bound = std::pow(lp_norm(state.first, params.r1 * q), params.r1) *
                        std::pow(lp_norm(state.second, params.r2 * qc), params.r2);
    cert.coupling_exponents = {n * (params.r1 * q - 2.0) / (2.0 * q), n * (params.r2 * qc - 2.0) / (2.0 * qc)};
    cert.coupling_exponent_sum = cert.coupling_exponents[0] + cert.coupling_exponents[1];
    cert.gradient_bound =
        std::pow(grad_norm[0], cert.coupling_exponents[0]) * std::pow(grad_norm[1], cert.coupling_exponents[1]);
    cert.coupling_ratio = cert.gradient_bound > 0.0 ? cert.holder_bound / cert.gradient_bound : 0.0;
    cert.exponents_ok = ok && cert.coupling_exponent_sum < 2.0;
    cert.holder_ok = cert.coupling_integral <= cert.holder_bound * (1.0 + 1e-12);
    return cert;
}

// -- energy splitting --------------------------------------------------------------------

std::string SplittingReport::csv_header() { return "separation,energy_defect,coupling_defect"; }

std::string SplittingReport::csv_row() const {
    return std::to_string(separation) + ',' + format_double(energy_defect) + ',' + format_double(coupling_defect);
}

namespace {

// Mass outside the ball of radius L/8 around the origin, relative to the total.
double outer_mass_fraction(const Field& f) {
    const auto& g = f.grid();
    const double radius = g.extent / 8.0;
    double outside = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = g.multi_index(i);
        double r2 = 0.0;
        for (int d = 0; d < g.dim; ++d) r2 += g.coordinate(idx[d]) * g.coordinate(idx[d]);
        const double w = std::norm(f[i]);
        total += w;
        if (r2 > radius * radius) outside += w;
    }
    return total > 0.0 ? outside / total : 0.0;
}

}  // namespace

SplittingReport splitting_test(const ModelParams& params, const Pair& u, const Pair& w, int separation) {
    params.validate_hypotheses();
    require_same_grid(u.first, w.first);
    const auto& g = u.grid();
    if (std::abs(separation) > g.points / 2)
        throw Error(ErrorKind::wraparound, "separation exceeds half the box and would wrap around");
    for (const Pair* p : {&u, &w})
        for (int c = 0; c < 2; ++c)
            if (outer_mass_fraction(p->component(c)) > 1e-10)
                throw Error(ErrorKind::domain, "splitting test needs states concentrated within radius L/8");

    const Pair moved = translate(w, LatticeShift{separation, 0, 0});
    const Pair s(u.first + moved.first, u.second + moved.second);

    SplittingReport rep;
    rep.separation = separation;
    rep.energy_defect = std::abs(energy(params, s).total - energy(params, u).total - energy(params, w).total);
    rep.coupling_defect = std::abs(coupling_integral(params, s) - coupling_integral(params, u) -
                                   coupling_integral(params, w));
    return rep;
}

}  // namespace nlsys
