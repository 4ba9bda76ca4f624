#include <doctest.h>

#include "helpers.hpp"
#include "nlsys/error.hpp"
#include "nlsys/minimizer.hpp"

using namespace nlsys;
using namespace testutil;

namespace {

const GroundState& benchmark_state() {
    static const GroundState gs = solve(benchmark(), grid1(32, 512), SolverConfig{});
    return gs;
}

}  // namespace

TEST_CASE("solver config validation") {
    CHECK_NOTHROW(SolverConfig{}.validate());
    SolverConfig c;
    c.step = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SolverConfig{};
    c.tol_residual = -1;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SolverConfig{};
    c.max_iters = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SolverConfig{};
    c.init = InitKind::file;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("normalization") {
    const GridSpec g = grid1(16, 128);
    const Pair u = normalize_to_masses(ModelParams{}.with_masses(0.3, 2.0), Pair(gaussian(g, 1), gaussian(g, 2)));
    CHECK(rel(mass(u.first), 0.3) < 1e-14);
    CHECK(rel(mass(u.second), 2.0) < 1e-14);
    try {
        (void)normalize_to_masses(ModelParams{}, Pair(gaussian(g, 1), Field(g)));
        FAIL("collapsed component accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::collapse);
    }
    // absent components are forced to zero
    CHECK(normalize_to_masses(single(1.0), Pair(gaussian(g, 1), gaussian(g, 1))).second.is_zero());
}

TEST_CASE("soliton ground state") {
    // L = 64: at L = 32 the periodic images shift m by ~9e-5 (see the acceptance report)
    const GroundState gs = solve(single(1.0), grid1(64, 1024), SolverConfig{});
    CHECK(gs.converged);
    CHECK(std::abs(gs.energy + 1.0 / 96) < 1e-5);
    CHECK(std::abs(gs.lambda1 + 1.0 / 16) < 1e-4);
    CHECK(gs.lambda2 == 0.0);
    CHECK(gs.negative_multipliers(single(1.0)));
    CHECK(gs.state.second.is_zero());

    SUBCASE("flow step keeps the converged state fixed") {
        for (double tau : {0.1, 0.01}) {
            const Pair next = flow_step(single(1.0), gs.state, tau);
            CHECK(h1_distance(next, gs.state) < 1e-6);
        }
    }
    SUBCASE("residual of the discrete soliton") {
        CHECK(residual(single(1.0), gs.state, gs.lambda1, gs.lambda2) <= 1e-5);
    }
}

TEST_CASE("flow step properties") {
    const GridSpec g = grid1(32, 256);
    std::mt19937_64 rng(2);
    const ModelParams p;
    for (int trial = 0; trial < 5; ++trial) {
        const Pair u = normalize_to_masses(p, Pair(random_smooth(g, rng), random_smooth(g, rng)));
        const Pair next = flow_step(p, u, 0.3);
        CHECK(rel(mass(next.first), 1.0) < 1e-14);
        CHECK(rel(mass(next.second), 1.0) < 1e-14);

        // energy slope along the flow is negative and the change is O(tau)
        const double e0 = energy(p, u).total;
        const double d1 = energy(p, flow_step(p, u, 1e-3)).total - e0;
        const double d2 = energy(p, flow_step(p, u, 5e-4)).total - e0;
        CHECK(d1 < 0.0);
        CHECK(d2 < 0.0);
        CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.05));
    }
    CHECK_THROWS_AS((void)flow_step(p, normalize_to_masses(p, Pair(gaussian(g, 1), gaussian(g, 1))), 0.0), Error);
}

TEST_CASE("symmetric benchmark ground state") {
    const GroundState& gs = benchmark_state();
    REQUIRE(gs.converged);
    CHECK(gs.residual <= SolverConfig{}.tol_residual);
    CHECK(gs.energy < 0.0);
    CHECK(rel(mass(gs.state.first), 1.0) < 1e-10);
    CHECK(rel(mass(gs.state.second), 1.0) < 1e-10);
    CHECK(gs.lambda1 < 0.0);
    CHECK(gs.lambda2 < 0.0);
    CHECK(gs.negative_multipliers(benchmark()));

    // trial state u1 = u2 = soliton of the effective equation with mu + 2 beta = 3
    const GridSpec g = gs.state.grid();
    const Field phi = sech_soliton(g, 3.0, 1.0);
    CHECK(gs.energy <= energy(benchmark(), Pair(phi, phi)).total + 1e-8);
    CHECK(gs.energy == doctest::Approx(-0.1875).epsilon(1e-8));

    // multipliers are the Rayleigh quotients of the fixed point
    const auto [l1, l2] = multipliers(benchmark(), gs.state);
    CHECK(residual(benchmark(), gs.state, l1, l2) <= SolverConfig{}.tol_residual);

    // energy never increases after a short transient
    for (std::size_t i = 11; i < gs.history.size(); ++i)
        CHECK(gs.history[i].energy <= gs.history[i - 1].energy + 1e-13);

    const std::string csv = gs.history_csv();
    CHECK(csv.rfind("iter,energy,residual,lambda1,lambda2\n", 0) == 0);
}

TEST_CASE("residual invariances") {
    const GridSpec g = grid1(16, 128);
    CHECK(residual(ModelParams{}, Pair(g), 0.0, 0.0) == 0.0);
    std::mt19937_64 rng(9);
    const Pair u(random_smooth(g, rng), random_smooth(g, rng));
    Pair rotated = u;
    rotated.first *= std::polar(1.0, 1.1);
    rotated.second *= std::polar(1.0, -0.4);
    const double r = residual(ModelParams{}, u, -0.3, -0.2);
    CHECK(std::abs(residual(ModelParams{}, rotated, -0.3, -0.2) - r) <= 1e-13 * r);
}

TEST_CASE("iteration cap leaves the run unconverged") {
    SolverConfig c;
    c.max_iters = 3;
    const GroundState gs = solve(benchmark(), grid1(32, 256), c);
    CHECK_FALSE(gs.converged);
    CHECK(gs.iters == 3);
    CHECK(gs.history.size() == 4u);
}

TEST_CASE("solves are deterministic") {
    SolverConfig c;
    c.init = InitKind::noise;
    c.seed = 42;
    const GroundState a = solve(benchmark(), grid1(32, 256), c);
    const GroundState b = solve(benchmark(), grid1(32, 256), c);
    CHECK(a.history_csv() == b.history_csv());
    CHECK(h1_distance(a.state, b.state) == 0.0);
}

TEST_CASE("multistart precompactness proxy") {
    const GridSpec g = grid1(32, 512);
    SUBCASE("identical seeds give zero spread") {
        const std::vector<std::uint64_t> seeds{7, 7};
        const MultistartReport r = multistart_compactness(benchmark(), g, SolverConfig{}, seeds);
        CHECK(r.energy_spread == 0.0);
        CHECK(r.max_aligned_distance == 0.0);
    }
    SUBCASE("five seeds on the benchmark") {
        const MultistartReport r = multistart_compactness(benchmark(), g, SolverConfig{}, 5, 1);
        CHECK(r.all_converged);
        CHECK(r.energy_spread <= 1e-6);
        CHECK(r.max_aligned_distance <= 1e-3);
        CHECK(r.passed);
    }
    SUBCASE("translated start converges to a translate") {
        SolverConfig c;
        c.init = InitKind::file;
        const Field moved = gaussian(g, 3.0, 5.0);
        c.start = Pair(moved, moved);
        const GroundState gs = solve(benchmark(), g, c);
        REQUIRE(gs.converged);
        CHECK(align(benchmark_state().state, gs.state).distance <= 1e-3);
    }
    CHECK_THROWS_AS((void)multistart_compactness(benchmark(), g, SolverConfig{}, 1, 0), Error);
}
