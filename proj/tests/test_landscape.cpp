#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "nlsys/error.hpp"
#include "nlsys/landscape.hpp"

using namespace nlsys;
using namespace testutil;

namespace {

double cubic(double a) { return -a * a * a / 96; }

/// Exact table of the decoupled cubic law m(a1, a2) = -(a1^3 + a2^3) / 96.
MassGrid cubic_table(std::vector<double> a1, std::vector<double> a2) {
    MassGrid t;
    t.a1_values = std::move(a1);
    t.a2_values = std::move(a2);
    t.tol_solver = 1e-8;
    for (double x : t.a1_values)
        for (double y : t.a2_values) t.entries.push_back({x, y, cubic(x) + cubic(y), 0, 0, 0, true});
    return t;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::io;
}

const MassGrid& small_scan() {
    static const MassGrid t = [] {
        const std::vector<double> masses{0.0, 0.5, 1.0};
        return scan(benchmark(), grid1(32, 256), masses, masses, SolverConfig{}, ScanOptions{true, 2});
    }();
    return t;
}

}  // namespace

TEST_CASE("single-component row follows the cubic law") {
    // wide box: the a = 0.5 soliton decays on a scale of 8
    const std::vector<double> a1{0.5, 1.0, 2.0};
    const std::vector<double> a2{0.0};
    const MassGrid t = scan(benchmark(), grid1(128, 2048), a1, a2, SolverConfig{}, ScanOptions{true, 3});
    for (std::size_t i = 0; i < a1.size(); ++i) {
        const MassPoint& p = t.at(i, 0);
        REQUIRE(p.converged);
        CHECK(rel(p.energy, cubic(a1[i])) < 1e-4);
        CHECK(p.lambda2 == 0.0);
    }
}

TEST_CASE("two-component scan") {
    const MassGrid& t = small_scan();
    REQUIRE(t.entries.size() == 9u);
    CHECK(t.at(0, 0).energy == 0.0);
    CHECK(t.at(0, 0).converged);
    for (const auto& e : t.entries) CHECK(e.converged);

    // coupling lowers the energy below the decoupled sum
    for (std::size_t i = 1; i < 3; ++i)
        for (std::size_t j = 1; j < 3; ++j) CHECK(t.at(i, j).energy <= t.at(i, 0).energy + t.at(0, j).energy);

    // equal exponents and coefficients: the table is symmetric
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(std::abs(t.at(i, j).energy - t.at(j, i).energy) <= 2 * t.tol_solver);

    CHECK(check_negativity(t).passed);
    const SubadditivityReport sub = check_subadditivity(t, 1e-4);
    CHECK(sub.passed);
    CHECK(sub.checked > 0);
    CHECK(sub.skipped == 0);
    const MonotonicityReport mono = check_monotonicity(t);
    CHECK(mono.passed);
    CHECK(mono.confirmed == 12);

    // adding mass to the second component at a1 = 1 lowers m
    CHECK(t.at(2, 2).energy < t.at(2, 1).energy);
}

TEST_CASE("warm and cold scans agree") {
    const std::vector<double> masses{0.0, 0.5, 1.0};
    const MassGrid cold = scan(benchmark(), grid1(32, 256), masses, masses, SolverConfig{}, ScanOptions{false, 2});
    const MassGrid& warm = small_scan();
    for (std::size_t i = 0; i < cold.entries.size(); ++i) {
        if (!cold.entries[i].converged || !warm.entries[i].converged) continue;
        CHECK(std::abs(cold.entries[i].energy - warm.entries[i].energy) <= 1e-6);
    }
}

TEST_CASE("scans are independent of the thread count") {
    const std::vector<double> masses{0.0, 0.5, 1.0};
    const MassGrid serial = scan(benchmark(), grid1(32, 256), masses, masses, SolverConfig{}, ScanOptions{true, 1});
    CHECK(serial.to_csv() == small_scan().to_csv());
}

TEST_CASE("weakest corner is still bound") {
    const std::vector<double> corner{0.1};
    const MassGrid t = scan(benchmark(), grid1(256, 2048), corner, corner, SolverConfig{}, ScanOptions{});
    REQUIRE(t.at(0, 0).converged);
    CHECK(t.at(0, 0).energy < -1e-10);
}

TEST_CASE("mass lists are validated") {
    const std::vector<double> good{0.0, 1.0};
    const std::vector<double> unsorted{1.0, 0.5};
    const std::vector<double> negative{-0.5, 1.0};
    const GridSpec g = grid1(16, 64);
    CHECK(kind_of([&] { (void)scan(benchmark(), g, unsorted, good, SolverConfig{}); }) == ErrorKind::configuration);
    CHECK(kind_of([&] { (void)scan(benchmark(), g, good, negative, SolverConfig{}); }) == ErrorKind::configuration);
}

TEST_CASE("subadditivity on the cubic closed form") {
    const MassGrid t = cubic_table({0, 0.5, 1, 1.5, 2}, {0});
    const SubadditivityReport r = check_subadditivity(t, 1e-4);
    CHECK(r.passed);
    CHECK(r.violations.empty());

    // m(2a, 0) vs m(a, 0) + m(a, 0): gap 6 a^3 / 96
    bool found = false;
    for (const auto& c : r.strict) {
        if (c.a1 == 2.0 && c.b1 == 1.0) {
            found = true;
            CHECK(c.rhs - c.lhs == doctest::Approx(6.0 / 96).epsilon(1e-12));
        }
    }
    CHECK(found);

    // b = 0 and b = a are equalities and never counted as strict
    for (const auto& c : r.strict) {
        CHECK(c.b1 + c.b2 != 0.0);
        CHECK_FALSE((c.b1 == c.a1 && c.b2 == c.a2));
    }
}

TEST_CASE("subadditivity requires a difference-closed grid") {
    CHECK(kind_of([] { (void)check_subadditivity(cubic_table({0, 1, 3}, {0}), 1e-4); }) == ErrorKind::configuration);
    CHECK(kind_of([] { (void)check_subadditivity(cubic_table({0.5, 1}, {0}), 1e-4); }) == ErrorKind::configuration);
    CHECK_NOTHROW((void)check_subadditivity(cubic_table({0, 0.1, 0.2, 0.3}, {0, 0.1}), 1e-4));
}

TEST_CASE("a corrupted entry is reported as a violation") {
    MassGrid t = cubic_table({0, 1, 2}, {0, 1, 2});
    t.at(2, 2).energy = 0.5;
    const SubadditivityReport sub = check_subadditivity(t, 1e-4);
    CHECK_FALSE(sub.passed);
    const NegativityReport neg = check_negativity(t);
    CHECK_FALSE(neg.passed);
    REQUIRE(neg.violations.size() == 1u);
    CHECK(neg.violations[0].a1 == 2.0);
    const MonotonicityReport mono = check_monotonicity(t);
    CHECK_FALSE(mono.passed);
    const std::string csv = violations_csv(neg, sub, mono, t.tol_solver);
    CHECK(csv.rfind("kind,a1,a2,b1,b2,value,bound\n", 0) == 0);
    CHECK(csv.find("negativity,2,2") != std::string::npos);
    CHECK(csv.find("subadditivity,") != std::string::npos);
    CHECK(csv.find("monotonicity,") != std::string::npos);

    // inflation is exactly 2 tol: a bump just inside is tolerated, just outside is not
    MassGrid edge = cubic_table({0, 1, 2}, {0});
    const double rhs = 2 * cubic(1);
    edge.at(2, 0).energy = rhs + 1.9 * edge.tol_solver;
    CHECK(check_subadditivity(edge, 1e-4).passed);
    edge.at(2, 0).energy = rhs + 2.1 * edge.tol_solver;
    CHECK_FALSE(check_subadditivity(edge, 1e-4).passed);
}

TEST_CASE("unconverged points are skipped") {
    MassGrid t = cubic_table({0, 1, 2}, {0});
    t.at(1, 0).converged = false;
    t.at(1, 0).energy = 10.0;
    const NegativityReport neg = check_negativity(t);
    CHECK(neg.passed);
    CHECK(neg.skipped == 1);
    const SubadditivityReport sub = check_subadditivity(t, 1e-4);
    CHECK(sub.passed);
    CHECK(sub.skipped > 0);
    CHECK(check_monotonicity(t).passed);
}

TEST_CASE("monotonicity semantics") {
    const MonotonicityReport exact = check_monotonicity(cubic_table({0, 0.5, 1, 2}, {0}));
    CHECK(exact.passed);
    CHECK(exact.confirmed == 3);
    CHECK(exact.inconclusive.empty());

    MassGrid flat = cubic_table({0, 1, 2}, {0});
    flat.at(2, 0).energy = flat.at(1, 0).energy + 0.5 * flat.tol_solver;
    const MonotonicityReport r = check_monotonicity(flat);
    CHECK(r.passed);
    CHECK(r.inconclusive.size() == 1u);
    CHECK(r.confirmed == 1);
}

TEST_CASE("continuity interpolation") {
    // defect of linear interpolation on the cubic equals its exact second difference
    const double lo = 0.5, mid = 1.0, hi = 1.5;
    const double want = std::abs(cubic(mid) - 0.5 * (cubic(lo) + cubic(hi)));
    CHECK(interpolation_defect(lo, cubic(lo), mid, cubic(mid), hi, cubic(hi)) == doctest::Approx(want).epsilon(1e-14));
    CHECK(interpolation_defect(1.0, -0.3, 1.0, -0.3, 1.0, -0.3) == 0.0);

    const ContinuityReport rep = check_continuity(cubic_table({0, 0.5, 1, 1.5}, {0, 0.5, 1, 1.5}));
    int diagonal = 0;
    for (const auto& s : rep.samples) {
        CHECK(s.discrepancy >= 0.0);
        if (s.along == "diagonal") ++diagonal;
    }
    CHECK(diagonal == 2);
    CHECK(rep.constant > 0.0);

    // two-component midpoint (0.5, 0.5) between (0, 0) and (1, 1)
    const ContinuityReport solved = check_continuity(small_scan());
    bool seen = false;
    for (const auto& s : solved.samples)
        if (s.along == "diagonal" && s.a_mid == 0.5) {
            seen = true;
            CHECK(s.discrepancy < 0.5);
        }
    CHECK(seen);
}

TEST_CASE("mass table csv round trip") {
    const MassGrid& t = small_scan();
    std::stringstream in(t.to_csv());
    const MassGrid back = MassGrid::from_csv(in, t.tol_solver);
    CHECK(back.a1_values == t.a1_values);
    CHECK(back.a2_values == t.a2_values);
    CHECK(back.to_csv() == t.to_csv());

    std::stringstream bad_header("a1,a2,energy\n");
    CHECK(kind_of([&] { (void)MassGrid::from_csv(bad_header, 1e-8); }) == ErrorKind::io);
    std::stringstream bad_row(MassGrid::csv_header() + "\n0,0,x,0,0,0,1\n");
    try {
        (void)MassGrid::from_csv(bad_row, 1e-8);
        FAIL("bad number accepted");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::stringstream incomplete(MassGrid::csv_header() + "\n0,0,0,0,0,0,1\n1,1,-1,0,0,0,1\n");
    CHECK(kind_of([&] { (void)MassGrid::from_csv(incomplete, 1e-8); }) == ErrorKind::io);
}
