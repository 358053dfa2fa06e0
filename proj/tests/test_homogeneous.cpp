#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mfrac/homogeneous.hpp"
#include "mfrac/solution.hpp"
#include "mfrac/verify.hpp"
#include "oracle_util.hpp"

using namespace mfrac;
using oracle::close_abs;
using oracle::close_rel;

namespace {

ProblemSpec make_spec(double alpha, double beta, std::vector<double> p) {
    ProblemSpec spec;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.p = std::move(p);
    return spec;
}

RootSet two_real(double r1, double r2) {
    RootSet rs;
    rs.real_roots = {{r1, 1}, {r2, 1}};
    return rs;
}

} // namespace

TEST_CASE("characteristic_poly") {
    CHECK(characteristic_poly(make_spec(0.5, 1.0, {3.0, 4.0})).coeffs == std::vector<double>{3.0, 4.0, 1.0});
    CHECK(characteristic_poly(make_spec(0.5, 1.0, {4.0, -4.0})).coeffs == std::vector<double>{4.0, -4.0, 1.0});
    CHECK(characteristic_poly(make_spec(1.0, 1.0, {0.0})).coeffs == std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(characteristic_poly(make_spec(1.5, 1.0, {1.0})), validation_error);
}

TEST_CASE("fundamental_set: root structures") {
    SUBCASE("distinct real roots, alpha=0.5, beta=1") {
        const FundamentalSet fs = fundamental_set(two_real(-3.0, -1.0), 0.5, 1.0);
        REQUIRE(fs.order() == 2);
        for (double t : {0.5, 1.0, 2.0, 4.0}) {
            CHECK(close_rel(fs.eval_basis(0, t), std::exp(-6.0 * std::sqrt(t)), 1e-13));
            CHECK(close_rel(fs.eval_basis(1, t), std::exp(-2.0 * std::sqrt(t)), 1e-13));
        }
    }
    SUBCASE("double root 2") {
        RootSet rs;
        rs.real_roots = {{2.0, 2}};
        const FundamentalSet fs = fundamental_set(rs, 0.5, 1.0);
        REQUIRE(fs.order() == 2);
        for (double t : {0.5, 1.5}) {
            const double u = u_of_t(0.5, 1.0, t);
            CHECK(close_rel(fs.eval_basis(0, t), std::exp(2.0 * u), 1e-13));
            CHECK(close_rel(fs.eval_basis(1, t), u * std::exp(2.0 * u), 1e-13));
        }
    }
    SUBCASE("conjugate pair -2 +/- i") {
        RootSet rs;
        rs.complex_pairs = {{-2.0, 1.0, 1}};
        const FundamentalSet fs = fundamental_set(rs, 0.5, 1.0);
        REQUIRE(fs.order() == 2);
        for (double t : {0.5, 1.5, 3.0}) {
            const double u = u_of_t(0.5, 1.0, t);
            CHECK(close_rel(fs.eval_basis(0, t), std::exp(-2.0 * u) * std::cos(u), 1e-13));
            CHECK(close_rel(fs.eval_basis(1, t), std::exp(-2.0 * u) * std::sin(u), 1e-13));
        }
    }
}

TEST_CASE("wronskian_matrix: pinned values") {
    SUBCASE("n=1") {
        RootSet rs;
        rs.real_roots = {{-0.7, 1}};
        const FundamentalSet fs = fundamental_set(rs, 0.5, 1.0);
        const Mat w = wronskian_matrix(fs, 1.3);
        CHECK(w.rows() == 1);
        CHECK(close_rel(w(0, 0), std::exp(-0.7 * u_of_t(0.5, 1.0, 1.3)), 1e-13));
    }
    SUBCASE("classical limit of the two-decaying-modes basis") {
        const FundamentalSet fs = fundamental_set(two_real(-3.0, -1.0), 1.0, 1.0);
        for (double t : {0.8, 1.0, 1.7}) {
            const Mat w = wronskian_matrix(fs, t);
            CHECK(close_rel(w(0, 0), std::exp(-3.0 * t), 1e-12));
            CHECK(close_rel(w(0, 1), std::exp(-t), 1e-12));
            CHECK(close_rel(w(1, 0), -3.0 * std::exp(-3.0 * t), 1e-12));
            CHECK(close_rel(w(1, 1), -std::exp(-t), 1e-12));
            // Cofactor expansion gives 2 e^(-4t).
            CHECK(close_rel(wronskian_det(fs, t), 2.0 * std::exp(-4.0 * t), 1e-12));
        }
    }
}

TEST_CASE("abel_wronskian: pinned values") {
    CHECK(close_rel(abel_wronskian(2.0 * std::exp(-4.0), 1.0, 2.0, 4.0, 1.0, 1.0), 2.0 * std::exp(-8.0), 1e-13));
    CHECK(abel_wronskian(3.25, 1.0, 7.0, 0.0, 0.5, 2.0) == doctest::Approx(3.25));
    CHECK(abel_wronskian(0.0, 1.0, 5.0, 2.3, 0.7, 1.5) == 0.0);
}

TEST_CASE("abel consistency: determinant Wronskian matches the closed form") {
    std::mt19937 rng(313);
    std::uniform_real_distribution<double> rdist(-2.5, 2.5);
    std::uniform_real_distribution<double> bdist(0.4, 2.0);
    const double alphas[] = {0.3, 0.5, 0.8, 1.0};
    const double betas[] = {0.5, 1.0, 2.0};
    for (int trial = 0; trial < 40; ++trial) {
        // Random root structure with n <= 4.
        RootSet rs;
        std::vector<std::complex<double>> all;
        const int kind = trial % 4;
        const double r1 = rdist(rng);
        if (kind == 0) {
            rs.real_roots = {{r1, 1}, {r1 + 1.0 + bdist(rng), 1}};
        } else if (kind == 1) {
            rs.real_roots = {{r1, 2}};
        } else if (kind == 2) {
            rs.complex_pairs = {{r1, bdist(rng), 1}};
        } else {
            rs.real_roots = {{r1, 1}, {r1 + 1.0 + bdist(rng), 1}};
            rs.complex_pairs = {{rdist(rng), bdist(rng), 1}};
        }
        for (const RealRoot& rr : rs.real_roots) {
            for (int i = 0; i < rr.multiplicity; ++i) all.push_back({rr.r, 0.0});
        }
        for (const ComplexPair& cp : rs.complex_pairs) {
            for (int i = 0; i < cp.multiplicity; ++i) {
                all.push_back({cp.re, cp.im});
                all.push_back({cp.re, -cp.im});
            }
        }
        const std::vector<double> coeffs = oracle::expand_monic(all);
        const double p_top = coeffs[coeffs.size() - 2];
        const double alpha = alphas[trial % 4];
        const double beta = betas[trial % 3];
        const FundamentalSet fs = fundamental_set(rs, alpha, beta);
        const double t0 = 0.8;
        const double w0 = wronskian_det(fs, t0);
        for (double t : {1.0, 1.6, 2.4}) {
            const double direct = wronskian_det(fs, t);
            const double abel = abel_wronskian(w0, t0, t, p_top, alpha, beta);
            CHECK(close_rel(direct, abel, 1e-8));
            // Nonvanishing: the Abel form never crosses zero.
            CHECK(direct * w0 > 0.0);
        }
    }
}

TEST_CASE("solve_ivp: pinned systems") {
    const FundamentalSet fs = fundamental_set(two_real(-3.0, -1.0), 1.0, 1.0);
    SUBCASE("constructed from a known solution") {
        const double t0 = 1.0;
        const std::vector<double> y_init = {std::exp(-3.0) + std::exp(-1.0), -3.0 * std::exp(-3.0) - std::exp(-1.0)};
        const std::vector<double> c = solve_ivp(fs, t0, y_init);
        CHECK(close_abs(c[0], 1.0, 1e-12));
        CHECK(close_abs(c[1], 1.0, 1e-12));
    }
    SUBCASE("zero data gives zero constants") {
        const std::vector<double> c = solve_ivp(fs, 1.0, {0.0, 0.0});
        CHECK(c[0] == 0.0);
        CHECK(c[1] == 0.0);
    }
    SUBCASE("first basis column maps to the first unit vector") {
        const double t0 = 0.9;
        const std::vector<double> y_init = {fs.eval_derivative(0, 0, t0), fs.eval_derivative(1, 0, t0)};
        const std::vector<double> c = solve_ivp(fs, t0, y_init);
        CHECK(close_abs(c[0], 1.0, 1e-11));
        CHECK(close_abs(c[1], 0.0, 1e-11));
    }
    SUBCASE("a dependent candidate set is rejected") {
        RootSet degenerate;
        degenerate.real_roots = {{2.0, 1}, {2.0, 1}}; // same root listed twice
        const FundamentalSet bad = fundamental_set(degenerate, 0.5, 1.0);
        CHECK_THROWS_AS(solve_ivp(bad, 1.0, {1.0, 0.0}), singular_wronskian_error);
    }
}

TEST_CASE("basis residuals vanish for the quadratic fixtures") {
    // Residual of every basis function under its own equation, over the full
    // (alpha, beta) grid.
    struct Fixture {
        std::vector<double> p;
        RootSet roots;
    };
    std::vector<Fixture> fixtures;
    fixtures.push_back({{3.0, 4.0}, two_real(-3.0, -1.0)});
    {
        RootSet rs;
        rs.real_roots = {{2.0, 2}};
        fixtures.push_back({{4.0, -4.0}, rs});
    }
    {
        RootSet rs;
        rs.complex_pairs = {{-2.0, 1.0, 1}};
        fixtures.push_back({{5.0, 4.0}, rs});
    }
    const std::vector<double> probes = oracle::linspace(0.5, 5.0, 20);
    for (const Fixture& fx : fixtures) {
        for (double alpha : {0.3, 0.5, 0.8, 1.0}) {
            for (double beta : {0.5, 1.0, 2.0}) {
                const ProblemSpec spec = make_spec(alpha, beta, fx.p);
                const FundamentalSet fs = fundamental_set(fx.roots, alpha, beta);
                for (int j = 0; j < fs.order(); ++j) {
                    const ResidualReport rep = residual_symbolic(spec, fs.basis[static_cast<size_t>(j)], probes, 1e-9);
                    CHECK(rep.pass);
                }
            }
        }
    }
}

TEST_CASE("superposition: random combinations stay solutions") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> cdist(-5.0, 5.0);
    const ProblemSpec spec = make_spec(0.5, 1.0, {3.0, 4.0});
    const FundamentalSet fs = fundamental_set(two_real(-3.0, -1.0), 0.5, 1.0);
    const std::vector<double> probes = oracle::linspace(0.5, 5.0, 20);
    for (int trial = 0; trial < 20; ++trial) {
        const MPolyExp combo = fs.basis[0].scaled(cdist(rng)) + fs.basis[1].scaled(cdist(rng));
        const ResidualReport rep = residual_symbolic(spec, combo, probes, 2.0 * 1e-9);
        CHECK(rep.pass);
    }
}

TEST_CASE("general_solution: symbolic renderings") {
    SUBCASE("distinct real roots") {
        const SolutionBundle b = general_solution(make_spec(0.5, 1.0, {3.0, 4.0}));
        CHECK(b.rendering == "c1*exp(-3*u) + c2*exp(-u)");
        CHECK(b.u_legend == "u = 2*t^0.5");
        REQUIRE(b.roots.real_roots.size() == 2);
        CHECK(close_abs(b.roots.real_roots[0].r, -3.0, 1e-9));
        CHECK(close_abs(b.roots.real_roots[1].r, -1.0, 1e-9));
    }
    SUBCASE("repeated root") {
        const SolutionBundle b = general_solution(make_spec(0.5, 1.0, {4.0, -4.0}));
        CHECK(b.rendering == "(c1 + c2*u)*exp(2*u)");
        REQUIRE(b.roots.real_roots.size() == 1);
        CHECK(b.roots.real_roots[0].multiplicity == 2);
        CHECK(close_abs(b.roots.real_roots[0].r, 2.0, 1e-9));
    }
    SUBCASE("complex pair renders in real form") {
        const SolutionBundle b = general_solution(make_spec(0.5, 1.0, {5.0, 4.0}));
        CHECK(b.rendering == "exp(-2*u)*(c1*cos(u) + c2*sin(u))");
        REQUIRE(b.roots.complex_pairs.size() == 1);
        CHECK(close_abs(b.roots.complex_pairs[0].re, -2.0, 1e-9));
        CHECK(close_abs(b.roots.complex_pairs[0].im, 1.0, 1e-9));
    }
}

TEST_CASE("classical limit: alpha=beta=1 reproduces the classical solution") {
    ProblemSpec spec = make_spec(1.0, 1.0, {3.0, 4.0});
    spec.initial = InitialData{1.0, {std::exp(-3.0) + std::exp(-1.0), -3.0 * std::exp(-3.0) - std::exp(-1.0)}};
    const SolutionBundle b = general_solution(spec);
    REQUIRE(b.constants.has_value());
    for (double t : oracle::linspace(0.5, 4.0, 20)) {
        const double classical = std::exp(-3.0 * t) + std::exp(-t);
        CHECK(close_rel(b.eval(t), classical, 1e-10));
    }
}
