#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sparsegen/errors.hpp"
#include "sparsegen/operators.hpp"

using namespace sparsegen;

namespace {

bool has_root(const std::vector<Root>& roots, cplx value, int mult, double tol = 1e-9) {
    return std::any_of(roots.begin(), roots.end(), [&](const Root& r) {
        return std::abs(r.value - value) < tol && r.multiplicity == mult;
    });
}

}  // namespace

TEST_CASE("find_roots") {
    SUBCASE("linear") {
        const std::vector<double> p{2.0, 4.0};
        const auto r = find_roots(p);
        REQUIRE(r.size() == 1);
        CHECK(r[0].value == cplx{-0.5, 0.0});
    }
    SUBCASE("quadratic with complex pair") {
        const std::vector<double> p{5.0, 2.0, 1.0};  // (x + 1)^2 + 4
        const auto r = find_roots(p);
        CHECK(has_root(r, {-1.0, 2.0}, 1));
        CHECK(has_root(r, {-1.0, -2.0}, 1));
    }
    SUBCASE("double root merged") {
        const std::vector<double> p{1.0, 2.0, 1.0};
        const auto r = find_roots(p);
        REQUIRE(r.size() == 1);
        CHECK(r[0].multiplicity == 2);
        CHECK(std::abs(r[0].value + 1.0) < 1e-12);
    }
    SUBCASE("zero roots stripped exactly") {
        const std::vector<double> p{0.0, 0.0, 1.0};
        const auto r = find_roots(p);
        REQUIRE(r.size() == 1);
        CHECK(r[0].value == cplx{0.0, 0.0});
        CHECK(r[0].multiplicity == 2);
    }
    SUBCASE("cubic through the companion matrix") {
        // (x + 1)(x + 2)(x + 3) = x^3 + 6x^2 + 11x + 6
        const std::vector<double> p{6.0, 11.0, 6.0, 1.0};
        const auto r = find_roots(p);
        CHECK(has_root(r, {-1.0, 0.0}, 1));
        CHECK(has_root(r, {-2.0, 0.0}, 1));
        CHECK(has_root(r, {-3.0, 0.0}, 1));
    }
    SUBCASE("degree zero rejected") {
        const std::vector<double> p{3.0};
        CHECK_THROWS_AS(find_roots(p), ConfigError);
    }
}

TEST_CASE("expand_roots inverts find_roots") {
    std::mt19937_64 rng{3};
    std::uniform_real_distribution<double> u{-2.0, 2.0};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> p(5);
        for (auto& v : p) v = u(rng);
        p.back() = 1.5;
        const auto roots = find_roots(p);
        const auto back = expand_roots(roots, 1.5);
        REQUIRE(back.size() == p.size());
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(back[i] == doctest::Approx(p[i]).epsilon(1e-9));
    }
}

TEST_CASE("operator validation") {
    CHECK_THROWS_AS(RationalOperator::from_coefficients({1.0, 1.0}, {1.0, 1.0}), ConfigError);
    try {
        RationalOperator::from_coefficients({1.0, 1.0}, {0.0, 1.0});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string{e.what()}.find("deg(P) > deg(Q)") != std::string::npos);
    }
    CHECK_THROWS_AS(RationalOperator::from_coefficients({1.0}, {1.0}), ConfigError);
    CHECK_THROWS_AS(RationalOperator::from_coefficients({1.0, 0.0}, {1.0}), ConfigError);
    CHECK_THROWS_AS(RationalOperator::from_roots({Root{{-1.0, 1.0}, 1}}, {1.0}), ConfigError);
    CHECK_NOTHROW(RationalOperator::from_roots({Root{{-1.0, 1.0}, 1}, Root{{-1.0, -1.0}, 1}}, {1.0}));
}

TEST_CASE("operator JSON round trip") {
    const auto a = RationalOperator::from_coefficients({2.0, 3.0, 1.0}, {1.0, 0.5});
    const auto b = RationalOperator::from_json(a.to_json());
    CHECK(b.p_coeffs() == a.p_coeffs());
    CHECK(b.q_coeffs() == a.q_coeffs());
    const auto c = RationalOperator::from_roots({Root{{-1.0, 0.0}, 2}}, {1.0}, 2.0);
    const auto d = RationalOperator::from_json(c.to_json());
    CHECK(d.order() == 2);
    CHECK(d.lead() == 2.0);
    CHECK(has_root(d.roots(), {-1.0, 0.0}, 2));
    CHECK_THROWS_AS(RationalOperator::from_json(nlohmann::json{{"Q_coeffs", {1.0}}}), ConfigError);
}

TEST_CASE("stability flags") {
    CHECK(RationalOperator::from_coefficients({1.0, 1.0}, {1.0}).is_stable());
    CHECK_FALSE(RationalOperator::from_coefficients({0.0, 1.0}, {1.0}).is_stable());
    CHECK_FALSE(RationalOperator::from_coefficients({0.0, 1.0}, {1.0}).has_anticausal_part());
    CHECK(RationalOperator::from_coefficients({-0.5, 1.0}, {1.0}).has_anticausal_part());
}

TEST_CASE("Green's functions of simple operators") {
    SUBCASE("D gives the unit step") {
        const auto g = greens_function(RationalOperator::from_coefficients({0.0, 1.0}, {1.0}));
        CHECK(g(-0.5) == 0.0);
        CHECK(g(0.0) == 0.0);
        CHECK(g(0.3) == doctest::Approx(1.0));
    }
    SUBCASE("(D + 1)(D + 2)") {
        const auto g = greens_function(RationalOperator::from_coefficients({2.0, 3.0, 1.0}, {1.0}));
        for (double t : {0.1, 0.7, 2.5}) CHECK(g(t) == doctest::Approx(std::exp(-t) - std::exp(-2 * t)).epsilon(1e-10));
        CHECK(g(-1.0) == 0.0);
    }
    SUBCASE("(D + 1)^2") {
        const auto g = greens_function(RationalOperator::from_coefficients({1.0, 2.0, 1.0}, {1.0}));
        for (double t : {0.1, 1.0, 3.0}) CHECK(g(t) == doctest::Approx(t * std::exp(-t)).epsilon(1e-10));
    }
    SUBCASE("(D + 3) / ((D + 1)(D + 2))") {
        const auto g = greens_function(RationalOperator::from_coefficients({2.0, 3.0, 1.0}, {3.0, 1.0}));
        for (double t : {0.05, 0.8, 2.0}) {
            CHECK(g(t) == doctest::Approx(2 * std::exp(-t) - std::exp(-2 * t)).epsilon(1e-10));
        }
    }
    SUBCASE("damped oscillator (D + 1)^2 + 4") {
        const auto g = greens_function(RationalOperator::from_coefficients({5.0, 2.0, 1.0}, {1.0}));
        for (double t : {0.1, 1.3, 4.0}) {
            CHECK(g(t) == doctest::Approx(std::exp(-t) * std::sin(2 * t) / 2).epsilon(1e-9));
        }
    }
    SUBCASE("D - I is anticausal") {
        const auto g = greens_function(RationalOperator::from_coefficients({-1.0, 1.0}, {1.0}));
        CHECK(g(-1.0) == doctest::Approx(-std::exp(-1.0)));
        CHECK(g(0.5) == 0.0);
    }
    SUBCASE("D^3") {
        const auto g = greens_function(RationalOperator::from_coefficients({0.0, 0.0, 0.0, 1.0}, {1.0}));
        CHECK(g(2.0) == doctest::Approx(2.0));
    }
}

TEST_CASE("partial fractions are well conditioned on separated roots") {
    const auto pf = partial_fractions(RationalOperator::from_coefficients({6.0, 11.0, 6.0, 1.0}, {1.0}));
    CHECK(pf.residual < 1e-8);
    CHECK(pf.condition_number < 1e12);
    CHECK(pf.atoms.size() == 3);
}

TEST_CASE("FIR taps") {
    const auto d2 = fir_filter(RationalOperator::from_coefficients({0.0, 0.0, 1.0}, {1.0}), 1.0);
    REQUIRE(d2.taps.size() == 3);
    CHECK(d2.taps[0] == 1.0);
    CHECK(d2.taps[1] == -2.0);
    CHECK(d2.taps[2] == 1.0);

    const double h = 0.1;
    const auto f = fir_filter(RationalOperator::from_coefficients({2.0, 3.0, 1.0}, {1.0}), h);
    const double a = std::exp(-h);
    const double b = std::exp(-2 * h);
    CHECK(f.taps[0] == 1.0);
    CHECK(f.taps[1] == doctest::Approx(-(a + b)));
    CHECK(f.taps[2] == doctest::Approx(a * b));
    CHECK(f.order() == 2);
}

TEST_CASE("B-splines") {
    SUBCASE("D: rectangle on (0, h]") {
        const auto beta = bspline(RationalOperator::from_coefficients({0.0, 1.0}, {1.0}), 0.25);
        CHECK(beta(0.1) == doctest::Approx(1.0));
        CHECK(beta(0.25) == doctest::Approx(1.0));
        CHECK(beta(0.3) == doctest::Approx(0.0));
        CHECK(beta(0.0) == 0.0);
        CHECK(beta.in_support(0.25));
        CHECK_FALSE(beta.in_support(0.0));
    }
    SUBCASE("D^2: hat on [0, 2h]") {
        const auto beta = bspline(RationalOperator::from_coefficients({0.0, 0.0, 1.0}, {1.0}), 0.5);
        for (double t : {0.1, 0.5, 0.8, 1.0}) {
            const double hat = t <= 0.5 ? t : 1.0 - t;
            CHECK(beta(t) == doctest::Approx(hat).epsilon(1e-12));
        }
        CHECK(std::abs(beta(1.3)) < 1e-12);
        CHECK(beta.support_end() == doctest::Approx(1.0));
    }
    SUBCASE("exponential spline D + a") {
        // beta(t) = e^{-a t} on (0, h]
        const double a = 2.0;
        const double h = 0.3;
        const auto beta = bspline(RationalOperator::from_coefficients({a, 1.0}, {1.0}), h);
        CHECK(beta(0.2) == doctest::Approx(std::exp(-a * 0.2)));
        CHECK(std::abs(beta(0.5)) < 1e-12);
    }
    SUBCASE("compact support for a third-order rational operator") {
        const double h = 0.05;
        const auto beta = bspline(RationalOperator::from_coefficients({6.0, 11.0, 6.0, 1.0}, {0.5, 1.0}), h);
        for (int i = 0; i < 50; ++i) {
            const double t = 3 * h + 1e-3 + i * 0.02;
            CHECK(std::abs(beta(t)) < 1e-10);
        }
        CHECK(beta(-0.01) == 0.0);
    }
}
