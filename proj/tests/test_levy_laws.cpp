#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sparsegen/errors.hpp"
#include "sparsegen/levy_laws.hpp"

using namespace sparsegen;

namespace {

void check_close(cplx got, double re, double im, double tol = 1e-12) {
    CHECK(got.real() == doctest::Approx(re).epsilon(tol));
    CHECK(got.imag() == doctest::Approx(im).epsilon(tol));
}

std::vector<LevyLaw> sample_laws() {
    return {LevyLaw::gaussian(0.5, 2.0),
            LevyLaw::stable(1.5, 0.5, 0.3, 2.0),
            LevyLaw::stable(1.0, 0.5, -0.2, 2.0),
            LevyLaw::stable(0.7, -0.3, 0.0, 0.5),
            LevyLaw::gamma(2.0, 1.5),
            LevyLaw::laplace(0.1, 1.5),
            LevyLaw::compound_poisson(3.0, NormalAmplitude{0.5, 1.0}),
            LevyLaw::compound_poisson(3.0, UniformAmplitude{-1.0, 2.0}),
            LevyLaw::compound_poisson(3.0, ConstantAmplitude{2.0})};
}

}  // namespace

TEST_CASE("Levy exponents match the closed forms") {
    check_close(levy_exponent(LevyLaw::gaussian(0.5, 2.0), 1.3), -3.3800000000000003, 0.65);
    check_close(levy_exponent(LevyLaw::stable(1.5, 0.5, 0.3, 2.0), 0.7), -1.6565023392678924, -0.6182511696339464);
    check_close(levy_exponent(LevyLaw::stable(1.0, 0.5, 0.0, 2.0), -0.8), -1.6, 0.23937088276988586);
    check_close(levy_exponent(LevyLaw::gamma(2.0, 1.0), 2.0), -1.6094379124341005, 2.214297435588181);
    check_close(levy_exponent(LevyLaw::laplace(0.1, 1.5), 0.4), -0.3074846997479607, 0.04000000000000001);
    check_close(levy_exponent(LevyLaw::compound_poisson(3.0, NormalAmplitude{0.5, 1.0}), 1.0), -1.4031578093529875,
                0.8723588646380755);
    check_close(levy_exponent(LevyLaw::compound_poisson(3.0, UniformAmplitude{-1.0, 2.0}), 1.5), -2.240923336890719,
                0.7071531321787655);
    check_close(levy_exponent(LevyLaw::compound_poisson(3.0, ConstantAmplitude{2.0}), 0.25), -0.3672523143288817,
                1.438276615812609);
}

TEST_CASE("Levy exponent vanishes at zero and is Hermitian") {
    for (const auto& law : sample_laws()) {
        CAPTURE(law.family_name());
        CHECK(std::abs(levy_exponent(law, 0.0)) == doctest::Approx(0.0));
        for (double xi : {0.3, 1.7, 12.0}) {
            const cplx a = levy_exponent(law, xi);
            const cplx b = levy_exponent(law, -xi);
            CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-12));
            CHECK(a.imag() == doctest::Approx(-b.imag()).epsilon(1e-12));
            CHECK(a.real() <= 1e-15);
        }
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(LevyLaw::gaussian(0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::gaussian(0.0, -1.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::stable(2.1, 0.0, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::stable(0.0, 0.0, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::stable(1.5, 1.5, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::stable(1.5, 0.0, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::gamma(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::gamma(1.0, -1.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::laplace(0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(LevyLaw::compound_poisson(0.0, NormalAmplitude{}), ConfigError);
    CHECK_THROWS_AS(LevyLaw::compound_poisson(1.0, UniformAmplitude{1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(LevyLaw::gaussian(std::nan(""), 1.0), ConfigError);
}

TEST_CASE("moments") {
    CHECK(*LevyLaw::gaussian(0.5, 2.0).variance() == doctest::Approx(4.0));
    CHECK(*LevyLaw::gaussian(0.5, 2.0).mean() == doctest::Approx(0.5));
    CHECK(*LevyLaw::gamma(2.0, 4.0).mean() == doctest::Approx(0.5));
    CHECK(*LevyLaw::gamma(2.0, 4.0).variance() == doctest::Approx(0.125));
    CHECK(*LevyLaw::laplace(0.0, 1.0).variance() == doctest::Approx(2.0));
    CHECK(*LevyLaw::stable(2.0, 0.0, 0.0, 1.5).variance() == doctest::Approx(4.5));
    CHECK_FALSE(LevyLaw::stable(1.8, 0.0, 0.0, 1.0).variance());
    CHECK(*LevyLaw::stable(1.8, 0.0, 0.25, 1.0).mean() == doctest::Approx(0.25));
    CHECK_FALSE(LevyLaw::stable(0.9, 0.0, 0.0, 1.0).mean());
    // lambda E[A^2] for A ~ N(0.5, 1): 3 * 1.25
    CHECK(*LevyLaw::compound_poisson(3.0, NormalAmplitude{0.5, 1.0}).variance() == doctest::Approx(3.75));
    CHECK(*LevyLaw::compound_poisson(3.0, ConstantAmplitude{2.0}).mean() == doctest::Approx(6.0));
}

TEST_CASE("n-th root parameters") {
    SUBCASE("gaussian") {
        const auto r = nth_root(LevyLaw::gaussian(1.0, 2.0), 4);
        const auto& g = std::get<Gaussian>(r.params());
        CHECK(g.mu == doctest::Approx(0.25));
        CHECK(g.sigma == doctest::Approx(1.0));
    }
    SUBCASE("stable alpha != 1") {
        const auto r = nth_root(LevyLaw::stable(1.5, 0.3, 0.9, 2.0), 8);
        const auto& s = std::get<Stable>(r.params());
        CHECK(s.mu == doctest::Approx(0.1125));
        CHECK(s.c == doctest::Approx(2.0 * std::pow(8.0, -1.0 / 1.5)));
        CHECK(s.alpha == 1.5);
        CHECK(s.beta == 0.3);
    }
    SUBCASE("stable alpha = 1") {
        const auto r = nth_root(LevyLaw::stable(1.0, 0.5, 0.0, 2.0), 10);
        const auto& s = std::get<Stable>(r.params());
        CHECK(s.c == doctest::Approx(0.2));
        CHECK(s.mu == doctest::Approx(-(2.0 / std::numbers::pi) * 2.0 * 0.5 * std::log(10.0) / 10.0));
    }
    SUBCASE("gamma") {
        const auto& g = std::get<GammaLaw>(nth_root(LevyLaw::gamma(3.0, 2.0), 6).params());
        CHECK(g.shape == doctest::Approx(0.5));
        CHECK(g.rate == 2.0);
    }
    SUBCASE("laplace") {
        const auto& l = std::get<LaplaceRoot>(nth_root(LevyLaw::laplace(0.4, 1.5), 4).params());
        CHECK(l.mu == doctest::Approx(0.1));
        CHECK(l.b == 1.5);
        CHECK(l.shape == doctest::Approx(0.25));
    }
    SUBCASE("compound poisson") {
        const auto& cp = std::get<CompoundPoisson>(nth_root(LevyLaw::compound_poisson(5.0, ConstantAmplitude{}), 5).params());
        CHECK(cp.rate == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(nth_root(LevyLaw::gaussian(0, 1), 0), ConfigError);
}

TEST_CASE("n copies of the root exponent give the base exponent") {
    for (const auto& law : sample_laws()) {
        for (std::int64_t n : {1, 2, 7, 1000}) {
            const auto root = nth_root(law, n);
            for (double xi : {-3.0, -0.4, 0.05, 1.0, 9.5}) {
                CAPTURE(law.family_name());
                CAPTURE(n);
                CAPTURE(xi);
                const cplx base = levy_exponent(law, xi);
                const cplx sum = static_cast<double>(n) * levy_exponent(root, xi);
                CHECK(std::abs(sum - base) <= 1e-10 * (1.0 + std::abs(base)));
            }
        }
    }
}

TEST_CASE("n = 1 root keeps the base parameters exactly") {
    const auto law = LevyLaw::stable(1.0, 0.7, 0.3, 1.7);
    const auto& s = std::get<Stable>(nth_root(law, 1).params());
    CHECK(s.mu == 0.3);
    CHECK(s.c == 1.7);
}

TEST_CASE("root samplers reproduce their characteristic functions") {
    // Empirical characteristic function at two frequencies; 2e5 draws give a standard error below 2.3e-3.
    const std::size_t count = 200000;
    for (const auto& law : sample_laws()) {
        for (std::int64_t n : {1, 3}) {
            const auto root = nth_root(law, n);
            Engine engine{12345};
            const auto draws = sample(root, count, engine);
            for (double xi : {0.35, 1.1}) {
                cplx ecf{0.0, 0.0};
                for (double x : draws) ecf += std::polar(1.0, xi * x);
                ecf /= static_cast<double>(count);
                const cplx exact = std::exp(levy_exponent(root, xi));
                CAPTURE(law.family_name());
                CAPTURE(n);
                CAPTURE(xi);
                CHECK(std::abs(ecf - exact) < 0.012);
            }
        }
    }
}

TEST_CASE("gamma sampler handles tiny shapes") {
    Engine engine{7};
    double sum = 0.0;
    const int count = 400000;
    for (int i = 0; i < count; ++i) {
        const double g = sample_gamma(1e-3, engine);
        REQUIRE(g >= 0.0);
        REQUIRE(std::isfinite(g));
        sum += g;
    }
    // mean 1e-3, standard deviation of the mean sqrt(1e-3 / 4e5) = 5e-5
    CHECK(sum / count == doctest::Approx(1e-3).epsilon(0.25));
}

TEST_CASE("root samples of gamma laws are nonnegative") {
    Engine engine{99};
    const auto draws = sample(nth_root(LevyLaw::gamma(1.0, 1.0), 1000), 10000, engine);
    for (double x : draws) CHECK(x >= 0.0);
}

TEST_CASE("observation through a rectangle reproduces exp(|I| f)") {
    const auto kernel = rect_kernel(0.0, 2.0);
    for (const auto& law : sample_laws()) {
        for (double xi : {0.2, 1.0, 3.0}) {
            const cplx expected = std::exp(2.0 * levy_exponent(law, xi));
            CAPTURE(law.family_name());
            CHECK(std::abs(observation_char(law, kernel, xi) - expected) < 1e-12);
        }
    }
}

TEST_CASE("observation through a hat kernel") {
    const ObservationKernel hat{[](double t) { return t <= 0.0 || t > 2.0 ? 0.0 : (t <= 1.0 ? t : 2.0 - t); },
                                {0.0, 1.0, 2.0}};
    // Gaussian: exp(-xi^2/2 * int hat^2) with int hat^2 = 2/3
    for (double xi : {0.5, 1.5, 4.0}) {
        CHECK(std::abs(observation_char(LevyLaw::gaussian(0, 1), hat, xi) - std::exp(-xi * xi / 3.0)) < 1e-10);
    }
    // Symmetric stable: exp(-|xi|^alpha int hat^alpha) with int hat^alpha = 2 / (alpha + 1)
    const double alpha = 1.5;
    for (double xi : {0.5, 1.5}) {
        const double expected = std::exp(-std::pow(xi, alpha) * 2.0 / (alpha + 1.0));
        CHECK(std::abs(observation_char(LevyLaw::symmetric_stable(alpha, 1.0), hat, xi) - expected) < 1e-7);
    }
    CHECK(observation_char(LevyLaw::gaussian(0, 1), hat, 0.0) == cplx{1.0, 0.0});
}

TEST_CASE("characteristic functional reports the Richardson estimate") {
    const CharacteristicFunctional cf(rect_kernel(0.0, 1.0));
    const auto v = cf.evaluate(LevyLaw::gaussian(0, 1), 2.0);
    CHECK(v.error_estimate < 1e-12);
    CHECK(v.exponent.real() == doctest::Approx(-2.0));
    CHECK(cf.support_length() == doctest::Approx(1.0));
}

TEST_CASE("kernel validation") {
    CHECK_THROWS_AS(rect_kernel(1.0, 1.0), ConfigError);
    const ObservationKernel bad{[](double) { return 1.0; }, {0.0}};
    CHECK_THROWS_AS(observation_char(LevyLaw::gaussian(0, 1), bad, 1.0), ConfigError);
    const ObservationKernel unsorted{[](double) { return 1.0; }, {0.0, 2.0, 1.0}};
    CHECK_THROWS_AS(observation_char(LevyLaw::gaussian(0, 1), unsorted, 1.0), ConfigError);
}

TEST_CASE("law JSON round trip") {
    for (const auto& law : sample_laws()) {
        const auto doc = law_to_json(law);
        CHECK(law_from_json(doc) == law);
        CHECK(law_from_json(nlohmann::json::parse(doc.dump())) == law);
    }
}

TEST_CASE("law JSON errors name the field") {
    using nlohmann::json;
    const auto message = [](const json& doc) {
        try {
            law_from_json(doc);
        } catch (const ConfigError& e) {
            return std::string{e.what()};
        }
        return std::string{};
    };
    CHECK(message(json{{"family", "gaussian"}}).find("law.sigma") != std::string::npos);
    CHECK(message(json{{"family", "gaussian"}, {"sigma", "x"}}).find("law.sigma") != std::string::npos);
    CHECK(message(json{{"family", "cauchy"}}).find("unknown family") != std::string::npos);
    CHECK(message(json{{"sigma", 1}}).find("law.family") != std::string::npos);
    CHECK(message(json{{"family", "stable"}, {"alpha", 1.5}}).find("law.c") != std::string::npos);
    CHECK(message(json{{"family", "compound_poisson"}, {"rate", 1}}).find("law.amplitude") != std::string::npos);
    // beta and mu default to zero
    CHECK(law_from_json(json{{"family", "stable"}, {"alpha", 1.5}, {"c", 1.0}}) == LevyLaw::symmetric_stable(1.5, 1.0));
}
