#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sparsegen/errors.hpp"
#include "sparsegen/statistics.hpp"

using namespace sparsegen;

namespace {

double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::numbers::sqrt2)); }

RationalOperator derivative() { return RationalOperator::from_coefficients({0.0, 1.0}, {1.0}); }

}  // namespace

TEST_CASE("empirical CDF") {
    const EmpiricalCdf F({3.0, 1.0, 2.0, 2.0});
    CHECK(F(0.5) == 0.0);
    CHECK(F(1.0) == 0.25);
    CHECK(F.left_limit(2.0) == 0.25);
    CHECK(F(2.0) == 0.75);
    CHECK(F(10.0) == 1.0);
    CHECK(F.size() == 4);
    CHECK_THROWS_AS(EmpiricalCdf({}), ConfigError);
    CHECK_THROWS_AS(EmpiricalCdf({1.0, std::nan("")}), ConfigError);
}

TEST_CASE("KS divergence basics") {
    std::mt19937_64 rng{1};
    std::normal_distribution<double> normal;
    std::vector<double> xs(1000);
    for (auto& x : xs) x = normal(rng);
    const EmpiricalCdf F(xs);
    CHECK(ks_divergence(F, F) == 0.0);

    // disjoint supports
    const EmpiricalCdf left({-3.0, -2.0, -1.0});
    const EmpiricalCdf right({1.0, 2.0});
    CHECK(ks_divergence(left, right) == 1.0);
    CHECK(ks_divergence(left, [](double x) { return x < 5.0 ? 0.0 : 1.0; }) == 1.0);

    // hand-computed: samples {0, 1} against the uniform CDF on [0, 2]
    const EmpiricalCdf two({0.0, 1.0});
    CHECK(ks_divergence(two, [](double x) { return std::clamp(x / 2.0, 0.0, 1.0); }) == doctest::Approx(0.5));

    // ties: three equal samples against a CDF equal to 0.5 there
    const EmpiricalCdf ties({1.0, 1.0, 1.0});
    CHECK(ks_divergence(ties, [](double) { return 0.5; }) == doctest::Approx(0.5));
}

TEST_CASE("KS of normal samples against the exact CDF") {
    std::mt19937_64 rng{2024};
    std::normal_distribution<double> normal;
    std::vector<double> xs(100000);
    for (auto& x : xs) x = normal(rng);
    // 99% Kolmogorov quantile 1.63 / sqrt(N)
    CHECK(ks_divergence(EmpiricalCdf(xs), [](double x) { return normal_cdf(x, 1.0); }) < 0.00516);
}

TEST_CASE("two-sample KS agrees with a brute-force scan") {
    std::mt19937_64 rng{5};
    std::uniform_int_distribution<int> die{0, 6};
    std::vector<double> a(57), b(91);
    for (auto& v : a) v = die(rng);
    for (auto& v : b) v = die(rng) + 0.5 * (die(rng) % 2);
    const EmpiricalCdf Fa(a), Fb(b);
    double brute = 0.0;
    for (double x = -1.0; x <= 8.0; x += 0.25) brute = std::max(brute, std::abs(Fa(x) - Fb(x)));
    CHECK(ks_divergence(Fa, Fb) == doctest::Approx(brute));
}

TEST_CASE("Gil-Pelaez reference for Gaussian noise through L = D") {
    const double h = 0.01;
    const auto ref = reference_cdf(LevyLaw::gaussian(0, 1), bspline(derivative(), h));
    const double sd = std::sqrt(h);
    double worst = 0.0;
    for (int i = -60; i <= 60; ++i) {
        const double x = i * sd / 10.0;
        worst = std::max(worst, std::abs(ref(x) - normal_cdf(x, sd)));
    }
    CHECK(worst < 1e-4);
    CHECK(ref.diagnostics().truncation_met);
    CHECK(ref.diagnostics().monotonicity_violation < 1e-6);
    CHECK(ref.diagnostics().tail_mass < 1e-5);
}

TEST_CASE("Gil-Pelaez reproduces the Laplace CDF") {
    // <rect(0,1], w> for Laplace(mu, b) noise is Laplace(mu, b)
    const double mu = 0.3;
    const double b = 0.8;
    const ReferenceCdf ref(LevyLaw::laplace(mu, b), rect_kernel(0.0, 1.0));
    const auto laplace_cdf = [&](double x) {
        return x < mu ? 0.5 * std::exp((x - mu) / b) : 1.0 - 0.5 * std::exp(-(x - mu) / b);
    };
    double worst = 0.0;
    for (int i = -80; i <= 80; ++i) {
        const double x = mu + i * 0.1;
        worst = std::max(worst, std::abs(ref(x) - laplace_cdf(x)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("symmetric laws put half the mass below zero") {
    const auto spline = bspline(RationalOperator::from_coefficients({1.0, 2.0, 1.0}, {1.0}), 0.1);
    for (const auto& law : {LevyLaw::gaussian(0, 2), LevyLaw::laplace(0, 1), LevyLaw::symmetric_stable(1.5, 1.0),
                            LevyLaw::symmetric_stable(0.8, 1.0)}) {
        CAPTURE(law.family_name());
        const auto ref = reference_cdf(law, spline);
        CHECK(ref(0.0) == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("symmetric stable reference against direct stable samples") {
    const double alpha = 1.5;
    const double h = 0.01;
    const auto ref = reference_cdf(LevyLaw::symmetric_stable(alpha, 1.0), bspline(derivative(), h));
    const Stable scaled{alpha, 0.0, 0.0, std::pow(h, 1.0 / alpha)};
    Engine engine{31};
    std::vector<double> xs(1000000);
    for (auto& x : xs) x = sample_stable(scaled, engine);
    CHECK(ks_divergence(EmpiricalCdf(std::move(xs)), ref) < 0.005);
}

TEST_CASE("reference quantile inverts the CDF") {
    const auto ref = reference_cdf(LevyLaw::gamma(2.0, 1.0), bspline(derivative(), 0.5));
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.999}) CHECK(ref(ref.quantile(p)) == doctest::Approx(p).epsilon(1e-6));
    const auto xs = ref.x_table();
    const auto fs = ref.f_table();
    for (std::size_t i = 1; i < fs.size(); ++i) {
        CHECK(xs[i] > xs[i - 1]);
        CHECK(fs[i] >= fs[i - 1]);
    }
    CHECK(ref(-1.0) < 1e-6);  // no mass below zero, up to inversion error
}

TEST_CASE("compound Poisson references are refused with a diagnostic") {
    CHECK_THROWS_AS(reference_cdf(LevyLaw::compound_poisson(1.0, NormalAmplitude{}), bspline(derivative(), 0.01)),
                    NumericalError);
}

TEST_CASE("tune_n") {
    const double h = 0.01;
    TuneOptions opts;
    opts.samples = 2000;
    opts.repetitions = 5;
    opts.seed = 3;

    SUBCASE("threshold 1 accepts the first trial") {
        opts.threshold = 1.0;
        opts.schedule = {5, 50};
        const auto res = tune_n(LevyLaw::gaussian(0, 1), derivative(), h, opts);
        CHECK(res.met);
        CHECK(*res.chosen_n == 5);
        CHECK(res.curve.size() == 2);
        CHECK(res.curve[0].n_jumps == doctest::Approx(0.05));
    }
    SUBCASE("KS decreases with the number of jumps") {
        opts.threshold = 0.1;
        opts.schedule = {10, 1000};
        const auto res = tune_n(LevyLaw::gaussian(0, 1), derivative(), h, opts);
        CHECK(res.curve[1].ks < res.curve[0].ks);
        CHECK(*res.chosen_n == 1000);
        CHECK(res.baseline > 0.0);
    }
    SUBCASE("unreachable threshold reports failure") {
        opts.threshold = 1e-6;
        opts.schedule = {10};
        const auto res = tune_n(LevyLaw::gaussian(0, 1), derivative(), h, opts);
        CHECK_FALSE(res.met);
        CHECK_FALSE(res.chosen_n);
        CHECK(res.curve.size() == 1);
    }
    SUBCASE("validation") {
        opts.schedule = {};
        CHECK_THROWS_AS(tune_n(LevyLaw::gaussian(0, 1), derivative(), h, opts), ConfigError);
        opts.schedule = {10};
        opts.threshold = 0.0;
        CHECK_THROWS_AS(tune_n(LevyLaw::gaussian(0, 1), derivative(), h, opts), ConfigError);
    }
    SUBCASE("deterministic") {
        opts.schedule = {100};
        const auto a = tune_n(LevyLaw::laplace(0, 1), derivative(), h, opts);
        const auto b = tune_n(LevyLaw::laplace(0, 1), derivative(), h, opts);
        CHECK(a.curve[0].ks == b.curve[0].ks);
        CHECK(a.baseline == b.baseline);
    }
}

TEST_CASE("increment samples skip the warm-up cells") {
    const auto u = increment_samples(LevyLaw::gaussian(0, 1), RationalOperator::from_coefficients({1.0, 2.0, 1.0}, {1.0}),
                                     100, 0.01, 500, 1);
    CHECK(u.size() == 500);
}

TEST_CASE("window integral and fractional moments") {
    Trajectory t;
    t.h = 0.25;
    t.values = {0.0, 1.0, 2.0, 3.0, 4.0};
    CHECK(window_integral(t, 1.0) == doctest::Approx(2.0));
    CHECK(window_integral(t, 0.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(window_integral(t, 1.25), ConfigError);
    CHECK_THROWS_AS(window_integral(t, 0.3), ConfigError);

    const std::vector<Trajectory> none;
    const auto zero = fractional_moment(std::span<const Trajectory>(none), 0.4, 1.0);
    CHECK(zero.value == 0.0);
    CHECK(zero.count == 0);

    const std::vector<double> obs{-1.0, 1.0, 8.0, -8.0};
    const auto m = fractional_moment(std::span<const double>(obs), 1.0 / 3.0);
    CHECK(m.value == doctest::Approx(1.5));
    CHECK(m.standard_error == doctest::Approx(std::sqrt(1.0 / 3.0) / 2.0));
    CHECK_THROWS_AS(fractional_moment(std::span<const double>(obs), 1.5), ConfigError);
}

TEST_CASE("closed-form absolute moments") {
    // E|N(0,1)| = sqrt(2/pi)
    CHECK(gaussian_abs_moment(1.0, 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
    // Cauchy: E|X|^p = 1 / cos(pi p / 2)
    CHECK(stable_abs_moment(1.0, 1.0, 0.5) == doctest::Approx(1.0 / std::cos(std::numbers::pi / 4)));
    // alpha = 2 is N(0, 2 c^2)
    CHECK(stable_abs_moment(2.0, 0.5, 0.4) == doctest::Approx(gaussian_abs_moment(std::sqrt(0.5), 0.4)));
    CHECK_THROWS_AS(stable_abs_moment(0.5, 1.0, 0.6), ConfigError);
}

TEST_CASE("Gaussian fractional moment converges for L = D") {
    const double window = 0.01;
    const double h = 1e-4;
    const auto obs = simulate_window_integrals(LevyLaw::gaussian(0, 1), derivative(), 20000, window + 2 * h, h, window,
                                               4000, 17);
    const auto est = fractional_moment(std::span<const double>(obs), 0.4);
    const double target = gaussian_abs_moment(std::sqrt(window * window * window / 3.0), 0.4);
    CHECK(std::abs(est.value - target) < 4.0 * est.standard_error);
}

TEST_CASE("step functions") {
    const StepFunction a{{0.0, 1.0, 1.0}};
    const StepFunction b{{0.5, 1.5, 2.0}};
    CHECK(inner_product(a, b) == doctest::Approx(1.0));
    CHECK(integral(b) == doctest::Approx(2.0));
    CHECK(evaluate(a, 0.0) == 0.0);
    CHECK(evaluate(a, 1.0) == 1.0);
}

TEST_CASE("second-order check") {
    const StepFunction a{{0.0, 1.0, 1.0}};
    const StepFunction disjoint{{1.0, 2.0, 1.0}};
    const auto orth = second_order_check(LevyLaw::gaussian(0, 1), 50, a, disjoint, 4000, 8);
    CHECK(orth.target == 0.0);
    CHECK(std::abs(orth.estimate) <= 3.0 * orth.standard_error);

    const auto same = second_order_check(LevyLaw::gaussian(0, 1), 50, a, a, 4000, 8);
    CHECK(same.target == doctest::Approx(1.0));
    CHECK(std::abs(same.estimate - 1.0) <= 3.0 * same.standard_error);

    CHECK_THROWS_AS(second_order_check(LevyLaw::symmetric_stable(1.5, 1.0), 50, a, a, 10, 1), ConfigError);
}

TEST_CASE("observe_innovation is independent of the thread count") {
    const std::vector<StepFunction> kernels{{{0.0, 1.0, 1.0}}, {{0.25, 0.75, -2.0}}};
    const auto a = observe_innovation(LevyLaw::laplace(0, 1), 30, kernels, 200, 4);
    const auto b = observe_innovation(LevyLaw::laplace(0, 1), 30, kernels, 200, 4);
    CHECK(a == b);
}

TEST_CASE("helpers") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{3, 5, 7, 9};
    const auto fit = linear_fit(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    const std::vector<double> v{1e16, 1.0, -1e16};
    CHECK(compensated_sum(v) == 1.0);
}
