#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sparsegen/levy_laws.hpp"
#include "sparsegen/operators.hpp"
#include "sparsegen/rng.hpp"
#include "sparsegen/synthesis.hpp"

namespace sparsegen {

// ---------------------------------------------------------------------------
// CDFs and KS divergence
// ---------------------------------------------------------------------------

// F(x) = #(samples <= x) / N over a sorted copy of the samples.
class EmpiricalCdf {
public:
    // Throws ConfigError on an empty sample or a NaN.
    explicit EmpiricalCdf(std::vector<double> samples);

    double operator()(double x) const;
    // #(samples < x) / N
    double left_limit(double x) const;

    std::span<const double> samples() const noexcept { return sorted_; }
    std::size_t size() const noexcept { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

struct ReferenceOptions {
    double truncation_tolerance = 1e-8;  // target |Phi(xi_max)|
    double max_xi_ratio = 2000.0;        // cap on xi_max / xi_half for slowly decaying Phi
    double tail_quantile = 1e-6;         // table covers [q, 1 - q] when reachable
    double interpolation_tolerance = 1e-6;
    int min_panels = 256;
    int max_panels = 8192;
    std::size_t max_table = 1 << 13;
};

struct ReferenceDiagnostics {
    double xi_half = 0.0;                 // |Phi| crosses 1/2 around here
    double xi_max = 0.0;                  // inversion integral truncated at this frequency
    double truncation = 0.0;              // max |Phi| observed at and just beyond xi_max
    bool truncation_met = false;          // truncation <= truncation_tolerance
    int panels = 0;
    double quadrature_error = 0.0;        // max |F_P - F_2P| at probe points
    double exponent_error = 0.0;          // max Richardson estimate of the kernel integral
    double tail_mass = 0.0;               // F(x_lo) + 1 - F(x_hi), clamped outside the table
    double monotonicity_violation = 0.0;  // largest decrease in the raw table, before repair
};

// CDF of <phi, w> for a compactly supported kernel phi, recovered from the
// characteristic function by Gil-Pelaez inversion
//   F(x) = 1/2 - (1/pi) int_0^inf Im(exp(-j xi x) Phi(xi)) / xi dxi
// and tabulated on an adaptive grid with linear interpolation. The stored table is
// made monotone (running maximum, clipped to [0, 1]); the size of the repair and the
// truncation are reported in diagnostics(). Outside the table F is 0 or 1.
class ReferenceCdf {
public:
    ReferenceCdf(const LevyLaw& law, const ObservationKernel& kernel, const ReferenceOptions& options = {});

    double operator()(double x) const;
    // Smallest tabulated-interpolant x with F(x) >= p.
    double quantile(double p) const;
    double sample(Engine& engine) const;

    const ReferenceDiagnostics& diagnostics() const noexcept { return diag_; }
    std::span<const double> x_table() const noexcept { return x_; }
    std::span<const double> f_table() const noexcept { return f_; }

private:
    std::vector<double> x_;
    std::vector<double> f_;
    ReferenceDiagnostics diag_;
};

// beta reversed, t -> beta(-t), on knots -deg(P) h, ..., 0.
ObservationKernel reversed_spline_kernel(const BSpline& spline);

// Reference CDF of the increment <beta reversed, w> for the base law.
ReferenceCdf reference_cdf(const LevyLaw& law, const BSpline& spline, const ReferenceOptions& options = {});

// sup_x |F_emp(x) - F(x)|, taken over both one-sided limits at each sample point.
// Throws ConfigError on empty input.
double ks_divergence(const EmpiricalCdf& ecdf, const std::function<double(double)>& cdf);
double ks_divergence(const EmpiricalCdf& ecdf, const ReferenceCdf& ref);
double ks_divergence(const EmpiricalCdf& a, const EmpiricalCdf& b);

// ---------------------------------------------------------------------------
// Tuning n by KS divergence
// ---------------------------------------------------------------------------

struct TuneOptions {
    double threshold = 0.1;
    std::vector<std::int64_t> schedule;  // trial n values, in order
    std::size_t samples = 10000;         // increments per repetition
    int repetitions = 20;
    std::uint64_t seed = 0;
    bool baseline = true;                // also measure exact-sampler KS at the same count
};

struct KsPoint {
    std::int64_t n = 0;
    double n_jumps = 0.0;  // n h
    double ks = 0.0;       // median over repetitions
};

struct TuneResult {
    std::optional<std::int64_t> chosen_n;
    bool met = false;
    std::vector<KsPoint> curve;
    double baseline = 0.0;  // median KS of exact reference samples; 0 when not measured
    ReferenceDiagnostics reference;
};

// Increment samples u[deg(P)], ..., u[deg(P) + samples - 1] of one realization, where the
// B-spline window lies entirely inside [0, T].
std::vector<double> increment_samples(const LevyLaw& law, const RationalOperator& op, std::int64_t n,
                                      double h, std::size_t samples, std::uint64_t seed);

// Throws ConfigError unless threshold is in (0, 1], the schedule is nonempty and every n >= 1.
TuneResult tune_n(const LevyLaw& law, const RationalOperator& op, double h, const TuneOptions& options);

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

struct MomentEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;
};

// Trapezoid approximation of int_0^window s(t) dt from the grid samples.
// window must be a multiple of t.h (relative 1e-9) and the grid must reach it;
// otherwise ConfigError.
double window_integral(const Trajectory& t, double window);

// Mean of |<rect[0, window], s>|^p over the trajectories. Zero trajectories give 0.
MomentEstimate fractional_moment(std::span<const Trajectory> trajectories, double p, double window);
MomentEstimate fractional_moment(std::span<const double> observations, double p);

// window_integral for `trials` independent trajectories on [0, T] (OpenMP across trials,
// trial i seeded from sub-stream (trials, i) of `seed`).
std::vector<double> simulate_window_integrals(const LevyLaw& law, const RationalOperator& op,
                                              std::int64_t n, double T, double h, double window,
                                              std::size_t trials, std::uint64_t seed);

// E|X|^p for X ~ N(0, sigma^2).
double gaussian_abs_moment(double sigma, double p);
// E|X|^p for symmetric alpha-stable X with E exp(j xi X) = exp(-|c xi|^alpha), p < alpha.
double stable_abs_moment(double alpha, double c, double p);

// ---------------------------------------------------------------------------
// Second-order checks on the innovation
// ---------------------------------------------------------------------------

// height on (a, b]
struct StepKernel {
    double a = 0.0;
    double b = 1.0;
    double height = 1.0;
};
using StepFunction = std::vector<StepKernel>;

double evaluate(const StepFunction& phi, double t);
double inner_product(const StepFunction& f, const StepFunction& g);
double integral(const StepFunction& f);

// obs[i][j] = <phi_j, w_n> = sum_k A_k phi_j(tau_k) for trial i. The innovation lives on
// [0, T] with T the right end of the union of supports (all kernels must sit in [0, inf)).
std::vector<std::vector<double>> observe_innovation(const LevyLaw& law, std::int64_t n,
                                                    std::span<const StepFunction> kernels,
                                                    std::size_t trials, std::uint64_t seed);

struct SecondOrderResult {
    double estimate = 0.0;        // mean of <phi1, w_n> <phi2, w_n>
    double standard_error = 0.0;
    double target = 0.0;          // var * <phi1, phi2> + mean^2 * int phi1 * int phi2
    std::size_t trials = 0;
};

// Throws ConfigError for a law without finite variance.
SecondOrderResult second_order_check(const LevyLaw& law, std::int64_t n, const StepFunction& phi1,
                                     const StepFunction& phi2, std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Small helpers shared with the CLI and tests
// ---------------------------------------------------------------------------

double median(std::vector<double> values);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

}  // namespace sparsegen
