#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sparsegen/rng.hpp"

namespace sparsegen {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Infinitely divisible families
// ---------------------------------------------------------------------------

struct Gaussian {
    double mu = 0.0;
    double sigma = 1.0;
};

// alpha in (0,2], beta in [-1,1], location mu, scale c > 0.
//
// Levy exponent:
//   alpha != 1:  j mu xi - |c xi|^alpha (1 - j beta sgn(xi) tan(pi alpha / 2))
//   alpha == 1:  j mu xi - c|xi| (1 + j beta (2/pi) sgn(xi) log(c|xi|))
// For beta = 0 both reduce to j mu xi - |c xi|^alpha. The alpha == 1 row keeps
// the scale inside the logarithm so that taking n-th roots shifts the location
// by -(2/pi) c beta log(n) / n.
struct Stable {
    double alpha = 2.0;
    double beta = 0.0;
    double mu = 0.0;
    double c = 1.0;
};

// Shape k, rate lambda. Levy exponent -k log(1 - j xi / lambda).
struct GammaLaw {
    double shape = 1.0;
    double rate = 1.0;
};

// Levy exponent j mu xi - log(1 + b^2 xi^2).
struct Laplace {
    double mu = 0.0;
    double b = 1.0;
};

// Amplitude laws available for compound-Poisson noise.
struct NormalAmplitude {
    double mu = 0.0;
    double sigma = 1.0;
};
struct UniformAmplitude {
    double lo = -1.0;
    double hi = 1.0;
};
struct ConstantAmplitude {
    double value = 1.0;
};
using AmplitudeLaw = std::variant<NormalAmplitude, UniformAmplitude, ConstantAmplitude>;

// Levy exponent lambda (phi_nu(xi) - 1).
struct CompoundPoisson {
    double rate = 1.0;
    AmplitudeLaw amplitude = NormalAmplitude{};
};

using LawFamily = std::variant<Gaussian, Stable, GammaLaw, Laplace, CompoundPoisson>;

// A validated infinitely divisible law. Immutable after construction.
class LevyLaw {
public:
    // Throws ConfigError on out-of-range parameters.
    explicit LevyLaw(LawFamily family);

    static LevyLaw gaussian(double mu, double sigma) { return LevyLaw{Gaussian{mu, sigma}}; }
    static LevyLaw stable(double alpha, double beta, double mu, double c) {
        return LevyLaw{Stable{alpha, beta, mu, c}};
    }
    static LevyLaw symmetric_stable(double alpha, double c) { return stable(alpha, 0.0, 0.0, c); }
    static LevyLaw gamma(double shape, double rate) { return LevyLaw{GammaLaw{shape, rate}}; }
    static LevyLaw laplace(double mu, double b) { return LevyLaw{Laplace{mu, b}}; }
    static LevyLaw compound_poisson(double rate, AmplitudeLaw amplitude) {
        return LevyLaw{CompoundPoisson{rate, amplitude}};
    }

    const LawFamily& family() const noexcept { return family_; }
    std::string family_name() const;

    // Moments of X_rect = <rect_[0,1], w>; empty when they do not exist.
    std::optional<double> mean() const;
    std::optional<double> variance() const;

    friend bool operator==(const LevyLaw&, const LevyLaw&);

private:
    LawFamily family_;
};

cplx levy_exponent(const LevyLaw& law, double xi);

// ---------------------------------------------------------------------------
// n-th roots
// ---------------------------------------------------------------------------

// X = mu + b (G1 - G2) with G1, G2 ~ Gamma(shape, 1) independent.
// The base Laplace law is shape = 1.
struct LaplaceRoot {
    double mu = 0.0;
    double b = 1.0;
    double shape = 1.0;
};

using RootFamily = std::variant<Gaussian, Stable, GammaLaw, LaplaceRoot, CompoundPoisson>;

// The infinitely divisible law with Levy exponent f / n.
class RootLaw {
public:
    const LevyLaw& base() const noexcept { return base_; }
    std::int64_t n() const noexcept { return n_; }
    const RootFamily& params() const noexcept { return params_; }

private:
    friend RootLaw nth_root(const LevyLaw& law, std::int64_t n);
    RootLaw(LevyLaw base, std::int64_t n, RootFamily params)
        : base_(std::move(base)), n_(n), params_(std::move(params)) {}

    LevyLaw base_;
    std::int64_t n_;
    RootFamily params_;
};

// Throws ConfigError for n < 1.
RootLaw nth_root(const LevyLaw& law, std::int64_t n);

cplx levy_exponent(const RootLaw& root, double xi);

// Streaming i.i.d. sampler for a root law. Holds no engine; the caller owns it.
//
// Gamma variates with shape a < 1 are drawn as Gamma(a + 1) * U^(1/a). For very
// small a the factor U^(1/a) underflows to exactly 0.0; this is the correct
// limiting behaviour (the law concentrates at 0) and such draws are kept.
class RootSampler {
public:
    explicit RootSampler(RootLaw root);

    double operator()(Engine& engine);

    const RootLaw& root() const noexcept { return root_; }

private:
    RootLaw root_;
};

std::vector<double> sample(const RootLaw& root, std::size_t count, Engine& engine);

// Draw from Gamma(shape, 1), valid for arbitrarily small shape.
double sample_gamma(double shape, Engine& engine);

// Chambers-Mallows-Stuck draw from the Stable parametrization above.
double sample_stable(const Stable& law, Engine& engine);

// ---------------------------------------------------------------------------
// Characteristic functional for compactly supported kernels
// ---------------------------------------------------------------------------

// A real function on [knots.front(), knots.back()], smooth between consecutive knots.
// Values at the knots themselves are never requested; quadrature uses one-sided limits.
struct ObservationKernel {
    std::function<double(double)> eval;
    std::vector<double> knots;
};

// Indicator of (a, b].
ObservationKernel rect_kernel(double a, double b);

struct CharValue {
    cplx value;              // exp(integral)
    cplx exponent;           // integral of f(xi * kernel(r)) dr
    double error_estimate;   // Richardson estimate of the error in `exponent`
};

// Precomputes the quadrature nodes of a kernel so that many xi can be evaluated cheaply.
// Composite Simpson with 2^10 panels spread over the knot intervals, panel edges on the knots.
class CharacteristicFunctional {
public:
    static constexpr int kPanels = 1024;

    explicit CharacteristicFunctional(const ObservationKernel& kernel);

    CharValue evaluate(const std::function<cplx(double)>& exponent, double xi) const;
    CharValue evaluate(const LevyLaw& law, double xi) const;

    double support_length() const noexcept { return length_; }

private:
    // Distinct kernel values with their accumulated fine and coarse Simpson weights.
    std::vector<double> values_;
    std::vector<double> fine_weights_;
    std::vector<double> coarse_weights_;
    double length_ = 0.0;
};

// exp(int f(xi * kernel(r)) dr). Throws NumericalError when the Richardson estimate
// of the exponent error exceeds `tolerance`.
cplx observation_char(const LevyLaw& law, const ObservationKernel& kernel, double xi,
                      double tolerance = 1e-7);

// ---------------------------------------------------------------------------
// Serialization (schema in docs/schema.md)
// ---------------------------------------------------------------------------

nlohmann::json law_to_json(const LevyLaw& law);
LevyLaw law_from_json(const nlohmann::json& doc);

}  // namespace sparsegen
