#include "sparsegen/levy_laws.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "sparsegen/errors.hpp"

namespace sparsegen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kJ{0.0, 1.0};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

bool finite(double x) { return std::isfinite(x); }

void validate(const AmplitudeLaw& amp) {
    std::visit(overloaded{
                   [](const NormalAmplitude& a) {
                       require(finite(a.mu), "amplitude.mu must be finite");
                       require(finite(a.sigma) && a.sigma > 0.0, "amplitude.sigma must be > 0");
                   },
                   [](const UniformAmplitude& a) {
                       require(finite(a.lo) && finite(a.hi) && a.lo < a.hi,
                               "amplitude requires finite lo < hi");
                   },
                   [](const ConstantAmplitude& a) {
                       require(finite(a.value), "amplitude.value must be finite");
                   },
               },
               amp);
}

void validate(const LawFamily& family) {
    std::visit(overloaded{
                   [](const Gaussian& g) {
                       require(finite(g.mu), "gaussian: mu must be finite");
                       require(finite(g.sigma) && g.sigma > 0.0, "gaussian: sigma must be > 0");
                   },
                   [](const Stable& s) {
                       require(finite(s.alpha) && s.alpha > 0.0 && s.alpha <= 2.0,
                               "stable: alpha must lie in (0, 2]");
                       require(finite(s.beta) && s.beta >= -1.0 && s.beta <= 1.0,
                               "stable: beta must lie in [-1, 1]");
                       require(finite(s.mu), "stable: mu must be finite");
                       require(finite(s.c) && s.c > 0.0, "stable: c must be > 0");
                   },
                   [](const GammaLaw& g) {
                       require(finite(g.shape) && g.shape > 0.0, "gamma: shape must be > 0");
                       require(finite(g.rate) && g.rate > 0.0, "gamma: rate must be > 0");
                   },
                   [](const Laplace& l) {
                       require(finite(l.mu), "laplace: mu must be finite");
                       require(finite(l.b) && l.b > 0.0, "laplace: b must be > 0");
                   },
                   [](const CompoundPoisson& cp) {
                       require(finite(cp.rate) && cp.rate > 0.0,
                               "compound_poisson: rate must be > 0");
                       validate(cp.amplitude);
                   },
               },
               family);
}

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

cplx stable_exponent(const Stable& s, double xi) {
    if (xi == 0.0) return {0.0, 0.0};
    const double drift = s.mu * xi;
    if (s.alpha == 1.0) {
        const double a = s.c * std::abs(xi);
        return cplx{-a, drift - a * s.beta * (2.0 / kPi) * sgn(xi) * std::log(a)};
    }
    const double a = std::pow(std::abs(s.c * xi), s.alpha);
    const double skew = s.beta * sgn(xi) * std::tan(kPi * s.alpha / 2.0);
    return cplx{-a, drift + a * skew};
}

cplx amplitude_char(const AmplitudeLaw& amp, double xi) {
    return std::visit(
        overloaded{
            [xi](const NormalAmplitude& a) {
                return std::exp(cplx{-0.5 * a.sigma * a.sigma * xi * xi, a.mu * xi});
            },
            [xi](const UniformAmplitude& a) {
                const double width = a.hi - a.lo;
                const double mid = 0.5 * (a.hi + a.lo);
                const double half = 0.5 * xi * width;
                // (e^{j hi xi} - e^{j lo xi}) / (j xi width) = e^{j mid xi} sin(half) / half
                const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0
                                                          : std::sin(half) / half;
                return std::exp(cplx{0.0, mid * xi}) * sinc;
            },
            [xi](const ConstantAmplitude& a) { return std::exp(cplx{0.0, a.value * xi}); },
        },
        amp);
}

double amplitude_mean(const AmplitudeLaw& amp) {
    return std::visit(overloaded{
                          [](const NormalAmplitude& a) { return a.mu; },
                          [](const UniformAmplitude& a) { return 0.5 * (a.lo + a.hi); },
                          [](const ConstantAmplitude& a) { return a.value; },
                      },
                      amp);
}

double amplitude_second_moment(const AmplitudeLaw& amp) {
    return std::visit(overloaded{
                          [](const NormalAmplitude& a) { return a.mu * a.mu + a.sigma * a.sigma; },
                          [](const UniformAmplitude& a) {
                              return (a.lo * a.lo + a.lo * a.hi + a.hi * a.hi) / 3.0;
                          },
                          [](const ConstantAmplitude& a) { return a.value * a.value; },
                      },
                      amp);
}

double sample_amplitude(const AmplitudeLaw& amp, Engine& engine) {
    return std::visit(overloaded{
                          [&engine](const NormalAmplitude& a) {
                              return std::normal_distribution<double>{a.mu, a.sigma}(engine);
                          },
                          [&engine](const UniformAmplitude& a) {
                              return std::uniform_real_distribution<double>{a.lo, a.hi}(engine);
                          },
                          [](const ConstantAmplitude& a) { return a.value; },
                      },
                      amp);
}

cplx compound_poisson_exponent(const CompoundPoisson& cp, double xi) {
    return cp.rate * (amplitude_char(cp.amplitude, xi) - 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------

LevyLaw::LevyLaw(LawFamily family) : family_(std::move(family)) { validate(family_); }

std::string LevyLaw::family_name() const {
    return std::visit(overloaded{
                          [](const Gaussian&) { return std::string{"gaussian"}; },
                          [](const Stable&) { return std::string{"stable"}; },
                          [](const GammaLaw&) { return std::string{"gamma"}; },
                          [](const Laplace&) { return std::string{"laplace"}; },
                          [](const CompoundPoisson&) { return std::string{"compound_poisson"}; },
                      },
                      family_);
}

std::optional<double> LevyLaw::mean() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) -> std::optional<double> { return g.mu; },
                          [](const Stable& s) -> std::optional<double> {
                              if (s.alpha > 1.0) return s.mu;
                              return std::nullopt;
                          },
                          [](const GammaLaw& g) -> std::optional<double> {
                              return g.shape / g.rate;
                          },
                          [](const Laplace& l) -> std::optional<double> { return l.mu; },
                          [](const CompoundPoisson& cp) -> std::optional<double> {
                              return cp.rate * amplitude_mean(cp.amplitude);
                          },
                      },
                      family_);
}

std::optional<double> LevyLaw::variance() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) -> std::optional<double> {
                              return g.sigma * g.sigma;
                          },
                          [](const Stable& s) -> std::optional<double> {
                              if (s.alpha == 2.0) return 2.0 * s.c * s.c;
                              return std::nullopt;
                          },
                          [](const GammaLaw& g) -> std::optional<double> {
                              return g.shape / (g.rate * g.rate);
                          },
                          [](const Laplace& l) -> std::optional<double> { return 2.0 * l.b * l.b; },
                          [](const CompoundPoisson& cp) -> std::optional<double> {
                              return cp.rate * amplitude_second_moment(cp.amplitude);
                          },
                      },
                      family_);
}

bool operator==(const LevyLaw& a, const LevyLaw& b) {
    return law_to_json(a) == law_to_json(b);
}

cplx levy_exponent(const LevyLaw& law, double xi) {
    return std::visit(overloaded{
                          [xi](const Gaussian& g) {
                              return cplx{-0.5 * g.sigma * g.sigma * xi * xi, g.mu * xi};
                          },
                          [xi](const Stable& s) { return stable_exponent(s, xi); },
                          [xi](const GammaLaw& g) {
                              return -g.shape * std::log(cplx{1.0, -xi / g.rate});
                          },
                          [xi](const Laplace& l) {
                              return cplx{-std::log1p(l.b * l.b * xi * xi), l.mu * xi};
                          },
                          [xi](const CompoundPoisson& cp) {
                              return compound_poisson_exponent(cp, xi);
                          },
                      },
                      law.family());
}

// ---------------------------------------------------------------------------

RootLaw nth_root(const LevyLaw& law, std::int64_t n) {
    if (n < 1) throw ConfigError("nth_root: n must be >= 1");
    const double nd = static_cast<double>(n);
    RootFamily params = std::visit(
        overloaded{
            [nd](const Gaussian& g) -> RootFamily {
                return Gaussian{g.mu / nd, g.sigma / std::sqrt(nd)};
            },
            [nd](const Stable& s) -> RootFamily {
                if (s.alpha == 1.0) {
                    return Stable{s.alpha, s.beta,
                                  s.mu / nd - (2.0 / kPi) * s.c * s.beta * std::log(nd) / nd,
                                  s.c / nd};
                }
                return Stable{s.alpha, s.beta, s.mu / nd, s.c / std::pow(nd, 1.0 / s.alpha)};
            },
            [nd](const GammaLaw& g) -> RootFamily { return GammaLaw{g.shape / nd, g.rate}; },
            [nd](const Laplace& l) -> RootFamily { return LaplaceRoot{l.mu / nd, l.b, 1.0 / nd}; },
            [nd](const CompoundPoisson& cp) -> RootFamily {
                return CompoundPoisson{cp.rate / nd, cp.amplitude};
            },
        },
        law.family());
    if (n == 1) {
        // Reproduce the base parameters bit for bit.
        params = std::visit(overloaded{
                                [](const Laplace& l) -> RootFamily {
                                    return LaplaceRoot{l.mu, l.b, 1.0};
                                },
                                [](const auto& f) -> RootFamily { return f; },
                            },
                            law.family());
    }
    return RootLaw{law, n, std::move(params)};
}

cplx levy_exponent(const RootLaw& root, double xi) {
    return std::visit(overloaded{
                          [xi](const Gaussian& g) {
                              return cplx{-0.5 * g.sigma * g.sigma * xi * xi, g.mu * xi};
                          },
                          [xi](const Stable& s) { return stable_exponent(s, xi); },
                          [xi](const GammaLaw& g) {
                              return -g.shape * std::log(cplx{1.0, -xi / g.rate});
                          },
                          [xi](const LaplaceRoot& l) {
                              // -a log(1 - j b xi) - a log(1 + j b xi) = -a log(1 + b^2 xi^2)
                              return cplx{-l.shape * std::log1p(l.b * l.b * xi * xi), l.mu * xi};
                          },
                          [xi](const CompoundPoisson& cp) {
                              return compound_poisson_exponent(cp, xi);
                          },
                      },
                      root.params());
}

// ---------------------------------------------------------------------------

double sample_gamma(double shape, Engine& engine) {
    if (shape >= 1.0) return std::gamma_distribution<double>{shape, 1.0}(engine);
    const double boosted = std::gamma_distribution<double>{shape + 1.0, 1.0}(engine);
    // U in (0, 1]; U^(1/shape) may underflow to 0 for tiny shapes.
    const double u = 1.0 - std::generate_canonical<double, 53>(engine);
    return boosted * std::pow(u, 1.0 / shape);
}

double sample_stable(const Stable& s, Engine& engine) {
    std::uniform_real_distribution<double> angle{-kPi / 2.0, kPi / 2.0};
    std::exponential_distribution<double> expo{1.0};
    double v = angle(engine);
    while (v == -kPi / 2.0) v = angle(engine);
    double w = expo(engine);
    while (w == 0.0) w = expo(engine);

    if (s.alpha == 1.0) {
        // Weron's alpha = 1 transform; the c log c shift of the plain S1 form is
        // absorbed by keeping the scale inside the logarithm of the exponent.
        const double half_pi = kPi / 2.0;
        const double t = half_pi + s.beta * v;
        const double x =
            (2.0 / kPi) * (t * std::tan(v) - s.beta * std::log(half_pi * w * std::cos(v) / t));
        return s.c * x + s.mu;
    }
    const double tan_term = s.beta * std::tan(kPi * s.alpha / 2.0);
    const double b = std::atan(tan_term) / s.alpha;
    const double scale = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * s.alpha));
    const double x = scale * std::sin(s.alpha * (v + b)) / std::pow(std::cos(v), 1.0 / s.alpha) *
                     std::pow(std::cos(v - s.alpha * (v + b)) / w, (1.0 - s.alpha) / s.alpha);
    return s.c * x + s.mu;
}

RootSampler::RootSampler(RootLaw root) : root_(std::move(root)) {}

double RootSampler::operator()(Engine& engine) {
    return std::visit(
        overloaded{
            [&engine](const Gaussian& g) {
                return std::normal_distribution<double>{g.mu, g.sigma}(engine);
            },
            [&engine](const Stable& s) { return sample_stable(s, engine); },
            [&engine](const GammaLaw& g) { return sample_gamma(g.shape, engine) / g.rate; },
            [&engine](const LaplaceRoot& l) {
                const double g1 = sample_gamma(l.shape, engine);
                const double g2 = sample_gamma(l.shape, engine);
                return l.mu + l.b * (g1 - g2);
            },
            [&engine](const CompoundPoisson& cp) {
                const auto k = std::poisson_distribution<std::int64_t>{cp.rate}(engine);
                double total = 0.0;
                for (std::int64_t i = 0; i < k; ++i) total += sample_amplitude(cp.amplitude, engine);
                return total;
            },
        },
        root_.params());
}

std::vector<double> sample(const RootLaw& root, std::size_t count, Engine& engine) {
    RootSampler draw{root};
    std::vector<double> out(count);
    for (auto& x : out) x = draw(engine);
    return out;
}

// ---------------------------------------------------------------------------

ObservationKernel rect_kernel(double a, double b) {
    if (!(a < b)) throw ConfigError("rect_kernel: requires a < b");
    return ObservationKernel{[a, b](double x) { return (a < x && x <= b) ? 1.0 : 0.0; }, {a, b}};
}

CharacteristicFunctional::CharacteristicFunctional(const ObservationKernel& kernel) {
    const auto& knots = kernel.knots;
    if (knots.size() < 2) throw ConfigError("observation kernel needs at least two knots");
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i] > knots[i - 1])) throw ConfigError("observation kernel knots must increase");
    }
    length_ = knots.back() - knots.front();

    // (value, fine weight, coarse weight)
    std::vector<std::tuple<double, double, double>> nodes;
    for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
        const double a = knots[seg];
        const double b = knots[seg + 1];
        const double share = (b - a) / length_;
        // Even number of fine panels so the coarse rule reuses every other node.
        const int panels = std::max(2, 2 * static_cast<int>(std::lround(kPanels / 2 * share)));
        const int points = 2 * panels + 1;
        const double step = (b - a) / (2.0 * panels);
        for (int i = 0; i < points; ++i) {
            double x = a + step * i;
            if (i == 0) x = std::nextafter(a, b);
            if (i == points - 1) x = std::nextafter(b, a);
            const double v = kernel.eval(x);

            // Fine Simpson: panel width 2*step, weights step/3 * (1,4,2,...,4,1).
            double wf = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            wf *= step / 3.0;
            // Coarse Simpson on nodes 0,2,4,...: spacing 2*step.
            double wc = 0.0;
            if (i % 2 == 0) {
                const int j = i / 2;
                const int coarse_points = panels + 1;
                wc = (j == 0 || j == coarse_points - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
                wc *= 2.0 * step / 3.0;
            }
            if (v != 0.0) nodes.emplace_back(v, wf, wc);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    for (const auto& [v, wf, wc] : nodes) {
        if (!values_.empty() && values_.back() == v) {
            fine_weights_.back() += wf;
            coarse_weights_.back() += wc;
        } else {
            values_.push_back(v);
            fine_weights_.push_back(wf);
            coarse_weights_.push_back(wc);
        }
    }
}

CharValue CharacteristicFunctional::evaluate(const std::function<cplx(double)>& exponent,
                                             double xi) const {
    cplx fine{0.0, 0.0};
    cplx coarse{0.0, 0.0};
    if (xi != 0.0) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const cplx f = exponent(xi * values_[i]);
            fine += fine_weights_[i] * f;
            coarse += coarse_weights_[i] * f;
        }
    }
    return CharValue{std::exp(fine), fine, std::abs(fine - coarse) / 15.0};
}

CharValue CharacteristicFunctional::evaluate(const LevyLaw& law, double xi) const {
    return evaluate([&law](double x) { return levy_exponent(law, x); }, xi);
}

cplx observation_char(const LevyLaw& law, const ObservationKernel& kernel, double xi,
                      double tolerance) {
    const CharValue r = CharacteristicFunctional{kernel}.evaluate(law, xi);
    if (!(r.error_estimate <= tolerance)) {
        std::ostringstream msg;
        msg << "observation_char: quadrature error estimate " << r.error_estimate
            << " exceeds tolerance " << tolerance;
        throw NumericalError(msg.str(), r.error_estimate);
    }
    return r.value;
}

// ---------------------------------------------------------------------------

namespace {

double number_field(const nlohmann::json& doc, const char* key, const std::string& where) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw ConfigError(where + "." + key + " is required");
    if (!it->is_number()) throw ConfigError(where + "." + key + " must be a number");
    return it->get<double>();
}

double number_field_or(const nlohmann::json& doc, const char* key, double fallback,
                       const std::string& where) {
    if (!doc.contains(key)) return fallback;
    return number_field(doc, key, where);
}

nlohmann::json amplitude_to_json(const AmplitudeLaw& amp) {
    return std::visit(overloaded{
                          [](const NormalAmplitude& a) {
                              return nlohmann::json{{"law", "normal"}, {"mu", a.mu}, {"sigma", a.sigma}};
                          },
                          [](const UniformAmplitude& a) {
                              return nlohmann::json{{"law", "uniform"}, {"lo", a.lo}, {"hi", a.hi}};
                          },
                          [](const ConstantAmplitude& a) {
                              return nlohmann::json{{"law", "constant"}, {"value", a.value}};
                          },
                      },
                      amp);
}

AmplitudeLaw amplitude_from_json(const nlohmann::json& doc) {
    const std::string where = "law.amplitude";
    if (!doc.is_object()) throw ConfigError(where + " must be an object");
    const auto it = doc.find("law");
    if (it == doc.end() || !it->is_string()) throw ConfigError(where + ".law is required");
    const auto name = it->get<std::string>();
    if (name == "normal") {
        return NormalAmplitude{number_field_or(doc, "mu", 0.0, where),
                               number_field(doc, "sigma", where)};
    }
    if (name == "uniform") {
        return UniformAmplitude{number_field(doc, "lo", where), number_field(doc, "hi", where)};
    }
    if (name == "constant") return ConstantAmplitude{number_field(doc, "value", where)};
    throw ConfigError(where + ".law: unknown amplitude law '" + name + "'");
}

}  // namespace

nlohmann::json law_to_json(const LevyLaw& law) {
    return std::visit(
        overloaded{
            [](const Gaussian& g) {
                return nlohmann::json{{"family", "gaussian"}, {"mu", g.mu}, {"sigma", g.sigma}};
            },
            [](const Stable& s) {
                return nlohmann::json{{"family", "stable"}, {"alpha", s.alpha}, {"beta", s.beta},
                                      {"mu", s.mu},         {"c", s.c}};
            },
            [](const GammaLaw& g) {
                return nlohmann::json{{"family", "gamma"}, {"shape", g.shape}, {"rate", g.rate}};
            },
            [](const Laplace& l) {
                return nlohmann::json{{"family", "laplace"}, {"mu", l.mu}, {"b", l.b}};
            },
            [](const CompoundPoisson& cp) {
                return nlohmann::json{{"family", "compound_poisson"},
                                      {"rate", cp.rate},
                                      {"amplitude", amplitude_to_json(cp.amplitude)}};
            },
        },
        law.family());
}

LevyLaw law_from_json(const nlohmann::json& doc) {
    const std::string where = "law";
    if (!doc.is_object()) throw ConfigError("law must be an object");
    const auto it = doc.find("family");
    if (it == doc.end() || !it->is_string()) throw ConfigError("law.family is required");
    const auto family = it->get<std::string>();
    if (family == "gaussian") {
        return LevyLaw{Gaussian{number_field_or(doc, "mu", 0.0, where),
                                number_field(doc, "sigma", where)}};
    }
    if (family == "stable") {
        return LevyLaw{Stable{number_field(doc, "alpha", where),
                              number_field_or(doc, "beta", 0.0, where),
                              number_field_or(doc, "mu", 0.0, where), number_field(doc, "c", where)}};
    }
    if (family == "gamma") {
        return LevyLaw{GammaLaw{number_field(doc, "shape", where), number_field(doc, "rate", where)}};
    }
    if (family == "laplace") {
        return LevyLaw{Laplace{number_field_or(doc, "mu", 0.0, where), number_field(doc, "b", where)}};
    }
    if (family == "compound_poisson") {
        const auto amp = doc.find("amplitude");
        if (amp == doc.end()) throw ConfigError("law.amplitude is required");
        return LevyLaw{CompoundPoisson{number_field(doc, "rate", where), amplitude_from_json(*amp)}};
    }
    throw ConfigError("law.family: unknown family '" + family + "'");
}

}  // namespace sparsegen
