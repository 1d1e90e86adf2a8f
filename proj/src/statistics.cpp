#include "sparsegen/statistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "sparsegen/errors.hpp"
#include "sparsegen/innovation.hpp"

namespace sparsegen {

namespace {

using std::numbers::pi;

// Runs body(i) for i in [0, count) across OpenMP threads and rethrows the first exception.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    std::exception_ptr failure;
    const auto total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < total; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(sparsegen_parallel_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

// Gauss-Legendre nodes for int_0^xi_max g(xi) dxi, with the first panel graded toward 0
// to absorb xi^(alpha - 1) behaviour of the Gil-Pelaez integrand.
struct InversionRule {
    std::vector<double> xi;
    std::vector<double> weight;
};

InversionRule inversion_rule(double xi_max, int panels) {
    using Gauss = boost::math::quadrature::gauss<double, 8>;
    const auto& abscissa = Gauss::abscissa();
    const auto& gauss_weights = Gauss::weights();

    std::vector<std::pair<double, double>> intervals;
    const double width = xi_max / panels;
    constexpr int kGrading = 20;
    intervals.emplace_back(0.0, width * std::ldexp(1.0, -kGrading));
    for (int k = kGrading; k > 0; --k) {
        intervals.emplace_back(width * std::ldexp(1.0, -k), width * std::ldexp(1.0, -k + 1));
    }
    for (int p = 1; p < panels; ++p) intervals.emplace_back(p * width, (p + 1) * width);

    InversionRule rule;
    rule.xi.reserve(intervals.size() * 8);
    rule.weight.reserve(intervals.size() * 8);
    for (const auto& [a, b] : intervals) {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        // boost stores the nonnegative half of the symmetric rule.
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            const double x = abscissa[i];
            const double w = gauss_weights[i] * half;
            rule.xi.push_back(mid + half * x);
            rule.weight.push_back(w);
            if (x != 0.0) {
                rule.xi.push_back(mid - half * x);
                rule.weight.push_back(w);
            }
        }
    }
    return rule;
}

// Tabulated Gil-Pelaez integrand, centred at c: F(c + y) = 1/2 - (1/pi) sum w Im(e^{-j xi y} psi).
class Inverter {
public:
    Inverter(const CharacteristicFunctional& cf, const LevyLaw& law, double center, double xi_max,
             int panels, double& exponent_error)
        : center_(center) {
        const InversionRule rule = inversion_rule(xi_max, panels);
        xi_ = rule.xi;
        weighted_.resize(xi_.size());
        std::vector<double> errors(xi_.size(), 0.0);
        parallel_for(xi_.size(), [&](std::size_t i) {
            const CharValue v = cf.evaluate(law, xi_[i]);
            const cplx shift = std::polar(1.0, -xi_[i] * center);
            weighted_[i] = rule.weight[i] * v.value * shift / xi_[i];
            errors[i] = v.error_estimate;
        });
        for (double e : errors) exponent_error = std::max(exponent_error, e);
    }

    double operator()(double x) const {
        const double y = x - center_;
        double acc = 0.0;
        for (std::size_t i = 0; i < xi_.size(); ++i) {
            const double s = std::sin(xi_[i] * y);
            const double c = std::cos(xi_[i] * y);
            // Im((c - j s) * psi)
            acc += c * weighted_[i].imag() - s * weighted_[i].real();
        }
        return 0.5 - acc / pi;
    }

private:
    double center_;
    std::vector<double> xi_;
    std::vector<cplx> weighted_;
};

double abs_char(const CharacteristicFunctional& cf, const LevyLaw& law, double xi) {
    return std::abs(cf.evaluate(law, xi).value);
}

}  // namespace

// ---------------------------------------------------------------------------

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw ConfigError("empirical CDF needs at least one sample");
    for (double v : sorted_) {
        if (std::isnan(v)) throw ConfigError("empirical CDF: sample is NaN");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::left_limit(double x) const {
    const auto count = std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

// ---------------------------------------------------------------------------

ReferenceCdf::ReferenceCdf(const LevyLaw& law, const ObservationKernel& kernel,
                           const ReferenceOptions& options) {
    const CharacteristicFunctional cf(kernel);

    // Frequency scale: where |Phi| first falls below 1/2.
    double xi = 1.0;
    if (abs_char(cf, law, xi) < 0.5) {
        for (int i = 0; i < 200 && abs_char(cf, law, xi / 2) < 0.5; ++i) xi /= 2;
    } else {
        int i = 0;
        for (; i < 200 && abs_char(cf, law, xi) >= 0.5; ++i) xi *= 2;
        if (i == 200) {
            throw NumericalError(
                "reference CDF: characteristic function does not decay (the law puts an atom on "
                "the observation); Gil-Pelaez inversion is not applicable",
                abs_char(cf, law, xi));
        }
    }
    diag_.xi_half = xi;

    // Truncation: step out until |Phi| stays below the tolerance, up to the cap.
    const double cap = options.max_xi_ratio * diag_.xi_half;
    const auto tail_level = [&](double at) {
        return std::max({abs_char(cf, law, at), abs_char(cf, law, 1.25 * at), abs_char(cf, law, 1.5 * at)});
    };
    double xi_max = diag_.xi_half;
    double level = tail_level(xi_max);
    while (level > options.truncation_tolerance && xi_max < cap) {
        xi_max = std::min(cap, 1.25 * xi_max);
        level = tail_level(xi_max);
    }
    diag_.xi_max = xi_max;
    diag_.truncation = level;
    diag_.truncation_met = level <= options.truncation_tolerance;

    // Location from the phase slope near the origin, spread from xi_half.
    const double xi_small = 0.01 * diag_.xi_half;
    const double center = cf.evaluate(law, xi_small).exponent.imag() / xi_small;
    const double spread = 1.0 / diag_.xi_half;
    // At most 2 pi of phase per 8-point panel (rule error ~1e-10 there).
    const double reach = std::min(1e3 * spread, 2 * pi * options.max_panels / xi_max);
    const auto panels_for = [&](double y) {
        const double wanted = std::ceil(xi_max * y / (2 * pi));
        return static_cast<int>(std::clamp(wanted, double(options.min_panels), double(options.max_panels)));
    };

    // Stage 1: locate the table range with a rule resolving the full reach.
    double y_lo = spread;
    double y_hi = spread;
    {
        const Inverter coarse(cf, law, center, xi_max, panels_for(reach), diag_.exponent_error);
        const double q = options.tail_quantile;
        while (coarse(center - y_lo) > q && y_lo < reach) y_lo = std::min(reach, 2 * y_lo);
        while (1.0 - coarse(center + y_hi) > q && y_hi < reach) y_hi = std::min(reach, 2 * y_hi);
    }

    // Stage 2: rule sized for the range actually tabulated.
    const double y_max = 1.1 * std::max(y_lo, y_hi);
    diag_.panels = panels_for(y_max);
    const Inverter F(cf, law, center, xi_max, diag_.panels, diag_.exponent_error);
    const double lo = center - y_lo;
    const double hi = center + y_hi;

    {
        const Inverter check(cf, law, center, xi_max, std::min(2 * diag_.panels, 2 * options.max_panels),
                             diag_.exponent_error);
        for (int i = 0; i <= 16; ++i) {
            const double x = lo + (hi - lo) * i / 16.0;
            diag_.quadrature_error = std::max(diag_.quadrature_error, std::abs(F(x) - check(x)));
        }
    }

    // Adaptive table: split while the midpoint departs from the chord.
    constexpr int kInitial = 128;
    std::vector<double> xs(kInitial + 1);
    std::vector<double> fs(kInitial + 1);
    for (int i = 0; i <= kInitial; ++i) {
        xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / kInitial;
    }
    parallel_for(xs.size(), [&](std::size_t i) { fs[i] = F(xs[i]); });

    struct Segment {
        double a, fa, b, fb;
        int depth;
    };
    std::vector<Segment> pending;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) pending.push_back({xs[i], fs[i], xs[i + 1], fs[i + 1], 0});
    std::vector<std::pair<double, double>> table;
    table.reserve(options.max_table);
    for (std::size_t i = 0; i < xs.size(); ++i) table.emplace_back(xs[i], fs[i]);

    while (!pending.empty() && table.size() < options.max_table) {
        std::vector<Segment> next;
        std::vector<double> mids(pending.size());
        std::vector<double> fmids(pending.size());
        for (std::size_t i = 0; i < pending.size(); ++i) mids[i] = 0.5 * (pending[i].a + pending[i].b);
        parallel_for(pending.size(), [&](std::size_t i) { fmids[i] = F(mids[i]); });
        for (std::size_t i = 0; i < pending.size() && table.size() < options.max_table; ++i) {
            const Segment& s = pending[i];
            table.emplace_back(mids[i], fmids[i]);
            const double chord = 0.5 * (s.fa + s.fb);
            if (std::abs(fmids[i] - chord) > options.interpolation_tolerance && s.depth < 30) {
                next.push_back({s.a, s.fa, mids[i], fmids[i], s.depth + 1});
                next.push_back({mids[i], fmids[i], s.b, s.fb, s.depth + 1});
            }
        }
        pending = std::move(next);
    }
    std::sort(table.begin(), table.end());

    x_.reserve(table.size());
    f_.reserve(table.size());
    double running = 0.0;
    for (const auto& [x, f] : table) {
        if (!f_.empty()) diag_.monotonicity_violation = std::max(diag_.monotonicity_violation, f_.back() - f);
        running = std::max(running, std::clamp(f, 0.0, 1.0));
        x_.push_back(x);
        f_.push_back(running);
    }
    diag_.tail_mass = f_.front() + (1.0 - f_.back());
}

double ReferenceCdf::operator()(double x) const {
    if (x < x_.front()) return 0.0;
    if (x >= x_.back()) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const auto i = static_cast<std::size_t>(it - x_.begin());
    const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return f_[i - 1] + t * (f_[i] - f_[i - 1]);
}

double ReferenceCdf::quantile(double p) const {
    if (p <= f_.front()) return x_.front();
    if (p >= f_.back()) return x_.back();
    const auto it = std::lower_bound(f_.begin(), f_.end(), p);
    const auto i = static_cast<std::size_t>(it - f_.begin());
    const double df = f_[i] - f_[i - 1];
    const double t = df > 0.0 ? (p - f_[i - 1]) / df : 0.0;
    return x_[i - 1] + t * (x_[i] - x_[i - 1]);
}

double ReferenceCdf::sample(Engine& engine) const {
    return quantile(std::uniform_real_distribution<double>{0.0, 1.0}(engine));
}

ObservationKernel reversed_spline_kernel(const BSpline& spline) {
    std::vector<double> knots;
    for (int m = spline.order(); m >= 0; --m) knots.push_back(-m * spline.h());
    return ObservationKernel{[spline](double t) { return spline(-t); }, std::move(knots)};
}

ReferenceCdf reference_cdf(const LevyLaw& law, const BSpline& spline, const ReferenceOptions& options) {
    return ReferenceCdf(law, reversed_spline_kernel(spline), options);
}

// ---------------------------------------------------------------------------

double ks_divergence(const EmpiricalCdf& ecdf, const std::function<double(double)>& cdf) {
    const auto s = ecdf.samples();
    if (s.empty()) throw ConfigError("ks_divergence: empty sample");
    const auto total = static_cast<double>(s.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        const double f = cdf(s[i]);
        d = std::max({d, std::abs(static_cast<double>(i) / total - f), std::abs(static_cast<double>(j) / total - f)});
        i = j;
    }
    return d;
}

double ks_divergence(const EmpiricalCdf& ecdf, const ReferenceCdf& ref) {
    return ks_divergence(ecdf, [&ref](double x) { return ref(x); });
}

double ks_divergence(const EmpiricalCdf& a, const EmpiricalCdf& b) {
    const auto sa = a.samples();
    const auto sb = b.samples();
    if (sa.empty() || sb.empty()) throw ConfigError("ks_divergence: empty sample");
    const auto na = static_cast<double>(sa.size());
    const auto nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double x;
        if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
            x = sa[i];
        } else {
            x = sb[j];
        }
        while (i < sa.size() && sa[i] <= x) ++i;
        while (j < sb.size() && sb[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> increments_with(const LevyLaw& law, const BSpline& spline, std::int64_t n,
                                     std::size_t samples, std::uint64_t seed) {
    const auto order = static_cast<std::size_t>(spline.order());
    const std::size_t grid = samples + order;
    const double h = spline.h();
    const InnovationRealization r = simulate_innovation(law, n, static_cast<double>(grid) * h, seed);
    const IncrementVector u = increment_vector(r, spline, h);
    if (u.values.size() != grid) throw NumericalError("increment_samples: unexpected grid size");
    return {u.values.begin() + static_cast<std::ptrdiff_t>(order), u.values.end()};
}

}  // namespace

std::vector<double> increment_samples(const LevyLaw& law, const RationalOperator& op, std::int64_t n,
                                      double h, std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw ConfigError("increment_samples: samples must be >= 1");
    return increments_with(law, bspline(op, h), n, samples, seed);
}

TuneResult tune_n(const LevyLaw& law, const RationalOperator& op, double h, const TuneOptions& options) {
    if (!(options.threshold > 0.0 && options.threshold <= 1.0)) {
        throw ConfigError("validate.threshold must be in (0, 1]");
    }
    if (options.schedule.empty()) throw ConfigError("validate: n schedule is empty");
    for (auto n : options.schedule) {
        if (n < 1) throw ConfigError("validate: every scheduled n must be >= 1");
    }
    if (options.samples == 0) throw ConfigError("validate.samples must be >= 1");
    if (options.repetitions < 1) throw ConfigError("validate.repetitions must be >= 1");

    const BSpline spline = bspline(op, h);
    const ReferenceCdf ref = reference_cdf(law, spline);
    const auto reps = static_cast<std::size_t>(options.repetitions);

    TuneResult result;
    result.reference = ref.diagnostics();
    for (const std::int64_t n : options.schedule) {
        std::vector<double> ks(reps);
        parallel_for(reps, [&](std::size_t r) {
            const auto seed = derive_seed(options.seed, Stream::trials, r);
            ks[r] = ks_divergence(EmpiricalCdf(increments_with(law, spline, n, options.samples, seed)), ref);
        });
        const KsPoint point{n, static_cast<double>(n) * h, median(ks)};
        result.curve.push_back(point);
        if (!result.met && point.ks <= options.threshold) {
            result.met = true;
            result.chosen_n = n;
        }
    }

    if (options.baseline) {
        std::vector<double> ks(reps);
        parallel_for(reps, [&](std::size_t r) {
            Engine engine = make_engine(options.seed, Stream::reference, r);
            std::vector<double> draws(options.samples);
            for (auto& d : draws) d = ref.sample(engine);
            ks[r] = ks_divergence(EmpiricalCdf(std::move(draws)), ref);
        });
        result.baseline = median(ks);
    }
    return result;
}

// ---------------------------------------------------------------------------

double window_integral(const Trajectory& t, double window) {
    if (!(window > 0.0) || !(t.h > 0.0)) throw ConfigError("fractional_moment: window and h must be > 0");
    const double q = window / t.h;
    const double steps = std::nearbyint(q);
    if (std::abs(q - steps) > 1e-9 * std::max(1.0, q)) {
        throw ConfigError("fractional_moment: window must be a multiple of the grid step");
    }
    const auto m = static_cast<std::size_t>(steps);
    if (m + 1 > t.values.size()) throw ConfigError("fractional_moment: window exceeds T");
    double acc = 0.5 * (t.values[0] + t.values[m]);
    for (std::size_t i = 1; i < m; ++i) acc += t.values[i];
    return acc * t.h;
}

MomentEstimate fractional_moment(std::span<const double> observations, double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("fractional_moment: p must be in (0, 1)");
    MomentEstimate est;
    est.count = observations.size();
    if (observations.empty()) return est;
    std::vector<double> powers(observations.size());
    for (std::size_t i = 0; i < powers.size(); ++i) powers[i] = std::pow(std::abs(observations[i]), p);
    const double n = static_cast<double>(powers.size());
    est.value = compensated_sum(powers) / n;
    if (powers.size() > 1) {
        std::vector<double> sq(powers.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (powers[i] - est.value) * (powers[i] - est.value);
        est.standard_error = std::sqrt(compensated_sum(sq) / (n - 1.0) / n);
    }
    return est;
}

MomentEstimate fractional_moment(std::span<const Trajectory> trajectories, double p, double window) {
    std::vector<double> obs;
    obs.reserve(trajectories.size());
    for (const auto& t : trajectories) obs.push_back(window_integral(t, window));
    return fractional_moment(std::span<const double>(obs), p);
}

std::vector<double> simulate_window_integrals(const LevyLaw& law, const RationalOperator& op,
                                              std::int64_t n, double T, double h, double window,
                                              std::size_t trials, std::uint64_t seed) {
    const BSpline spline = bspline(op, h);
    // Fails early when the window does not fit the grid.
    window_integral(Trajectory{h, std::vector<double>(grid_size(T, h), 0.0), {}, {}}, window);
    const std::vector<double> boundary(static_cast<std::size_t>(op.order()), 0.0);
    std::vector<double> out(trials);
    parallel_for(trials, [&](std::size_t i) {
        const auto r = simulate_innovation(law, n, T, derive_seed(seed, Stream::trials, i));
        const Trajectory traj = reverse_filter(increment_vector(r, spline, h), spline.fir(), boundary);
        out[i] = window_integral(traj, window);
    });
    return out;
}

double gaussian_abs_moment(double sigma, double p) {
    return std::pow(sigma, p) * std::pow(2.0, p / 2) * std::tgamma((p + 1) / 2) / std::sqrt(pi);
}

double stable_abs_moment(double alpha, double c, double p) {
    if (!(p < alpha)) throw ConfigError("stable_abs_moment: requires p < alpha");
    return std::pow(c, p) * std::pow(2.0, p) * std::tgamma((1 + p) / 2) * std::tgamma(1 - p / alpha) /
           (std::sqrt(pi) * std::tgamma(1 - p / 2));
}

// ---------------------------------------------------------------------------

double evaluate(const StepFunction& phi, double t) {
    double v = 0.0;
    for (const auto& k : phi) {
        if (k.a < t && t <= k.b) v += k.height;
    }
    return v;
}

double inner_product(const StepFunction& f, const StepFunction& g) {
    double acc = 0.0;
    for (const auto& u : f) {
        for (const auto& v : g) {
            const double overlap = std::min(u.b, v.b) - std::max(u.a, v.a);
            if (overlap > 0.0) acc += u.height * v.height * overlap;
        }
    }
    return acc;
}

double integral(const StepFunction& f) {
    double acc = 0.0;
    for (const auto& k : f) acc += k.height * (k.b - k.a);
    return acc;
}

std::vector<std::vector<double>> observe_innovation(const LevyLaw& law, std::int64_t n,
                                                    std::span<const StepFunction> kernels,
                                                    std::size_t trials, std::uint64_t seed) {
    double T = 0.0;
    for (const auto& phi : kernels) {
        for (const auto& k : phi) {
            if (!(k.a >= 0.0 && k.a < k.b)) throw ConfigError("step kernel needs 0 <= a < b");
            T = std::max(T, k.b);
        }
    }
    if (!(T > 0.0)) throw ConfigError("observe_innovation: no kernel support");
    std::vector<std::vector<double>> obs(trials, std::vector<double>(kernels.size(), 0.0));
    parallel_for(trials, [&](std::size_t i) {
        const auto r = simulate_innovation(law, n, T, derive_seed(seed, Stream::trials, i));
        for (std::size_t j = 0; j < kernels.size(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < r.size(); ++k) acc += r.amplitudes[k] * evaluate(kernels[j], r.locations[k]);
            obs[i][j] = acc;
        }
    });
    return obs;
}

SecondOrderResult second_order_check(const LevyLaw& law, std::int64_t n, const StepFunction& phi1,
                                     const StepFunction& phi2, std::size_t trials, std::uint64_t seed) {
    const auto variance = law.variance();
    const auto mean = law.mean();
    if (!variance || !mean) {
        throw ConfigError("second_order_check: the " + law.family_name() + " law has no finite variance");
    }
    if (trials == 0) throw ConfigError("second_order_check: trials must be >= 1");
    const std::array<StepFunction, 2> kernels{phi1, phi2};
    const auto obs = observe_innovation(law, n, kernels, trials, seed);

    std::vector<double> products(trials);
    for (std::size_t i = 0; i < trials; ++i) products[i] = obs[i][0] * obs[i][1];
    SecondOrderResult out;
    out.trials = trials;
    const double count = static_cast<double>(trials);
    out.estimate = compensated_sum(products) / count;
    if (trials > 1) {
        for (auto& v : products) v = (v - out.estimate) * (v - out.estimate);
        out.standard_error = std::sqrt(compensated_sum(products) / (count - 1.0) / count);
    }
    out.target = *variance * inner_product(phi1, phi2) + (*mean) * (*mean) * integral(phi1) * integral(phi2);
    return out;
}

// ---------------------------------------------------------------------------

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of an empty set");
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("linear_fit: needs two or more (x, y) pairs");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("linear_fit: x values are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double residual = syy - fit.slope * sxy;
    fit.r_squared = syy > 0.0 ? 1.0 - residual / syy : 1.0;
    return fit;
}

double compensated_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

}  // namespace sparsegen
