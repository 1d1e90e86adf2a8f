#include "sparsegen/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sparsegen/errors.hpp"

namespace sparsegen {

namespace {

constexpr std::size_t kScatterBlock = 2048;

void check_step(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be a positive finite step");
}

void check_spline_step(const BSpline& spline, double h) {
    check_step(h);
    if (std::abs(spline.h() - h) > 1e-12 * h) {
        std::ostringstream msg;
        msg << "increment_vector: spline step " << spline.h() << " does not match grid step " << h;
        throw ConfigError(msg.str());
    }
}

// Per-cell accumulator, optionally with Neumaier compensation.
struct Accumulator {
    std::vector<double> sum;
    std::vector<double> carry;
    bool compensated;

    Accumulator(std::size_t n, bool comp) : sum(n, 0.0), carry(comp ? n : 0, 0.0), compensated(comp) {}

    void add(std::size_t i, double v) {
        if (!compensated) {
            sum[i] += v;
            return;
        }
        const double s = sum[i];
        const double t = s + v;
        if (std::abs(s) >= std::abs(v)) {
            carry[i] += (s - t) + v;
        } else {
            carry[i] += (v - t) + s;
        }
        sum[i] = t;
    }

    std::vector<double> finish() && {
        if (compensated) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += carry[i];
        }
        return std::move(sum);
    }
};

// Adds impulse k's contributions to the cells in [first, last).
inline void scatter_impulse(const BSpline& spline, double h, double tau, double amp,
                            std::size_t first, std::size_t last, Accumulator& acc) {
    const auto order = static_cast<std::int64_t>(spline.order());
    const auto base = static_cast<std::int64_t>(std::floor(tau / h));
    const std::int64_t lo = std::max<std::int64_t>(base, static_cast<std::int64_t>(first));
    const std::int64_t hi = std::min<std::int64_t>(base + order + 1, static_cast<std::int64_t>(last) - 1);
    for (std::int64_t i = lo; i <= hi; ++i) {
        const double t = static_cast<double>(i) * h - tau;
        if (!spline.in_support(t)) continue;
        acc.add(static_cast<std::size_t>(i), amp * spline(t));
    }
}

double oracle_value(const InnovationRealization& r, const GreensFunction& g, double t,
                    const NullSpaceTerm& null_term) {
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r.amplitudes[k] * g(t - r.locations[k]);
    if (null_term) s += null_term(t);
    return s;
}

int green_order(const GreensFunction& g) { return static_cast<int>(g.atoms().size()); }

Trajectory oracle_shell(const InnovationRealization& r, const GreensFunction& g, double h, double T,
                        const NullSpaceTerm& null_term) {
    check_step(h);
    Trajectory out;
    out.h = h;
    out.values.assign(grid_size(T, h), 0.0);
    const int order = green_order(g);
    out.boundary.resize(static_cast<std::size_t>(order));
    for (int m = 0; m < order; ++m) {
        out.boundary[static_cast<std::size_t>(m)] = oracle_value(r, g, -m * h, null_term);
    }
    out.provenance = {{"method", "direct_green"}, {"n", r.n}, {"T", r.T}, {"h", h},
                      {"seed", r.seed}, {"impulses", r.size()}, {"law", law_to_json(r.law)}};
    return out;
}

}  // namespace

std::size_t grid_size(double T, double h) {
    check_step(h);
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be a positive finite length");
    const double q = T / h;
    const double nearest = std::nearbyint(q);
    if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(q));
}

bool uses_compensated_scatter(int order, std::size_t impulses, std::size_t grid) {
    return order > 4 || static_cast<double>(impulses) > 100.0 * static_cast<double>(grid);
}

IncrementVector increment_vector_serial(const InnovationRealization& r, const BSpline& spline,
                                        double h) {
    check_spline_step(spline, h);
    const std::size_t grid = grid_size(r.T, h);
    Accumulator acc(grid, uses_compensated_scatter(spline.order(), r.size(), grid));
    for (std::size_t k = 0; k < r.size(); ++k) {
        scatter_impulse(spline, h, r.locations[k], r.amplitudes[k], 0, grid, acc);
    }
    return IncrementVector{h, std::move(acc).finish()};
}

IncrementVector increment_vector(const InnovationRealization& r, const BSpline& spline, double h) {
    check_spline_step(spline, h);
    const std::size_t grid = grid_size(r.T, h);
    Accumulator acc(grid, uses_compensated_scatter(spline.order(), r.size(), grid));
    const auto blocks = static_cast<std::int64_t>((grid + kScatterBlock - 1) / kScatterBlock);
    const double reach = static_cast<double>(spline.order() + 2) * h;

#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
        const std::size_t first = static_cast<std::size_t>(b) * kScatterBlock;
        const std::size_t last = std::min(grid, first + kScatterBlock);
        // Impulses able to reach [first, last): tau in [first h - deg(P) h, last h), padded.
        const double tau_lo = static_cast<double>(first) * h - reach;
        const double tau_hi = static_cast<double>(last + 1) * h;
        const auto k_lo = std::lower_bound(r.locations.begin(), r.locations.end(), tau_lo) - r.locations.begin();
        const auto k_hi = std::lower_bound(r.locations.begin(), r.locations.end(), tau_hi) - r.locations.begin();
        for (auto k = k_lo; k < k_hi; ++k) {
            const auto idx = static_cast<std::size_t>(k);
            scatter_impulse(spline, h, r.locations[idx], r.amplitudes[idx], first, last, acc);
        }
    }
    return IncrementVector{h, std::move(acc).finish()};
}

IncrementVector forward_filter(std::span<const double> s, const FirFilter& fir,
                               std::span<const double> boundary) {
    const auto order = static_cast<std::size_t>(fir.order());
    if (boundary.size() != order) throw ConfigError("forward_filter: boundary length must equal deg(P)");
    IncrementVector u{fir.h, std::vector<double>(s.size(), 0.0)};
    for (std::size_t i = 1; i < s.size(); ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m <= order; ++m) {
            const auto j = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(m);
            const double sj = j >= 1 ? s[static_cast<std::size_t>(j)] : boundary[static_cast<std::size_t>(-j)];
            acc += fir.taps[m] * sj;
        }
        u.values[i] = acc;
    }
    return u;
}

Trajectory reverse_filter(const IncrementVector& u, const FirFilter& fir,
                          std::span<const double> boundary) {
    const auto order = static_cast<std::size_t>(fir.order());
    if (boundary.size() != order) {
        std::ostringstream msg;
        msg << "reverse_filter: boundary has " << boundary.size() << " values, deg(P) = " << order;
        throw ConfigError(msg.str());
    }
    if (fir.taps.empty() || fir.taps[0] == 0.0) throw ConfigError("reverse_filter: taps[0] must be nonzero");
    Trajectory out;
    out.h = u.h;
    out.boundary.assign(boundary.begin(), boundary.end());
    out.values.assign(u.values.size(), 0.0);
    if (out.values.empty()) return out;
    out.values[0] = boundary[0];
    const double lead = fir.taps[0];
    for (std::size_t i = 1; i < out.values.size(); ++i) {
        double acc = u.values[i];
        for (std::size_t m = 1; m <= order; ++m) {
            const auto j = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(m);
            const double sj = j >= 1 ? out.values[static_cast<std::size_t>(j)]
                                     : boundary[static_cast<std::size_t>(-j)];
            acc -= fir.taps[m] * sj;
        }
        out.values[i] = acc / lead;
    }
    return out;
}

Trajectory direct_green_eval_serial(const InnovationRealization& r, const GreensFunction& g,
                                    double h, double T, const NullSpaceTerm& null_term) {
    Trajectory out = oracle_shell(r, g, h, T, null_term);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = oracle_value(r, g, static_cast<double>(i) * h, null_term);
    }
    return out;
}

Trajectory direct_green_eval(const InnovationRealization& r, const GreensFunction& g, double h,
                             double T, const NullSpaceTerm& null_term) {
    Trajectory out = oracle_shell(r, g, h, T, null_term);
    const auto grid = static_cast<std::int64_t>(out.values.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < grid; ++i) {
        out.values[static_cast<std::size_t>(i)] = oracle_value(r, g, static_cast<double>(i) * h, null_term);
    }
    return out;
}

Trajectory synthesize(const InnovationRealization& r, const RationalOperator& op, double h,
                      std::span<const double> boundary) {
    check_step(h);
    if (h > r.T) throw ConfigError("h must not exceed T");
    const BSpline spline = bspline(op, h);
    const auto order = static_cast<std::size_t>(op.order());
    std::vector<double> bnd(boundary.begin(), boundary.end());
    if (bnd.empty()) bnd.assign(order, 0.0);
    if (bnd.size() != order) {
        std::ostringstream msg;
        msg << "boundary must have deg(P) = " << order << " values, got " << bnd.size();
        throw ConfigError(msg.str());
    }
    const IncrementVector u = increment_vector(r, spline, h);
    Trajectory out = reverse_filter(u, spline.fir(), bnd);

    auto warnings = nlohmann::json::array();
    if (op.has_anticausal_part()) {
        warnings.push_back(
            "operator has right-half-plane roots: the causal recursion may grow geometrically "
            "and impulses outside [0, T] are not represented");
    }
    out.provenance = {{"method", "bspline"},
                      {"operator", op.to_json()},
                      {"law", law_to_json(r.law)},
                      {"n", r.n},
                      {"T", r.T},
                      {"h", h},
                      {"seed", r.seed},
                      {"impulses", r.size()},
                      {"boundary", bnd},
                      {"warnings", std::move(warnings)}};
    return out;
}

Generated generate(const LevyLaw& law, const RationalOperator& op, std::int64_t n, double T,
                   double h, std::uint64_t seed, std::span<const double> boundary) {
    Generated g{simulate_innovation(law, n, T, seed), {}};
    g.trajectory = synthesize(g.realization, op, h, boundary);
    return g;
}

std::string trajectory_csv(const Trajectory& t) {
    std::string out = "t,value\n";
    out.reserve(out.size() + t.values.size() * 48);
    char line[96];
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        const int len = std::snprintf(line, sizeof line, "%.17g,%.17g\n",
                                      static_cast<double>(i) * t.h, t.values[i]);
        out.append(line, static_cast<std::size_t>(len));
    }
    return out;
}

void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << trajectory_csv(t);
    if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace sparsegen
