#include "sparsegen/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "sparsegen/errors.hpp"

namespace sparsegen {

namespace {

double cluster_tolerance(cplx r) { return 1e-8 * (1.0 + std::abs(r)); }

std::vector<double> trimmed(std::vector<double> c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    return c;
}

void add_root(std::vector<Root>& clusters, cplx r, int mult) {
    for (auto& c : clusters) {
        if (std::abs(c.value - r) <= cluster_tolerance(c.value)) {
            const double total = c.multiplicity + mult;
            c.value = (c.value * static_cast<double>(c.multiplicity) + r * static_cast<double>(mult)) /
                      total;
            c.multiplicity += mult;
            return;
        }
    }
    clusters.push_back(Root{r, mult});
}

void sort_roots(std::vector<Root>& roots) {
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
}

cplx horner(std::span<const double> c, cplx z) {
    cplx acc{0.0, 0.0};
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

std::vector<Root> find_roots(std::span<const double> coeffs) {
    std::vector<double> c = trimmed({coeffs.begin(), coeffs.end()});
    for (double v : c) {
        if (!std::isfinite(v)) throw ConfigError("find_roots: coefficients must be finite");
    }
    if (c.size() < 2) throw ConfigError("find_roots: polynomial degree must be >= 1");

    std::vector<Root> roots;
    // Exact roots at the origin.
    std::size_t zeros = 0;
    while (zeros < c.size() - 1 && c[zeros] == 0.0) ++zeros;
    if (zeros > 0) {
        roots.push_back(Root{{0.0, 0.0}, static_cast<int>(zeros)});
        c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(zeros));
    }

    const std::size_t degree = c.size() - 1;
    if (degree == 1) {
        add_root(roots, {-c[0] / c[1], 0.0}, 1);
    } else if (degree == 2) {
        const double a = c[2], b = c[1], k = c[0];
        const double disc = b * b - 4.0 * a * k;
        if (disc >= 0.0) {
            const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            const double r1 = q / a;
            const double r2 = k / q;
            add_root(roots, {r1, 0.0}, 1);
            add_root(roots, {r2, 0.0}, 1);
        } else {
            const double re = -b / (2.0 * a);
            const double im = std::sqrt(-disc) / (2.0 * std::abs(a));
            add_root(roots, {re, im}, 1);
            add_root(roots, {re, -im}, 1);
        }
    } else if (degree > 2) {
        const auto n = static_cast<Eigen::Index>(degree);
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
        Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("find_roots: companion eigenvalue solver did not converge");
        }
        for (Eigen::Index i = 0; i < n; ++i) add_root(roots, solver.eigenvalues()(i), 1);
    }
    sort_roots(roots);
    return roots;
}

std::vector<double> expand_roots(std::span<const Root> roots, double lead) {
    std::vector<cplx> poly{cplx{lead, 0.0}};
    for (const auto& r : roots) {
        for (int m = 0; m < r.multiplicity; ++m) {
            std::vector<cplx> next(poly.size() + 1, cplx{0.0, 0.0});
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i + 1] += poly[i];
                next[i] -= r.value * poly[i];
            }
            poly = std::move(next);
        }
    }
    std::vector<double> out(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (std::abs(poly[i].imag()) > 1e-9 * (1.0 + std::abs(poly[i].real()))) {
            throw ConfigError("operator: roots do not define a real polynomial");
        }
        out[i] = poly[i].real();
    }
    return out;
}

// ---------------------------------------------------------------------------

RationalOperator::RationalOperator(std::vector<double> p, std::vector<double> q,
                                   std::vector<Root> roots, bool from_roots)
    : p_(std::move(p)), q_(std::move(q)), roots_(std::move(roots)), described_by_roots_(from_roots) {
    order_ = static_cast<int>(p_.size()) - 1;
}

RationalOperator RationalOperator::from_coefficients(std::vector<double> p, std::vector<double> q) {
    p = trimmed(std::move(p));
    q = trimmed(std::move(q));
    if (p.size() < 2) throw ConfigError("operator: P must have degree >= 1");
    if (q.empty()) throw ConfigError("operator: Q must be a nonzero polynomial");
    for (double v : q) {
        if (!std::isfinite(v)) throw ConfigError("operator: Q coefficients must be finite");
    }
    const auto deg_p = p.size() - 1;
    const auto deg_q = q.size() - 1;
    if (deg_p <= deg_q) {
        std::ostringstream msg;
        msg << "operator: deg(P) > deg(Q) is required (got deg(P) = " << deg_p
            << ", deg(Q) = " << deg_q << ")";
        throw ConfigError(msg.str());
    }
    auto roots = find_roots(p);
    return RationalOperator{std::move(p), std::move(q), std::move(roots), false};
}

RationalOperator RationalOperator::from_roots(std::vector<Root> p_roots, std::vector<double> q,
                                              double lead) {
    if (p_roots.empty()) throw ConfigError("operator: P must have at least one root");
    if (!std::isfinite(lead) || lead == 0.0) throw ConfigError("operator: lead must be nonzero");
    for (const auto& r : p_roots) {
        if (r.multiplicity < 1) throw ConfigError("operator: root multiplicity must be >= 1");
        if (!std::isfinite(r.value.real()) || !std::isfinite(r.value.imag())) {
            throw ConfigError("operator: roots must be finite");
        }
    }
    for (const auto& r : p_roots) {
        if (r.value.imag() == 0.0) continue;
        const bool paired = std::any_of(p_roots.begin(), p_roots.end(), [&r](const Root& o) {
            return o.multiplicity == r.multiplicity &&
                   std::abs(o.value - std::conj(r.value)) <= 1e-12 * (1.0 + std::abs(r.value));
        });
        if (!paired) throw ConfigError("operator: complex roots must come in conjugate pairs");
    }
    std::vector<Root> roots;
    for (const auto& r : p_roots) {
        bool merged = false;
        for (auto& existing : roots) {
            if (existing.value == r.value) {
                existing.multiplicity += r.multiplicity;
                merged = true;
            }
        }
        if (!merged) roots.push_back(r);
    }
    sort_roots(roots);
    auto p = expand_roots(roots, lead);
    q = trimmed(std::move(q));
    if (q.empty()) throw ConfigError("operator: Q must be a nonzero polynomial");
    const auto deg_p = p.size() - 1;
    const auto deg_q = q.size() - 1;
    if (deg_p <= deg_q) {
        std::ostringstream msg;
        msg << "operator: deg(P) > deg(Q) is required (got deg(P) = " << deg_p
            << ", deg(Q) = " << deg_q << ")";
        throw ConfigError(msg.str());
    }
    return RationalOperator{std::move(p), std::move(q), std::move(roots), true};
}

bool RationalOperator::is_stable() const noexcept {
    return std::all_of(roots_.begin(), roots_.end(),
                       [](const Root& r) { return r.value.real() < 0.0; });
}

bool RationalOperator::has_anticausal_part() const noexcept {
    return std::any_of(roots_.begin(), roots_.end(),
                       [](const Root& r) { return r.value.real() > 0.0; });
}

cplx RationalOperator::inverse_response(cplx z) const {
    cplx p{lead(), 0.0};
    for (const auto& r : roots_) {
        for (int m = 0; m < r.multiplicity; ++m) p *= (z - r.value);
    }
    return horner(q_, z) / p;
}

nlohmann::json RationalOperator::to_json() const {
    nlohmann::json doc;
    if (described_by_roots_) {
        auto roots = nlohmann::json::array();
        for (const auto& r : roots_) {
            roots.push_back({{"re", r.value.real()}, {"im", r.value.imag()}, {"mult", r.multiplicity}});
        }
        doc["P_roots"] = std::move(roots);
        if (lead() != 1.0) doc["lead"] = lead();
    } else {
        doc["P_coeffs"] = p_;
    }
    doc["Q_coeffs"] = q_;
    return doc;
}

RationalOperator RationalOperator::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("operator must be an object");
    std::vector<double> q{1.0};
    if (doc.contains("Q_coeffs")) {
        const auto& jq = doc.at("Q_coeffs");
        if (!jq.is_array()) throw ConfigError("operator.Q_coeffs must be an array of numbers");
        q.clear();
        for (const auto& v : jq) {
            if (!v.is_number()) throw ConfigError("operator.Q_coeffs must be an array of numbers");
            q.push_back(v.get<double>());
        }
    }
    const bool has_coeffs = doc.contains("P_coeffs");
    const bool has_roots = doc.contains("P_roots");
    if (has_coeffs == has_roots) {
        throw ConfigError("operator: exactly one of P_coeffs or P_roots is required");
    }
    if (has_coeffs) {
        const auto& jp = doc.at("P_coeffs");
        if (!jp.is_array()) throw ConfigError("operator.P_coeffs must be an array of numbers");
        std::vector<double> p;
        for (const auto& v : jp) {
            if (!v.is_number()) throw ConfigError("operator.P_coeffs must be an array of numbers");
            p.push_back(v.get<double>());
        }
        return from_coefficients(std::move(p), std::move(q));
    }
    const auto& jr = doc.at("P_roots");
    if (!jr.is_array()) throw ConfigError("operator.P_roots must be an array");
    std::vector<Root> roots;
    for (const auto& r : jr) {
        if (!r.is_object() || !r.contains("re") || !r.at("re").is_number()) {
            throw ConfigError("operator.P_roots entries need a numeric 're'");
        }
        const double re = r.at("re").get<double>();
        const double im = r.value("im", 0.0);
        const int mult = r.value("mult", 1);
        roots.push_back(Root{{re, im}, mult});
    }
    const double lead = doc.value("lead", 1.0);
    return from_roots(std::move(roots), std::move(q), lead);
}

// ---------------------------------------------------------------------------

cplx GreenAtom::operator()(double t) const {
    const bool active = causal ? (t > 0.0) : (t <= 0.0);
    if (!active) return {0.0, 0.0};
    cplx e;
    if (root.imag() == 0.0) {
        e = coeff * std::exp(root.real() * t);
    } else {
        e = coeff * std::exp(root * t);
    }
    if (power > 1) e *= std::pow(t, power - 1) / factorial(power - 1);
    return causal ? e : -e;
}

GreensFunction::GreensFunction(std::vector<GreenAtom> atoms) : atoms_(std::move(atoms)) {}

cplx GreensFunction::evaluate_complex(double t) const {
    cplx sum{0.0, 0.0};
    for (const auto& a : atoms_) sum += a(t);
    return sum;
}

double GreensFunction::operator()(double t) const {
    cplx sum{0.0, 0.0};
    double magnitude = 0.0;
    for (const auto& a : atoms_) {
        const cplx v = a(t);
        sum += v;
        magnitude += std::abs(v.real()) + std::abs(v.imag());
    }
    if (std::abs(sum.imag()) <= 1e-6 * magnitude) return sum.real();

    // Fitted coefficients carry noise relative to the largest one; near-cancelling
    // atom sums (high-order roots at small t) are judged against that floor.
    double largest = 0.0;
    double envelope = 0.0;
    for (const auto& a : atoms_) {
        largest = std::max(largest, std::abs(a.coeff));
        envelope = std::max(envelope, std::exp(a.root.real() * t) * std::pow(std::max(1.0, std::abs(t)), a.power - 1));
    }
    if (std::abs(sum.imag()) > 1e-6 * magnitude + 1e-9 * largest * envelope) {
        std::ostringstream msg;
        msg << "Green's function: imaginary residue " << sum.imag() << " at t = " << t
            << " exceeds 1e-6 relative to " << magnitude;
        throw NumericalError(msg.str(), std::abs(sum.imag()) / magnitude);
    }
    return sum.real();
}

PartialFractions partial_fractions(const RationalOperator& op) {
    struct Column {
        cplx root;
        int power;
    };
    std::vector<Column> columns;
    double scale = 1.0;
    for (const auto& r : op.roots()) {
        for (int k = 1; k <= r.multiplicity; ++k) columns.push_back({r.value, k});
        scale = std::max(scale, 1.0 + std::abs(r.value));
    }
    const auto n = static_cast<Eigen::Index>(columns.size());
    const Eigen::Index m = 2 * n + 4;

    PartialFractions best;
    best.residual = std::numeric_limits<double>::infinity();
    constexpr int kAttempts = 6;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        // Probe frequencies spread over [-1.5, 1.5] * scale, shifted per attempt.
        const double shift = (0.137 + 0.291 * attempt) * scale / static_cast<double>(m);
        std::vector<cplx> probes;
        for (Eigen::Index j = 0; j < m; ++j) {
            double omega = scale * (-1.5 + 3.0 * (static_cast<double>(j) + 0.5) / static_cast<double>(m)) + shift;
            for (int guard = 0; guard < 16; ++guard) {
                const bool close = std::any_of(columns.begin(), columns.end(), [&](const Column& c) {
                    return std::abs(cplx{0.0, omega} - c.root) < 1e-3 * scale;
                });
                if (!close) break;
                omega += 0.37 * scale / static_cast<double>(m);
            }
            probes.emplace_back(0.0, omega);
        }

        Eigen::MatrixXcd a(m, n);
        Eigen::VectorXcd b(m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const cplx z = probes[static_cast<std::size_t>(j)];
            b(j) = op.inverse_response(z);
            for (Eigen::Index c = 0; c < n; ++c) {
                const auto& col = columns[static_cast<std::size_t>(c)];
                a(j, c) = 1.0 / std::pow(z - col.root, col.power);
            }
        }
        Eigen::VectorXd col_scale(n);
        Eigen::MatrixXcd scaled = a;
        for (Eigen::Index c = 0; c < n; ++c) {
            col_scale(c) = 1.0 / a.col(c).norm();
            scaled.col(c) *= col_scale(c);
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cond = sv(0) / sv(n - 1);
        Eigen::VectorXcd y = svd.solve(b);
        Eigen::VectorXcd coeffs = y.cwiseProduct(col_scale.cast<cplx>());
        const double residual = (a * coeffs - b).norm() / b.norm();

        if (residual < best.residual) {
            best.atoms.clear();
            for (Eigen::Index c = 0; c < n; ++c) {
                const auto& col = columns[static_cast<std::size_t>(c)];
                best.atoms.push_back(GreenAtom{coeffs(c), col.root, col.power, col.root.real() <= 0.0});
            }
            best.residual = residual;
            best.condition_number = cond;
        }
        if (residual < 1e-8 && cond < 1e12) return best;
    }
    std::ostringstream msg;
    msg << "partial fractions: probe system ill-conditioned (condition number "
        << best.condition_number << ", relative residual " << best.residual << ")";
    throw NumericalError(msg.str(), best.residual);
}

GreensFunction greens_function(const RationalOperator& op) {
    return GreensFunction{partial_fractions(op).atoms};
}

FirFilter fir_filter(const RationalOperator& op, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("fir_filter: h must be > 0");
    std::vector<cplx> taps{cplx{1.0, 0.0}};
    for (const auto& r : op.roots()) {
        const cplx decay = std::exp(r.value * h);
        for (int m = 0; m < r.multiplicity; ++m) {
            std::vector<cplx> next(taps.size() + 1, cplx{0.0, 0.0});
            for (std::size_t i = 0; i < taps.size(); ++i) {
                next[i] += taps[i];
                next[i + 1] -= decay * taps[i];
            }
            taps = std::move(next);
        }
    }
    FirFilter fir;
    fir.h = h;
    fir.taps.reserve(taps.size());
    for (const auto& t : taps) {
        if (std::abs(t.imag()) > 1e-9 * (1.0 + std::abs(t.real()))) {
            throw NumericalError("fir_filter: taps are not real (unpaired complex roots?)",
                                 std::abs(t.imag()));
        }
        fir.taps.push_back(t.real());
    }
    fir.taps[0] = 1.0;
    return fir;
}

BSpline::BSpline(GreensFunction green, FirFilter fir)
    : green_(std::move(green)), fir_(std::move(fir)) {
    support_end_ = fir_.order() * fir_.h;
}

double BSpline::operator()(double t) const {
    double sum = 0.0;
    for (std::size_t m = 0; m < fir_.taps.size(); ++m) {
        sum += fir_.taps[m] * green_(t - static_cast<double>(m) * fir_.h);
    }
    return sum;
}

BSpline bspline(const RationalOperator& op, double h) {
    return BSpline{greens_function(op), fir_filter(op, h)};
}

}  // namespace sparsegen
