#pragma once

#include <complex>
#include <span>
#include <vector>

#include <json.hpp>

namespace sparsegen {

using cplx = std::complex<double>;

struct Root {
    cplx value;
    int multiplicity = 1;
};

// Roots of the real polynomial sum_k coeffs[k] x^k (ascending degree).
// Closed form for degree <= 2, companion-matrix eigenvalues otherwise. Roots closer
// than 1e-8 * (1 + |root|) are merged and their multiplicities summed.
// Throws ConfigError for degree < 1 and NumericalError if the eigen solver fails.
std::vector<Root> find_roots(std::span<const double> coeffs);

// Ascending coefficients of lead * prod (x - root)^multiplicity. Imaginary parts
// are asserted negligible and dropped.
std::vector<double> expand_roots(std::span<const Root> roots, double lead = 1.0);

// L = P(D) Q(D)^{-1} with real P, Q and deg P > deg Q.
class RationalOperator {
public:
    // Throws ConfigError on deg P <= deg Q, zero leading coefficients or empty P.
    static RationalOperator from_coefficients(std::vector<double> p, std::vector<double> q);
    // P = lead * prod (x - root)^mult. Complex roots must come in conjugate pairs.
    static RationalOperator from_roots(std::vector<Root> p_roots, std::vector<double> q,
                                       double lead = 1.0);

    int order() const noexcept { return order_; }  // deg P
    const std::vector<Root>& roots() const noexcept { return roots_; }
    const std::vector<double>& p_coeffs() const noexcept { return p_; }
    const std::vector<double>& q_coeffs() const noexcept { return q_; }
    double lead() const noexcept { return p_.back(); }

    // All roots strictly in the left half plane.
    bool is_stable() const noexcept;
    // Some root strictly in the right half plane (anticausal Green's atoms).
    bool has_anticausal_part() const noexcept;

    // Q(z) / P(z); the inverse frequency response at z = j omega.
    cplx inverse_response(cplx z) const;

    nlohmann::json to_json() const;
    static RationalOperator from_json(const nlohmann::json& doc);

private:
    RationalOperator(std::vector<double> p, std::vector<double> q, std::vector<Root> roots,
                     bool from_roots);

    std::vector<double> p_;
    std::vector<double> q_;
    std::vector<Root> roots_;
    bool described_by_roots_ = false;
    int order_ = 0;
};

// c t^{k-1} e^{root t} / (k-1)!  on t > 0 (causal, Re root <= 0),
// -c t^{k-1} e^{root t} / (k-1)! on t <= 0 (anticausal, Re root > 0).
struct GreenAtom {
    cplx coeff;
    cplx root;
    int power = 1;
    bool causal = true;

    cplx operator()(double t) const;
};

class GreensFunction {
public:
    explicit GreensFunction(std::vector<GreenAtom> atoms);

    // Real part of the atom sum. Throws NumericalError if the imaginary residue
    // exceeds 1e-6 relative to the summed atom magnitudes (plus a 1e-9 floor
    // scaled by the largest coefficient).
    double operator()(double t) const;
    cplx evaluate_complex(double t) const;

    const std::vector<GreenAtom>& atoms() const noexcept { return atoms_; }

private:
    std::vector<GreenAtom> atoms_;
};

// Partial-fraction coefficients c_ik of Q(z) / P(z) = sum c_ik / (z - root_i)^k,
// fitted by least squares at probe points z = j omega.
struct PartialFractions {
    std::vector<GreenAtom> atoms;
    double residual = 0.0;          // relative least-squares residual
    double condition_number = 0.0;  // of the column-scaled probe matrix
};

PartialFractions partial_fractions(const RationalOperator& op);

GreensFunction greens_function(const RationalOperator& op);

inline double eval_green(const GreensFunction& g, double t) { return g(t); }

struct FirFilter {
    std::vector<double> taps;  // taps[0] == 1
    double h = 0.0;

    int order() const noexcept { return static_cast<int>(taps.size()) - 1; }
};

// Coefficients of prod_m (1 - e^{root_m h} z^{-1}), roots repeated by multiplicity.
FirFilter fir_filter(const RationalOperator& op, double h);

// beta(t) = sum_m taps[m] rho(t - m h), supported on (0, order * h].
class BSpline {
public:
    BSpline(GreensFunction green, FirFilter fir);

    double operator()(double t) const;

    // True for 0 < t <= order * h, the only arguments where beta can be nonzero.
    bool in_support(double t) const noexcept { return t > 0.0 && t <= support_end_; }

    double support_end() const noexcept { return support_end_; }
    double h() const noexcept { return fir_.h; }
    int order() const noexcept { return fir_.order(); }
    const FirFilter& fir() const noexcept { return fir_; }
    const GreensFunction& green() const noexcept { return green_; }

private:
    GreensFunction green_;
    FirFilter fir_;
    double support_end_ = 0.0;
};

BSpline bspline(const RationalOperator& op, double h);

}  // namespace sparsegen
