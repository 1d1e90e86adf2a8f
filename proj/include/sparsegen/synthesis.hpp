#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsegen/innovation.hpp"
#include "sparsegen/levy_laws.hpp"
#include "sparsegen/operators.hpp"

namespace sparsegen {

// ceil(T / h), treating quotients within 1e-9 (relative) of an integer as that integer.
std::size_t grid_size(double T, double h);

// values[i] = s_n(i h), i = 0 .. ceil(T/h) - 1; boundary[m] = s_n(-m h), m = 0 .. deg(P) - 1.
struct Trajectory {
    double h = 0.0;
    std::vector<double> values;
    std::vector<double> boundary;
    nlohmann::json provenance = nlohmann::json::object();
};

// values[i] = u_n(i h) = sum_k A_k beta(i h - tau_k).
struct IncrementVector {
    double h = 0.0;
    std::vector<double> values;
};

// Whether the scatter uses per-cell compensated (Neumaier) summation:
// deg(P) > 4 or more than 100 impulses per grid cell.
bool uses_compensated_scatter(int order, std::size_t impulses, std::size_t grid);

// Impulse scatter. Each impulse only touches the grid indices i with
// i h - tau in (0, deg(P) h], so the cost is deg(P) * (grid + K).
// Throws ConfigError if spline.h() differs from h.
IncrementVector increment_vector_serial(const InnovationRealization& r, const BSpline& spline, double h);

// OpenMP version. The grid is cut into fixed blocks; each block visits only the
// impulses that can reach it, in sorted order, so every cell sees exactly the
// same additions in the same order as the serial kernel and the two results are
// bit-identical for any thread count.
IncrementVector increment_vector(const InnovationRealization& r, const BSpline& spline, double h);

// u_i = sum_m taps[m] s_{i-m}, with s_j for j <= 0 read from boundary[-j].
// u_0 needs s(-deg(P) h), which the boundary does not carry; it is set to 0.
IncrementVector forward_filter(std::span<const double> s, const FirFilter& fir,
                               std::span<const double> boundary);

// s_i = (u_i - sum_{m>=1} taps[m] s_{i-m}) / taps[0] for i >= 1, with s_0 = boundary[0]
// and s_j for j <= 0 read from boundary[-j]. Sequential by nature.
// Throws ConfigError if boundary.size() != deg(P).
Trajectory reverse_filter(const IncrementVector& u, const FirFilter& fir,
                          std::span<const double> boundary);

// Brute-force oracle: values[i] = sum_k A_k rho(i h - tau_k) (+ null_term(i h)).
// O(K * grid) by construction.
using NullSpaceTerm = std::function<double(double)>;
Trajectory direct_green_eval_serial(const InnovationRealization& r, const GreensFunction& g,
                                    double h, double T, const NullSpaceTerm& null_term = {});
// OpenMP over grid points; bit-identical to the serial oracle.
Trajectory direct_green_eval(const InnovationRealization& r, const GreensFunction& g, double h,
                             double T, const NullSpaceTerm& null_term = {});

// B-spline pipeline on an existing realization: bspline -> increment_vector -> reverse_filter.
// An empty boundary means all zeros. Operators with right-half-plane roots are
// still run through the causal recursion; a warning is recorded in the provenance.
Trajectory synthesize(const InnovationRealization& r, const RationalOperator& op, double h,
                      std::span<const double> boundary = {});

// Same realization viewed through a new grid step.
inline Trajectory resample(const InnovationRealization& r, const RationalOperator& op,
                           double new_h, std::span<const double> boundary = {}) {
    return synthesize(r, op, new_h, boundary);
}

struct Generated {
    InnovationRealization realization;
    Trajectory trajectory;
};

// Full recipe: simulate_innovation -> synthesize.
Generated generate(const LevyLaw& law, const RationalOperator& op, std::int64_t n, double T,
                   double h, std::uint64_t seed, std::span<const double> boundary = {});

inline Trajectory generate_trajectory(const LevyLaw& law, const RationalOperator& op,
                                      std::int64_t n, double T, double h, std::uint64_t seed,
                                      std::span<const double> boundary = {}) {
    return generate(law, op, n, T, h, seed, boundary).trajectory;
}

// CSV with header "t,value", one row per grid point, t = i h, 17 significant digits.
std::string trajectory_csv(const Trajectory& t);
void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& path);

}  // namespace sparsegen
