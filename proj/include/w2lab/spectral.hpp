#pragma once
#include <memory>
#include <span>
#include <vector>

#include "w2lab/geometry.hpp"
#include "w2lab/measure.hpp"

namespace w2lab::spectral {

// Neumann Laplacian eigenbasis on a box: separated cosines
//   phi_k(x) = prod_i c_{k_i} cos(k_i pi (x_i - a_i) / L_i),
//   c_0 = L_i^{-1/2}, c_{k>=1} = (2/L_i)^{1/2},
// with eigenvalue lambda_k = pi^2 sum (k_i/L_i)^2. Indices are kept sorted
// by (lambda, lexicographic k); the constant mode comes first.
class NeumannBasis {
public:
    static NeumannBasis truncate_by_eigenvalue(const Domain& box, double lambda_max);
    static NeumannBasis truncate_by_index(const Domain& box, int max_index_per_axis);

    const Domain& box() const { return box_; }
    int dim() const { return box_.dim(); }
    std::size_t size() const { return lambda_.size(); }
    double lambda_max() const { return lambda_max_; }

    std::span<const int> index(std::size_t i) const {
        return {indices_.data() + i * dim(), static_cast<std::size_t>(dim())};
    }
    double eigenvalue(std::size_t i) const { return lambda_[i]; }

    /// Closed-form eigenpair lookup by multi-index. Throws if k is outside
    /// the truncation.
    std::size_t position_of(std::span<const int> k) const;
    double eigenfunction(std::size_t i, std::span<const double> x) const;

    /// Evaluate every eigenfunction at x (cosine recurrence per axis).
    void eval_all(std::span<const double> x, double* out) const;

    int max_index(int axis) const { return axis_max_[axis]; }

    /// sup_x |phi_k(x)| <= this for every k in or out of the truncation.
    double sup_bound() const;

private:
    Domain box_ = Domain::unit_square();
    double lambda_max_ = 0.0;
    std::vector<int> indices_;   // flattened, dim() entries per mode
    std::vector<double> lambda_;
    std::vector<int> axis_max_;
    void build(const Domain& box, const std::vector<int>& axis_max, double lambda_cut);
};

// Fourier coefficients mu_hat(k) = integral of phi_k d(mu) over the basis.
struct SpectralCoefficients {
    std::shared_ptr<const NeumannBasis> basis;
    std::vector<double> values;
    double mass = 0.0;
};

/// Coefficients of the empirical probability measure of a configuration.
/// Deterministic fixed-block summation; throws on an empty configuration
/// or points outside the box.
SpectralCoefficients coefficients(const PointConfiguration& points,
                                  std::shared_ptr<const NeumannBasis> basis);

/// Coefficients of a density measure supported in the box, by tensor
/// Gauss-Legendre with 4*K+8 nodes per axis; a refined rule must agree to
/// 1e-10 or the computation is rejected.
SpectralCoefficients coefficients(const ReferenceMeasure& measure,
                                  std::shared_ptr<const NeumannBasis> basis);

/// Multiply each coefficient by exp(-lambda_k t). The mass mode (lambda=0)
/// is a fixed point. Requires t >= 0.
SpectralCoefficients heat_evolve(const SpectralCoefficients& coeffs, double t);

/// Number of modes k != 0 with lambda_k <= x, by lattice enumeration.
long weyl_count(const Domain& box, double x);

/// Rigorous upper bound on the discarded series tail
///   sum_{lambda_k > lambda_max} exp(-lambda_k t) / lambda_k
/// via integral comparison over the index lattice. Throws when the bound
/// exceeds 1 (truncation insufficient at this t).
double tail_certificate(const NeumannBasis& basis, double t);

/// Same bound without the exceeds-1 error path (used by searches).
double tail_certificate_raw(const NeumannBasis& basis, double t);

// Truncated Neumann heat kernel P(t,x,y) = sum_k e^{-lambda_k t} phi_k(x) phi_k(y).
class HeatKernelEvaluator {
public:
    HeatKernelEvaluator(std::shared_ptr<const NeumannBasis> basis, double t);
    double operator()(std::span<const double> x, std::span<const double> y) const;

private:
    std::shared_ptr<const NeumannBasis> basis_;
    std::vector<double> decay_;
};

/// Quadrature of |x-y|^2 P(t,x,y) over the box against x, with the kernel
/// truncated at the basis eigenvalue cut (axis modes are the only
/// contributors, so the sum reduces to per-axis series).
double heat_second_moment(const NeumannBasis& basis, std::span<const double> y, double t);

} // namespace w2lab::spectral
