#pragma once
#include <complex>
#include <vector>

#include "w2lab/geometry.hpp"
#include "w2lab/rng.hpp"

namespace w2lab::processes {

// Planar Gaussian analytic function sum a_n sqrt(L^n/n!) z^n with i.i.d.
// standard complex Gaussian coefficients; sampled through its zero set.
// The series is expanded around the window center (the zero process is
// stationary) and truncated at a degree whose discarded variance mass over
// the window is below 1e-12 of the retained mass.
struct GafSpec {
    double intensity = 0.0; // L
    int truncation = 0;     // degree M
    Domain window = Domain::unit_square();

    static GafSpec make(double L, const Domain& window);
};

/// All roots of sum_n coeffs[n] z^n (Aberth iteration plus Newton polish).
/// Trailing zero coefficients are stripped; throws on non-convergence.
std::vector<std::complex<double>> polynomial_roots(std::vector<std::complex<double>> coeffs);

/// Zeros of one GAF sample inside the window. Each kept root is polished to
/// residual below 1e-8 times the local scale sqrt(sum L^n |z|^{2n} / n!).
PointConfiguration sample_gaf_zeros(const GafSpec& spec, RngStream& rng);

/// Same, but with caller-supplied basis coefficients a_0..a_M (tests force
/// deterministic polynomials through this entry).
PointConfiguration gaf_zeros_from_coefficients(const GafSpec& spec,
                                               const std::vector<std::complex<double>>& a);

} // namespace w2lab::processes
