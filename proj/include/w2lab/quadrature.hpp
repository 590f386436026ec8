#pragma once
#include <functional>
#include <vector>

namespace w2lab {

// Gauss-Legendre rule on [a, b]: n nodes integrate polynomials up to
// degree 2n-1 exactly.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n, double a, double b);

/// Adaptive 1-d integration (Gauss-Kronrod-free: doubling composite GL panels)
/// to the given relative tolerance. Throws on non-convergence.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_doublings = 16);

/// log of the integral of exp(log_f(u)) over [a, b]; the integrand is scaled
/// by its maximum before quadrature, so widely ranging exponents are safe.
double log_integrate(const std::function<double(double)>& log_f, double a, double b,
                     double rel_tol);

} // namespace w2lab
