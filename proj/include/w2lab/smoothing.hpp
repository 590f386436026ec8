#pragma once
#include "w2lab/spectral.hpp"

namespace w2lab::smoothing {

// Certified W2 upper bound from heat smoothing on a box:
//   bound = C1 (d t)^{1/2} + (2/sqrt(c)) (S(t) + tail)^{1/2},
//   S(t)  = sum_{k>=1} e^{-lambda_k t} |mu_hat(k) - nu_hat(k)|^2 / lambda_k,
//   C1    = mu(O)^{1/2} + (nu(O) - c Vol(O))^{1/2},
// with the infimum constant C2 replaced by its certified lower bound
// sqrt(c). The tail term is the kernel tail certificate scaled by an a
// priori bound on |mu_hat - nu_hat|^2 beyond the truncation, so the output
// stays an upper bound at finite truncation; it vanishes when both
// coefficient vectors are identical (the same measure).
struct SmoothingBoundReport {
    double t = 0.0;
    double series = 0.0;
    double tail = 0.0;
    double c1 = 0.0;
    double sqrt_c = 0.0;
    double bound = 0.0;
    double lambda_max = 0.0;
};

SmoothingBoundReport smoothing_bound(const spectral::SpectralCoefficients& mu,
                                     const spectral::SpectralCoefficients& nu, double t,
                                     double c);

/// Minimize the bound over [t_lo, t_hi]: 64-point logarithmic grid, then
/// golden-section refinement to relative width 1e-3.
SmoothingBoundReport optimize_t(const spectral::SpectralCoefficients& mu,
                                const spectral::SpectralCoefficients& nu, double c,
                                double t_lo, double t_hi);

struct RatePrediction {
    double gamma = 0.0;
    bool log_factor = false;
};

/// Convergence exponent gamma = a/(2b+d) under the coefficient decay
/// E|mu_hat - nu_hat|^2 <= lambda^b / L^a; the boundary case b + d/2 = 1
/// carries a sqrt(log) factor. Requires b + d/2 >= 1.
RatePrediction rate_prediction(double a, double b, int d);

} // namespace w2lab::smoothing
