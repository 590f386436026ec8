#include "w2lab/processes/mcmc.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace w2lab::processes {

namespace {

using C = std::complex<double>;

// Conditional log-density of one coordinate given the rest.
double site_log_density(const PotentialSpec& pot, const std::vector<C>& z, int N, int i, C zi) {
    double l = -static_cast<double>(N) * pot.value(zi);
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const double d2 = std::norm(zi - z[j]);
        if (d2 < 1e-24) return -1e300;
        l += std::log(d2);
    }
    return l;
}

C site_drift(const PotentialSpec& pot, const std::vector<C>& z, int N, int i, C zi, double h,
             double cap) {
    C g = -static_cast<double>(N) * pot.gradient(zi);
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const C d = zi - z[j];
        g += 2.0 * d / std::max(std::norm(d), 1e-24);
    }
    g *= h;
    const double m = std::abs(g);
    return m > cap ? g * (cap / m) : g;
}

} // namespace

McmcResult sample_rnm_mcmc(const PotentialSpec& potential, int N, int steps, RngStream& rng) {
    if (N < 2) throw std::invalid_argument("sample_rnm_mcmc: N < 2");
    if (steps < 2) throw std::invalid_argument("sample_rnm_mcmc: steps < 2");
    // Single-site Langevin sweeps with per-coordinate step h ~ 1/N, Gaussian
    // proposals, Metropolis-corrected with the clipped drift on both sides.
    const double h = 0.4 / N;
    const double sigma = std::sqrt(2.0 * h);
    const double cap = 10.0 * sigma;

    std::vector<C> z(N);
    for (int i = 0; i < N; ++i) z[i] = {0.7 * rng.gauss(), 0.7 * rng.gauss()};

    long accepted = 0, counted = 0;
    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < N; ++i) {
            const C zi = z[i];
            const C drift = site_drift(potential, z, N, i, zi, h, cap);
            const C zp = zi + drift + C(sigma * rng.gauss(), sigma * rng.gauss());
            const double lp_new = site_log_density(potential, z, N, i, zp);
            double log_alpha = -1e300;
            if (lp_new > -1e299) {
                const double lp_old = site_log_density(potential, z, N, i, zi);
                const C drift_rev = site_drift(potential, z, N, i, zp, h, cap);
                const double fwd = std::norm(zp - zi - drift);
                const double rev = std::norm(zi - zp - drift_rev);
                log_alpha = lp_new - lp_old + (fwd - rev) / (4.0 * h);
            }
            const bool accept = std::log(std::max(rng.uniform(), 1e-300)) < log_alpha;
            if (accept) z[i] = zp;
            if (s >= steps / 2) {
                ++counted;
                if (accept) ++accepted;
            }
        }
    }

    McmcResult out;
    out.steps = steps;
    out.acceptance_rate = counted > 0 ? static_cast<double>(accepted) / counted : 0.0;
    out.tuned_ok = out.acceptance_rate >= 0.1 && out.acceptance_rate <= 0.9;
    out.config = PointConfiguration(2);
    out.config.reserve(N);
    for (int i = 0; i < N; ++i) out.config.push_back(z[i].real(), z[i].imag());
    return out;
}

} // namespace w2lab::processes
