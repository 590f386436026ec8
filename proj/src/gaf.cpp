#include "w2lab/processes/gaf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace w2lab::processes {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

// log sum_{n<=M} exp(terms) for the in-window variance mass.
double log_scale_sq(double L, double r2, int M) {
    if (r2 <= 0.0) return 0.0; // only n=0 contributes
    const double x = std::log(L * r2);
    double mx = -1e300;
    std::vector<double> e(M + 1);
    for (int n = 0; n <= M; ++n) {
        e[n] = n * x - std::lgamma(n + 1.0);
        mx = std::max(mx, e[n]);
    }
    double s = 0.0;
    for (int n = 0; n <= M; ++n) s += std::exp(e[n] - mx);
    return mx + std::log(s);
}
} // namespace

GafSpec GafSpec::make(double L, const Domain& window) {
    if (!(L > 0.0)) throw std::invalid_argument("GafSpec: L <= 0");
    GafSpec spec;
    spec.intensity = L;
    spec.window = window;
    std::vector<double> lo, hi;
    window.bounding_box(lo, hi);
    const double hx = 0.5 * (hi[0] - lo[0]), hy = 0.5 * (hi[1] - lo[1]);
    const double R2 = hx * hx + hy * hy; // squared circumradius about the center
    const double mean = L * R2;
    // Ratio of discarded to retained variance mass at radius R is the
    // Poisson(L R^2) tail ratio; push it below 1e-12.
    int M = static_cast<int>(mean + 8.0 * std::sqrt(mean + 4.0) + 16.0);
    auto tail_ratio = [&](int m) {
        double log_head = -1e300, log_tail = -1e300;
        for (int n = 0; n <= m + 600; ++n) {
            const double t = n * std::log(std::max(mean, 1e-300)) - std::lgamma(n + 1.0);
            double& acc = n <= m ? log_head : log_tail;
            acc = std::max(acc, t) + std::log1p(std::exp(std::min(acc, t) - std::max(acc, t)));
            if (n > mean && t < log_head - 80.0) break;
        }
        return std::exp(log_tail - log_head);
    };
    while (tail_ratio(M) > 1e-12) M += 8;
    spec.truncation = M;
    return spec;
}

std::vector<std::complex<double>> polynomial_roots(std::vector<std::complex<double>> coeffs) {
    while (!coeffs.empty() && std::abs(coeffs.back()) == 0.0) coeffs.pop_back();
    if (coeffs.size() < 2) return {};
    const int M = static_cast<int>(coeffs.size()) - 1;

    double max_mag = 0.0;
    for (const auto& c : coeffs) max_mag = std::max(max_mag, std::abs(c));
    for (auto& c : coeffs) c /= max_mag;

    // Newton ratio p/p'; for |z| > 1 it is computed through the reversed
    // polynomial q(w) = w^M p(1/w) so Horner never leaves the unit disk.
    std::vector<std::complex<double>> rev(coeffs.rbegin(), coeffs.rend());
    auto newton_ratio = [&](std::complex<double> zk) -> std::complex<double> {
        if (std::abs(zk) <= 1.0) {
            std::complex<double> p = coeffs[M], dp = 0.0;
            for (int n = M - 1; n >= 0; --n) {
                dp = dp * zk + p;
                p = p * zk + coeffs[n];
            }
            if (std::abs(p) == 0.0) return 0.0;
            if (std::abs(dp) == 0.0) return {1e-8, 1e-8};
            return p / dp;
        }
        const std::complex<double> w = 1.0 / zk;
        std::complex<double> q = rev[M], dq = 0.0;
        for (int n = M - 1; n >= 0; --n) {
            dq = dq * w + q;
            q = q * w + rev[n];
        }
        if (std::abs(q) == 0.0) return 0.0;
        // p'/p (z) = (M - w q'(w)/q(w)) / z
        const std::complex<double> logd = (static_cast<double>(M) - w * dq / q) * w;
        if (std::abs(logd) < 1e-300) return {1e-8, 1e-8};
        return 1.0 / logd;
    };

    // Initial guesses on a circle at a log-domain coefficient-ratio radius.
    double radius = 1e-3;
    const double log_cM = std::log(std::abs(coeffs[M]));
    for (int n = 0; n < M; ++n) {
        const double mag = std::abs(coeffs[n]);
        if (mag == 0.0) continue;
        radius = std::max(radius, std::exp((std::log(mag) - log_cM) / (M - n)));
    }
    radius = std::min(radius * 0.7, 1e4);
    std::vector<std::complex<double>> z(M);
    for (int k = 0; k < M; ++k) {
        const double a = 2.0 * kPi * (k + 0.357) / M + 0.4;
        z[k] = radius * std::complex<double>(std::cos(a), std::sin(a));
    }

    std::vector<std::complex<double>> step(M);
    bool converged = false;
    for (int iter = 0; iter < 800 && !converged; ++iter) {
        converged = true;
        for (int k = 0; k < M; ++k) {
            const std::complex<double> newton = newton_ratio(z[k]);
            if (newton == 0.0) {
                step[k] = 0.0;
                continue;
            }
            std::complex<double> repulse = 0.0;
            for (int j = 0; j < M; ++j) {
                if (j == k) continue;
                const std::complex<double> d = z[k] - z[j];
                if (std::abs(d) > 1e-300) repulse += 1.0 / d;
            }
            const std::complex<double> denom = 1.0 - newton * repulse;
            step[k] = std::abs(denom) < 1e-300 ? newton : newton / denom;
            if (std::abs(step[k]) > 1e-14 * (1.0 + std::abs(z[k]))) converged = false;
        }
        for (int k = 0; k < M; ++k) z[k] -= step[k];
    }
    if (!converged) throw std::runtime_error("polynomial_roots: Aberth did not converge");

    for (int k = 0; k < M; ++k) {
        for (int polish = 0; polish < 2; ++polish) {
            const auto ratio = newton_ratio(z[k]);
            z[k] -= ratio;
        }
    }
    return z;
}

namespace {
PointConfiguration roots_to_window(const GafSpec& spec,
                                   const std::vector<std::complex<double>>& coeffs,
                                   double log_gauge) {
    std::vector<double> lo, hi;
    spec.window.bounding_box(lo, hi);
    const double cx = 0.5 * (lo[0] + hi[0]), cy = 0.5 * (lo[1] + hi[1]);

    const auto roots = polynomial_roots(coeffs);
    const int M = static_cast<int>(coeffs.size()) - 1;
    PointConfiguration out(2);
    for (const auto& r : roots) {
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
            throw std::runtime_error("sample_gaf_zeros: non-finite root");
        const double pos[2] = {r.real() + cx, r.imag() + cy};
        if (!spec.window.contains(std::span<const double>(pos, 2))) continue;
        // Residual audit against the local scale of the truncated series.
        std::complex<double> p = coeffs[M], dp = 0.0;
        for (int n = M - 1; n >= 0; --n) {
            dp = dp * r + p;
            p = p * r + coeffs[n];
        }
        const double log_local =
            0.5 * log_scale_sq(spec.intensity, std::norm(r), spec.truncation);
        if (std::abs(p) > 0.0 &&
            std::log(std::abs(p)) + log_gauge > std::log(1e-8) + log_local)
            throw std::runtime_error("sample_gaf_zeros: root residual exceeds tolerance");
        out.push_back(pos[0], pos[1]);
    }
    return out;
}
} // namespace

PointConfiguration gaf_zeros_from_coefficients(const GafSpec& spec,
                                               const std::vector<std::complex<double>>& a) {
    const int M = spec.truncation;
    if (static_cast<int>(a.size()) != M + 1)
        throw std::invalid_argument("gaf_zeros_from_coefficients: need M+1 coefficients");
    // c_n = a_n exp(g_n), g_n = (n log L - log n!)/2, gauged by the max to
    // keep doubles in range. log_gauge restores absolute residual scale.
    std::vector<double> g(M + 1);
    double gmax = -1e300;
    for (int n = 0; n <= M; ++n) {
        g[n] = 0.5 * (n * std::log(spec.intensity) - std::lgamma(n + 1.0));
        if (std::abs(a[n]) > 0.0) gmax = std::max(gmax, g[n] + std::log(std::abs(a[n])));
    }
    std::vector<std::complex<double>> coeffs(M + 1);
    for (int n = 0; n <= M; ++n) {
        const double mag = std::abs(a[n]);
        if (mag == 0.0) {
            coeffs[n] = 0.0;
            continue;
        }
        const double lm = std::log(mag) + g[n] - gmax;
        coeffs[n] = lm < -400.0 ? std::complex<double>(0.0, 0.0) : (a[n] / mag) * std::exp(lm);
    }
    return roots_to_window(spec, coeffs, gmax);
}

PointConfiguration sample_gaf_zeros(const GafSpec& spec, RngStream& rng) {
    std::vector<std::complex<double>> a(spec.truncation + 1);
    const double inv_sqrt2 = 0.70710678118654752440;
    for (auto& c : a) {
        const double re = rng.gauss(), im = rng.gauss();
        c = std::complex<double>(re * inv_sqrt2, im * inv_sqrt2);
    }
    return gaf_zeros_from_coefficients(spec, a);
}

} // namespace w2lab::processes
