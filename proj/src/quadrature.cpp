#include "w2lab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace w2lab {

GaussLegendre gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    // Newton iteration on Legendre polynomials, symmetric roots.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = rule.weights[n - 1 - i] = w * half;
    }
    return rule;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_doublings) {
    int panels = 4;
    double prev = 0.0;
    bool have_prev = false;
    for (int round = 0; round <= max_doublings; ++round, panels *= 2) {
        double total = 0.0;
        const double h = (b - a) / panels;
        const GaussLegendre rule = gauss_legendre(12, 0.0, 1.0);
        for (int p = 0; p < panels; ++p) {
            const double lo = a + p * h;
            for (int q = 0; q < 12; ++q) total += rule.weights[q] * f(lo + rule.nodes[q] * h) * h;
        }
        if (have_prev) {
            const double scale = std::max({std::abs(total), std::abs(prev), 1e-300});
            if (std::abs(total - prev) <= rel_tol * scale) return total;
        }
        prev = total;
        have_prev = true;
    }
    throw std::runtime_error("integrate_adaptive: did not converge");
}

double log_integrate(const std::function<double(double)>& log_f, double a, double b,
                     double rel_tol) {
    // Locate the maximum exponent on a scan grid, then integrate the scaled
    // integrand exp(log_f - m).
    const int scan = 512;
    double m = -1e300;
    for (int i = 0; i <= scan; ++i) {
        const double u = a + (b - a) * i / scan;
        m = std::max(m, log_f(u));
    }
    if (!(m > -1e300)) return -1e300;
    const double value = integrate_adaptive(
        [&](double u) {
            const double e = log_f(u) - m;
            return e < -745.0 ? 0.0 : std::exp(e);
        },
        a, b, rel_tol);
    return m + std::log(value);
}

} // namespace w2lab
