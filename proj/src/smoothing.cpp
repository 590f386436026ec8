#include "w2lab/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace w2lab::smoothing {

namespace {

struct BoundContext {
    const spectral::NeumannBasis* basis;
    std::vector<double> diff_sq; // |mu_hat - nu_hat|^2 for k >= 1
    std::vector<double> lambda;
    double c1 = 0.0;
    double sqrt_c = 0.0;
    double tail_coeff_sq = 0.0; // a priori bound on |diff|^2 past the cut
    int dim = 2;
};

BoundContext make_context(const spectral::SpectralCoefficients& mu,
                          const spectral::SpectralCoefficients& nu, double c) {
    if (mu.basis != nu.basis)
        throw std::invalid_argument("smoothing_bound: coefficients on different bases");
    if (!(c > 0.0)) throw std::invalid_argument("smoothing_bound: c must be positive");
    if (std::abs(mu.mass - nu.mass) > 1e-9)
        throw std::invalid_argument("smoothing_bound: masses differ");
    const auto& basis = *mu.basis;
    BoundContext ctx;
    ctx.basis = &basis;
    ctx.dim = basis.dim();
    const double vol = basis.box().area();
    ctx.c1 = std::sqrt(mu.mass) + std::sqrt(std::max(0.0, nu.mass - c * vol));
    ctx.sqrt_c = std::sqrt(c);
    bool identical = mu.values.size() == nu.values.size();
    for (std::size_t k = 1; k < basis.size(); ++k) {
        const double d = mu.values[k] - nu.values[k];
        identical = identical && d == 0.0;
        ctx.diff_sq.push_back(d * d);
        ctx.lambda.push_back(basis.eigenvalue(k));
    }
    if (identical && mu.values[0] == nu.values[0]) {
        ctx.tail_coeff_sq = 0.0;
    } else {
        const double per = basis.sup_bound() * (mu.mass + nu.mass);
        ctx.tail_coeff_sq = per * per;
    }
    return ctx;
}

SmoothingBoundReport evaluate(const BoundContext& ctx, double t) {
    SmoothingBoundReport rep;
    rep.t = t;
    rep.c1 = ctx.c1;
    rep.sqrt_c = ctx.sqrt_c;
    rep.lambda_max = ctx.basis->lambda_max();
    double series = 0.0;
    for (std::size_t i = 0; i < ctx.diff_sq.size(); ++i)
        series += std::exp(-ctx.lambda[i] * t) * ctx.diff_sq[i] / ctx.lambda[i];
    rep.series = series;
    rep.tail = ctx.tail_coeff_sq == 0.0
                   ? 0.0
                   : spectral::tail_certificate(*ctx.basis, t) * ctx.tail_coeff_sq;
    rep.bound = ctx.c1 * std::sqrt(ctx.dim * t) +
                (2.0 / ctx.sqrt_c) * std::sqrt(series + rep.tail);
    return rep;
}

} // namespace

SmoothingBoundReport smoothing_bound(const spectral::SpectralCoefficients& mu,
                                     const spectral::SpectralCoefficients& nu, double t,
                                     double c) {
    if (!(t > 0.0)) throw std::invalid_argument("smoothing_bound: t must be positive");
    return evaluate(make_context(mu, nu, c), t);
}

SmoothingBoundReport optimize_t(const spectral::SpectralCoefficients& mu,
                                const spectral::SpectralCoefficients& nu, double c,
                                double t_lo, double t_hi) {
    if (!(t_lo > 0.0) || !(t_hi > t_lo))
        throw std::invalid_argument("optimize_t: need 0 < t_lo < t_hi");
    const BoundContext ctx = make_context(mu, nu, c);

    auto value = [&](double t) -> double {
        try {
            return evaluate(ctx, t).bound;
        } catch (const std::runtime_error&) {
            return 1e300; // truncation insufficient at this t
        }
    };

    const int grid = 64;
    const double lr = std::log(t_hi / t_lo);
    int best = -1;
    double best_val = 1e300;
    std::vector<double> ts(grid);
    for (int i = 0; i < grid; ++i) {
        ts[i] = t_lo * std::exp(lr * i / (grid - 1));
        const double v = value(ts[i]);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best < 0 || best_val >= 1e300)
        throw std::runtime_error("optimize_t: bound non-finite over the whole range");

    // Golden-section on log t in the bracketing interval.
    double a = std::log(ts[std::max(0, best - 1)]);
    double b = std::log(ts[std::min(grid - 1, best + 1)]);
    const double gr = 0.61803398874989484820;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = value(std::exp(x1)), f2 = value(std::exp(x2));
    while (b - a > 1e-3) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = value(std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = value(std::exp(x2));
        }
    }
    const double t_star = std::exp(0.5 * (a + b));
    SmoothingBoundReport rep = evaluate(ctx, t_star);
    if (best_val < rep.bound) rep = evaluate(ctx, ts[best]);
    return rep;
}

RatePrediction rate_prediction(double a, double b, int d) {
    if (d < 1) throw std::invalid_argument("rate_prediction: d < 1");
    const double edge = b + 0.5 * d;
    if (edge < 1.0 - 1e-12)
        throw std::invalid_argument("rate_prediction: requires b + d/2 >= 1");
    RatePrediction p;
    p.gamma = a / (2.0 * b + d);
    p.log_factor = std::abs(edge - 1.0) < 1e-12;
    return p;
}

} // namespace w2lab::smoothing
