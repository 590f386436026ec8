#include "w2lab/processes/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "w2lab/quadrature.hpp"

namespace w2lab::processes {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

std::complex<double> as_complex(std::span<const double> z) { return {z[0], z[1]}; }
} // namespace

KernelEvaluator kernel_infinite_ginibre(double L) {
    if (!(L > 0.0)) throw std::invalid_argument("kernel_infinite_ginibre: L <= 0");
    KernelEvaluator k;
    k.background = Background::Lebesgue;
    k.dim = 2;
    k.intensity = [L](std::span<const double>) { return L / kPi; };
    k.eval = [L](std::span<const double> zs, std::span<const double> ws) {
        const auto z = as_complex(zs), w = as_complex(ws);
        const std::complex<double> expo =
            -0.5 * L * (std::norm(z) + std::norm(w) - 2.0 * z * std::conj(w));
        return (L / kPi) * std::exp(expo);
    };
    return k;
}

double fast_bessel_j1(double x) {
    const double ax = std::abs(x);
    double value;
    if (ax < 8.0) {
        const double y = x * x;
        const double p1 = x * (72362614232.0 +
                               y * (-7895059235.0 +
                                    y * (242396853.1 +
                                         y * (-2972611.439 + y * (15704.48260 + y * -30.16036606)))));
        const double p2 = 144725228442.0 +
                          y * (2300535178.0 +
                               y * (18583304.74 + y * (99447.43394 + y * (376.9991397 + y))));
        value = p1 / p2;
    } else {
        const double z = 8.0 / ax;
        const double y = z * z;
        const double p1 = 1.0 + y * (0.183105e-2 +
                                     y * (-0.3516396496e-4 +
                                          y * (0.2457520174e-5 + y * -0.240337019e-6)));
        const double p2 = 0.04687499995 +
                          y * (-0.2002690873e-3 +
                               y * (0.8449199096e-5 + y * (-0.88228987e-6 + y * 0.105787412e-6)));
        const double xx = ax - 2.356194491;
        value = std::sqrt(0.636619772 / ax) * (std::cos(xx) * p1 - z * std::sin(xx) * p2);
        if (x < 0.0) value = -value;
    }
    return value;
}

KernelEvaluator kernel_bessel(double L, int d) {
    if (!(L > 0.0)) throw std::invalid_argument("kernel_bessel: L <= 0");
    if (d < 1) throw std::invalid_argument("kernel_bessel: d < 1");
    const double nu = 0.5 * d;
    const double omega_d = std::pow(kPi, nu) / std::tgamma(nu + 1.0); // unit ball volume
    const double b = std::pow(L / omega_d, 1.0 / d);                  // frequency radius
    KernelEvaluator k;
    k.background = Background::Lebesgue;
    k.dim = d;
    k.intensity = [L](std::span<const double>) { return L; };
    auto make_eval = [=](bool fast) {
        return [=](std::span<const double> x, std::span<const double> y) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double t = x[a] - y[a];
                r2 += t * t;
            }
            const double r = std::sqrt(r2);
            const double u = 2.0 * kPi * b * r;
            double value;
            if (u < 1e-4) {
                const double q = 0.25 * u * u;
                value = L * (1.0 - q / (nu + 1.0) + q * q / (2.0 * (nu + 1.0) * (nu + 2.0)));
            } else if (d == 1) {
                value = std::sin(u) / (kPi * r);
            } else if (d == 2 && fast) {
                value = (b / r) * fast_bessel_j1(u);
            } else {
                value = std::pow(b / r, nu) * std::cyl_bessel_j(nu, u);
            }
            return std::complex<double>(value, 0.0);
        };
    };
    k.eval = make_eval(false);
    k.eval_fast = make_eval(true);
    return k;
}

PotentialSpec PotentialSpec::ginibre() {
    PotentialSpec p;
    p.kind_ = Kind::Ginibre;
    p.q_r_ = [](double r) { return r * r; };
    p.dq_r_ = [](double r) { return 2.0 * r; };
    p.laplacian_const_ = 4.0;
    p.droplet_ = Domain::unit_disk();
    p.droplet_known_ = true;
    p.check_growth();
    return p;
}

PotentialSpec PotentialSpec::elliptic(double tau) {
    if (tau < 0.0 || tau >= 1.0) throw std::invalid_argument("PotentialSpec: tau outside [0,1)");
    if (tau == 0.0) return ginibre();
    PotentialSpec p;
    p.kind_ = Kind::Elliptic;
    p.tau_ = tau;
    p.laplacian_const_ = 4.0 / (1.0 - tau * tau);
    p.droplet_ = Domain::ellipse({0.0, 0.0}, 1.0 + tau, 1.0 - tau);
    p.droplet_known_ = true;
    p.check_growth();
    return p;
}

PotentialSpec PotentialSpec::radial(std::function<double(double)> Q_of_r,
                                    std::function<double(double)> dQ_dr,
                                    double droplet_radius) {
    PotentialSpec p;
    p.kind_ = Kind::Radial;
    p.q_r_ = std::move(Q_of_r);
    p.dq_r_ = std::move(dQ_dr);
    p.droplet_known_ = droplet_radius > 0.0;
    if (p.droplet_known_) p.droplet_ = Domain::disk({0.0, 0.0}, droplet_radius);
    p.laplacian_const_ = 0.0; // computed pointwise from the radial profile
    p.check_growth();
    return p;
}

PotentialSpec PotentialSpec::custom(std::function<double(std::complex<double>)> Q,
                                    std::function<std::complex<double>(std::complex<double>)> grad,
                                    Domain droplet, double laplacian_on_droplet) {
    PotentialSpec p;
    p.kind_ = Kind::Custom;
    p.q_ = std::move(Q);
    p.grad_ = std::move(grad);
    p.droplet_ = std::move(droplet);
    p.droplet_known_ = true;
    p.laplacian_const_ = laplacian_on_droplet;
    p.check_growth();
    return p;
}

double PotentialSpec::value(std::complex<double> z) const {
    switch (kind_) {
    case Kind::Ginibre: return std::norm(z);
    case Kind::Elliptic: {
        const double x = z.real(), y = z.imag();
        return x * x / (1.0 + tau_) + y * y / (1.0 - tau_);
    }
    case Kind::Radial: return q_r_(std::abs(z));
    case Kind::Custom: return q_(z);
    }
    return 0.0;
}

std::complex<double> PotentialSpec::gradient(std::complex<double> z) const {
    switch (kind_) {
    case Kind::Ginibre: return 2.0 * z;
    case Kind::Elliptic:
        return {2.0 * z.real() / (1.0 + tau_), 2.0 * z.imag() / (1.0 - tau_)};
    case Kind::Radial: {
        const double r = std::abs(z);
        if (r == 0.0) return {0.0, 0.0};
        return dq_r_(r) * z / r;
    }
    case Kind::Custom: return grad_(z);
    }
    return {0.0, 0.0};
}

double PotentialSpec::radial_value(double r) const {
    if (kind_ == Kind::Elliptic || kind_ == Kind::Custom)
        throw std::logic_error("PotentialSpec: not a radial potential");
    return q_r_(r);
}

double PotentialSpec::laplacian(std::complex<double> z) const {
    if (kind_ == Kind::Radial) {
        const double r = std::max(std::abs(z), 1e-9);
        const double h = 1e-5 * std::max(1.0, r);
        const double ddq = (dq_r_(r + h) - dq_r_(r - h)) / (2.0 * h);
        return ddq + dq_r_(r) / r;
    }
    return laplacian_const_;
}

void PotentialSpec::check_growth() const {
    for (double r : {1e2, 1e3, 1e4}) {
        const double q = value({r, 0.0});
        if (!(q / std::log(r * r) > 1.0))
            throw std::invalid_argument("PotentialSpec: growth condition fails at |z|=" +
                                        std::to_string(r));
    }
}

RadialRnmExpansion::RadialRnmExpansion(const PotentialSpec& potential, int N) : n_(N) {
    if (N < 1) throw std::invalid_argument("RadialRnmExpansion: N < 1");
    if (potential.kind() == PotentialSpec::Kind::Elliptic ||
        potential.kind() == PotentialSpec::Kind::Custom)
        throw std::invalid_argument("RadialRnmExpansion: radial potentials only");
    q_r_ = [potential](double r) { return potential.radial_value(r); };
    log_h_.resize(N);

    // h_j = integral over [0, inf) of u^j exp(-N Q(sqrt u)) du, in log space.
    for (int j = 0; j < N; ++j) {
        auto log_f = [&](double u) {
            if (u <= 0.0) return j == 0 ? -static_cast<double>(N) * q_r_(0.0) : -1e300;
            return j * std::log(u) - static_cast<double>(N) * q_r_(std::sqrt(u));
        };
        // Expand the right end until the integrand has dropped far below its
        // scan maximum.
        double u_hi = 1.0, g_max = -1e300;
        for (int scan = 0; scan < 200; ++scan) {
            g_max = std::max(g_max, log_f(u_hi * (scan + 1) / 200.0));
        }
        while (log_f(u_hi) > g_max - 80.0 || u_hi < 4.0 * (j + 1.0) / N) {
            u_hi *= 2.0;
            for (int scan = 0; scan < 16; ++scan)
                g_max = std::max(g_max, log_f(u_hi * (scan + 1) / 16.0));
            if (u_hi > 1e12)
                throw std::runtime_error("RadialRnmExpansion: norm integral does not localize");
        }
        log_h_[j] = log_integrate(log_f, 0.0, u_hi, 1e-13);
    }
    radius_hint_ = potential.droplet_known()
                       ? std::max(potential.droplet().semi_x(), potential.droplet().semi_y())
                       : std::sqrt(std::exp(log_h_[N - 1] - log_h_[std::max(0, N - 2)]) * N);
}

double RadialRnmExpansion::sampling_radius() const {
    return radius_hint_ * (1.0 + 5.0 / std::sqrt(static_cast<double>(n_)));
}

void RadialRnmExpansion::features(std::span<const double> z, std::complex<double>* out) const {
    const double x = z[0], y = z[1];
    const double r = std::hypot(x, y);
    const double base = -0.5 * n_ * q_r_(r);
    if (r == 0.0) {
        out[0] = std::exp(base - 0.5 * log_h_[0]);
        for (int j = 1; j < n_; ++j) out[j] = 0.0;
        return;
    }
    const double lnr = std::log(r);
    const std::complex<double> phase_step(x / r, y / r);
    std::complex<double> phase(1.0, 0.0);
    for (int j = 0; j < n_; ++j) {
        const double lj = base + j * lnr - 0.5 * log_h_[j];
        out[j] = lj < -300.0 ? std::complex<double>(0.0, 0.0) : std::exp(lj) * phase;
        phase *= phase_step;
        if ((j & 255) == 255) phase /= std::abs(phase);
    }
}

double RadialRnmExpansion::intensity(std::span<const double> z) const {
    const double r = std::hypot(z[0], z[1]);
    const double base = -static_cast<double>(n_) * q_r_(r);
    if (r == 0.0) return std::exp(base - log_h_[0]);
    const double lnr = std::log(r);
    double sum = 0.0, comp = 0.0;
    for (int j = 0; j < n_; ++j) {
        const double lj = base + 2.0 * j * lnr - log_h_[j];
        const double term = (lj < -700.0 ? 0.0 : std::exp(lj)) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

std::complex<double> RadialRnmExpansion::eval(std::span<const double> z,
                                              std::span<const double> w) const {
    std::vector<std::complex<double>> fz(n_), fw(n_);
    features(z, fz.data());
    features(w, fw.data());
    std::complex<double> s = 0.0;
    for (int j = 0; j < n_; ++j) s += fz[j] * std::conj(fw[j]);
    return s;
}

KernelEvaluator RadialRnmExpansion::as_kernel() const {
    auto self = std::make_shared<RadialRnmExpansion>(*this);
    KernelEvaluator k;
    k.background = Background::LebesgueOverPi;
    k.dim = 2;
    k.rank = n_;
    k.intensity = [self](std::span<const double> z) { return self->intensity(z); };
    k.eval = [self](std::span<const double> z, std::span<const double> w) {
        return self->eval(z, w);
    };
    k.features = [self](std::span<const double> z, std::complex<double>* out) {
        self->features(z, out);
    };
    return k;
}

RadialRnmExpansion kernel_rnm_radial(const PotentialSpec& potential, int N) {
    return RadialRnmExpansion(potential, N);
}

ReferenceMeasure equilibrium_measure(const PotentialSpec& potential) {
    if (!potential.droplet_known())
        throw std::invalid_argument("equilibrium_measure: droplet unknown");
    const Domain droplet = potential.droplet();
    switch (potential.kind()) {
    case PotentialSpec::Kind::Ginibre:
    case PotentialSpec::Kind::Elliptic:
        // Constant (1/4) Laplacian Q over the droplet integrates to one.
        return ReferenceMeasure::uniform(droplet);
    default: {
        // Density (1/4) Laplacian Q w.r.t. dA = Laplacian Q / (4 pi) w.r.t. dxdy.
        auto density = [potential](std::span<const double> z) {
            return potential.laplacian({z[0], z[1]}) / (4.0 * kPi);
        };
        double lower = 1e300;
        for (int i = 1; i <= 32; ++i) {
            const double r = droplet.semi_x() * i / 32.0;
            lower = std::min(lower, potential.laplacian({r, 0.0}) / (4.0 * kPi));
        }
        return ReferenceMeasure::with_density(droplet, density, lower * (1.0 - 1e-9));
    }
    }
}

std::vector<std::pair<double, double>> bulk_edge_deviation(const PotentialSpec& potential,
                                                           int N,
                                                           std::span<const double> radii) {
    const RadialRnmExpansion kernel(potential, N);
    std::vector<std::pair<double, double>> out;
    out.reserve(radii.size());
    for (double r : radii) {
        const double z[2] = {r, 0.0};
        const double k = kernel.intensity(std::span<const double>(z, 2));
        const double target = 0.25 * N * potential.laplacian({r, 0.0});
        out.emplace_back(r, std::abs(k - target));
    }
    return out;
}

double linear_statistic_variance(const RadialRnmExpansion& kernel,
                                 const std::function<double(std::complex<double>)>& f,
                                 double quad_radius, int n_radial, int n_angular) {
    const int n = kernel.rank();
    const auto rs = gauss_legendre(n_radial, 0.0, quad_radius * quad_radius);
    const auto ts = gauss_legendre(n_angular, 0.0, 2.0 * kPi);
    std::vector<std::complex<double>> M(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<std::complex<double>> feat(n);
    double int_f2_K = 0.0;
    for (int i = 0; i < n_radial; ++i) {
        const double r = std::sqrt(rs.nodes[i]);
        for (int j = 0; j < n_angular; ++j) {
            // dA = dxdy/pi in polar is r dr dtheta / pi = ds dtheta / (2 pi).
            const double w = rs.weights[i] * ts.weights[j] / (2.0 * kPi);
            const double z[2] = {r * std::cos(ts.nodes[j]), r * std::sin(ts.nodes[j])};
            kernel.features(std::span<const double>(z, 2), feat.data());
            const double fz = f({z[0], z[1]});
            double diag = 0.0;
            for (int a = 0; a < n; ++a) diag += std::norm(feat[a]);
            int_f2_K += w * fz * fz * diag;
            const double wf = w * fz;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    M[static_cast<std::size_t>(a) * n + b] += wf * feat[a] * std::conj(feat[b]);
        }
    }
    double frob = 0.0;
    for (const auto& m : M) frob += std::norm(m);
    return int_f2_K - frob;
}

} // namespace w2lab::processes
