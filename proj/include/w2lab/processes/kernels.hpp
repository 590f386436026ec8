#pragma once
#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "w2lab/geometry.hpp"
#include "w2lab/measure.hpp"

namespace w2lab::processes {

// Which background measure the kernel's intensities refer to: plain
// Lebesgue dxdy, or the normalized planar measure dA = dxdy / pi.
enum class Background { Lebesgue, LebesgueOverPi };

// Hermitian PSD kernel with pointwise evaluation, first intensity, and an
// optional explicit orthonormal expansion of finite rank.
struct KernelEvaluator {
    Background background = Background::Lebesgue;
    int dim = 2;
    std::function<std::complex<double>(std::span<const double>, std::span<const double>)> eval;
    /// Cheaper evaluation for sampling hot paths (may trade ~1e-7 absolute
    /// accuracy for speed); falls back to eval when absent.
    std::function<std::complex<double>(std::span<const double>, std::span<const double>)>
        eval_fast;
    std::function<double(std::span<const double>)> intensity; // K(x,x)
    int rank = 0;
    std::function<void(std::span<const double>, std::complex<double>*)> features;
};

/// Single-precision-grade Bessel J1 (rational approximations), used by the
/// sampling hot path of the planar sine-type kernel.
double fast_bessel_j1(double x);

/// Infinite Ginibre kernel (L/pi) exp(-L(|z|^2+|w|^2-2 z conj(w))/2),
/// Lebesgue background, K(z,z) = L/pi.
KernelEvaluator kernel_infinite_ginibre(double L);

/// d-dimensional sine-type kernel (projection onto a frequency ball)
/// normalized so that K(x,x) = L, Lebesgue background.
KernelEvaluator kernel_bessel(double L, int d);

// Confining potential of a random normal matrix model.
class PotentialSpec {
public:
    enum class Kind { Ginibre, Elliptic, Radial, Custom };

    static PotentialSpec ginibre();
    static PotentialSpec elliptic(double tau);
    static PotentialSpec radial(std::function<double(double)> Q_of_r,
                                std::function<double(double)> dQ_dr,
                                double droplet_radius = 0.0);
    static PotentialSpec custom(std::function<double(std::complex<double>)> Q,
                                std::function<std::complex<double>(std::complex<double>)> grad,
                                Domain droplet, double laplacian_on_droplet);

    Kind kind() const { return kind_; }
    double tau() const { return tau_; }
    bool is_radial() const { return kind_ != Kind::Custom; } // elliptic handled separately
    bool droplet_known() const { return droplet_known_; }
    const Domain& droplet() const { return droplet_; }

    double value(std::complex<double> z) const;
    std::complex<double> gradient(std::complex<double> z) const;
    double radial_value(double r) const;
    /// Laplacian of Q; constant on the droplet for every built-in variant.
    double laplacian(std::complex<double> z) const;

private:
    PotentialSpec() = default;
    void check_growth() const;
    Kind kind_ = Kind::Ginibre;
    double tau_ = 0.0;
    std::function<double(double)> q_r_, dq_r_;
    std::function<double(std::complex<double>)> q_;
    std::function<std::complex<double>(std::complex<double>)> grad_;
    double laplacian_const_ = 4.0;
    Domain droplet_ = Domain::unit_disk();
    bool droplet_known_ = true;
};

// Rank-N projection kernel of the radial RNM model: monomial expansion
// f_j(z) = z^j exp(-N Q(|z|)/2) / sqrt(h_j) with h_j the dA-moments of
// exp(-N Q). Norms are held in log space so large N stays representable.
class RadialRnmExpansion {
public:
    RadialRnmExpansion(const PotentialSpec& potential, int N);

    int rank() const { return n_; }
    double log_norm(int j) const { return log_h_[j]; }

    void features(std::span<const double> z, std::complex<double>* out) const;
    /// K(z,z) with respect to dA.
    double intensity(std::span<const double> z) const;
    std::complex<double> eval(std::span<const double> z, std::span<const double> w) const;

    KernelEvaluator as_kernel() const;

    /// Envelope radius 1 + 5/sqrt(N) scaled to the droplet extent, inside
    /// which essentially all intensity mass lives.
    double sampling_radius() const;

private:
    int n_;
    std::function<double(double)> q_r_;
    std::vector<double> log_h_;
    double radius_hint_;
};

RadialRnmExpansion kernel_rnm_radial(const PotentialSpec& potential, int N);

/// Equilibrium measure (1/4) Laplacian(Q) restricted to the droplet, with
/// respect to dA; returned as a Lebesgue-density reference measure.
ReferenceMeasure equilibrium_measure(const PotentialSpec& potential);

/// Deviation profile |K(z,z) - (N/4) Laplacian Q(z)| (dA units) along a ray.
std::vector<std::pair<double, double>> bulk_edge_deviation(const PotentialSpec& potential,
                                                           int N,
                                                           std::span<const double> radii);

/// Variance of the linear statistic sum f(x) of the projection DPP with the
/// given expansion: integral f^2 K d(dA) minus the squared Frobenius mass of
/// M_{jl} = integral f f_j conj(f_l) d(dA), by polar quadrature of radius R.
double linear_statistic_variance(const RadialRnmExpansion& kernel,
                                 const std::function<double(std::complex<double>)>& f,
                                 double quad_radius, int n_radial = 160, int n_angular = 160);

} // namespace w2lab::processes
