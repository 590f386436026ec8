#include <doctest.h>

#include <cmath>
#include <complex>

#include "w2lab/processes/gaf.hpp"
#include "w2lab/processes/kernels.hpp"
#include "w2lab/processes/mcmc.hpp"
#include "w2lab/processes/sampling.hpp"
#include "w2lab/quadrature.hpp"
#include "w2lab/rng.hpp"

using namespace w2lab;
using namespace w2lab::processes;

namespace {
constexpr double kPi = 3.14159265358979323846;

double count_mean(const std::vector<long>& counts) {
    double s = 0.0;
    for (long c : counts) s += c;
    return s / counts.size();
}

double count_var(const std::vector<long>& counts) {
    const double m = count_mean(counts);
    double s = 0.0;
    for (long c : counts) s += (c - m) * (c - m);
    return s / (counts.size() - 1);
}
} // namespace

TEST_CASE("poisson sampler: intensities and replay") {
    RngStream rng(31, 0);
    std::vector<long> counts;
    for (int i = 0; i < 400; ++i)
        counts.push_back(static_cast<long>(sample_poisson(100.0, Domain::unit_square(), rng).size()));
    CHECK(std::abs(count_mean(counts) - 100.0) <= 3.0 * std::sqrt(100.0 / 400.0));
    CHECK(count_var(counts) == doctest::Approx(100.0).epsilon(0.35));

    std::vector<long> disk_counts;
    for (int i = 0; i < 200; ++i)
        disk_counts.push_back(static_cast<long>(sample_poisson(100.0, Domain::unit_disk(), rng).size()));
    CHECK(std::abs(count_mean(disk_counts) - 100.0 * kPi) <= 3.0 * std::sqrt(100.0 * kPi / 200.0));

    RngStream s1(5, 3), s2(5, 3);
    const auto a = sample_poisson(50.0, Domain::unit_disk(), s1);
    const auto b = sample_poisson(50.0, Domain::unit_disk(), s2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.coord(i, 0) == b.coord(i, 0));
        CHECK(a.coord(i, 1) == b.coord(i, 1));
    }
}

TEST_CASE("infinite ginibre kernel values") {
    const auto k = kernel_infinite_ginibre(150.0);
    const double z[2] = {0.3, -0.2};
    CHECK(k.intensity(std::span<const double>(z, 2)) == doctest::Approx(150.0 / kPi).epsilon(1e-14));

    const auto k2 = kernel_infinite_ginibre(2.0);
    const double p[2] = {0.0, 0.0}, q[2] = {1.0, 0.0};
    const auto v = k2.eval(std::span<const double>(p, 2), std::span<const double>(q, 2));
    CHECK(std::abs(v) == doctest::Approx((2.0 / kPi) * std::exp(-1.0)).epsilon(1e-13));

    RngStream rng(8, 0);
    for (int i = 0; i < 100; ++i) {
        const double a[2] = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const double b[2] = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto kab = k.eval(std::span<const double>(a, 2), std::span<const double>(b, 2));
        const auto kba = k.eval(std::span<const double>(b, 2), std::span<const double>(a, 2));
        CHECK(std::abs(kab - std::conj(kba)) <= 1e-12 * std::abs(kab) + 1e-300);
        const double mod = std::abs(kab);
        const double d2 = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
        CHECK(mod == doctest::Approx((150.0 / kPi) * std::exp(-75.0 * d2)).epsilon(1e-10));
    }
}

TEST_CASE("bessel kernel: diagonal, d=1 reduction, symmetry") {
    const auto k = kernel_bessel(50.0, 2);
    const double x[2] = {0.4, 0.1};
    CHECK(k.intensity(std::span<const double>(x, 2)) == doctest::Approx(50.0).epsilon(1e-14));
    const double y[2] = {0.9, -0.3};
    const auto kxy = k.eval(std::span<const double>(x, 2), std::span<const double>(y, 2));
    const auto kyx = k.eval(std::span<const double>(y, 2), std::span<const double>(x, 2));
    CHECK(kxy.real() == kyx.real());
    CHECK(kxy.imag() == 0.0);
    // diagonal limit from nearby evaluation
    const double x2[2] = {0.4 + 1e-9, 0.1};
    CHECK(k.eval(std::span<const double>(x, 2), std::span<const double>(x2, 2)).real() ==
          doctest::Approx(50.0).epsilon(1e-6));

    // fast J1 against the library Bessel over the sampling range
    for (double u = 1e-4; u < 120.0; u *= 1.17)
        CHECK(fast_bessel_j1(u) == doctest::Approx(std::cyl_bessel_j(1.0, u)).epsilon(5e-7).scale(1.0));

    // d=1 production path (explicit sine form) vs direct Bessel evaluation
    const double L = 37.0;
    const auto k1 = kernel_bessel(L, 1);
    const double r = 1.0 / L;
    const double a1[1] = {0.2}, b1[1] = {0.2 + r};
    const double direct = k1.eval(std::span<const double>(a1, 1), std::span<const double>(b1, 1)).real();
    const double b = L / 2.0; // frequency radius in d=1
    const double u = 2.0 * kPi * b * r;
    const double via_bessel = std::sqrt(b / r) * std::cyl_bessel_j(0.5, u);
    CHECK(direct == doctest::Approx(via_bessel).epsilon(1e-10));
}

TEST_CASE("radial rnm kernel: norms, diagonal, reproducing property") {
    const auto pot = PotentialSpec::ginibre();
    const int N = 8;
    const auto kernel = kernel_rnm_radial(pot, N);

    // h_j = j! / N^{j+1} for the quadratic potential
    for (int j = 0; j < N; ++j) {
        const double closed = std::lgamma(j + 1.0) - (j + 1.0) * std::log(static_cast<double>(N));
        CHECK(kernel.log_norm(j) == doctest::Approx(closed).epsilon(1e-10));
    }

    const double origin[2] = {0.0, 0.0};
    CHECK(kernel.intensity(std::span<const double>(origin, 2)) == doctest::Approx(8.0).epsilon(1e-11));

    // reproducing property by polar quadrature at two base points
    for (double zx : {0.0, 0.5}) {
        const double z[2] = {zx, 0.0};
        const double diag = kernel.intensity(std::span<const double>(z, 2));
        const auto rs = gauss_legendre(200, 0.0, 9.0); // s = r^2 up to radius 3
        const auto ts = gauss_legendre(200, 0.0, 2.0 * kPi);
        double integral = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double r = std::sqrt(rs.nodes[i]);
            for (int j = 0; j < 200; ++j) {
                const double w[2] = {r * std::cos(ts.nodes[j]), r * std::sin(ts.nodes[j])};
                const double wgt = rs.weights[i] * ts.weights[j] / (2.0 * kPi);
                integral += wgt * std::norm(kernel.eval(std::span<const double>(z, 2),
                                                        std::span<const double>(w, 2)));
            }
        }
        CHECK(integral == doctest::Approx(diag).epsilon(1e-6));
    }
}

TEST_CASE("projection sampler: rank-1 uniform and finite ginibre statistics") {
    // rank 1 with a constant normalized feature on the square: one uniform point
    ProjectionSampler flat;
    flat.dim = 2;
    flat.rank = 1;
    flat.region = Domain::unit_square();
    flat.envelope = 1.0;
    flat.features = [](std::span<const double>, std::complex<double>* out) { out[0] = 1.0; };
    RngStream rng(17, 0);
    double sx = 0.0, sy = 0.0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        const auto pts = sample_projection_dpp(flat, rng);
        REQUIRE(pts.size() == 1);
        sx += pts.coord(0, 0);
        sy += pts.coord(0, 1);
    }
    const double sigma = std::sqrt(1.0 / 12.0 / trials);
    CHECK(std::abs(sx / trials - 0.5) <= 3.0 * sigma);
    CHECK(std::abs(sy / trials - 0.5) <= 3.0 * sigma);

    // finite Ginibre N=16: counts in the disk of radius 1/2 match the
    // intensity integral; 2000 exact trials
    const int N = 16;
    auto kernel = std::make_shared<RadialRnmExpansion>(PotentialSpec::ginibre(), N);
    const auto sampler = finite_rnm_sampler(kernel);
    const auto rs = gauss_legendre(400, 0.0, 0.25);
    double expected = 0.0; // integral of K over |z| < 1/2 w.r.t. dA = ds over r^2
    for (int i = 0; i < 400; ++i) {
        const double z[2] = {std::sqrt(rs.nodes[i]), 0.0};
        expected += rs.weights[i] * kernel->intensity(std::span<const double>(z, 2));
    }
    RngStream rng2(18, 0);
    const int trials2 = 2000;
    std::vector<long> counts;
    double var_stat = 0.0, mean_stat = 0.0;
    std::vector<double> stats;
    for (int t = 0; t < trials2; ++t) {
        const auto pts = sample_projection_dpp(sampler, rng2);
        REQUIRE(pts.size() == static_cast<std::size_t>(N));
        long c = 0;
        double re_sum = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double r2 = pts.coord(i, 0) * pts.coord(i, 0) + pts.coord(i, 1) * pts.coord(i, 1);
            if (r2 <= 0.25) ++c;
            re_sum += pts.coord(i, 0);
        }
        counts.push_back(c);
        stats.push_back(re_sum);
    }
    const double mc_sigma = std::sqrt(count_var(counts) / trials2);
    CHECK(std::abs(count_mean(counts) - expected) <= 3.0 * std::max(mc_sigma, 1e-3));

    // variance of the linear statistic Re z against the kernel formula
    for (double s : stats) mean_stat += s;
    mean_stat /= stats.size();
    for (double s : stats) var_stat += (s - mean_stat) * (s - mean_stat);
    var_stat /= (stats.size() - 1);
    const double predicted = linear_statistic_variance(
        *kernel, [](std::complex<double> z) { return z.real(); }, kernel->sampling_radius());
    const double var_sigma = predicted * std::sqrt(2.0 / (trials2 - 1));
    CHECK(std::abs(var_stat - predicted) <= 3.5 * var_sigma);
}

TEST_CASE("equilibrium measures of the built-in potentials") {
    const auto gin = equilibrium_measure(PotentialSpec::ginibre());
    CHECK(gin.domain().kind() == Domain::Kind::Disk);
    const double z[2] = {0.2, 0.1};
    CHECK(gin.density(std::span<const double>(z, 2)) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK_NOTHROW(gin.verify());

    const double tau = 0.5;
    const auto ell = equilibrium_measure(PotentialSpec::elliptic(tau));
    CHECK(ell.domain().semi_x() == doctest::Approx(1.5));
    CHECK(ell.domain().semi_y() == doctest::Approx(0.5));
    // density 1/(1 - tau^2) w.r.t. dA = 1/(pi (1 - tau^2)) w.r.t. dxdy
    CHECK(ell.density(std::span<const double>(z, 2)) ==
          doctest::Approx(1.0 / (kPi * (1.0 - tau * tau))).epsilon(1e-14));
    CHECK_NOTHROW(ell.verify());

    // tau -> 0 reduces to the ginibre case
    const auto e0 = equilibrium_measure(PotentialSpec::elliptic(0.0));
    CHECK(e0.domain().kind() == Domain::Kind::Disk);
    CHECK(e0.domain().semi_x() == doctest::Approx(1.0));
}

TEST_CASE("bulk and edge deviation profile") {
    const std::vector<double> radii{0.0, 0.5, 2.0};
    const auto dev = bulk_edge_deviation(PotentialSpec::ginibre(), 256,
                                         std::span<const double>(radii.data(), radii.size()));
    CHECK(dev[0].second <= 1e-9); // K(0,0) = N exactly
    CHECK(dev[2].second == doctest::Approx(256.0).epsilon(1e-9)); // K ~ 0 at r=2, target N
    // exterior decay: the kernel itself is negligible at r=2
    const auto kernel = kernel_rnm_radial(PotentialSpec::ginibre(), 256);
    const double far[2] = {2.0, 0.0};
    CHECK(kernel.intensity(std::span<const double>(far, 2)) < 1e-6);
}

TEST_CASE("nystrom restriction: eigenvalues, counts, repulsion") {
    const double L = 60.0;
    const auto restriction =
        build_nystrom_restriction(kernel_infinite_ginibre(L), Domain::unit_square(), 40);
    for (double v : restriction->eigenvalues()) {
        CHECK(v > -1e-6);
        CHECK(v < 1.0 + 1e-6);
    }
    CHECK(restriction->expected_count() == doctest::Approx(L / kPi).epsilon(0.02));

    RngStream rng(19, 0);
    std::vector<long> counts;
    const int trials = 400;
    for (int t = 0; t < trials; ++t)
        counts.push_back(static_cast<long>(sample_dpp_spectral(*restriction, rng).size()));
    const double mean = count_mean(counts);
    const double var = count_var(counts);
    CHECK(std::abs(mean - L / kPi) <= 3.0 * std::sqrt(var / trials) + 0.02 * L / kPi);
    CHECK(var < mean); // sub-Poissonian
}

TEST_CASE("fock restriction matches the nystrom route at moderate L") {
    const double L = 60.0;
    const auto fock = build_ginibre_fock_restriction(L, Domain::unit_square());
    for (double v : fock->eigenvalues()) {
        CHECK(v > -1e-6);
        CHECK(v < 1.0 + 1e-6);
    }
    CHECK(fock->expected_count() == doctest::Approx(L / kPi).epsilon(1e-6));

    const auto nys = build_nystrom_restriction(kernel_infinite_ginibre(L), Domain::unit_square(), 48);
    // leading eigenvalues agree between the two discretizations
    const auto& a = fock->eigenvalues();
    const auto& b = nys->eigenvalues();
    const std::size_t top = std::min<std::size_t>(std::min(a.size(), b.size()), 30);
    for (std::size_t i = 0; i < top; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(2e-3).scale(1.0));

    RngStream rng(20, 0);
    std::vector<long> counts;
    for (int t = 0; t < 300; ++t)
        counts.push_back(static_cast<long>(sample_dpp_spectral(*fock, rng).size()));
    CHECK(std::abs(count_mean(counts) - L / kPi) <=
          3.0 * std::sqrt(count_var(counts) / counts.size()));
    CHECK(count_var(counts) < count_mean(counts));
}

TEST_CASE("bessel nystrom expected count") {
    const double L = 40.0;
    const auto restriction =
        build_nystrom_restriction(kernel_bessel(L, 2), Domain::unit_square(), 40);
    CHECK(restriction->expected_count() == doctest::Approx(L).epsilon(0.02));
    RngStream rng(23, 0);
    std::vector<long> counts;
    for (int t = 0; t < 300; ++t)
        counts.push_back(static_cast<long>(sample_dpp_spectral(*restriction, rng).size()));
    CHECK(std::abs(count_mean(counts) - L) <= 3.0 * std::sqrt(count_var(counts) / counts.size()));
    CHECK(count_var(counts) < count_mean(counts));
}

TEST_CASE("gaf zeros: deterministic roots, truncation stability, intensity") {
    const auto spec = GafSpec::make(150.0, Domain::unit_square());
    CHECK(spec.truncation > 75);

    // force f(z) = z^2 - 1/4 in the gaf basis: a_0 = -1/4, a_2 = sqrt(2)/L
    {
        GafSpec tiny = spec;
        tiny.window = Domain::box({-1, -1}, {1, 1});
        // force f(z) = z^2 - 1/4: a_2 sqrt(L^2/2!) = 1 and a_0 = -1/4
        std::vector<std::complex<double>> a(tiny.truncation + 1, 0.0);
        a[0] = -0.25;
        a[2] = std::sqrt(2.0) / tiny.intensity;
        const auto zeros = gaf_zeros_from_coefficients(tiny, a);
        REQUIRE(zeros.size() == 2);
        double lo = zeros.coord(0, 0), hi = zeros.coord(1, 0);
        if (lo > hi) std::swap(lo, hi);
        CHECK(lo == doctest::Approx(-0.5).epsilon(1e-10));
        CHECK(hi == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(std::abs(zeros.coord(0, 1)) <= 1e-10);
    }

    // truncation stability: doubling M moves no retained root by more than 1e-8
    {
        RngStream rng(29, 0);
        std::vector<std::complex<double>> a(spec.truncation + 1);
        for (auto& c : a) c = {rng.gauss() / std::sqrt(2.0), rng.gauss() / std::sqrt(2.0)};
        const auto base = gaf_zeros_from_coefficients(spec, a);
        GafSpec big = spec;
        big.truncation = 2 * spec.truncation;
        std::vector<std::complex<double>> a2 = a;
        a2.resize(big.truncation + 1);
        RngStream rng2(30, 0);
        for (std::size_t i = a.size(); i < a2.size(); ++i)
            a2[i] = {rng2.gauss() / std::sqrt(2.0), rng2.gauss() / std::sqrt(2.0)};
        const auto refined = gaf_zeros_from_coefficients(big, a2);
        REQUIRE(base.size() == refined.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            double best = 1e300;
            for (std::size_t j = 0; j < refined.size(); ++j) {
                const double d = std::hypot(base.coord(i, 0) - refined.coord(j, 0),
                                            base.coord(i, 1) - refined.coord(j, 1));
                best = std::min(best, d);
            }
            CHECK(best <= 1e-8);
        }
    }

    // empirical intensity L/pi on the unit square
    RngStream rng(31, 0);
    std::vector<long> counts;
    const int trials = 500;
    for (int t = 0; t < trials; ++t)
        counts.push_back(static_cast<long>(sample_gaf_zeros(spec, rng).size()));
    const double mean = count_mean(counts);
    const double sigma = std::sqrt(count_var(counts) / trials);
    CHECK(std::abs(mean - 150.0 / kPi) <= 3.0 * sigma);
}

TEST_CASE("rnm mcmc: two-point oracle, droplet concentration, elliptic anisotropy") {
    // N=2 quadratic potential: |z1 - z2| has density prop. to u e^{-u} in
    // u = N |w|^2 / 2; sample the oracle exactly and compare via KS.
    const int draws = 10000;
    std::vector<double> mcmc_draws, oracle_draws;
    RngStream rng(41, 0);
    for (int i = 0; i < draws; ++i) {
        // oracle: |w|^2 ~ Gamma(2, rate N/2) with N=2 -> sum of two Exp(1)
        const double u = -std::log(std::max(rng.uniform(), 1e-300)) -
                         std::log(std::max(rng.uniform(), 1e-300));
        oracle_draws.push_back(std::sqrt(u));
    }
    {
        const auto pot = PotentialSpec::ginibre();
        // independent short chains, one terminal draw each
        for (int i = 0; i < draws; ++i) {
            RngStream r(43, i);
            const auto one = sample_rnm_mcmc(pot, 2, 600, r);
            const double dx = one.config.coord(0, 0) - one.config.coord(1, 0);
            const double dy = one.config.coord(0, 1) - one.config.coord(1, 1);
            mcmc_draws.push_back(std::hypot(dx, dy));
        }
    }
    std::sort(mcmc_draws.begin(), mcmc_draws.end());
    std::sort(oracle_draws.begin(), oracle_draws.end());
    double ks = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < mcmc_draws.size(); ++i) {
        while (j < oracle_draws.size() && oracle_draws[j] <= mcmc_draws[i]) ++j;
        ks = std::max(ks, std::abs((i + 1.0) / mcmc_draws.size() -
                                   static_cast<double>(j) / oracle_draws.size()));
    }
    // two-sample KS critical value at the 1% level
    const double crit = 1.628 * std::sqrt(2.0 / draws);
    CHECK(ks < crit);

    // droplet concentration at N=64
    {
        double inside = 0.0;
        const int chains = 12;
        for (int c = 0; c < chains; ++c) {
            RngStream r(44, c);
            const auto res = sample_rnm_mcmc(PotentialSpec::ginibre(), 64, 3000, r);
            CHECK(res.tuned_ok);
            long cnt = 0;
            for (std::size_t i = 0; i < res.config.size(); ++i)
                if (res.config.coord(i, 0) * res.config.coord(i, 0) +
                        res.config.coord(i, 1) * res.config.coord(i, 1) <=
                    1.0)
                    ++cnt;
            inside += static_cast<double>(cnt) / 64.0;
        }
        CHECK(inside / chains >= 0.95);
    }

    // elliptic anisotropy of second moments
    {
        const double tau = 0.5;
        double sx2 = 0.0, sy2 = 0.0;
        const int chains = 16;
        for (int c = 0; c < chains; ++c) {
            RngStream r(45, c);
            const auto res = sample_rnm_mcmc(PotentialSpec::elliptic(tau), 64, 4000, r);
            for (std::size_t i = 0; i < res.config.size(); ++i) {
                sx2 += res.config.coord(i, 0) * res.config.coord(i, 0);
                sy2 += res.config.coord(i, 1) * res.config.coord(i, 1);
            }
        }
        const double ratio = sx2 / sy2;
        CHECK(ratio >= 9.0 * 0.8);
        CHECK(ratio <= 9.0 * 1.2);
    }
}
