// Acceptance suite: one numbered check per run-time criterion, each printing
// a single PASS/FAIL line. Exit code is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <atomic>
#include <functional>
#include <thread>
#include <memory>
#include <string>
#include <vector>

#include "w2lab/harness.hpp"
#include "w2lab/measure.hpp"
#include "w2lab/processes/gaf.hpp"
#include "w2lab/processes/kernels.hpp"
#include "w2lab/processes/sampling.hpp"
#include "w2lab/quadrature.hpp"
#include "w2lab/rng.hpp"
#include "w2lab/smoothing.hpp"
#include "w2lab/spectral.hpp"
#include "w2lab/transport.hpp"

using namespace w2lab;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kPi2 = kPi * kPi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double count_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double count_var(const std::vector<double>& v) {
    const double m = count_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

// ---------------------------------------------------------------- 1
Outcome criterion1() {
    const auto square = Domain::unit_square();
    const auto basis = std::make_shared<spectral::NeumannBasis>(
        spectral::NeumannBasis::truncate_by_eigenvalue(square, 400.0 * kPi2));
    const auto uniform = ReferenceMeasure::uniform(square);
    const auto nu = spectral::coefficients(uniform, basis);
    const auto cloud = transport::quantize(uniform, 128);

    std::vector<processes::ProjectionSampler> samplers;
    for (int N : {64, 256})
        samplers.push_back(processes::finite_rnm_sampler(
            std::make_shared<processes::RadialRnmExpansion>(processes::PotentialSpec::ginibre(), N)));

    // 200 configurations: 2x50 Poisson, 2x50 finite Ginibre pushed through
    // the measure-preserving disk-to-square map (the equilibrium measure
    // maps to the uniform measure on the square).
    std::vector<double> margins(200, 1e300);
    std::atomic<int> next{0}, checked{0};
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= 200) return;
            const int cell = k / 50, trial = k % 50;
            RngStream rng(1001, static_cast<std::uint64_t>(k));
            PointConfiguration sample(2);
            if (cell < 2) {
                const double L = cell == 0 ? 64.0 : 256.0;
                sample = restrict_to(processes::sample_poisson(L, square, rng), square);
            } else {
                const auto disk_points = processes::sample_projection_dpp(samplers[cell - 2], rng);
                sample = restrict_to(map_disk_to_unit_square(disk_points), square);
            }
            (void)trial;
            if (sample.empty()) return;
            const auto mu = spectral::coefficients(sample, basis);
            const auto rep = smoothing::optimize_t(mu, nu, 1.0, 1e-3, 1.0);
            const auto w2 = transport::w2_to_cloud(sample, cloud);
            margins[k] = rep.bound + w2.quantization_bound - w2.cost;
            checked.fetch_add(1);
        }
    };
    std::thread t1(worker), t2(worker);
    t1.join();
    t2.join();

    int violations = 0;
    double min_margin = 1e300;
    for (double m : margins) {
        min_margin = std::min(min_margin, m);
        if (m < 0.0) ++violations;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d/%d certified (min margin %.4f)", checked.load() - violations,
                  checked.load(), min_margin);
    return {checked.load() == 200 && violations == 0, buf};
}

// ---------------------------------------------------------------- 2
Outcome criterion2() {
    const auto basis =
        spectral::NeumannBasis::truncate_by_eigenvalue(Domain::unit_square(), 1600.0 * kPi2);
    const double ys[2][2] = {{0.5, 0.5}, {0.1, 0.9}};
    int violations = 0;
    double worst = -1e300;
    for (const auto& y : ys)
        for (double t : {0.01, 0.05, 0.1}) {
            const double m =
                spectral::heat_second_moment(basis, std::span<const double>(y, 2), t);
            const double slack = m - (4.0 * t + 1e-3);
            worst = std::max(worst, slack);
            if (slack > 0.0) ++violations;
        }
    char buf[120];
    std::snprintf(buf, sizeof buf, "6 moment checks, worst slack %.2e", worst);
    return {violations == 0, buf};
}

// ---------------------------------------------------------------- 3
harness::ExperimentConfig criterion3_config() {
    harness::ExperimentConfig cfg;
    cfg.process = "ginibre_finite";
    cfg.params = {64, 128, 256, 512, 1024};
    cfg.domain = "unit-disk";
    cfg.trials = 64;
    cfg.seed = 30001;
    cfg.transport.resolution = 128;
    return cfg;
}

Outcome criterion3() {
    const auto records = harness::run_experiment(criterion3_config());
    for (const auto& r : records)
        if (!r.error.empty()) return {false, "trial failed: " + r.error};
    const auto pure = harness::fit_rate(records, false);
    const auto corrected = harness::fit_rate(records, true);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "pure exponent %.4f (se %.4f), residual %.4f -> log-corrected residual %.4f",
                  pure.exponent, pure.std_error, pure.residual_norm, corrected.residual_norm);
    const bool in_window = pure.exponent >= -0.58 && pure.exponent <= -0.42;
    return {in_window && corrected.residual_norm < pure.residual_norm, buf};
}

// ---------------------------------------------------------------- 4
Outcome criterion4() {
    std::string detail;
    bool pass = true;
    for (const char* process : {"gaf", "ginibre_infinite"}) {
        harness::ExperimentConfig cfg;
        cfg.process = process;
        cfg.params = {50, 100, 200, 400, 800};
        cfg.domain = "unit-square";
        cfg.trials = 64;
        cfg.seed = 40001;
        cfg.transport.resolution = 128;
        const auto records = harness::run_experiment(cfg);
        for (const auto& r : records)
            if (!r.error.empty()) return {false, std::string(process) + " trial failed: " + r.error};
        const auto fit = harness::fit_rate(records, false);
        char buf[120];
        std::snprintf(buf, sizeof buf, "%s exponent %.4f (se %.4f); ", process, fit.exponent,
                      fit.std_error);
        detail += buf;
        pass = pass && fit.exponent >= -0.58 && fit.exponent <= -0.42;
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 5
Outcome criterion5() {
    RngStream rng(50001, 0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform() * 7);
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        PointConfiguration a(d), b(d);
        std::vector<double> x(d);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < d; ++k) x[k] = rng.uniform(-1, 1);
            a.push_back(x);
            for (int k = 0; k < d; ++k) x[k] = rng.uniform(-1, 1);
            b.push_back(x);
        }
        const double exact = transport::w2_bruteforce(a, b);
        const double solver = transport::w2_assignment(a, b).cost;
        worst = std::max(worst, std::abs(solver - exact) / std::max(exact, 1e-300));
    }
    char buf[80];
    std::snprintf(buf, sizeof buf, "max relative error %.3e", worst);
    return {worst <= 1e-10, buf};
}

// ---------------------------------------------------------------- 6
Outcome criterion6() {
    PointConfiguration atom(2);
    atom.push_back(0.0, 0.0);
    const auto res =
        transport::w2_semidiscrete(atom, ReferenceMeasure::uniform(Domain::unit_disk()), 128);
    const double err = std::abs(res.cost - std::sqrt(0.5));
    char buf[120];
    std::snprintf(buf, sizeof buf, "|W2 - sqrt(1/2)| = %.3e vs bound %.3e", err,
                  res.quantization_bound);
    return {err <= res.quantization_bound, buf};
}

// ---------------------------------------------------------------- 7
Outcome criterion7() {
    const auto pot = processes::PotentialSpec::ginibre();
    // reproducing property at N = 8
    const auto k8 = processes::kernel_rnm_radial(pot, 8);
    double worst = 0.0;
    for (double zx : {0.0, 0.5}) {
        const double z[2] = {zx, 0.0};
        const double diag = k8.intensity(std::span<const double>(z, 2));
        const auto rs = gauss_legendre(220, 0.0, 9.0);
        const auto ts = gauss_legendre(220, 0.0, 2.0 * kPi);
        double integral = 0.0;
        for (int i = 0; i < 220; ++i) {
            const double r = std::sqrt(rs.nodes[i]);
            for (int j = 0; j < 220; ++j) {
                const double w[2] = {r * std::cos(ts.nodes[j]), r * std::sin(ts.nodes[j])};
                integral += rs.weights[i] * ts.weights[j] / (2.0 * kPi) *
                            std::norm(k8.eval(std::span<const double>(z, 2),
                                              std::span<const double>(w, 2)));
            }
        }
        worst = std::max(worst, std::abs(integral - diag));
    }
    if (worst > 1e-6) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "reproducing identity off by %.2e", worst);
        return {false, buf};
    }

    // variance of Re z over 2000 exact samples at N = 16
    auto k16 = std::make_shared<processes::RadialRnmExpansion>(pot, 16);
    const auto sampler = processes::finite_rnm_sampler(k16);
    std::vector<double> stats;
    for (int t = 0; t < 2000; ++t) {
        RngStream rng(70001, t);
        const auto pts = processes::sample_projection_dpp(sampler, rng);
        double s = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) s += pts.coord(i, 0);
        stats.push_back(s);
    }
    const double var_emp = count_var(stats);
    const double var_kernel = processes::linear_statistic_variance(
        *k16, [](std::complex<double> z) { return z.real(); }, k16->sampling_radius());
    const double sigma = var_kernel * std::sqrt(2.0 / (stats.size() - 1));
    char buf[160];
    std::snprintf(buf, sizeof buf, "repro err %.2e; Var(Re) empirical %.5f vs formula %.5f (3s=%.5f)",
                  worst, var_emp, var_kernel, 3.0 * sigma);
    return {std::abs(var_emp - var_kernel) <= 3.0 * sigma, buf};
}

// ---------------------------------------------------------------- 8
Outcome criterion8() {
    std::string detail;
    bool pass = true;

    { // GAF mean count, L = 150, 500 trials
        const auto spec = processes::GafSpec::make(150.0, Domain::unit_square());
        std::vector<double> counts;
        for (int t = 0; t < 500; ++t) {
            RngStream rng(80001, t);
            counts.push_back(static_cast<double>(processes::sample_gaf_zeros(spec, rng).size()));
        }
        const double mean = count_mean(counts);
        const double sigma = std::sqrt(count_var(counts) / counts.size());
        const double target = 150.0 / kPi;
        char buf[120];
        std::snprintf(buf, sizeof buf, "gaf %.3f vs %.3f (3s=%.3f); ", mean, target, 3 * sigma);
        detail += buf;
        pass = pass && std::abs(mean - target) <= 3.0 * sigma;
    }

    { // Bessel Nystrom mean count, L = 100, 500 trials
        const double L = 100.0;
        const auto restriction = processes::build_nystrom_restriction(
            processes::kernel_bessel(L, 2), Domain::unit_square(), 64);
        std::vector<double> counts;
        for (int t = 0; t < 500; ++t) {
            RngStream rng(80002, t);
            counts.push_back(
                static_cast<double>(processes::sample_dpp_spectral(*restriction, rng).size()));
        }
        const double mean = count_mean(counts);
        const double sigma = std::sqrt(count_var(counts) / counts.size());
        char buf[120];
        std::snprintf(buf, sizeof buf, "bessel %.3f vs %.1f (3s=%.3f); ", mean, L, 3 * sigma);
        detail += buf;
        pass = pass && std::abs(mean - L) <= 3.0 * sigma;
    }

    { // finite-Ginibre subdisk counts, N = 16, 2000 trials
        const int N = 16;
        auto kernel =
            std::make_shared<processes::RadialRnmExpansion>(processes::PotentialSpec::ginibre(), N);
        const auto sampler = processes::finite_rnm_sampler(kernel);
        const double radii[3] = {0.25, 0.5, 0.75};
        std::vector<std::vector<double>> counts(3);
        for (int t = 0; t < 2000; ++t) {
            RngStream rng(80003, t);
            const auto pts = processes::sample_projection_dpp(sampler, rng);
            for (int k = 0; k < 3; ++k) {
                long c = 0;
                for (std::size_t i = 0; i < pts.size(); ++i)
                    if (pts.coord(i, 0) * pts.coord(i, 0) + pts.coord(i, 1) * pts.coord(i, 1) <=
                        radii[k] * radii[k])
                        ++c;
                counts[k].push_back(static_cast<double>(c));
            }
        }
        for (int k = 0; k < 3; ++k) {
            const auto rs = gauss_legendre(400, 0.0, radii[k] * radii[k]);
            double expected = 0.0;
            for (int i = 0; i < 400; ++i) {
                const double z[2] = {std::sqrt(rs.nodes[i]), 0.0};
                expected += rs.weights[i] * kernel->intensity(std::span<const double>(z, 2));
            }
            const double mean = count_mean(counts[k]);
            const double sigma = std::sqrt(count_var(counts[k]) / counts[k].size());
            char buf[120];
            std::snprintf(buf, sizeof buf, "r=%.2f: %.3f vs %.3f (3s=%.3f); ", radii[k], mean,
                          expected, 3 * sigma);
            detail += buf;
            pass = pass && std::abs(mean - expected) <= 3.0 * sigma;
        }
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 9
Outcome criterion9() {
    const auto pot = processes::PotentialSpec::ginibre();
    std::vector<double> devs;
    for (int N : {64, 256, 1024}) {
        const std::vector<double> radii{0.5};
        const auto profile =
            processes::bulk_edge_deviation(pot, N, std::span<const double>(radii.data(), 1));
        devs.push_back(profile[0].second);
    }
    const double lo = std::min({devs[0], devs[1], devs[2]});
    const double hi = std::max({devs[0], devs[1], devs[2]});
    const bool stable = hi <= 2.0 * lo;

    const auto k256 = processes::kernel_rnm_radial(pot, 256);
    const double far[2] = {2.0, 0.0};
    const double exterior = k256.intensity(std::span<const double>(far, 2));
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "dev(0.5) = {%.3e, %.3e, %.3e} (max<=2min: %s); K(2,2) = %.3e", devs[0], devs[1],
                  devs[2], stable ? "yes" : "no", exterior);
    return {stable && exterior < 1e-6, buf};
}

// ---------------------------------------------------------------- 10
Outcome criterion10() {
    auto cfg = criterion3_config();
    cfg.params = {64, 256};
    cfg.trials = 8;
    const auto run1 = harness::run_experiment(cfg, 2);
    const auto run2 = harness::run_experiment(cfg, 1);
    auto strip_ms = [](const std::string& csv) {
        std::string out;
        for (std::size_t pos = 0; pos < csv.size();) {
            const auto eol = csv.find('\n', pos);
            if (eol == std::string::npos) break;
            const auto line = csv.substr(pos, eol - pos);
            out += line.substr(0, line.rfind(','));
            out += '\n';
            pos = eol + 1;
        }
        return out;
    };
    const std::string a = strip_ms(harness::records_to_csv(run1));
    const std::string b = strip_ms(harness::records_to_csv(run2));
    const bool identical = a == b;
    return {identical, identical ? "records byte-identical across reruns and thread counts"
                                 : "records differ between reruns"};
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "smoothing inequality certificate (200 configurations)", criterion1},
        {2, "heat second-moment bound 2dt", criterion2},
        {3, "finite-ginibre convergence rate", criterion3},
        {4, "gaf / infinite-ginibre convergence rates", criterion4},
        {5, "assignment vs brute-force oracle", criterion5},
        {6, "semidiscrete closed-form check at the disk center", criterion6},
        {7, "reproducing property and linear-statistic variance", criterion7},
        {8, "intensity checks (gaf, bessel, ginibre subdisks)", criterion8},
        {9, "bulk / edge kernel behavior", criterion9},
        {10, "experiment determinism", criterion10},
    };

    int selected = 0;
    if (argc > 1) selected = std::atoi(argv[1]);

    int failures = 0;
    for (const auto& crit : criteria) {
        if (selected != 0 && crit.id != selected) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = crit.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL",
                    crit.id, crit.title, outcome.detail.c_str(), secs);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures;
}
