#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "w2lab/harness.hpp"
#include "w2lab/measure.hpp"
#include "w2lab/processes/gaf.hpp"
#include "w2lab/processes/kernels.hpp"
#include "w2lab/processes/mcmc.hpp"
#include "w2lab/processes/sampling.hpp"
#include "w2lab/rng.hpp"
#include "w2lab/smoothing.hpp"
#include "w2lab/spectral.hpp"
#include "w2lab/transport.hpp"

using nlohmann::json;
using namespace w2lab;

namespace {

ReferenceMeasure named_reference(const std::string& name, double tau) {
    if (name == "uniform-square") return ReferenceMeasure::uniform(Domain::unit_square());
    if (name == "uniform-disk") return ReferenceMeasure::uniform(Domain::unit_disk());
    if (name == "ginibre-eq")
        return processes::equilibrium_measure(processes::PotentialSpec::ginibre());
    if (name == "elliptic-eq")
        return processes::equilibrium_measure(processes::PotentialSpec::elliptic(tau));
    throw std::invalid_argument("unknown reference: " + name);
}

int cmd_sample(const std::string& process, double intensity, int n, const std::string& domain,
               std::uint64_t seed, std::uint64_t stream, int steps, const std::string& out) {
    RngStream rng(seed, stream);
    const Domain window = harness::parse_domain(domain);
    PointConfiguration points;
    if (process == "poisson") {
        points = processes::sample_poisson(intensity, window, rng);
    } else if (process == "ginibre_finite") {
        auto kernel = std::make_shared<processes::RadialRnmExpansion>(
            processes::PotentialSpec::ginibre(), n);
        points = processes::sample_projection_dpp(processes::finite_rnm_sampler(kernel), rng);
    } else if (process == "ginibre_infinite") {
        const auto restriction = processes::build_ginibre_fock_restriction(intensity, window);
        points = processes::sample_dpp_spectral(*restriction, rng);
    } else if (process == "bessel") {
        const auto restriction = processes::build_nystrom_restriction(
            processes::kernel_bessel(intensity, window.dim()), window, 64);
        points = processes::sample_dpp_spectral(*restriction, rng);
    } else if (process == "gaf") {
        points = processes::sample_gaf_zeros(processes::GafSpec::make(intensity, window), rng);
    } else if (process == "rnm_mcmc") {
        const auto res =
            processes::sample_rnm_mcmc(processes::PotentialSpec::ginibre(), n, steps, rng);
        if (!res.tuned_ok)
            std::cerr << "warning: acceptance rate " << res.acceptance_rate
                      << " outside [0.1, 0.9]\n";
        points = res.config;
    } else {
        throw std::invalid_argument("unknown process: " + process);
    }
    harness::write_points_csv(out, points);
    json sidecar;
    sidecar["process"] = process;
    sidecar["params"] = {{"intensity", intensity}, {"n", n}, {"domain", domain}};
    sidecar["seed"] = seed;
    sidecar["stream"] = stream;
    std::ofstream side(out + ".json");
    side << sidecar.dump(2) << '\n';
    std::cerr << "wrote " << points.size() << " points to " << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"point-process Wasserstein laboratory"};
    app.require_subcommand(1);

    // sample
    auto* sample = app.add_subcommand("sample", "draw one configuration and write CSV");
    std::string process = "poisson", domain = "unit-square", out = "points.csv";
    double intensity = 100.0;
    int n = 64, steps = 4000;
    std::uint64_t seed = 0, stream = 0;
    sample->add_option("--process", process, "poisson|ginibre_finite|ginibre_infinite|bessel|gaf|rnm_mcmc");
    sample->add_option("--intensity", intensity, "intensity L for homogeneous processes");
    sample->add_option("--n", n, "matrix size N for RNM processes");
    sample->add_option("--domain", domain, "unit-square|unit-disk");
    sample->add_option("--seed", seed);
    sample->add_option("--stream", stream);
    sample->add_option("--steps", steps, "MCMC sweeps");
    sample->add_option("--out", out);

    // w2
    auto* w2cmd = app.add_subcommand("w2", "exact W2 between a CSV and a named reference");
    std::string points_path, ref_name = "uniform-square";
    int resolution = 128;
    double tau = 0.5;
    w2cmd->add_option("--points", points_path)->required();
    w2cmd->add_option("--ref", ref_name, "uniform-square|uniform-disk|ginibre-eq|elliptic-eq");
    w2cmd->add_option("--tau", tau, "elliptic parameter");
    w2cmd->add_option("--resolution", resolution);

    // bound
    auto* boundcmd = app.add_subcommand("bound", "heat-smoothing W2 upper bound report");
    std::string bound_points, bound_domain = "unit-square";
    double lambda_max = 3947.8417604357434, t_lo = 1e-3, t_hi = 1.0, cbound = 1.0;
    boundcmd->add_option("--points", bound_points)->required();
    boundcmd->add_option("--domain", bound_domain, "box domains only");
    boundcmd->add_option("--lambda-max", lambda_max);
    boundcmd->add_option("--t-lo", t_lo);
    boundcmd->add_option("--t-hi", t_hi);
    boundcmd->add_option("--c", cbound, "certified lower bound of the reference density");

    // experiment
    auto* expcmd = app.add_subcommand("experiment", "run a (process x param x trial) grid");
    std::string config_path;
    int threads = 0;
    expcmd->add_option("--config", config_path)->required();
    expcmd->add_option("--threads", threads);

    // fit
    auto* fitcmd = app.add_subcommand("fit", "convergence-rate fit from a records CSV");
    std::string records_path, model = "pure-power";
    fitcmd->add_option("--in", records_path)->required();
    fitcmd->add_option("--model", model, "pure-power|sqrt-log");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed())
            return cmd_sample(process, intensity, n, domain, seed, stream, steps, out);
        if (w2cmd->parsed()) {
            const auto pts = harness::read_points_csv(points_path);
            const auto cloud = transport::quantize(named_reference(ref_name, tau), resolution);
            const auto res = transport::w2_to_cloud(pts, cloud);
            json j;
            j["cost"] = res.cost;
            j["quantization_bound"] = res.quantization_bound;
            j["solver"] = res.solver;
            j["n"] = pts.size();
            j["m"] = cloud.points.size();
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (boundcmd->parsed()) {
            const auto window = harness::parse_domain(bound_domain);
            auto pts = harness::read_points_csv(bound_points);
            pts = restrict_to(pts, window);
            const auto basis = std::make_shared<spectral::NeumannBasis>(
                spectral::NeumannBasis::truncate_by_eigenvalue(window, lambda_max));
            const auto mu = spectral::coefficients(pts, basis);
            const auto nu = spectral::coefficients(ReferenceMeasure::uniform(window), basis);
            const auto rep = smoothing::optimize_t(mu, nu, cbound, t_lo, t_hi);
            json j;
            j["t"] = rep.t;
            j["series"] = rep.series;
            j["tail"] = rep.tail;
            j["C1"] = rep.c1;
            j["c"] = rep.sqrt_c * rep.sqrt_c;
            j["bound"] = rep.bound;
            j["lambda_max"] = rep.lambda_max;
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (expcmd->parsed()) {
            const auto cfg = harness::ExperimentConfig::from_json_file(config_path);
            const auto records = harness::run_experiment(cfg, threads);
            harness::write_records_csv(cfg.output, records);
            std::ofstream side(cfg.output + ".json");
            side << cfg.to_json_text() << '\n';
            long failures = 0;
            for (const auto& r : records)
                if (!r.error.empty()) ++failures;
            std::cerr << "wrote " << records.size() << " records to " << cfg.output;
            if (failures) std::cerr << " (" << failures << " failed trials)";
            std::cerr << '\n';
            return failures == 0 ? 0 : 2;
        }
        if (fitcmd->parsed()) {
            const auto records = harness::read_records_csv(records_path);
            const auto fit = harness::fit_rate(records, model == "sqrt-log");
            std::cout << fit.to_json_text() << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
