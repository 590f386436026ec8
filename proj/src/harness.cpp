#include "w2lab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "w2lab/measure.hpp"
#include "w2lab/processes/gaf.hpp"
#include "w2lab/processes/kernels.hpp"
#include "w2lab/processes/mcmc.hpp"
#include "w2lab/processes/sampling.hpp"
#include "w2lab/rng.hpp"
#include "w2lab/smoothing.hpp"
#include "w2lab/spectral.hpp"
#include "w2lab/transport.hpp"

namespace w2lab::harness {

using nlohmann::json;

Domain parse_domain(const std::string& name) {
    if (name == "unit-square") return Domain::unit_square();
    if (name == "unit-disk") return Domain::unit_disk();
    throw std::invalid_argument("unknown domain: " + name);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig c;
    c.process = j.at("process").get<std::string>();
    c.params = j.at("params").get<std::vector<double>>();
    c.domain = j.at("domain").get<std::string>();
    c.trials = j.at("trials").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("transport"))
        c.transport.resolution = j.at("transport").value("resolution", c.transport.resolution);
    if (j.contains("smoothing")) {
        const auto& s = j.at("smoothing");
        c.smoothing.lambda_max = s.value("lambda_max", c.smoothing.lambda_max);
        c.smoothing.t_lo = s.value("t_lo", c.smoothing.t_lo);
        c.smoothing.t_hi = s.value("t_hi", c.smoothing.t_hi);
        c.smoothing.c = s.value("c", c.smoothing.c);
    }
    c.output = j.value("output", c.output);
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["process"] = process;
    j["params"] = params;
    j["domain"] = domain;
    j["trials"] = trials;
    j["seed"] = seed;
    j["transport"] = {{"resolution", transport.resolution}};
    j["smoothing"] = {{"lambda_max", smoothing.lambda_max},
                      {"t_lo", smoothing.t_lo},
                      {"t_hi", smoothing.t_hi},
                      {"c", smoothing.c}};
    j["output"] = output;
    return j.dump(2);
}

void ExperimentConfig::validate() const {
    static const char* known[] = {"poisson",  "ginibre_finite", "ginibre_infinite",
                                  "bessel",   "gaf",            "rnm_mcmc"};
    bool ok = false;
    for (const char* k : known) ok = ok || process == k;
    if (!ok) throw std::invalid_argument("unknown process: " + process);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (params.empty()) throw std::invalid_argument("params must be nonempty");
    for (std::size_t i = 1; i < params.size(); ++i)
        if (!(params[i] > params[i - 1]))
            throw std::invalid_argument("params must be strictly increasing");
    parse_domain(domain);
}

namespace {

bool is_rnm(const std::string& process) {
    return process == "ginibre_finite" || process == "rnm_mcmc";
}

// Per-parameter immutable sampling state, built once and shared by trials.
struct ParamContext {
    double param = 0.0;
    std::shared_ptr<const processes::RadialRnmExpansion> rnm;
    processes::ProjectionSampler rnm_sampler;
    std::shared_ptr<processes::SpectralRestriction> restriction;
    processes::GafSpec gaf;
};

struct RunContext {
    ExperimentConfig config;
    Domain window = Domain::unit_square();
    ReferenceMeasure reference = ReferenceMeasure::uniform(Domain::unit_square());
    transport::WeightedCloud cloud;
    std::shared_ptr<const spectral::NeumannBasis> basis; // box windows only
    spectral::SpectralCoefficients reference_coeffs;
    bool smoothing_available = false;
    std::vector<ParamContext> params;
};

PointConfiguration draw_sample(const RunContext& ctx, const ParamContext& p, RngStream& rng) {
    const auto& process = ctx.config.process;
    if (process == "poisson") return processes::sample_poisson(p.param, ctx.window, rng);
    if (process == "ginibre_finite") return processes::sample_projection_dpp(p.rnm_sampler, rng);
    if (process == "ginibre_infinite" || process == "bessel")
        return processes::sample_dpp_spectral(*p.restriction, rng);
    if (process == "gaf") return processes::sample_gaf_zeros(p.gaf, rng);
    if (process == "rnm_mcmc") {
        auto res = processes::sample_rnm_mcmc(processes::PotentialSpec::ginibre(),
                                              static_cast<int>(p.param), 4000, rng);
        if (!res.tuned_ok)
            throw std::runtime_error("rnm_mcmc acceptance rate " +
                                     std::to_string(res.acceptance_rate) + " outside [0.1,0.9]");
        return res.config;
    }
    throw std::logic_error("draw_sample: unhandled process");
}

ExperimentRecord run_trial(const RunContext& ctx, std::size_t param_idx, int trial) {
    const auto& config = ctx.config;
    const ParamContext& p = ctx.params[param_idx];
    ExperimentRecord rec;
    rec.process = config.process;
    rec.param = p.param;
    rec.trial = trial;
    rec.smooth_bound = std::nan("");
    rec.t_star = std::nan("");
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RngStream rng(config.seed, param_idx * static_cast<std::uint64_t>(config.trials) + trial);
        PointConfiguration sample = draw_sample(ctx, p, rng);
        if (!is_rnm(config.process)) sample = restrict_to(sample, ctx.window);
        rec.n_points = static_cast<long>(sample.size());
        if (rec.n_points == 0) {
            // Empty windows are recorded and excluded from means downstream.
            rec.w2 = std::nan("");
            rec.w2_qbound = ctx.cloud.quantization_bound;
            return rec;
        }
        const auto w2 = transport::w2_to_cloud(sample, ctx.cloud);
        rec.w2 = w2.cost;
        rec.w2_qbound = w2.quantization_bound;
        if (ctx.smoothing_available) {
            const auto mu = spectral::coefficients(sample, ctx.basis);
            rec.hypotheses_ok =
                std::abs(mu.mass - ctx.reference_coeffs.mass) <= 1e-9 && config.smoothing.c > 0.0;
            const auto rep = smoothing::optimize_t(mu, ctx.reference_coeffs, config.smoothing.c,
                                                   config.smoothing.t_lo, config.smoothing.t_hi);
            rec.smooth_bound = rep.bound;
            rec.t_star = rep.t;
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.w2 = std::nan("");
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return rec;
}

} // namespace

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, int threads) {
    config.validate();
    RunContext ctx;
    ctx.config = config;
    const bool rnm = is_rnm(config.process);
    ctx.window = parse_domain(config.domain);
    ctx.reference = rnm ? processes::equilibrium_measure(processes::PotentialSpec::ginibre())
                        : ReferenceMeasure::uniform(ctx.window);
    ctx.cloud = transport::quantize(ctx.reference, config.transport.resolution);

    ctx.smoothing_available = !rnm && ctx.window.kind() == Domain::Kind::Box;
    if (ctx.smoothing_available) {
        ctx.basis = std::make_shared<spectral::NeumannBasis>(
            spectral::NeumannBasis::truncate_by_eigenvalue(ctx.window, config.smoothing.lambda_max));
        ctx.reference_coeffs = spectral::coefficients(ctx.reference, ctx.basis);
    }

    // Heavy per-parameter state built once, serially.
    for (double param : config.params) {
        ParamContext p;
        p.param = param;
        if (config.process == "ginibre_finite") {
            p.rnm = std::make_shared<processes::RadialRnmExpansion>(
                processes::PotentialSpec::ginibre(), static_cast<int>(param));
            p.rnm_sampler = processes::finite_rnm_sampler(p.rnm);
        } else if (config.process == "ginibre_infinite") {
            p.restriction = processes::build_ginibre_fock_restriction(param, ctx.window);
        } else if (config.process == "bessel") {
            p.restriction = processes::build_nystrom_restriction(
                processes::kernel_bessel(param, ctx.window.dim()), ctx.window, 64);
        } else if (config.process == "gaf") {
            p.gaf = processes::GafSpec::make(param, ctx.window);
        }
        ctx.params.push_back(std::move(p));
    }

    const std::size_t total = config.params.size() * static_cast<std::size_t>(config.trials);
    std::vector<ExperimentRecord> records(total);
    if (threads <= 0)
        threads = static_cast<int>(std::min<unsigned>(std::thread::hardware_concurrency(), 8));
    if (threads < 1) threads = 1;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= total) return;
            const std::size_t param_idx = k / config.trials;
            const int trial = static_cast<int>(k % config.trials);
            records[k] = run_trial(ctx, param_idx, trial);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return records;
}

namespace {
std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
    std::string out = "process,param,trial,n_points,w2,w2_qbound,smooth_bound,t_star,ms\n";
    for (const auto& r : records) {
        out += r.process;
        out += ',';
        out += format_double(r.param);
        out += ',';
        out += std::to_string(r.trial);
        out += ',';
        out += std::to_string(r.n_points);
        out += ',';
        out += format_double(r.w2);
        out += ',';
        out += format_double(r.w2_qbound);
        out += ',';
        out += format_double(r.smooth_bound);
        out += ',';
        out += format_double(r.t_star);
        out += ',';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", r.ms);
        out += buf;
        out += '\n';
    }
    return out;
}

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << records_to_csv(records);
}

std::vector<ExperimentRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty records file");
    std::vector<ExperimentRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        ExperimentRecord r;
        std::getline(ss, r.process, ',');
        std::getline(ss, field, ',');
        r.param = std::stod(field);
        std::getline(ss, field, ',');
        r.trial = std::stoi(field);
        std::getline(ss, field, ',');
        r.n_points = std::stol(field);
        std::getline(ss, field, ',');
        r.w2 = std::stod(field);
        std::getline(ss, field, ',');
        r.w2_qbound = std::stod(field);
        std::getline(ss, field, ',');
        r.smooth_bound = std::stod(field);
        std::getline(ss, field, ',');
        r.t_star = std::stod(field);
        std::getline(ss, field, ',');
        r.ms = std::stod(field);
        records.push_back(std::move(r));
    }
    return records;
}

RateFit fit_rate_points(const std::vector<double>& params, const std::vector<double>& mean_w2,
                        bool log_corrected) {
    const std::size_t n = params.size();
    if (n < 2 || mean_w2.size() != n) throw std::invalid_argument("fit_rate: need >= 2 points");
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(params[i] > 1.0 && mean_w2[i] > 0.0))
            throw std::invalid_argument("fit_rate: params must exceed 1 and means be positive");
        x[i] = std::log(params[i]);
        y[i] = std::log(mean_w2[i]);
        if (log_corrected) y[i] -= 0.5 * std::log(std::log(params[i]));
    }
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        rss += r * r;
    }
    RateFit fit;
    fit.exponent = slope;
    fit.residual_norm = std::sqrt(rss);
    fit.std_error = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
    fit.log_corrected = log_corrected;
    fit.distinct_params = static_cast<int>(n);
    fit.param_lo = params.front();
    fit.param_hi = params.back();
    return fit;
}

RateFit fit_rate(const std::vector<ExperimentRecord>& records, bool log_corrected) {
    std::map<double, std::pair<double, long>> groups; // param -> (sum, count)
    long excluded = 0;
    for (const auto& r : records) {
        if (std::isnan(r.w2) || r.n_points == 0) {
            ++excluded;
            continue;
        }
        auto& g = groups[r.param];
        g.first += r.w2;
        g.second += 1;
    }
    if (groups.size() < 4)
        throw std::invalid_argument("fit_rate: need at least 4 distinct parameters");
    std::vector<double> params, means;
    for (const auto& [param, g] : groups) {
        if (g.second < 1) continue;
        params.push_back(param);
        means.push_back(g.first / g.second);
    }
    RateFit fit = fit_rate_points(params, means, log_corrected);
    fit.excluded_trials = excluded;
    return fit;
}

std::string RateFit::to_json_text() const {
    json j;
    j["exponent"] = exponent;
    j["std_error"] = std_error;
    j["residual_norm"] = residual_norm;
    j["model"] = log_corrected ? "power-with-sqrt-log" : "pure-power";
    j["distinct_params"] = distinct_params;
    j["param_range"] = {param_lo, param_hi};
    j["excluded_trials"] = excluded_trials;
    return j.dump(2);
}

void write_points_csv(const std::string& path, const PointConfiguration& points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (int a = 0; a < points.dim(); ++a) out << (a ? ",x_" : "x_") << (a + 1);
    out << '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int a = 0; a < points.dim(); ++a)
            out << (a ? "," : "") << format_double(points.coord(i, a));
        out << '\n';
    }
}

PointConfiguration read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open points: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty points file");
    const int dim = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    PointConfiguration points(dim);
    std::vector<double> x(dim);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        for (int a = 0; a < dim; ++a) {
            std::getline(ss, field, ',');
            x[a] = std::stod(field);
        }
        points.push_back(x);
    }
    return points;
}

} // namespace w2lab::harness
