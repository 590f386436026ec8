#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "w2lab/geometry.hpp"

namespace w2lab::harness {

struct TransportSettings {
    int resolution = 128;
};

struct SmoothingSettings {
    double lambda_max = 3947.8417604357434; // 400 pi^2
    double t_lo = 1e-3;
    double t_hi = 1.0;
    double c = 1.0;
};

// Grid description of one experiment: (process x parameter x trial).
struct ExperimentConfig {
    std::string process; // poisson|ginibre_finite|ginibre_infinite|bessel|gaf|rnm_mcmc
    std::vector<double> params;
    std::string domain = "unit-square"; // unit-square | unit-disk
    int trials = 1;
    std::uint64_t seed = 0;
    TransportSettings transport;
    SmoothingSettings smoothing;
    std::string output = "records.csv";

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json_text() const;
    void validate() const;
};

struct ExperimentRecord {
    std::string process;
    double param = 0.0;
    int trial = 0;
    long n_points = 0;
    double w2 = 0.0;
    double w2_qbound = 0.0;
    double smooth_bound = 0.0; // NaN when the hypotheses are unavailable
    double t_star = 0.0;
    double ms = 0.0;
    std::string error; // per-record failure, empty on success
    bool hypotheses_ok = false; // mass equality and c > 0 audited
};

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, int threads = 0);

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records);
std::string records_to_csv(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records_csv(const std::string& path);

struct RateFit {
    double exponent = 0.0;
    double std_error = 0.0;
    double residual_norm = 0.0;
    bool log_corrected = false;
    int distinct_params = 0;
    double param_lo = 0.0, param_hi = 0.0;
    long excluded_trials = 0;
    std::string to_json_text() const;
};

/// Least squares of log mean-W2 against log parameter. The log-corrected
/// model subtracts the known (1/2) log log correction before regressing.
RateFit fit_rate(const std::vector<ExperimentRecord>& records, bool log_corrected);
RateFit fit_rate_points(const std::vector<double>& params, const std::vector<double>& mean_w2,
                        bool log_corrected);

Domain parse_domain(const std::string& name);

void write_points_csv(const std::string& path, const PointConfiguration& points);
PointConfiguration read_points_csv(const std::string& path);

} // namespace w2lab::harness
