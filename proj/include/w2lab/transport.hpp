#pragma once
#include <optional>
#include <string>
#include <vector>

#include "w2lab/geometry.hpp"
#include "w2lab/measure.hpp"
#include "w2lab/spectral.hpp"
#include "w2lab/transport/netsimplex.hpp"

namespace w2lab::transport {

struct TransportPlanResult {
    double cost = 0.0; // W2, not squared
    std::vector<FlowEntry> plan;
    std::string solver;
    double quantization_bound = 0.0;
};

/// Exact W2 between equal-size uniform configurations by enumerating all
/// permutations. N <= 8.
double w2_bruteforce(const PointConfiguration& a, const PointConfiguration& b);

/// Exact W2 between equal-size uniform configurations via a shortest
/// augmenting path assignment solver on squared distances.
TransportPlanResult w2_assignment(const PointConfiguration& a, const PointConfiguration& b);

// Discretization of a reference measure: atoms at the cell centers of an
// m^d grid over the domain's bounding box, cell masses clipped to the
// domain, total mass renormalized to 1. Moving the mass of a cell to its
// center costs at most half the cell diagonal, which is the reported bound.
struct WeightedCloud {
    PointConfiguration points;
    std::vector<double> weights;
    double quantization_bound = 0.0;
};

WeightedCloud quantize(const ReferenceMeasure& ref, int resolution);

/// Exact W2 between a uniform empirical configuration and a quantized
/// reference, by network simplex on the dense bipartite problem.
TransportPlanResult w2_semidiscrete(const PointConfiguration& emp, const ReferenceMeasure& ref,
                                    int resolution,
                                    std::int64_t max_cost_entries = 50'000'000);

TransportPlanResult w2_to_cloud(const PointConfiguration& emp, const WeightedCloud& cloud,
                                std::int64_t max_cost_entries = 50'000'000);

struct SinkhornOptions {
    double epsilon = 1e-3;
    int max_iter = 20000;
    double marginal_tol = 1e-6;
};

struct SinkhornResult {
    double cost = 0.0; // sqrt of transport part, comparable to W2
    double marginal_violation = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Entropic approximation (log-domain iterations with epsilon annealing).
/// An approximation by construction: never used on acceptance inequalities.
SinkhornResult w2_sinkhorn(const PointConfiguration& emp, const WeightedCloud& cloud,
                           const SinkhornOptions& opts);

/// L2 route to an upper W2 bound for two densities on a box with the first
/// bounded below by a > 0:  2 sqrt|Omega| ||mu - nu||_L2 / (sqrt a sqrt lambda_1).
double h_neg1_bound(const ReferenceMeasure& mu, const ReferenceMeasure& nu);

} // namespace w2lab::transport
