#pragma once
#include "w2lab/geometry.hpp"
#include "w2lab/processes/kernels.hpp"
#include "w2lab/rng.hpp"

namespace w2lab::processes {

struct McmcResult {
    PointConfiguration config;
    double acceptance_rate = 0.0; // measured over the second half of the chain
    int steps = 0;
    bool tuned_ok = false; // acceptance within [0.1, 0.9]
};

/// Metropolis-adjusted Langevin chain on the RNM eigenvalue density
/// prod |z_i - z_j|^2 prod exp(-N Q(z_j)), per-coordinate step h = 0.1/N.
/// Proposals creating pair distances below 1e-12 are rejected outright.
McmcResult sample_rnm_mcmc(const PotentialSpec& potential, int N, int steps, RngStream& rng);

} // namespace w2lab::processes
