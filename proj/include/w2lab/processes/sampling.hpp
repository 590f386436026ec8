#pragma once
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "w2lab/geometry.hpp"
#include "w2lab/processes/kernels.hpp"
#include "w2lab/rng.hpp"

namespace w2lab::processes {

/// Poisson process of the given (Lebesgue) intensity: Poisson(intensity *
/// area) count, i.i.d. uniform locations, rejection from the bounding box
/// on curved domains.
PointConfiguration sample_poisson(double intensity, const Domain& domain, RngStream& rng);

// Sequential conditional sampling of a projection DPP from an explicit
// orthonormal family: draw a point from the residual diagonal, project the
// family onto the orthogonal complement of the sampled feature vector,
// repeat rank times. Proposals are uniform on the region, thinned against
// the envelope (which must dominate the diagonal there).
struct ProjectionSampler {
    int dim = 2;
    int rank = 0;
    std::function<void(std::span<const double>, std::complex<double>*)> features;
    Domain region = Domain::unit_disk();
    double envelope = 0.0;
};

PointConfiguration sample_projection_dpp(const ProjectionSampler& sampler, RngStream& rng);

/// Projection sampler for the rank-N radial RNM kernel: proposals from the
/// disk of radius (droplet)(1 + 5/sqrt(N)), envelope from the intensity's
/// radial profile.
ProjectionSampler finite_rnm_sampler(std::shared_ptr<const RadialRnmExpansion> kernel);

// Restriction of a projection kernel to a window, spectrally decomposed:
// eigenvalues in [0,1] and evaluable eigenfunctions. Sampling retains each
// eigenfunction independently with probability eigenvalue, then runs the
// projection sampler on the retained family.
class SpectralRestriction {
public:
    virtual ~SpectralRestriction() = default;

    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    const Domain& window() const { return window_; }
    int dim() const { return dim_; }

    /// Sum of eigenvalues clipped to [0,1] = expected emitted count.
    double expected_count() const;

    /// Evaluator of the eigenfunction subset at a point (subset order).
    virtual std::function<void(std::span<const double>, std::complex<double>*)>
    subset_evaluator(const std::vector<int>& subset) const = 0;

    /// Envelope for sampling the given retained family: a cached probe
    /// maximum over the solid eigenfunctions (lambda >= 1/2) plus probe
    /// bounds for whichever small-lambda ones the draw retained. The
    /// near-kernel eigenfunctions are excluded from the cache because their
    /// diagonal can be arbitrarily large while they are almost never drawn.
    double subset_envelope(const std::vector<int>& subset) const;

protected:
    std::vector<double> eigenvalues_;
    Domain window_ = Domain::unit_square();
    int dim_ = 2;
    mutable double core_envelope_ = -1.0;
    /// Probe max of sum over the subset of |phi_i(x)|^2.
    virtual double probe_diag_max(const std::vector<int>& subset) const = 0;
    void validate_eigenvalues() const;
};

/// Grid Nystrom restriction: tensor Gauss-Legendre nodes on the window's
/// box, eigendecomposition of the weighted kernel matrix. Requires a box
/// window and grid >= 32 per axis.
std::shared_ptr<SpectralRestriction> build_nystrom_restriction(const KernelEvaluator& kernel,
                                                               const Domain& window, int grid);

/// Restriction of the infinite Ginibre kernel through its analytic
/// orthonormal expansion: the Gram matrix of the weighted monomials over
/// the window is exactly the restricted operator on its range, so no
/// spatial grid enters the eigenproblem. Used where the grid route would
/// need an unaffordable resolution (large L).
std::shared_ptr<SpectralRestriction> build_ginibre_fock_restriction(double L,
                                                                    const Domain& window);

struct SpectralSampleInfo {
    int retained = 0;
    double expected_count = 0.0;
};

PointConfiguration sample_dpp_spectral(const SpectralRestriction& restriction, RngStream& rng,
                                       SpectralSampleInfo* info = nullptr);

/// One-call form: Nystrom discretization plus spectral sampling.
PointConfiguration sample_dpp_nystrom(const KernelEvaluator& kernel, const Domain& window,
                                      int grid, RngStream& rng,
                                      SpectralSampleInfo* info = nullptr);

} // namespace w2lab::processes
