#include "w2lab/processes/sampling.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "w2lab/quadrature.hpp"

namespace w2lab::processes {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
} // namespace

PointConfiguration sample_poisson(double intensity, const Domain& domain, RngStream& rng) {
    if (!(intensity > 0.0)) throw std::invalid_argument("sample_poisson: intensity <= 0");
    const std::uint64_t count = rng.poisson(intensity * domain.area());
    std::vector<double> lo, hi;
    domain.bounding_box(lo, hi);
    const int d = domain.dim();
    PointConfiguration out(d);
    out.reserve(count);
    std::vector<double> x(d);
    for (std::uint64_t i = 0; i < count; ++i) {
        do {
            for (int a = 0; a < d; ++a) x[a] = rng.uniform(lo[a], hi[a]);
        } while (!domain.contains(x));
        out.push_back(x);
    }
    return out;
}

PointConfiguration sample_projection_dpp(const ProjectionSampler& sampler, RngStream& rng) {
    const int n = sampler.rank;
    const int d = sampler.dim;
    PointConfiguration out(d);
    if (n == 0) return out;
    if (!(sampler.envelope > 0.0))
        throw std::invalid_argument("sample_projection_dpp: envelope must be positive");

    std::vector<double> lo, hi;
    sampler.region.bounding_box(lo, hi);
    MatrixXcd basis(n, n); // orthonormalized feature vectors of accepted points
    VectorXcd feat(n), proj;
    std::vector<double> x(d);
    out.reserve(n);

    for (int accepted = 0; accepted < n;) {
        long guard = 0;
        for (;;) {
            if (++guard > 50'000'000L)
                throw std::runtime_error("sample_projection_dpp: acceptance stalled");
            do {
                for (int a = 0; a < d; ++a) x[a] = rng.uniform(lo[a], hi[a]);
            } while (!sampler.region.contains(x));
            sampler.features(x, feat.data());
            double diag = feat.squaredNorm();
            if (accepted > 0) {
                proj.noalias() = basis.leftCols(accepted).adjoint() * feat;
                diag -= proj.squaredNorm();
            }
            diag = std::max(diag, 0.0);
            if (diag > sampler.envelope * (1.0 + 1e-6) + 1e-12)
                throw std::runtime_error("sample_projection_dpp: envelope violated (" +
                                         std::to_string(diag) + " > " +
                                         std::to_string(sampler.envelope) + ")");
            if (rng.uniform() * sampler.envelope < diag) break;
        }
        // Orthonormalize the accepted feature vector (one refinement pass).
        VectorXcd g = feat;
        if (accepted > 0) {
            g.noalias() -= basis.leftCols(accepted) *
                           (basis.leftCols(accepted).adjoint() * feat).eval();
            g.noalias() -=
                basis.leftCols(accepted) * (basis.leftCols(accepted).adjoint() * g).eval();
        }
        const double norm = g.norm();
        if (norm < 1e-13) continue; // numerically dependent draw; retry
        basis.col(accepted) = g / norm;
        out.push_back(std::span<const double>(x.data(), d));
        ++accepted;
    }
    return out;
}

ProjectionSampler finite_rnm_sampler(std::shared_ptr<const RadialRnmExpansion> kernel) {
    ProjectionSampler s;
    s.dim = 2;
    s.rank = kernel->rank();
    const double radius = kernel->sampling_radius();
    s.region = Domain::disk({0.0, 0.0}, radius);
    double sup = 0.0;
    for (int i = 0; i <= 512; ++i) {
        const double z[2] = {radius * i / 512.0, 0.0};
        sup = std::max(sup, kernel->intensity(std::span<const double>(z, 2)));
    }
    s.envelope = sup * 1.02;
    s.features = [kernel](std::span<const double> z, std::complex<double>* out) {
        kernel->features(z, out);
    };
    return s;
}

double SpectralRestriction::expected_count() const {
    double s = 0.0;
    for (double v : eigenvalues_) s += std::clamp(v, 0.0, 1.0);
    return s;
}

void SpectralRestriction::validate_eigenvalues() const {
    for (double v : eigenvalues_)
        if (v < -1e-6 || v > 1.0 + 1e-6)
            throw std::runtime_error("SpectralRestriction: eigenvalue " + std::to_string(v) +
                                     " outside [0,1] (discretization too coarse)");
}

double SpectralRestriction::subset_envelope(const std::vector<int>& subset) const {
    if (core_envelope_ < 0.0) {
        std::vector<int> core;
        for (std::size_t i = 0; i < eigenvalues_.size(); ++i)
            if (eigenvalues_[i] >= 0.5) core.push_back(static_cast<int>(i));
        core_envelope_ = core.empty() ? 0.0 : probe_diag_max(core);
    }
    std::vector<int> rare;
    for (int i : subset)
        if (eigenvalues_[i] < 0.5) rare.push_back(i);
    const double extra = rare.empty() ? 0.0 : probe_diag_max(rare);
    return 1.4 * (core_envelope_ + extra) + 1e-12;
}

namespace {

// ----------------------------------------------------------------------
// Grid Nystrom restriction.
class NystromRestriction final : public SpectralRestriction {
public:
    NystromRestriction(const KernelEvaluator& kernel, const Domain& window, int grid) {
        if (window.kind() != Domain::Kind::Box)
            throw std::invalid_argument("build_nystrom_restriction: box windows only");
        if (grid < 32) throw std::invalid_argument("build_nystrom_restriction: grid < 32");
        window_ = window;
        dim_ = window.dim();
        kernel_ = kernel;

        std::vector<GaussLegendre> rules;
        std::size_t total = 1;
        for (int a = 0; a < dim_; ++a) {
            rules.push_back(gauss_legendre(grid, window.lo()[a], window.hi()[a]));
            total *= grid;
        }
        nodes_.resize(total * dim_);
        sqrt_w_.resize(total);
        std::vector<int> idx(dim_, 0);
        for (std::size_t p = 0; p < total; ++p) {
            double w = 1.0;
            for (int a = 0; a < dim_; ++a) {
                nodes_[p * dim_ + a] = rules[a].nodes[idx[a]];
                w *= rules[a].weights[idx[a]];
            }
            sqrt_w_[p] = std::sqrt(w);
            int axis = 0;
            while (axis < dim_ && ++idx[axis] == grid) idx[axis++] = 0;
        }

        MatrixXcd A(total, total);
        for (std::size_t p = 0; p < total; ++p) {
            const std::span<const double> xp(nodes_.data() + p * dim_, dim_);
            for (std::size_t q = p; q < total; ++q) {
                const std::span<const double> xq(nodes_.data() + q * dim_, dim_);
                const std::complex<double> v = kernel.eval(xp, xq) * (sqrt_w_[p] * sqrt_w_[q]);
                A(p, q) = v;
                A(q, p) = std::conj(v);
            }
        }
        if (kernel.background == Background::LebesgueOverPi) A /= kPi;

        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(A);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("build_nystrom_restriction: eigensolver failed");
        // Keep eigenfunctions with non-negligible eigenvalue, descending.
        const auto& vals = es.eigenvalues();
        std::vector<int> keep;
        for (int i = static_cast<int>(total) - 1; i >= 0; --i)
            if (vals(i) > 1e-9) keep.push_back(i);
        eigenvalues_.resize(keep.size());
        vectors_.resize(total, keep.size());
        for (std::size_t k = 0; k < keep.size(); ++k) {
            eigenvalues_[k] = vals(keep[k]);
            vectors_.col(k) = es.eigenvectors().col(keep[k]);
        }
        validate_eigenvalues();
    }

    std::function<void(std::span<const double>, std::complex<double>*)>
    subset_evaluator(const std::vector<int>& subset) const override {
        // Nystrom extension phi_i(x) = (1/lambda_i) sum_q sqrt(w_q) K(x,x_q) U_{q,i}.
        auto cols = std::make_shared<MatrixXcd>(vectors_.rows(), subset.size());
        for (std::size_t k = 0; k < subset.size(); ++k)
            cols->col(k) = vectors_.col(subset[k]) / eigenvalues_[subset[k]];
        const auto* self = this;
        const auto& row_eval = kernel_.eval_fast ? kernel_.eval_fast : kernel_.eval;
        return [self, cols, row_eval](std::span<const double> x, std::complex<double>* out) {
            const std::size_t total = self->sqrt_w_.size();
            VectorXcd krow(total);
            for (std::size_t q = 0; q < total; ++q) {
                const std::span<const double> xq(self->nodes_.data() + q * self->dim_,
                                                 self->dim_);
                krow(q) = row_eval(x, xq) * self->sqrt_w_[q];
            }
            if (self->kernel_.background == Background::LebesgueOverPi) krow /= kPi;
            Eigen::Map<VectorXcd>(out, cols->cols()).noalias() = cols->transpose() * krow;
        };
    }

    double probe_diag_max(const std::vector<int>& subset) const override {
        // At the quadrature nodes the eigenfunction values are known.
        double sup = 0.0;
        for (Eigen::Index p = 0; p < vectors_.rows(); ++p) {
            double diag = 0.0;
            for (int k : subset) diag += std::norm(vectors_(p, k));
            sup = std::max(sup, diag / (sqrt_w_[p] * sqrt_w_[p]));
        }
        return sup;
    }

private:
    KernelEvaluator kernel_;
    std::vector<double> nodes_;
    std::vector<double> sqrt_w_;
    MatrixXcd vectors_; // node values * sqrt(w), columns per kept eigenpair
};

// ----------------------------------------------------------------------
// Analytic restriction of the infinite Ginibre kernel. The kernel is the
// projection onto span{ f_j }, f_j(z) = sqrt(L/pi) (sqrt(L) u)^j / sqrt(j!)
// e^{-L|u|^2/2} with u = z - window center (the process is stationary). The
// nonzero spectrum of the restricted operator equals the spectrum of the
// Gram matrix M_jk = <f_k, f_j>_{L^2(window)}, truncated at a degree J with
// negligible in-window mass beyond it.
class GinibreFockRestriction final : public SpectralRestriction {
public:
    GinibreFockRestriction(double L, const Domain& window) {
        if (!(L > 0.0)) throw std::invalid_argument("fock restriction: L <= 0");
        if (window.kind() != Domain::Kind::Box || window.dim() != 2)
            throw std::invalid_argument("fock restriction: planar box windows only");
        window_ = window;
        dim_ = 2;
        L_ = L;
        cx_ = 0.5 * (window.lo()[0] + window.hi()[0]);
        cy_ = 0.5 * (window.lo()[1] + window.hi()[1]);
        const double hx = 0.5 * window.edge(0), hy = 0.5 * window.edge(1);
        const double R2 = hx * hx + hy * hy;

        // Truncation: total in-window mass of the discarded f_j is a
        // Poisson(L R^2) upper-tail expectation; push it below 1e-10.
        const double mean = L * R2;
        int J = static_cast<int>(mean + 10.0 * std::sqrt(mean) + 20.0);
        while (poisson_tail_expectation(mean, J) > 1e-10) J += 10;
        J_ = J;

        // log normalization of the monomial factor: f_j = exp(lc_j) u^j e^{-L|u|^2/2}
        log_coef_.resize(J_ + 1);
        for (int j = 0; j <= J_; ++j)
            log_coef_[j] =
                0.5 * (std::log(L / kPi) + j * std::log(L) - std::lgamma(j + 1.0));

        build_gram(hx, hy);
    }

    void fock_features(std::span<const double> z, std::complex<double>* out) const {
        const double ux = z[0] - cx_, uy = z[1] - cy_;
        const double r2 = ux * ux + uy * uy;
        const double base = -0.5 * L_ * r2;
        const std::complex<double> u(ux, uy);
        const double r = std::sqrt(r2);
        if (r == 0.0) {
            out[0] = std::exp(log_coef_[0] + base);
            for (int j = 1; j <= J_; ++j) out[j] = 0.0;
            return;
        }
        const double lnr = std::log(r);
        std::complex<double> phase = u / r;
        std::complex<double> ph(1.0, 0.0);
        for (int j = 0; j <= J_; ++j) {
            const double lj = log_coef_[j] + j * lnr + base;
            out[j] = lj < -300.0 ? std::complex<double>(0.0, 0.0) : std::exp(lj) * ph;
            ph *= phase;
            if ((j & 255) == 255) ph /= std::abs(ph);
        }
    }

    std::function<void(std::span<const double>, std::complex<double>*)>
    subset_evaluator(const std::vector<int>& subset) const override {
        auto cols = std::make_shared<MatrixXcd>(J_ + 1, subset.size());
        for (std::size_t k = 0; k < subset.size(); ++k)
            cols->col(k) = vectors_.col(subset[k]) / std::sqrt(eigenvalues_[subset[k]]);
        const auto* self = this;
        return [self, cols](std::span<const double> x, std::complex<double>* out) {
            VectorXcd F(self->J_ + 1);
            self->fock_features(x, F.data());
            Eigen::Map<VectorXcd>(out, cols->cols()).noalias() = cols->transpose() * F;
        };
    }

    double probe_diag_max(const std::vector<int>& subset) const override {
        const auto eval = subset_evaluator(subset);
        const int probe = 48;
        VectorXcd vals(subset.size());
        double sup = 0.0;
        for (int i = 0; i <= probe; ++i)
            for (int j = 0; j <= probe; ++j) {
                const double x[2] = {window_.lo()[0] + window_.edge(0) * i / probe,
                                     window_.lo()[1] + window_.edge(1) * j / probe};
                eval(std::span<const double>(x, 2), vals.data());
                sup = std::max(sup, vals.squaredNorm());
            }
        return sup;
    }

private:
    static double poisson_tail_expectation(double mean, int J) {
        // E[(Pois(mean) - J)^+] computed in log space.
        double total = 0.0;
        for (int k = J + 1; k < J + 400; ++k) {
            const double lp = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
            total += (k - J) * std::exp(lp);
            if (lp < -60.0 && k > mean) break;
        }
        return total;
    }

    void build_gram(double hx, double hy) {
        // Quadrature over the window in centered coordinates. Per-axis node
        // count resolves monomial degree 2J against the Gaussian weight.
        const int nq = J_ + 120;
        const bool square = std::abs(hx - hy) < 1e-14;
        MatrixXcd M;
        if (square) {
            // 90-degree rotation symmetry: M_jk vanishes unless j == k
            // (mod 4) and each entry is 4x its first-quadrant part, so the
            // Gram splits into four index classes integrated over one
            // quadrant.
            M = MatrixXcd::Zero(J_ + 1, J_ + 1);
            for (int cls = 0; cls < 4; ++cls) {
                std::vector<int> members;
                for (int j = cls; j <= J_; j += 4) members.push_back(j);
                const MatrixXcd Mc = quadrant_gram(members, hx, hy, nq);
                for (std::size_t a = 0; a < members.size(); ++a)
                    for (std::size_t b = 0; b < members.size(); ++b)
                        M(members[a], members[b]) = 4.0 * Mc(a, b);
            }
        } else {
            std::vector<int> all(J_ + 1);
            for (int j = 0; j <= J_; ++j) all[j] = j;
            M = full_gram(all, -hx, hx, -hy, hy, nq);
        }

        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("fock restriction: eigensolver failed");
        const auto& vals = es.eigenvalues();
        std::vector<int> keep;
        for (int i = J_; i >= 0; --i)
            if (vals(i) > 1e-9) keep.push_back(i);
        eigenvalues_.resize(keep.size());
        vectors_.resize(J_ + 1, keep.size());
        for (std::size_t k = 0; k < keep.size(); ++k) {
            eigenvalues_[k] = vals(keep[k]);
            vectors_.col(k) = es.eigenvectors().col(keep[k]);
        }
        validate_eigenvalues();
    }

    MatrixXcd quadrant_gram(const std::vector<int>& members, double hx, double hy, int nq) {
        return full_gram(members, 0.0, hx, 0.0, hy, nq);
    }

    MatrixXcd full_gram(const std::vector<int>& members, double x0, double x1, double y0,
                        double y1, int nq) {
        const auto rx = gauss_legendre(nq, x0, x1);
        const auto ry = gauss_legendre(nq, y0, y1);
        const int cols = static_cast<int>(members.size());
        MatrixXcd M = MatrixXcd::Zero(cols, cols);
        const int chunk_rows = std::max(64, 2'000'000 / std::max(cols, 1));
        MatrixXcd F(chunk_rows, cols);
        int filled = 0;
        std::vector<std::complex<double>> feat(J_ + 1);
        for (int i = 0; i < nq; ++i)
            for (int j = 0; j < nq; ++j) {
                const double x[2] = {cx_ + rx.nodes[i], cy_ + ry.nodes[j]};
                fock_features(std::span<const double>(x, 2), feat.data());
                const double sw = std::sqrt(rx.weights[i] * ry.weights[j]);
                for (int c = 0; c < cols; ++c) F(filled, c) = sw * feat[members[c]];
                if (++filled == chunk_rows) {
                    M.noalias() += F.adjoint() * F;
                    filled = 0;
                }
            }
        if (filled > 0) M.noalias() += F.topRows(filled).adjoint() * F.topRows(filled);
        return M;
    }

    double L_ = 0.0, cx_ = 0.0, cy_ = 0.0;
    int J_ = 0;
    std::vector<double> log_coef_;
    MatrixXcd vectors_;
};

} // namespace

std::shared_ptr<SpectralRestriction> build_nystrom_restriction(const KernelEvaluator& kernel,
                                                               const Domain& window, int grid) {
    return std::make_shared<NystromRestriction>(kernel, window, grid);
}

std::shared_ptr<SpectralRestriction> build_ginibre_fock_restriction(double L,
                                                                    const Domain& window) {
    return std::make_shared<GinibreFockRestriction>(L, window);
}

PointConfiguration sample_dpp_spectral(const SpectralRestriction& restriction, RngStream& rng,
                                       SpectralSampleInfo* info) {
    std::vector<int> retained;
    const auto& vals = restriction.eigenvalues();
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (rng.uniform() < std::clamp(vals[i], 0.0, 1.0)) retained.push_back(static_cast<int>(i));
    if (info) {
        info->retained = static_cast<int>(retained.size());
        info->expected_count = restriction.expected_count();
    }
    if (retained.empty()) return PointConfiguration(restriction.dim());

    ProjectionSampler s;
    s.dim = restriction.dim();
    s.rank = static_cast<int>(retained.size());
    s.region = restriction.window();
    s.envelope = restriction.subset_envelope(retained);
    s.features = restriction.subset_evaluator(retained);
    return sample_projection_dpp(s, rng);
}

PointConfiguration sample_dpp_nystrom(const KernelEvaluator& kernel, const Domain& window,
                                      int grid, RngStream& rng, SpectralSampleInfo* info) {
    const auto restriction = build_nystrom_restriction(kernel, window, grid);
    return sample_dpp_spectral(*restriction, rng, info);
}

} // namespace w2lab::processes
