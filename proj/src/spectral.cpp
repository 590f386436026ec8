#include "w2lab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "w2lab/quadrature.hpp"

namespace w2lab::spectral {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

void require_box(const Domain& d, const char* who) {
    if (d.kind() != Domain::Kind::Box)
        throw std::invalid_argument(std::string(who) + ": box domains only");
}
} // namespace

void NeumannBasis::build(const Domain& box, const std::vector<int>& axis_max,
                         double lambda_cut) {
    require_box(box, "NeumannBasis");
    box_ = box;
    axis_max_.assign(axis_max.begin(), axis_max.end());
    const int d = box.dim();
    std::vector<int> k(d, 0);
    std::vector<std::size_t> order;
    while (true) {
        double lam = 0.0;
        for (int i = 0; i < d; ++i) {
            const double f = k[i] / box.edge(i);
            lam += kPi * kPi * f * f;
        }
        if (lam <= lambda_cut) {
            indices_.insert(indices_.end(), k.begin(), k.end());
            lambda_.push_back(lam);
        }
        int axis = 0;
        while (axis < d && ++k[axis] > axis_max[axis]) k[axis++] = 0;
        if (axis == d) break;
    }
    order.resize(lambda_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (lambda_[a] != lambda_[b]) return lambda_[a] < lambda_[b];
        return std::lexicographical_compare(indices_.begin() + a * d, indices_.begin() + (a + 1) * d,
                                            indices_.begin() + b * d, indices_.begin() + (b + 1) * d);
    });
    std::vector<int> si(indices_.size());
    std::vector<double> sl(lambda_.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        sl[r] = lambda_[order[r]];
        for (int i = 0; i < d; ++i) si[r * d + i] = indices_[order[r] * d + i];
    }
    indices_.swap(si);
    lambda_.swap(sl);
    lambda_max_ = lambda_cut;
}

NeumannBasis NeumannBasis::truncate_by_eigenvalue(const Domain& box, double lambda_max) {
    require_box(box, "NeumannBasis");
    if (!(lambda_max > 0.0)) throw std::invalid_argument("NeumannBasis: lambda_max <= 0");
    std::vector<int> axis_max(box.dim());
    for (int i = 0; i < box.dim(); ++i)
        axis_max[i] = static_cast<int>(std::floor(box.edge(i) * std::sqrt(lambda_max) / kPi));
    NeumannBasis b;
    b.build(box, axis_max, lambda_max);
    return b;
}

NeumannBasis NeumannBasis::truncate_by_index(const Domain& box, int max_index_per_axis) {
    require_box(box, "NeumannBasis");
    if (max_index_per_axis < 0) throw std::invalid_argument("NeumannBasis: negative index cap");
    std::vector<int> axis_max(box.dim(), max_index_per_axis);
    NeumannBasis b;
    double lam = 0.0;
    for (int i = 0; i < box.dim(); ++i) {
        const double f = max_index_per_axis / box.edge(i);
        lam += kPi * kPi * f * f;
    }
    b.build(box, axis_max, lam);
    return b;
}

std::size_t NeumannBasis::position_of(std::span<const int> k) const {
    const int d = dim();
    if (static_cast<int>(k.size()) != d)
        throw std::invalid_argument("NeumannBasis::position_of: dimension mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
        bool match = true;
        for (int a = 0; a < d; ++a)
            if (indices_[i * d + a] != k[a]) { match = false; break; }
        if (match) return i;
    }
    throw std::out_of_range("NeumannBasis::position_of: index outside truncation");
}

double NeumannBasis::eigenfunction(std::size_t i, std::span<const double> x) const {
    const int d = dim();
    double value = 1.0;
    for (int a = 0; a < d; ++a) {
        const int k = indices_[i * d + a];
        const double len = box_.edge(a);
        const double norm = k == 0 ? 1.0 / std::sqrt(len) : std::sqrt(2.0 / len);
        value *= norm * std::cos(k * kPi * (x[a] - box_.lo()[a]) / len);
    }
    return value;
}

void NeumannBasis::eval_all(std::span<const double> x, double* out) const {
    const int d = dim();
    // Per-axis normalized cosine tables via the Chebyshev recurrence.
    thread_local std::vector<double> tables;
    std::size_t offset_needed = 0;
    for (int a = 0; a < d; ++a) offset_needed += axis_max_[a] + 1;
    tables.resize(offset_needed);
    std::size_t off = 0;
    std::vector<std::size_t> axis_off(d);
    for (int a = 0; a < d; ++a) {
        axis_off[a] = off;
        const double len = box_.edge(a);
        const double theta = kPi * (x[a] - box_.lo()[a]) / len;
        const double c1 = std::cos(theta);
        const double n0 = 1.0 / std::sqrt(len), n1 = std::sqrt(2.0 / len);
        double prev2 = 1.0, prev1 = c1;
        tables[off + 0] = n0;
        if (axis_max_[a] >= 1) tables[off + 1] = n1 * c1;
        for (int k = 2; k <= axis_max_[a]; ++k) {
            const double c = 2.0 * c1 * prev1 - prev2;
            prev2 = prev1;
            prev1 = c;
            tables[off + k] = n1 * c;
        }
        off += axis_max_[a] + 1;
    }
    for (std::size_t i = 0; i < size(); ++i) {
        double v = 1.0;
        for (int a = 0; a < d; ++a) v *= tables[axis_off[a] + indices_[i * d + a]];
        out[i] = v;
    }
}

double NeumannBasis::sup_bound() const {
    double s = 1.0;
    for (int a = 0; a < dim(); ++a) s *= std::sqrt(2.0 / box_.edge(a));
    return s;
}

SpectralCoefficients coefficients(const PointConfiguration& points,
                                  std::shared_ptr<const NeumannBasis> basis) {
    if (points.empty()) throw std::invalid_argument("coefficients: empty configuration");
    if (points.dim() != basis->dim()) throw std::invalid_argument("coefficients: dimension mismatch");
    const std::size_t n = points.size(), m = basis->size();
    for (std::size_t p = 0; p < n; ++p)
        if (!basis->box().contains(points.point(p)))
            throw std::invalid_argument("coefficients: point outside the box (restrict first)");

    // Fixed-block tree reduction: per-block partials are combined in block
    // order, so the result does not depend on the execution schedule.
    constexpr std::size_t kBlock = 1024;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks * m, 0.0);
    std::vector<double> phi(m);
    for (std::size_t b = 0; b < blocks; ++b) {
        double* acc = partial.data() + b * m;
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t p = b * kBlock; p < end; ++p) {
            basis->eval_all(points.point(p), phi.data());
            for (std::size_t i = 0; i < m; ++i) acc[i] += phi[i];
        }
    }
    SpectralCoefficients out;
    out.basis = std::move(basis);
    out.mass = 1.0;
    out.values.assign(m, 0.0);
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t i = 0; i < m; ++i) out.values[i] += partial[b * m + i];
    for (std::size_t i = 0; i < m; ++i) out.values[i] /= static_cast<double>(n);
    return out;
}

namespace {
std::vector<double> density_coefficients_with_nodes(const ReferenceMeasure& measure,
                                                    const NeumannBasis& basis, int extra) {
    const Domain& box = basis.box();
    const int d = box.dim();
    std::vector<GaussLegendre> rules;
    for (int a = 0; a < d; ++a)
        rules.push_back(gauss_legendre(4 * basis.max_index(a) + 8 + extra, box.lo()[a], box.hi()[a]));
    std::vector<double> values(basis.size(), 0.0);
    std::vector<int> idx(d, 0);
    std::vector<double> x(d), phi(basis.size());
    while (true) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            x[a] = rules[a].nodes[idx[a]];
            w *= rules[a].weights[idx[a]];
        }
        const double rho = measure.density(x);
        if (rho != 0.0) {
            basis.eval_all(x, phi.data());
            for (std::size_t i = 0; i < basis.size(); ++i) values[i] += w * rho * phi[i];
        }
        int axis = 0;
        while (axis < d && ++idx[axis] == static_cast<int>(rules[axis].nodes.size()))
            idx[axis++] = 0;
        if (axis == d) break;
    }
    return values;
}
} // namespace

SpectralCoefficients coefficients(const ReferenceMeasure& measure,
                                  std::shared_ptr<const NeumannBasis> basis) {
    const auto coarse = density_coefficients_with_nodes(measure, *basis, 0);
    const auto fine = density_coefficients_with_nodes(measure, *basis, 8);
    for (std::size_t i = 0; i < coarse.size(); ++i)
        if (std::abs(coarse[i] - fine[i]) > 1e-10)
            throw std::runtime_error("coefficients: density quadrature did not converge");
    SpectralCoefficients out;
    out.basis = std::move(basis);
    out.values = fine;
    out.mass = fine[0] * std::sqrt(out.basis->box().area());
    return out;
}

SpectralCoefficients heat_evolve(const SpectralCoefficients& coeffs, double t) {
    if (t < 0.0) throw std::invalid_argument("heat_evolve: negative time");
    SpectralCoefficients out = coeffs;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] *= std::exp(-coeffs.basis->eigenvalue(i) * t);
    return out;
}

long weyl_count(const Domain& box, double x) {
    require_box(box, "weyl_count");
    if (x < 0.0) return 0;
    const int d = box.dim();
    std::vector<int> cap(d);
    for (int a = 0; a < d; ++a)
        cap[a] = static_cast<int>(std::floor(box.edge(a) * std::sqrt(x) / kPi));
    std::vector<int> k(d, 0);
    long count = 0;
    while (true) {
        double lam = 0.0;
        for (int a = 0; a < d; ++a) {
            const double f = k[a] / box.edge(a);
            lam += kPi * kPi * f * f;
        }
        bool zero = true;
        for (int a = 0; a < d; ++a) zero = zero && k[a] == 0;
        if (!zero && lam <= x) ++count;
        int axis = 0;
        while (axis < d && ++k[axis] > cap[axis]) k[axis++] = 0;
        if (axis == d) break;
    }
    return count;
}

double tail_certificate_raw(const NeumannBasis& basis, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("tail_certificate: t must be positive");
    const double lambda_cut = basis.lambda_max();
    // For lambda_k > L:  e^{-lambda t}/lambda <= e^{-Lt/2}/L * e^{-lambda t/2},
    // and the lattice sum of e^{-lambda t/2} factorizes; each axis factor is
    // bounded by 1 + (L_i/2) sqrt(2/(pi t)).
    double theta = 1.0;
    for (int a = 0; a < basis.dim(); ++a)
        theta *= 1.0 + 0.5 * basis.box().edge(a) * std::sqrt(2.0 / (kPi * t));
    return std::exp(-0.5 * lambda_cut * t) * theta / lambda_cut;
}

double tail_certificate(const NeumannBasis& basis, double t) {
    const double bound = tail_certificate_raw(basis, t);
    if (bound > 1.0)
        throw std::runtime_error("tail_certificate: truncation insufficient at t=" +
                                 std::to_string(t));
    return bound;
}

HeatKernelEvaluator::HeatKernelEvaluator(std::shared_ptr<const NeumannBasis> basis, double t)
    : basis_(std::move(basis)) {
    if (!(t > 0.0)) throw std::invalid_argument("HeatKernelEvaluator: t must be positive");
    decay_.resize(basis_->size());
    for (std::size_t i = 0; i < decay_.size(); ++i)
        decay_[i] = std::exp(-basis_->eigenvalue(i) * t);
}

double HeatKernelEvaluator::operator()(std::span<const double> x,
                                       std::span<const double> y) const {
    std::vector<double> px(basis_->size()), py(basis_->size());
    basis_->eval_all(x, px.data());
    basis_->eval_all(y, py.data());
    double sum = 0.0;
    for (std::size_t i = 0; i < decay_.size(); ++i) sum += decay_[i] * px[i] * py[i];
    return sum;
}

double heat_second_moment(const NeumannBasis& basis, std::span<const double> y, double t) {
    const Domain& box = basis.box();
    const int d = box.dim();
    if (static_cast<int>(y.size()) != d)
        throw std::invalid_argument("heat_second_moment: dimension mismatch");
    // Only axis modes (0,..,k,..,0) survive integration against |x-y|^2, so
    // the truncated-kernel quadrature reduces to d one-dimensional series.
    double total = 0.0;
    for (int a = 0; a < d; ++a) {
        const double len = box.edge(a), lo = box.lo()[a];
        const int kmax = basis.max_index(a);
        const auto rule = gauss_legendre(4 * kmax + 8, lo, lo + len);
        for (int k = 0; k <= kmax; ++k) {
            const double lam = kPi * kPi * k * k / (len * len);
            if (lam > basis.lambda_max()) break;
            const double norm = k == 0 ? 1.0 / std::sqrt(len) : std::sqrt(2.0 / len);
            double integral = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double u = rule.nodes[q];
                const double phi = norm * std::cos(k * kPi * (u - lo) / len);
                integral += rule.weights[q] * (u - y[a]) * (u - y[a]) * phi;
            }
            const double phi_y = norm * std::cos(k * kPi * (y[a] - lo) / len);
            total += std::exp(-lam * t) * phi_y * integral;
        }
    }
    return total;
}

} // namespace w2lab::spectral
