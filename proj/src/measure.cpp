#include "w2lab/measure.hpp"

#include <cmath>

#include "w2lab/quadrature.hpp"

namespace w2lab {

ReferenceMeasure ReferenceMeasure::uniform(const Domain& domain) {
    ReferenceMeasure m;
    m.domain_ = domain;
    m.kind_ = Kind::UniformOnDomain;
    m.lower_bound_ = 1.0 / domain.area();
    return m;
}

ReferenceMeasure ReferenceMeasure::with_density(
    const Domain& domain, std::function<double(std::span<const double>)> density,
    double lower_bound) {
    ReferenceMeasure m;
    m.domain_ = domain;
    m.kind_ = Kind::DensityOnDomain;
    m.density_ = std::move(density);
    m.lower_bound_ = lower_bound;
    m.verify();
    return m;
}

double ReferenceMeasure::density(std::span<const double> x) const {
    if (kind_ == Kind::UniformOnDomain) return 1.0 / domain_.area();
    return density_(x);
}

void ReferenceMeasure::verify() const {
    double mass = 0.0;
    double min_density = 1e300;
    if (domain_.kind() == Domain::Kind::Box) {
        const int n = 48;
        const int d = domain_.dim();
        std::vector<GaussLegendre> rules;
        for (int i = 0; i < d; ++i)
            rules.push_back(gauss_legendre(n, domain_.lo()[i], domain_.hi()[i]));
        std::vector<int> idx(d, 0);
        std::vector<double> x(d);
        while (true) {
            double w = 1.0;
            for (int i = 0; i < d; ++i) {
                x[i] = rules[i].nodes[idx[i]];
                w *= rules[i].weights[idx[i]];
            }
            const double rho = density(x);
            mass += w * rho;
            min_density = std::min(min_density, rho);
            int axis = 0;
            while (axis < d && ++idx[axis] == n) idx[axis++] = 0;
            if (axis == d) break;
        }
    } else {
        // Polar rule mapped to the disk/ellipse: nodes in (s, theta) with
        // s = squared normalized radius keep the Jacobian polynomial.
        const int nr = 64, nt = 128;
        const auto rs = gauss_legendre(nr, 0.0, 1.0);
        const auto ts = gauss_legendre(nt, 0.0, 2.0 * 3.14159265358979323846);
        const auto c = domain_.center();
        const double jac = 0.5 * domain_.semi_x() * domain_.semi_y();
        for (int i = 0; i < nr; ++i) {
            const double r = std::sqrt(rs.nodes[i]);
            for (int j = 0; j < nt; ++j) {
                const double x[2] = {c[0] + domain_.semi_x() * r * std::cos(ts.nodes[j]),
                                     c[1] + domain_.semi_y() * r * std::sin(ts.nodes[j])};
                const double rho = density(std::span<const double>(x, 2));
                mass += rs.weights[i] * ts.weights[j] * jac * rho;
                min_density = std::min(min_density, rho);
            }
        }
    }
    if (std::abs(mass - 1.0) > 1e-8)
        throw std::runtime_error("ReferenceMeasure: mass " + std::to_string(mass) +
                                 " differs from 1 beyond quadrature tolerance");
    if (lower_bound_ > min_density + 1e-12)
        throw std::runtime_error("ReferenceMeasure: declared lower bound exceeds density");
}

} // namespace w2lab
