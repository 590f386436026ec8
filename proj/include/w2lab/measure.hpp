#pragma once
#include <functional>
#include <stdexcept>
#include <string>

#include "w2lab/geometry.hpp"

namespace w2lab {

// Probability measure on a domain given by a density with respect to
// Lebesgue measure, together with a certified constant lower bound on the
// density over the domain. The lower bound is checked at quadrature nodes,
// not proven symbolically.
class ReferenceMeasure {
public:
    enum class Kind { UniformOnDomain, DensityOnDomain };

    static ReferenceMeasure uniform(const Domain& domain);
    static ReferenceMeasure with_density(const Domain& domain,
                                         std::function<double(std::span<const double>)> density,
                                         double lower_bound);

    const Domain& domain() const { return domain_; }
    Kind kind() const { return kind_; }
    double lower_bound() const { return lower_bound_; }

    /// Density with respect to Lebesgue measure at a point of the domain.
    double density(std::span<const double> x) const;

    /// Quadrature of the density over the domain; checks mass == 1 within
    /// 1e-8 and the declared lower bound at every node. Throws on failure.
    void verify() const;

private:
    ReferenceMeasure() = default;
    Domain domain_ = Domain::unit_square();
    Kind kind_ = Kind::UniformOnDomain;
    std::function<double(std::span<const double>)> density_;
    double lower_bound_ = 0.0;
};

} // namespace w2lab
