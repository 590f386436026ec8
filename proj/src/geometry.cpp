#include "w2lab/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace w2lab {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.empty() || lo.size() != hi.size())
        throw std::invalid_argument("Domain::box: inconsistent extents");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(hi[i] > lo[i]))
            throw std::invalid_argument("Domain::box: extent must be strictly positive");
    Domain d;
    d.kind_ = Kind::Box;
    d.dim_ = static_cast<int>(lo.size());
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
}

Domain Domain::disk(std::array<double, 2> center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("Domain::disk: radius must be positive");
    Domain d;
    d.kind_ = Kind::Disk;
    d.dim_ = 2;
    d.cx_ = center[0];
    d.cy_ = center[1];
    d.ax_ = d.ay_ = radius;
    return d;
}

Domain Domain::ellipse(std::array<double, 2> center, double semi_x, double semi_y) {
    if (!(semi_x > 0.0) || !(semi_y > 0.0))
        throw std::invalid_argument("Domain::ellipse: semi-axes must be positive");
    Domain d;
    d.kind_ = Kind::Ellipse;
    d.dim_ = 2;
    d.cx_ = center[0];
    d.cy_ = center[1];
    d.ax_ = semi_x;
    d.ay_ = semi_y;
    return d;
}

double Domain::area() const {
    switch (kind_) {
    case Kind::Box: {
        double a = 1.0;
        for (int i = 0; i < dim_; ++i) a *= hi_[i] - lo_[i];
        return a;
    }
    case Kind::Disk:
    case Kind::Ellipse:
        return kPi * ax_ * ay_;
    }
    return 0.0;
}

bool Domain::contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("Domain::contains: dimension mismatch");
    switch (kind_) {
    case Kind::Box:
        for (int i = 0; i < dim_; ++i)
            if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
        return true;
    case Kind::Disk:
    case Kind::Ellipse: {
        const double u = (x[0] - cx_) / ax_;
        const double v = (x[1] - cy_) / ay_;
        return u * u + v * v <= 1.0;
    }
    }
    return false;
}

void Domain::bounding_box(std::vector<double>& lo, std::vector<double>& hi) const {
    if (kind_ == Kind::Box) {
        lo = lo_;
        hi = hi_;
    } else {
        lo = {cx_ - ax_, cy_ - ay_};
        hi = {cx_ + ax_, cy_ + ay_};
    }
}

double Domain::diameter() const {
    switch (kind_) {
    case Kind::Box: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += edge(i) * edge(i);
        return std::sqrt(s);
    }
    case Kind::Disk:
    case Kind::Ellipse:
        return 2.0 * std::max(ax_, ay_);
    }
    return 0.0;
}

void PointConfiguration::push_back(std::span<const double> x) {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("PointConfiguration: dimension mismatch");
    for (double v : x) {
        if (!std::isfinite(v))
            throw std::invalid_argument("PointConfiguration: non-finite coordinate");
        coords_.push_back(v);
    }
}

void PointConfiguration::push_back(double x, double y) {
    const double xy[2] = {x, y};
    push_back(std::span<const double>(xy, 2));
}

PointConfiguration restrict_to(const PointConfiguration& config, const Domain& domain) {
    if (config.dim() != domain.dim())
        throw std::invalid_argument("restrict_to: dimension mismatch");
    PointConfiguration out(config.dim());
    for (std::size_t i = 0; i < config.size(); ++i)
        if (domain.contains(config.point(i))) out.push_back(config.point(i));
    return out;
}

// Concentric map [-1,1]^2 <-> unit disk, then the affine shift to [0,1]^2.
// On the square cell |a| >= |b| the forward map is (a, b) -> a (cos, sin)(pi b / 4a).
std::array<double, 2> unit_square_to_disk(std::array<double, 2> q) {
    const double a = 2.0 * q[0] - 1.0;
    const double b = 2.0 * q[1] - 1.0;
    if (a == 0.0 && b == 0.0) return {0.0, 0.0};
    double r, phi;
    if (std::abs(a) > std::abs(b)) {
        r = a;
        phi = (kPi / 4.0) * (b / a);
    } else {
        r = b;
        phi = (kPi / 2.0) - (kPi / 4.0) * (a / b);
    }
    return {r * std::cos(phi), r * std::sin(phi)};
}

std::array<double, 2> disk_to_unit_square(std::array<double, 2> p) {
    const double x = p[0], y = p[1];
    const double r = std::hypot(x, y);
    if (r == 0.0) return {0.5, 0.5};
    double a, b;
    if (std::abs(x) >= std::abs(y)) {
        a = std::copysign(r, x);
        b = a * std::atan(y / x) * (4.0 / kPi);
    } else {
        b = std::copysign(r, y);
        const double delta = std::copysign(kPi / 2.0, y) - std::atan2(y, x);
        a = b * delta * (4.0 / kPi);
    }
    return {(a + 1.0) / 2.0, (b + 1.0) / 2.0};
}

PointConfiguration map_disk_to_unit_square(const PointConfiguration& config) {
    if (config.dim() != 2)
        throw std::invalid_argument("map_disk_to_unit_square: planar configurations only");
    PointConfiguration out(2);
    out.reserve(config.size());
    for (std::size_t i = 0; i < config.size(); ++i) {
        const auto q = disk_to_unit_square({config.coord(i, 0), config.coord(i, 1)});
        out.push_back(q[0], q[1]);
    }
    return out;
}

} // namespace w2lab
