#pragma once
#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace w2lab {

// Bounded convex region of R^d. Boxes exist in any dimension d >= 1;
// disks and ellipses are planar and axis-aligned.
class Domain {
public:
    enum class Kind { Box, Disk, Ellipse };

    static Domain box(std::vector<double> lo, std::vector<double> hi);
    static Domain unit_square() { return box({0.0, 0.0}, {1.0, 1.0}); }
    static Domain disk(std::array<double, 2> center, double radius);
    static Domain unit_disk() { return disk({0.0, 0.0}, 1.0); }
    static Domain ellipse(std::array<double, 2> center, double semi_x, double semi_y);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }

    /// Closed-form Lebesgue volume (area in the plane).
    double area() const;

    /// Membership in the closed domain. Throws on dimension mismatch.
    bool contains(std::span<const double> x) const;

    /// Axis-aligned bounding box as (lo, hi) per axis.
    void bounding_box(std::vector<double>& lo, std::vector<double>& hi) const;

    double diameter() const;

    // Box accessors (valid for Kind::Box).
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }
    double edge(int axis) const { return hi_[axis] - lo_[axis]; }

    // Disk/ellipse accessors.
    std::array<double, 2> center() const { return {cx_, cy_}; }
    double semi_x() const { return ax_; }
    double semi_y() const { return ay_; }

private:
    Domain() = default;
    Kind kind_ = Kind::Box;
    int dim_ = 0;
    std::vector<double> lo_, hi_;       // box
    double cx_ = 0, cy_ = 0, ax_ = 0, ay_ = 0; // disk/ellipse (ax == ay for disks)
};

// Finite list of points in R^d; carries the empirical probability measure
// (1/N) sum of deltas when nonempty.
class PointConfiguration {
public:
    PointConfiguration() : dim_(2) {}
    explicit PointConfiguration(int dim) : dim_(dim) {
        if (dim < 1) throw std::invalid_argument("PointConfiguration: dim < 1");
    }

    int dim() const { return dim_; }
    std::size_t size() const { return coords_.size() / dim_; }
    bool empty() const { return coords_.empty(); }

    void push_back(std::span<const double> x);
    void push_back(double x, double y); // planar convenience

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    double coord(std::size_t i, int axis) const { return coords_[i * dim_ + axis]; }
    const std::vector<double>& raw() const { return coords_; }

    void reserve(std::size_t n) { coords_.reserve(n * dim_); }

private:
    int dim_;
    std::vector<double> coords_;
};

/// Sublist of the points lying in the closed domain, order preserved.
PointConfiguration restrict_to(const PointConfiguration& config, const Domain& domain);

// Measure-preserving map between the closed unit disk and the unit square
// [0,1]^2 (concentric-cell construction; the Jacobian is constant, so the
// uniform measure on the disk pushes forward to the uniform measure on the
// square). Points outside the disk land outside the square.
std::array<double, 2> disk_to_unit_square(std::array<double, 2> p);
std::array<double, 2> unit_square_to_disk(std::array<double, 2> q);

PointConfiguration map_disk_to_unit_square(const PointConfiguration& config);

} // namespace w2lab
