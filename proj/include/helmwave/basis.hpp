#pragma once

#include <vector>

#include "helmwave/mesh.hpp"
#include "helmwave/types.hpp"

namespace helmwave {

/// The p uniformly spread unit directions; entry l is
/// (cos(2*pi*l/p), sin(2*pi*l/p)) for l = 0..p-1.
std::vector<Point2> directions(int p);

/// sin(z)/z, switching to its Taylor polynomial for |z| < 1e-4.
double sinc(double z);

/// Closed form of the integral of exp(i*omega*d.x) over the segment [a, b].
Complex edge_moment(Point2 a, Point2 b, Point2 d, double omega);

/// Closed form of the integral of exp(i*omega*d.x) over an axis-aligned box.
Complex area_moment(const Box& box, Point2 d, double omega);

/// Plane waves y_l(x) = exp(i*omega*alpha_l.x) sharing one frequency.
class PlaneWaveBasis {
public:
    PlaneWaveBasis(double omega, int p);

    double omega() const { return omega_; }
    int p() const { return static_cast<int>(dirs_.size()); }
    const std::vector<Point2>& directions() const { return dirs_; }
    Point2 direction(int l) const { return dirs_.at(static_cast<std::size_t>(l)); }

    /// Value of direction l (0-based) at x.
    Complex eval(int l, Point2 x) const;

private:
    double omega_;
    std::vector<Point2> dirs_;
};

}  // namespace helmwave
