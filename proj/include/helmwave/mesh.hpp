#pragma once

#include <vector>

#include "helmwave/types.hpp"

namespace helmwave {

struct Box {
    double x0, x1, y0, y1;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
};

/// An element edge. Interior faces join `owner` and `neighbor`; boundary
/// faces have neighbor == -1. `normal` is the outward unit normal of the
/// owner; the neighbor's outward normal is its negation.
struct Face {
    Point2 a, b;
    Point2 midpoint;
    Point2 tangent;
    Point2 normal;
    double length = 0.0;
    int owner = -1;
    int neighbor = -1;

    bool is_boundary() const { return neighbor < 0; }
    /// Outward normal seen from `element` (must be owner or neighbor).
    Point2 normal_of(int element) const { return element == owner ? normal : -normal; }
};

/// Uniform axis-aligned rectangular partition.
///
/// Element (i, j), 0 <= i < nx, 0 <= j < ny, has index k = j*nx + i (x runs
/// fastest). Interior faces are listed vertical edges first (row by row,
/// owner = left element), then horizontal edges (owner = lower element).
/// Boundary faces run bottom, right, top, left, each in increasing
/// coordinate order.
class Mesh {
public:
    Mesh(double x_min, double x_max, double y_min, double y_max, int nx, int ny);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int num_elements() const { return nx_ * ny_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double y_min() const { return y_min_; }
    double y_max() const { return y_max_; }

    double hx() const { return (x_max_ - x_min_) / nx_; }
    double hy() const { return (y_max_ - y_min_) / ny_; }
    /// Longest element edge.
    double h() const;

    int index(int i, int j) const { return j * nx_ + i; }
    int col(int k) const { return k % nx_; }
    int row(int k) const { return k / nx_; }

    /// x coordinate of the i-th vertical grid line.
    double grid_x(int i) const { return x_min_ + i * (x_max_ - x_min_) / nx_; }
    double grid_y(int j) const { return y_min_ + j * (y_max_ - y_min_) / ny_; }

    Box element(int k) const;

    const std::vector<Face>& interior_faces() const { return interior_; }
    const std::vector<Face>& boundary_faces() const { return boundary_; }

    /// Edge-adjacent elements of k, ascending.
    std::vector<int> neighbors(int k) const;

private:
    double x_min_, x_max_, y_min_, y_max_;
    int nx_, ny_;
    std::vector<Face> interior_;
    std::vector<Face> boundary_;
};

Mesh build_uniform_mesh(double x_min, double x_max, double y_min, double y_max, int nx, int ny);

}  // namespace helmwave
