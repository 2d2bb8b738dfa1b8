#include "helmwave/mesh.hpp"

#include <algorithm>
#include <string>

namespace helmwave {

namespace {

Face make_face(Point2 a, Point2 b, Point2 normal, int owner, int neighbor) {
    Face f;
    f.a = a;
    f.b = b;
    f.midpoint = 0.5 * (a + b);
    f.length = norm(b - a);
    f.tangent = (1.0 / f.length) * (b - a);
    f.normal = normal;
    f.owner = owner;
    f.neighbor = neighbor;
    return f;
}

}  // namespace

Mesh::Mesh(double x_min, double x_max, double y_min, double y_max, int nx, int ny)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), nx_(nx), ny_(ny) {
    if (nx < 1 || ny < 1) {
        throw InvalidArgument("mesh: element counts must be positive, got " + std::to_string(nx) +
                              "x" + std::to_string(ny));
    }
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw InvalidArgument("mesh: degenerate domain");
    }

    interior_.reserve(static_cast<std::size_t>(nx * (ny - 1) + ny * (nx - 1)));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double x = grid_x(i + 1);
            interior_.push_back(make_face({x, grid_y(j)}, {x, grid_y(j + 1)}, {1.0, 0.0},
                                          index(i, j), index(i + 1, j)));
        }
    }
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double y = grid_y(j + 1);
            interior_.push_back(make_face({grid_x(i), y}, {grid_x(i + 1), y}, {0.0, 1.0},
                                          index(i, j), index(i, j + 1)));
        }
    }

    boundary_.reserve(static_cast<std::size_t>(2 * (nx + ny)));
    for (int i = 0; i < nx; ++i) {
        boundary_.push_back(make_face({grid_x(i), y_min_}, {grid_x(i + 1), y_min_}, {0.0, -1.0},
                                      index(i, 0), -1));
    }
    for (int j = 0; j < ny; ++j) {
        boundary_.push_back(make_face({x_max_, grid_y(j)}, {x_max_, grid_y(j + 1)}, {1.0, 0.0},
                                      index(nx - 1, j), -1));
    }
    for (int i = 0; i < nx; ++i) {
        boundary_.push_back(make_face({grid_x(i), y_max_}, {grid_x(i + 1), y_max_}, {0.0, 1.0},
                                      index(i, ny - 1), -1));
    }
    for (int j = 0; j < ny; ++j) {
        boundary_.push_back(make_face({x_min_, grid_y(j)}, {x_min_, grid_y(j + 1)}, {-1.0, 0.0},
                                      index(0, j), -1));
    }
}

double Mesh::h() const { return std::max(hx(), hy()); }

Box Mesh::element(int k) const {
    if (k < 0 || k >= num_elements()) {
        throw InvalidArgument("mesh: element index " + std::to_string(k) + " out of range");
    }
    const int i = col(k);
    const int j = row(k);
    return {grid_x(i), grid_x(i + 1), grid_y(j), grid_y(j + 1)};
}

std::vector<int> Mesh::neighbors(int k) const {
    if (k < 0 || k >= num_elements()) {
        throw InvalidArgument("mesh: element index " + std::to_string(k) + " out of range");
    }
    const int i = col(k);
    const int j = row(k);
    std::vector<int> out;
    if (j > 0) out.push_back(index(i, j - 1));
    if (i > 0) out.push_back(index(i - 1, j));
    if (i + 1 < nx_) out.push_back(index(i + 1, j));
    if (j + 1 < ny_) out.push_back(index(i, j + 1));
    return out;
}

Mesh build_uniform_mesh(double x_min, double x_max, double y_min, double y_max, int nx, int ny) {
    return Mesh(x_min, x_max, y_min, y_max, nx, ny);
}

}  // namespace helmwave
