#include "helmwave/basis.hpp"

#include <string>

namespace helmwave {

std::vector<Point2> directions(int p) {
    if (p < 1) throw InvalidArgument("basis: p must be positive");
    std::vector<Point2> out;
    out.reserve(static_cast<std::size_t>(p));
    for (int l = 0; l < p; ++l) {
        const double angle = 2.0 * kPi * l / p;
        out.push_back({std::cos(angle), std::sin(angle)});
    }
    return out;
}

double sinc(double z) {
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

Complex edge_moment(Point2 a, Point2 b, Point2 d, double omega) {
    const Point2 e = b - a;
    const double length = norm(e);
    const Point2 mid = 0.5 * (a + b);
    const double along = dot(d, e) / length;
    return length * std::exp(kI * (omega * dot(d, mid))) * sinc(0.5 * omega * along * length);
}

namespace {

Complex interval_moment(double lo, double hi, double d, double omega) {
    const double length = hi - lo;
    const double mid = 0.5 * (lo + hi);
    return length * std::exp(kI * (omega * d * mid)) * sinc(0.5 * omega * d * length);
}

}  // namespace

Complex area_moment(const Box& box, Point2 d, double omega) {
    return interval_moment(box.x0, box.x1, d.x, omega) * interval_moment(box.y0, box.y1, d.y, omega);
}

PlaneWaveBasis::PlaneWaveBasis(double omega, int p) : omega_(omega), dirs_(helmwave::directions(p)) {
    if (!(omega > 0.0)) throw InvalidArgument("basis: omega must be positive");
}

Complex PlaneWaveBasis::eval(int l, Point2 x) const {
    if (l < 0 || l >= p()) {
        throw InvalidArgument("basis: direction index " + std::to_string(l) + " out of range");
    }
    return std::exp(kI * (omega_ * dot(dirs_[static_cast<std::size_t>(l)], x)));
}

}  // namespace helmwave
