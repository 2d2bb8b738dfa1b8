#pragma once

#include <vector>

namespace helmwave {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n from Chebyshev
/// guesses); exact for polynomials of degree 2n-1.
GaussRule gauss_legendre(int n);

}  // namespace helmwave
