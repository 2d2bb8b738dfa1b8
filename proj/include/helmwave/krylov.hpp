#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "helmwave/types.hpp"

namespace helmwave {

using LinearOperator = std::function<CoVector(const CoVector&)>;

struct KrylovOptions {
    double tol = 1e-6;
    int maxit = 500;
    /// PCG: replace the recursive residual by b - A x every this many steps.
    int recompute_every = 50;
    /// PGMRES: restart length, 0 for none.
    int restart = 0;
};

struct SolveReport {
    int iterations = 0;
    /// ||b - A x_k|| / ||b|| for k = 0..iterations.
    std::vector<double> residual_history;
    /// PGMRES only: least-squares residual of the preconditioned system.
    std::vector<double> preconditioned_history;
    bool converged = false;
    double final_residual = 0.0;
    double wall_time = 0.0;
};

/// Preconditioned conjugate gradients from x0 = 0. Throws NumericalError
/// when p^H A p or r^H M r is not positive.
std::pair<CoVector, SolveReport> pcg(const LinearOperator& a, const LinearOperator& m, const CoVector& b,
                                     const KrylovOptions& options = {});

/// Left-preconditioned GMRES (modified Gram-Schmidt, Givens rotations)
/// from x0 = 0, stopping on the unpreconditioned residual.
std::pair<CoVector, SolveReport> pgmres(const LinearOperator& a, const LinearOperator& m, const CoVector& b,
                                        const KrylovOptions& options = {});

LinearOperator identity_operator();

}  // namespace helmwave
