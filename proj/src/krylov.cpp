#include "helmwave/krylov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace helmwave {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_options(const KrylovOptions& o) {
    if (!(o.tol > 0.0)) throw InvalidArgument("krylov: tolerance must be positive");
    if (o.maxit < 0) throw InvalidArgument("krylov: maxit must be non-negative");
    if (o.recompute_every < 1) throw InvalidArgument("krylov: recompute interval must be positive");
    if (o.restart < 0) throw InvalidArgument("krylov: restart must be non-negative");
}

}  // namespace

LinearOperator identity_operator() {
    return [](const CoVector& x) { return x; };
}

std::pair<CoVector, SolveReport> pcg(const LinearOperator& a, const LinearOperator& m, const CoVector& b,
                                     const KrylovOptions& options) {
    check_options(options);
    const auto t0 = Clock::now();
    SolveReport rep;
    CoVector x = CoVector::Zero(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        rep.residual_history.push_back(0.0);
        rep.converged = true;
        rep.wall_time = seconds_since(t0);
        return {x, rep};
    }
    rep.residual_history.push_back(1.0);
    CoVector r = b;
    CoVector z = m(r);
    Complex rz = r.dot(z);
    if (!(rz.real() > 0.0)) throw NumericalError("pcg: preconditioner is not positive definite");
    CoVector p = z;
    for (int k = 1; k <= options.maxit; ++k) {
        const CoVector q = a(p);
        const Complex pq = p.dot(q);
        if (!(pq.real() > 0.0)) throw NumericalError("pcg: operator lost positive definiteness (p^H A p <= 0)");
        const Complex alpha = rz / pq.real();
        x += alpha * p;
        r -= alpha * q;
        const CoVector true_r = b - a(x);
        if (k % options.recompute_every == 0) r = true_r;
        const double res = true_r.norm() / bnorm;
        rep.residual_history.push_back(res);
        rep.iterations = k;
        if (res < options.tol) {
            rep.converged = true;
            break;
        }
        z = m(r);
        const Complex rz_new = r.dot(z);
        if (!(rz_new.real() > 0.0)) throw NumericalError("pcg: preconditioner is not positive definite");
        const Complex beta = rz_new.real() / rz.real();
        p = z + beta * p;
        rz = rz_new;
    }
    rep.final_residual = rep.residual_history.back();
    rep.wall_time = seconds_since(t0);
    return {x, rep};
}

std::pair<CoVector, SolveReport> pgmres(const LinearOperator& a, const LinearOperator& m, const CoVector& b,
                                        const KrylovOptions& options) {
    check_options(options);
    const auto t0 = Clock::now();
    SolveReport rep;
    const auto n = b.size();
    CoVector x = CoVector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        rep.residual_history.push_back(0.0);
        rep.preconditioned_history.push_back(0.0);
        rep.converged = true;
        rep.wall_time = seconds_since(t0);
        return {x, rep};
    }
    rep.residual_history.push_back(1.0);
    const int cycle = options.restart > 0 ? options.restart : std::max(options.maxit, 1);
    int total = 0;
    bool first = true;
    while (total < options.maxit && !rep.converged) {
        CoVector z = m(first ? b : CoVector(b - a(x)));
        const double beta = z.norm();
        if (first) rep.preconditioned_history.push_back(beta);
        first = false;
        if (beta == 0.0) break;
        const int steps = std::min(cycle, options.maxit - total);
        DenseMatrix v(n, steps + 1);
        DenseMatrix h = DenseMatrix::Zero(steps + 1, steps);
        std::vector<Complex> cs(static_cast<std::size_t>(steps));
        std::vector<Complex> sn(static_cast<std::size_t>(steps));
        CoVector g = CoVector::Zero(steps + 1);
        g(0) = beta;
        v.col(0) = z / beta;
        const CoVector x0 = x;
        for (int j = 0; j < steps; ++j) {
            CoVector w = m(a(v.col(j)));
            for (int i = 0; i <= j; ++i) {
                h(i, j) = v.col(i).dot(w);
                w -= h(i, j) * v.col(i);
            }
            const double hn = w.norm();
            h(j + 1, j) = hn;
            for (int i = 0; i < j; ++i) {
                const Complex t = cs[static_cast<std::size_t>(i)] * h(i, j) + sn[static_cast<std::size_t>(i)] * h(i + 1, j);
                h(i + 1, j) = -std::conj(sn[static_cast<std::size_t>(i)]) * h(i, j) +
                              std::conj(cs[static_cast<std::size_t>(i)]) * h(i + 1, j);
                h(i, j) = t;
            }
            const Complex hjj = h(j, j);
            const double denom = std::sqrt(std::norm(hjj) + hn * hn);
            Complex c{1.0, 0.0};
            Complex s{0.0, 0.0};
            if (std::abs(hjj) == 0.0) {
                c = 0.0;
                s = 1.0;
            } else if (denom > 0.0) {
                c = std::abs(hjj) / denom;
                s = (hjj / std::abs(hjj)) * hn / denom;
            }
            cs[static_cast<std::size_t>(j)] = c;
            sn[static_cast<std::size_t>(j)] = s;
            h(j, j) = c * hjj + s * hn;
            h(j + 1, j) = 0.0;
            g(j + 1) = -std::conj(s) * g(j);
            g(j) = c * g(j);
            rep.preconditioned_history.push_back(std::abs(g(j + 1)));
            if (hn > 0.0) v.col(j + 1) = w / hn;

            const auto k = j + 1;
            const CoVector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
            x = x0 + v.leftCols(k) * y;
            const double res = (b - a(x)).norm() / bnorm;
            rep.residual_history.push_back(res);
            ++total;
            rep.iterations = total;
            if (res < options.tol) {
                rep.converged = true;
                break;
            }
            if (hn == 0.0) break;
        }
        if (options.restart == 0) break;
    }
    rep.final_residual = rep.residual_history.back();
    rep.wall_time = seconds_since(t0);
    return {x, rep};
}

}  // namespace helmwave
