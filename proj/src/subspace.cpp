#include "helmwave/subspace.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace helmwave {

Prolongation::Prolongation(int nx, int ny, int p, std::vector<IndexRect> cells)
    : nx_(nx), ny_(ny), p_(p), cells_(std::move(cells)) {
    if (nx < 1 || ny < 1 || p < 1) throw InvalidArgument("prolongation: bad sizes");
    owner_.assign(static_cast<std::size_t>(nx) * ny, -1);
    const IndexRect grid{0, nx, 0, ny};
    for (int r = 0; r < num_cells(); ++r) {
        const IndexRect& c = cells_[static_cast<std::size_t>(r)];
        if (c.empty() || !grid.contains(c)) throw InvalidArgument("prolongation: cell outside the grid");
        for (int j = c.j0; j < c.j1; ++j) {
            for (int i = c.i0; i < c.i1; ++i) {
                int& o = owner_[static_cast<std::size_t>(j) * nx + i];
                if (o >= 0) throw InvalidArgument("prolongation: cells overlap");
                o = r;
            }
        }
    }
}

CoVector Prolongation::restrict(const CoVector& fine) const {
    if (fine.size() != static_cast<Eigen::Index>(nx_) * ny_ * p_) throw InvalidArgument("restrict: dimension mismatch");
    CoVector out = CoVector::Zero(dim());
    for (int r = 0; r < num_cells(); ++r) {
        const IndexRect& c = cells_[static_cast<std::size_t>(r)];
        auto seg = out.segment(static_cast<Eigen::Index>(r) * p_, p_);
        for (int j = c.j0; j < c.j1; ++j) {
            for (int i = c.i0; i < c.i1; ++i) seg += fine.segment((static_cast<Eigen::Index>(j) * nx_ + i) * p_, p_);
        }
    }
    return out;
}

CoVector Prolongation::prolong(const CoVector& coarse) const {
    if (coarse.size() != dim()) throw InvalidArgument("prolong: dimension mismatch");
    CoVector out = CoVector::Zero(static_cast<Eigen::Index>(nx_) * ny_ * p_);
    for (int r = 0; r < num_cells(); ++r) {
        const IndexRect& c = cells_[static_cast<std::size_t>(r)];
        const auto seg = coarse.segment(static_cast<Eigen::Index>(r) * p_, p_);
        for (int j = c.j0; j < c.j1; ++j) {
            for (int i = c.i0; i < c.i1; ++i) out.segment((static_cast<Eigen::Index>(j) * nx_ + i) * p_, p_) = seg;
        }
    }
    return out;
}

BlockMatrix coarse_operator(const BlockMatrix& a, const Prolongation& prolong) {
    if (a.block_size() != prolong.block_size() || a.n_blocks() != prolong.nx() * prolong.ny()) {
        throw InvalidArgument("coarse_operator: operator and prolongation disagree");
    }
    const int nc = prolong.num_cells();
    std::vector<std::vector<int>> pattern(static_cast<std::size_t>(nc));
    for (int r = 0; r < nc; ++r) {
        const IndexRect& c = prolong.cells()[static_cast<std::size_t>(r)];
        auto& row = pattern[static_cast<std::size_t>(r)];
        for (int j = c.j0; j < c.j1; ++j) {
            for (int i = c.i0; i < c.i1; ++i) {
                const int k = j * prolong.nx() + i;
                for (int pos = a.row_begin(k); pos < a.row_end(k); ++pos) {
                    const int s = prolong.cell_of(a.col_at(pos));
                    if (s >= 0) row.push_back(s);
                }
            }
        }
    }
    BlockMatrix out(a.block_size(), std::move(pattern), a.symmetry());
    for (int r = 0; r < nc; ++r) {
        const IndexRect& c = prolong.cells()[static_cast<std::size_t>(r)];
        for (int j = c.j0; j < c.j1; ++j) {
            for (int i = c.i0; i < c.i1; ++i) {
                const int k = j * prolong.nx() + i;
                for (int pos = a.row_begin(k); pos < a.row_end(k); ++pos) {
                    const int s = prolong.cell_of(a.col_at(pos));
                    if (s >= 0) out.block(r, s) += a.block_at(pos);
                }
            }
        }
    }
    return out;
}

DenseMatrix coarse_operator_dense(const BlockMatrix& a, const Prolongation& prolong) {
    return local_operator(a, prolong.nx(), prolong.cells());
}

DenseMatrix local_operator(const BlockMatrix& a, int nx, const std::vector<IndexRect>& cells) {
    const int p = a.block_size();
    const int n = static_cast<int>(cells.size()) * p;
    // Sparse map from element to cell; only the elements of the cells are touched.
    std::map<int, int> owner;
    for (int r = 0; r < static_cast<int>(cells.size()); ++r) {
        const IndexRect& c = cells[static_cast<std::size_t>(r)];
        for (int j = c.j0; j < c.j1; ++j) {
            for (int i = c.i0; i < c.i1; ++i) owner.emplace(j * nx + i, r);
        }
    }
    DenseMatrix out = DenseMatrix::Zero(n, n);
    for (const auto& [k, r] : owner) {
        for (int pos = a.row_begin(k); pos < a.row_end(k); ++pos) {
            const auto it = owner.find(a.col_at(pos));
            if (it == owner.end()) continue;
            out.block(static_cast<Eigen::Index>(r) * p, static_cast<Eigen::Index>(it->second) * p, p, p) +=
                a.block_at(pos);
        }
    }
    return out;
}

namespace {

DenseMatrix invert(const DenseMatrix& m, bool hermitian, const std::string& what) {
    const auto n = m.rows();
    const DenseMatrix eye = DenseMatrix::Identity(n, n);
    DenseMatrix inv;
    double rcond = 0.0;
    if (hermitian) {
        Eigen::LLT<DenseMatrix> llt(m);
        if (llt.info() == Eigen::Success) {
            rcond = llt.rcond();
            inv = llt.solve(eye);
        }
    }
    if (inv.size() == 0) {
        Eigen::PartialPivLU<DenseMatrix> lu(m);
        rcond = lu.rcond();
        inv = lu.solve(eye);
    }
    if (!(rcond > 1e-15) || !inv.allFinite()) {
        throw NumericalError("singular local operator on " + what + " (rcond " + std::to_string(rcond) + ")");
    }
    if (hermitian) inv = (0.5 * (inv + inv.adjoint())).eval();
    return inv;
}

std::string rect_name(const IndexRect& r) {
    return "[" + std::to_string(r.i0) + "," + std::to_string(r.i1) + ")x[" + std::to_string(r.j0) + "," +
           std::to_string(r.j1) + ")";
}

}  // namespace

DenseMatrix block_jacobi_operator(const DenseMatrix& a, int p, int m0) {
    if (m0 < 1) throw InvalidArgument("smoother: m0 must be at least 1");
    if (p < 1 || a.rows() % p != 0 || a.rows() != a.cols()) throw InvalidArgument("smoother: bad block size");
    const auto n = a.rows();
    const bool hermitian = (a - a.adjoint()).norm() <= 1e-12 * a.norm();
    DenseMatrix dinv = DenseMatrix::Zero(n, n);
    for (Eigen::Index c = 0; c < n; c += p) {
        dinv.block(c, c, p, p) = invert(a.block(c, c, p, p), hermitian, "cell block " + std::to_string(c / p));
    }
    DenseMatrix w = dinv;
    for (int step = 1; step < m0; ++step) {
        DenseMatrix r = DenseMatrix::Identity(n, n);
        r.noalias() -= a * w;
        w.noalias() += dinv * r;
    }
    if (hermitian) w = (0.5 * (w + w.adjoint())).eval();
    return w;
}

CellRule decomposition_cells(int parts) {
    return [parts](const IndexRect& domain, std::vector<IndexRect>& cells) {
        cells = decomposition_operation(domain, parts).cells();
    };
}

CellRule element_cells() {
    return [](const IndexRect& d, std::vector<IndexRect>& cells) {
        cells.clear();
        for (int j = d.j0; j < d.j1; ++j) {
            for (int i = d.i0; i < d.i1; ++i) cells.push_back({i, i + 1, j, j + 1});
        }
    };
}

CellRule single_cell() {
    return [](const IndexRect& d, std::vector<IndexRect>& cells) { cells.assign(1, d); };
}

using SparseMatrixC = Eigen::SparseMatrix<Complex>;

struct AdditiveLevel::Class {
    int ri = 0, rj = 0;
    int dim = 0;
    std::vector<IndexRect> cells;  ///< relative to the reference origin
    DenseMatrix w;
    std::unique_ptr<Eigen::SparseLU<SparseMatrixC>> lu;
    std::vector<std::array<int, 2>> origins;
    std::vector<double> weights;
};

AdditiveLevel::~AdditiveLevel() = default;

AdditiveLevel::AdditiveLevel(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis,
                             const std::vector<SubspaceMember>& members, const CellRule& rule,
                             const Options& options)
    : nx_(mesh.nx()), ny_(mesh.ny()), p_(basis.p()) {
    if (a.block_size() != p_ || a.n_blocks() != mesh.num_elements()) {
        throw InvalidArgument("additive level: operator does not match mesh and basis");
    }
    if (options.m0 < 1) throw InvalidArgument("additive level: m0 must be at least 1");
    const bool hermitian = a.symmetry() == Symmetry::Hermitian;
    const double w = basis.omega();
    phase_x_.resize(p_, 2 * nx_ + 1);
    phase_y_.resize(p_, 2 * ny_ + 1);
    for (int l = 0; l < p_; ++l) {
        const Point2 d = basis.direction(l);
        for (int s = -nx_; s <= nx_; ++s) phase_x_(l, s + nx_) = std::exp(kI * (w * d.x * s * mesh.hx()));
        for (int s = -ny_; s <= ny_; ++s) phase_y_(l, s + ny_) = std::exp(kI * (w * d.y * s * mesh.hy()));
    }

    stats_.name = options.name;
    stats_.members = members.size();
    const IndexRect grid{0, nx_, 0, ny_};
    std::map<std::vector<int>, std::size_t> lookup;
    std::vector<IndexRect> cells;
    std::vector<int> key;
    for (const auto& m : members) {
        if (m.domain.empty() || !grid.contains(m.domain)) throw InvalidArgument("additive level: bad member domain");
        rule(m.domain, cells);
        key.clear();
        key.push_back((m.domain.i0 == 0) | (m.domain.i1 == nx_) << 1 | (m.domain.j0 == 0) << 2 |
                      (m.domain.j1 == ny_) << 3);
        key.push_back(m.domain.width());
        key.push_back(m.domain.height());
        for (const auto& c : cells) {
            key.insert(key.end(), {c.i0 - m.domain.i0, c.i1 - m.domain.i0, c.j0 - m.domain.j0, c.j1 - m.domain.j0});
        }
        auto [it, fresh] = lookup.emplace(key, classes_.size());
        if (fresh) {
            auto c = std::make_unique<Class>();
            c->ri = m.domain.i0;
            c->rj = m.domain.j0;
            c->dim = static_cast<int>(cells.size()) * p_;
            for (const auto& cell : cells) {
                c->cells.push_back({cell.i0 - c->ri, cell.i1 - c->ri, cell.j0 - c->rj, cell.j1 - c->rj});
            }
            classes_.push_back(std::move(c));
        }
        Class& c = *classes_[it->second];
        c.origins.push_back({m.domain.i0, m.domain.j0});
        c.weights.push_back(m.weight);
    }
    stats_.classes = classes_.size();
    stats_.min_factor_dim = std::numeric_limits<int>::max();

    for (auto& cp : classes_) {
        Class& c = *cp;
        std::vector<IndexRect> abs_cells;
        for (const auto& cell : c.cells) abs_cells.push_back({cell.i0 + c.ri, cell.i1 + c.ri, cell.j0 + c.rj, cell.j1 + c.rj});
        const IndexRect ref{c.ri, c.ri + 1, c.rj, c.rj + 1};
        const std::string what = options.name + " subspace at " + rect_name(ref);
        stats_.max_local_dim = std::max(stats_.max_local_dim, c.dim);
        if (options.solve == LocalSolve::Exact && c.dim > options.dense_limit) {
            const BlockMatrix local = coarse_operator(a, Prolongation(nx_, ny_, p_, abs_cells));
            std::vector<Eigen::Triplet<Complex>> trips;
            for (int r = 0; r < local.n_blocks(); ++r) {
                for (int pos = local.row_begin(r); pos < local.row_end(r); ++pos) {
                    const auto b = local.block_at(pos);
                    const int col = local.col_at(pos);
                    for (int jj = 0; jj < p_; ++jj) {
                        for (int ii = 0; ii < p_; ++ii) trips.emplace_back(r * p_ + ii, col * p_ + jj, b(ii, jj));
                    }
                }
            }
            SparseMatrixC s(c.dim, c.dim);
            s.setFromTriplets(trips.begin(), trips.end());
            s.makeCompressed();
            c.lu = std::make_unique<Eigen::SparseLU<SparseMatrixC>>();
            c.lu->compute(s);
            if (c.lu->info() != Eigen::Success) throw NumericalError("singular local operator on " + what);
            ++stats_.factorizations;
            stats_.min_factor_dim = std::min(stats_.min_factor_dim, c.dim);
            stats_.max_factor_dim = std::max(stats_.max_factor_dim, c.dim);
            continue;
        }
        const DenseMatrix local = local_operator(a, nx_, abs_cells);
        if (options.solve == LocalSolve::Exact) {
            c.w = invert(local, hermitian, what);
            ++stats_.factorizations;
            stats_.min_factor_dim = std::min(stats_.min_factor_dim, c.dim);
            stats_.max_factor_dim = std::max(stats_.max_factor_dim, c.dim);
        } else {
            try {
                c.w = block_jacobi_operator(local, p_, options.m0);
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " of " + what);
            }
            stats_.factorizations += c.cells.size();
            stats_.min_factor_dim = std::min(stats_.min_factor_dim, p_);
            stats_.max_factor_dim = std::max(stats_.max_factor_dim, p_);
        }
    }
    if (classes_.empty()) stats_.min_factor_dim = 0;
}

void AdditiveLevel::apply_class(const Class& c, const std::vector<Complex>& sums, std::vector<Complex>& diff) const {
    const int p = p_;
    const int stride = nx_ + 1;
    constexpr int kChunk = 64;
    const auto total = static_cast<int>(c.origins.size());
    DenseMatrix rhs(c.dim, std::min(kChunk, total));
    DenseMatrix sol(c.dim, rhs.cols());
    std::vector<Complex> phase(static_cast<std::size_t>(p) * kChunk);
    auto at = [&](int i, int j) { return (static_cast<std::size_t>(j) * stride + i) * p; };

    for (int start = 0; start < total; start += kChunk) {
        const int m = std::min(kChunk, total - start);
        for (int col = 0; col < m; ++col) {
            const auto& o = c.origins[static_cast<std::size_t>(start + col)];
            Complex* ph = phase.data() + static_cast<std::size_t>(col) * p;
            for (int l = 0; l < p; ++l) ph[l] = phase_x_(l, o[0] - c.ri + nx_) * phase_y_(l, o[1] - c.rj + ny_);
            for (std::size_t r = 0; r < c.cells.size(); ++r) {
                const IndexRect& cell = c.cells[r];
                const std::size_t a11 = at(cell.i1 + o[0], cell.j1 + o[1]);
                const std::size_t a01 = at(cell.i0 + o[0], cell.j1 + o[1]);
                const std::size_t a10 = at(cell.i1 + o[0], cell.j0 + o[1]);
                const std::size_t a00 = at(cell.i0 + o[0], cell.j0 + o[1]);
                for (int l = 0; l < p; ++l) {
                    rhs(static_cast<Eigen::Index>(r) * p + l, col) =
                        ph[l] * (sums[a11 + l] - sums[a01 + l] - sums[a10 + l] + sums[a00 + l]);
                }
            }
        }
        if (c.lu) {
            sol.leftCols(m) = c.lu->solve(rhs.leftCols(m));
        } else {
            sol.leftCols(m).noalias() = c.w * rhs.leftCols(m);
        }
        for (int col = 0; col < m; ++col) {
            const auto& o = c.origins[static_cast<std::size_t>(start + col)];
            const double wt = c.weights[static_cast<std::size_t>(start + col)];
            const Complex* ph = phase.data() + static_cast<std::size_t>(col) * p;
            for (std::size_t r = 0; r < c.cells.size(); ++r) {
                const IndexRect& cell = c.cells[r];
                const std::size_t a11 = at(cell.i1 + o[0], cell.j1 + o[1]);
                const std::size_t a01 = at(cell.i0 + o[0], cell.j1 + o[1]);
                const std::size_t a10 = at(cell.i1 + o[0], cell.j0 + o[1]);
                const std::size_t a00 = at(cell.i0 + o[0], cell.j0 + o[1]);
                for (int l = 0; l < p; ++l) {
                    const Complex v = wt * std::conj(ph[l]) * sol(static_cast<Eigen::Index>(r) * p + l, col);
                    diff[a00 + l] += v;
                    diff[a10 + l] -= v;
                    diff[a01 + l] -= v;
                    diff[a11 + l] += v;
                }
            }
        }
    }
}

CoVector AdditiveLevel::apply(const CoVector& dual) const {
    const auto n = static_cast<Eigen::Index>(nx_) * ny_ * p_;
    if (dual.size() != n) throw InvalidArgument("additive level: dimension mismatch");
    const int p = p_;
    const int stride = nx_ + 1;
    const std::size_t table = static_cast<std::size_t>(stride) * (ny_ + 1) * p;
    // Summed-area table of the dual vector, one plane per direction.
    std::vector<Complex> sums(table, Complex{});
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const std::size_t dst = (static_cast<std::size_t>(j + 1) * stride + i + 1) * p;
            const std::size_t left = dst - p;
            const Complex* src = dual.data() + (static_cast<std::size_t>(j) * nx_ + i) * p;
            for (int l = 0; l < p; ++l) sums[dst + l] = sums[left + l] + src[l];
        }
    }
    for (int j = 2; j <= ny_; ++j) {
        for (std::size_t q = static_cast<std::size_t>(j) * stride * p; q < static_cast<std::size_t>(j + 1) * stride * p; ++q) {
            sums[q] += sums[q - static_cast<std::size_t>(stride) * p];
        }
    }
    std::vector<Complex> diff(table, Complex{});
    for (const auto& c : classes_) apply_class(*c, sums, diff);
    // Prefix sums of the difference array give the value on each element.
    for (int j = 0; j <= ny_; ++j) {
        for (int i = 1; i <= nx_; ++i) {
            const std::size_t q = (static_cast<std::size_t>(j) * stride + i) * p;
            for (int l = 0; l < p; ++l) diff[q + l] += diff[q - p + l];
        }
    }
    for (int j = 1; j <= ny_; ++j) {
        for (std::size_t q = static_cast<std::size_t>(j) * stride * p; q < static_cast<std::size_t>(j + 1) * stride * p; ++q) {
            diff[q] += diff[q - static_cast<std::size_t>(stride) * p];
        }
    }
    CoVector out(n);
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const std::size_t q = (static_cast<std::size_t>(j) * stride + i) * p;
            for (int l = 0; l < p; ++l) out((static_cast<Eigen::Index>(j) * nx_ + i) * p + l) = diff[q + l];
        }
    }
    ++stats_.applies;
    stats_.local_solves += stats_.members;
    return out;
}

RichardsonLevel::RichardsonLevel(const BlockMatrix& a, std::unique_ptr<LevelSolver> inner, int m0)
    : a_(a), inner_(std::move(inner)), m0_(m0) {
    if (!inner_) throw InvalidArgument("richardson: missing inner solver");
    if (m0 < 1) throw InvalidArgument("richardson: m0 must be at least 1");
    stats_ = inner_->stats();
}

CoVector RichardsonLevel::apply(const CoVector& dual) const {
    CoVector w = inner_->apply(dual);
    for (int step = 1; step < m0_; ++step) {
        CoVector r = dual - a_.apply(w);
        w += inner_->apply(r);
    }
    ++stats_.applies;
    stats_.local_solves += static_cast<std::size_t>(m0_) * stats_.members;
    return w;
}

}  // namespace helmwave
