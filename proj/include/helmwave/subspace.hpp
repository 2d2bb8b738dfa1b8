#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "helmwave/basis.hpp"
#include "helmwave/block_matrix.hpp"
#include "helmwave/hierarchy.hpp"
#include "helmwave/mesh.hpp"

namespace helmwave {

/// Aggregation map of a subspace made of disjoint cells: direction l on
/// cell r is the sum of direction l on every fine element of the cell.
class Prolongation {
public:
    Prolongation(int nx, int ny, int p, std::vector<IndexRect> cells);

    int num_cells() const { return static_cast<int>(cells_.size()); }
    int dim() const { return num_cells() * p_; }
    int block_size() const { return p_; }
    const std::vector<IndexRect>& cells() const { return cells_; }

    /// Entry (r, l) = sum of fine entries (k, l) over elements k of cell r.
    CoVector restrict(const CoVector& fine) const;
    /// Fine vector with the value of (r, l) on every (k, l), k in cell r.
    CoVector prolong(const CoVector& coarse) const;

    /// Cell of element k or -1.
    int cell_of(int k) const { return owner_[static_cast<std::size_t>(k)]; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }

private:
    int nx_, ny_, p_;
    std::vector<IndexRect> cells_;
    std::vector<int> owner_;
};

/// Galerkin product P^H A P as a block matrix over the cells.
BlockMatrix coarse_operator(const BlockMatrix& a, const Prolongation& prolong);
/// Same as a dense matrix, cell-major and direction-minor.
DenseMatrix coarse_operator_dense(const BlockMatrix& a, const Prolongation& prolong);

/// Produces the cells of the subspace living on a domain rectangle.
using CellRule = std::function<void(const IndexRect& domain, std::vector<IndexRect>& cells)>;

/// Cells of decomposition_operation(domain, parts).
CellRule decomposition_cells(int parts);
/// Every fine element of the domain as its own cell.
CellRule element_cells();
/// The domain as a single cell.
CellRule single_cell();

struct SubspaceMember {
    IndexRect domain;
    double weight = 1.0;
};

enum class LocalSolve {
    Exact,       ///< inverse of the Galerkin operator
    BlockJacobi  ///< m0 steps of cell-block Jacobi on the Galerkin operator, zero start
};

struct LevelStats {
    std::string name;
    std::size_t members = 0;
    std::size_t classes = 0;
    std::size_t factorizations = 0;
    int min_factor_dim = 0;
    int max_factor_dim = 0;
    int max_local_dim = 0;
    mutable std::size_t applies = 0;
    mutable std::size_t local_solves = 0;
};

/// A correction operator mapping a dual (right-hand side) vector to a
/// primal coefficient vector.
class LevelSolver {
public:
    virtual ~LevelSolver() = default;
    virtual CoVector apply(const CoVector& dual) const = 0;
    const LevelStats& stats() const { return stats_; }

protected:
    LevelStats stats_;
};

/// Sum over members S of weight_S * P_S W_S P_S^H with W_S the local solve
/// on S. Members that are translates of each other (same cell layout and
/// same contact with the outer boundary) share W up to a diagonal phase.
class AdditiveLevel final : public LevelSolver {
public:
    struct Options {
        LocalSolve solve = LocalSolve::Exact;
        int m0 = 1;
        /// Local dimensions above this use a sparse LU instead of a dense inverse.
        int dense_limit = 1600;
        std::string name = "level";
    };

    AdditiveLevel(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis,
                  const std::vector<SubspaceMember>& members, const CellRule& rule, const Options& options);
    ~AdditiveLevel() override;

    CoVector apply(const CoVector& dual) const override;

private:
    struct Class;
    void apply_class(const Class& c, const std::vector<Complex>& sums, std::vector<Complex>& diff) const;

    int nx_, ny_, p_;
    Eigen::MatrixXcd phase_x_;  ///< (l, d + nx) -> exp(i w a_l.x d hx)
    Eigen::MatrixXcd phase_y_;
    std::vector<std::unique_ptr<Class>> classes_;
};

/// m0 Richardson steps w <- w + L(dual - A w) from w = 0.
class RichardsonLevel final : public LevelSolver {
public:
    RichardsonLevel(const BlockMatrix& a, std::unique_ptr<LevelSolver> inner, int m0);
    CoVector apply(const CoVector& dual) const override;

private:
    const BlockMatrix& a_;
    std::unique_ptr<LevelSolver> inner_;
    int m0_;
};

/// Dense Galerkin operator of the subspace with the given cells.
DenseMatrix local_operator(const BlockMatrix& a, int nx, const std::vector<IndexRect>& cells);

/// sum_{i < m0} (I - Dinv A)^i Dinv with Dinv the inverse cell-diagonal
/// blocks of size p.
DenseMatrix block_jacobi_operator(const DenseMatrix& a, int p, int m0);

}  // namespace helmwave
