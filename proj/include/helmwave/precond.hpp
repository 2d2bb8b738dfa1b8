#pragma once

#include <memory>
#include <string>
#include <vector>

#include "helmwave/basis.hpp"
#include "helmwave/block_matrix.hpp"
#include "helmwave/hierarchy.hpp"
#include "helmwave/mesh.hpp"
#include "helmwave/subspace.hpp"

namespace helmwave {

enum class PrecondKind {
    B,          ///< additive, exact local solves
    Bs,         ///< additive, block-Jacobi smoothers
    M1,         ///< multiplicative, fine to coarse
    M2,         ///< symmetric multiplicative sweep
    M3,         ///< multiplicative, fine smoother once
    MGJacobi,   ///< nested partitions, per-cell solves
    MGSchwarz,  ///< nested partitions, 3x3-cell patch solves
    DDNon,      ///< coarsest plus 4x4 subdomains, no overlap
    DDSmall,    ///< same with one element of overlap
    DDLarge,    ///< same with complete overlap
    BSmall,     ///< B on a one-element-overlap hierarchy
    BHalf       ///< B on a half-overlap hierarchy
};

std::string to_string(PrecondKind k);
PrecondKind parse_precond_kind(const std::string& s);

/// Where the m0 block-Jacobi smoothing steps act.
enum class SmootherScope {
    /// On each local coarse (or fine) subspace separately; the level result
    /// is the sum of the per-subspace results.
    Subdomain,
    /// On the whole level at once: every step corrects each distinct cell
    /// of the level against one global residual, scaled by the damping.
    Level
};

std::string to_string(SmootherScope s);
SmootherScope parse_smoother_scope(const std::string& s);

struct PrecondConfig {
    PrecondKind kind = PrecondKind::B;
    int m0 = 1;
    SmootherScope scope = SmootherScope::Level;
    /// Level scope: factor on every cell correction; 0 picks one over the
    /// largest number of cells covering an element.
    double damping = 0.0;
    /// Refinement ratio per axis of the nested multigrid partitions.
    int mg_ratio = 4;
    /// Options of the multilevel hierarchy; the overlap is forced for
    /// BSmall and BHalf.
    HierarchyOptions hierarchy;
    /// Weight each subspace of the multilevel family by how often it is
    /// generated instead of counting it once.
    bool weight_by_multiplicity = false;
};

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    /// M^{-1} xi.
    virtual CoVector apply(const CoVector& xi) const = 0;
    PrecondKind kind() const { return kind_; }
    /// Per level: coarsest first.
    std::vector<LevelStats> stats() const;

protected:
    explicit Preconditioner(PrecondKind k) : kind_(k) {}
    PrecondKind kind_;
    std::vector<std::unique_ptr<LevelSolver>> levels_;
};

/// B, Bs, M1, M2, M3, BSmall and BHalf over a multilevel hierarchy.
///
/// Level index 0 is the coarsest space, 1..J the coarse levels and J + 1
/// the fine level.
class MultilevelPreconditioner final : public Preconditioner {
public:
    MultilevelPreconditioner(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis,
                             const Hierarchy& hierarchy, const PrecondConfig& config);

    CoVector apply(const CoVector& xi) const override;

    int J() const { return static_cast<int>(levels_.size()) - 2; }
    /// Correction of level j from a dual vector.
    CoVector apply_level(int j, const CoVector& dual) const;
    /// Number of fine-level applications so far.
    std::size_t fine_calls() const { return fine_calls_; }

private:
    void correct(int j, const CoVector& xi, CoVector& u) const;

    const BlockMatrix& a_;
    mutable std::size_t fine_calls_ = 0;
};

/// MG-Jacobi and MG-Schwarz: coarsest solve plus additive level smoothers
/// over nested tensor partitions down to the fine mesh.
class MultigridPreconditioner final : public Preconditioner {
public:
    MultigridPreconditioner(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis,
                            const PrecondConfig& config);
    CoVector apply(const CoVector& xi) const override;
    /// Cell boundaries per level, coarsest first.
    const std::vector<std::pair<std::vector<int>, std::vector<int>>>& partitions() const { return grids_; }

private:
    std::vector<std::pair<std::vector<int>, std::vector<int>>> grids_;
};

/// Coarsest solve plus exact solves on the 16 subdomains of the coarsest
/// partition, enlarged by nothing, one element or the neighboring cells.
class OneLevelDD final : public Preconditioner {
public:
    OneLevelDD(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis, const PrecondConfig& config);
    CoVector apply(const CoVector& xi) const override;
};

/// Builds the hierarchy (when the kind needs one) and the preconditioner.
std::unique_ptr<Preconditioner> setup_preconditioner(const BlockMatrix& a, const Mesh& mesh,
                                                     const PlaneWaveBasis& basis, const PrecondConfig& config);

/// Hierarchy options actually used for a configuration.
HierarchyOptions hierarchy_options_for(const PrecondConfig& config);

}  // namespace helmwave
