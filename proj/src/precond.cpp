#include "helmwave/precond.hpp"

#include <algorithm>
#include <unordered_map>

namespace helmwave {

namespace {

const std::vector<std::pair<PrecondKind, std::string>>& kind_names() {
    static const std::vector<std::pair<PrecondKind, std::string>> names = {
        {PrecondKind::B, "B"},           {PrecondKind::Bs, "Bs"},
        {PrecondKind::M1, "M1"},         {PrecondKind::M2, "M2"},
        {PrecondKind::M3, "M3"},         {PrecondKind::MGJacobi, "mg-jacobi"},
        {PrecondKind::MGSchwarz, "mg-schwarz"}, {PrecondKind::DDNon, "dd-non"},
        {PrecondKind::DDSmall, "dd-small"},     {PrecondKind::DDLarge, "dd-large"},
        {PrecondKind::BSmall, "B-small"},       {PrecondKind::BHalf, "B-half"}};
    return names;
}

struct RectHash {
    std::size_t operator()(const IndexRect& r) const {
        std::size_t h = static_cast<std::size_t>(r.i0);
        h = h * 1000003u ^ static_cast<std::size_t>(r.i1);
        h = h * 1000003u ^ static_cast<std::size_t>(r.j0);
        h = h * 1000003u ^ static_cast<std::size_t>(r.j1);
        return h;
    }
};

std::vector<SubspaceMember> as_members(const std::vector<IndexRect>& domains,
                                       const std::vector<double>* weights = nullptr) {
    std::vector<SubspaceMember> out;
    out.reserve(domains.size());
    for (std::size_t s = 0; s < domains.size(); ++s) out.push_back({domains[s], weights ? (*weights)[s] : 1.0});
    return out;
}

std::unique_ptr<LevelSolver> exact_level(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis,
                                         const std::vector<IndexRect>& domains, const CellRule& rule,
                                         const std::string& name, const std::vector<double>* weights = nullptr) {
    AdditiveLevel::Options opt;
    opt.solve = LocalSolve::Exact;
    opt.name = name;
    return std::make_unique<AdditiveLevel>(a, mesh, basis, as_members(domains, weights), rule, opt);
}

std::unique_ptr<LevelSolver> smoother_level(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis,
                                            const std::vector<IndexRect>& domains, const CellRule& rule,
                                            const PrecondConfig& cfg, const std::string& name,
                                            const std::vector<double>* weights) {
    if (cfg.scope == SmootherScope::Subdomain) {
        AdditiveLevel::Options opt;
        opt.solve = LocalSolve::BlockJacobi;
        opt.m0 = cfg.m0;
        opt.name = name;
        return std::make_unique<AdditiveLevel>(a, mesh, basis, as_members(domains, weights), rule, opt);
    }
    // Distinct cells of all subspaces, damped by the largest element coverage.
    std::vector<SubspaceMember> cells;
    std::unordered_map<IndexRect, std::size_t, RectHash> index;
    std::vector<IndexRect> scratch;
    for (const auto& d : domains) {
        rule(d, scratch);
        for (const auto& c : scratch) {
            if (index.emplace(c, cells.size()).second) cells.push_back({c, 1.0});
        }
    }
    double damping = cfg.damping;
    if (damping <= 0.0) {
        std::vector<int> cover(static_cast<std::size_t>(mesh.num_elements()), 0);
        for (const auto& c : cells) {
            for (int j = c.domain.j0; j < c.domain.j1; ++j) {
                for (int i = c.domain.i0; i < c.domain.i1; ++i) ++cover[static_cast<std::size_t>(j) * mesh.nx() + i];
            }
        }
        damping = 1.0 / *std::max_element(cover.begin(), cover.end());
    }
    for (auto& c : cells) c.weight = damping;
    AdditiveLevel::Options opt;
    opt.solve = LocalSolve::Exact;
    opt.name = name;
    auto inner = std::make_unique<AdditiveLevel>(a, mesh, basis, cells, single_cell(), opt);
    return std::make_unique<RichardsonLevel>(a, std::move(inner), cfg.m0);
}

bool uses_smoothers(PrecondKind k) {
    return k == PrecondKind::Bs || k == PrecondKind::M1 || k == PrecondKind::M2 || k == PrecondKind::M3;
}

}  // namespace

std::string to_string(PrecondKind k) {
    for (const auto& [kind, name] : kind_names()) {
        if (kind == k) return name;
    }
    return "?";
}

PrecondKind parse_precond_kind(const std::string& s) {
    for (const auto& [kind, name] : kind_names()) {
        if (name == s) return kind;
    }
    throw InvalidArgument("unknown preconditioner '" + s + "'");
}

std::string to_string(SmootherScope s) { return s == SmootherScope::Subdomain ? "subdomain" : "level"; }

SmootherScope parse_smoother_scope(const std::string& s) {
    if (s == "subdomain") return SmootherScope::Subdomain;
    if (s == "level") return SmootherScope::Level;
    throw InvalidArgument("unknown smoother scope '" + s + "'");
}

std::vector<LevelStats> Preconditioner::stats() const {
    std::vector<LevelStats> out;
    for (const auto& l : levels_) out.push_back(l->stats());
    return out;
}

HierarchyOptions hierarchy_options_for(const PrecondConfig& config) {
    HierarchyOptions h = config.hierarchy;
    if (config.kind == PrecondKind::BSmall) h.overlap = Overlap::one_element();
    if (config.kind == PrecondKind::BHalf) h.overlap = Overlap::fraction(0.5);
    return h;
}

MultilevelPreconditioner::MultilevelPreconditioner(const BlockMatrix& a, const Mesh& mesh,
                                                   const PlaneWaveBasis& basis, const Hierarchy& hierarchy,
                                                   const PrecondConfig& config)
    : Preconditioner(config.kind), a_(a) {
    switch (config.kind) {
        case PrecondKind::B:
        case PrecondKind::Bs:
        case PrecondKind::M1:
        case PrecondKind::BSmall:
        case PrecondKind::BHalf:
            break;
        case PrecondKind::M2:
        case PrecondKind::M3:
            if (a.symmetry() != Symmetry::Hermitian) {
                throw InvalidArgument(to_string(config.kind) + " needs a hermitian operator");
            }
            break;
        default:
            throw InvalidArgument("multilevel preconditioner: unsupported kind " + to_string(config.kind));
    }
    if (config.m0 < 1) throw InvalidArgument("smoother: m0 must be at least 1");
    if (hierarchy.nx != mesh.nx() || hierarchy.ny != mesh.ny()) {
        throw InvalidArgument("multilevel preconditioner: hierarchy built for another mesh");
    }
    const int parts = hierarchy.options.parts;
    const bool smooth = uses_smoothers(config.kind);
    auto weight_of = [&](int j) -> const std::vector<double>* {
        if (!config.weight_by_multiplicity) return nullptr;
        return &hierarchy.multiplicity[static_cast<std::size_t>(j)];
    };
    levels_.push_back(exact_level(a, mesh, basis, {hierarchy.domain}, decomposition_cells(parts), "coarsest"));
    for (int j = 1; j <= hierarchy.levels(); ++j) {
        const auto& domains = hierarchy.sets[static_cast<std::size_t>(j) - 1];
        const auto* w = weight_of(j - 1);
        const std::string name = "level " + std::to_string(j);
        levels_.push_back(smooth
                              ? smoother_level(a, mesh, basis, domains, decomposition_cells(parts), config, name, w)
                              : exact_level(a, mesh, basis, domains, decomposition_cells(parts), name, w));
    }
    const auto& fine = hierarchy.fine_sets();
    const auto* wf = weight_of(hierarchy.levels());
    levels_.push_back(smooth ? smoother_level(a, mesh, basis, fine, element_cells(), config, "fine", wf)
                             : exact_level(a, mesh, basis, fine, element_cells(), "fine", wf));
}

CoVector MultilevelPreconditioner::apply_level(int j, const CoVector& dual) const {
    if (j < 0 || j > J() + 1) throw InvalidArgument("apply_level: level out of range");
    if (j == J() + 1) ++fine_calls_;
    return levels_[static_cast<std::size_t>(j)]->apply(dual);
}

void MultilevelPreconditioner::correct(int j, const CoVector& xi, CoVector& u) const {
    const CoVector r = xi - a_.apply(u);
    u += apply_level(j, r);
}

CoVector MultilevelPreconditioner::apply(const CoVector& xi) const {
    if (xi.size() != a_.rows()) throw InvalidArgument("preconditioner: dimension mismatch");
    const int J = this->J();
    const int fine = J + 1;
    CoVector u;
    switch (kind_) {
        case PrecondKind::B:
        case PrecondKind::Bs:
        case PrecondKind::BSmall:
        case PrecondKind::BHalf:
            u = apply_level(0, xi);
            for (int j = 1; j <= fine; ++j) u += apply_level(j, xi);
            return u;
        case PrecondKind::M1:
            u = apply_level(fine, xi);
            for (int j = J; j >= 1; --j) correct(j, xi, u);
            correct(0, xi, u);
            return u;
        case PrecondKind::M2:
            u = apply_level(fine, xi);
            for (int j = J; j >= 1; --j) correct(j, xi, u);
            correct(0, xi, u);
            for (int j = 1; j <= J; ++j) correct(j, xi, u);
            correct(fine, xi, u);
            return u;
        case PrecondKind::M3:
            u = apply_level(1, xi);
            for (int j = 2; j <= J; ++j) correct(j, xi, u);
            correct(fine, xi, u);
            for (int j = J; j >= 1; --j) correct(j, xi, u);
            correct(0, xi, u);
            return u;
        default:
            throw InvalidArgument("multilevel preconditioner: unsupported kind");
    }
}

namespace {

std::vector<int> refine_axis(const std::vector<int>& bounds, int ratio) {
    std::vector<int> out{bounds.front()};
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        for (int piece : split_counts(bounds[s + 1] - bounds[s], ratio)) out.push_back(out.back() + piece);
    }
    return out;
}

std::vector<IndexRect> grid_cells(const std::vector<int>& xb, const std::vector<int>& yb) {
    std::vector<IndexRect> out;
    for (std::size_t b = 0; b + 1 < yb.size(); ++b) {
        for (std::size_t a = 0; a + 1 < xb.size(); ++a) out.push_back({xb[a], xb[a + 1], yb[b], yb[b + 1]});
    }
    return out;
}

}  // namespace

MultigridPreconditioner::MultigridPreconditioner(const BlockMatrix& a, const Mesh& mesh,
                                                 const PlaneWaveBasis& basis, const PrecondConfig& config)
    : Preconditioner(config.kind) {
    if (config.kind != PrecondKind::MGJacobi && config.kind != PrecondKind::MGSchwarz) {
        throw InvalidArgument("multigrid preconditioner: unsupported kind " + to_string(config.kind));
    }
    if (config.mg_ratio < 2) throw InvalidArgument("multigrid: refinement ratio must be at least 2");
    if (config.m0 < 1) throw InvalidArgument("multigrid: m0 must be at least 1");
    const int parts = config.hierarchy.parts;
    if (mesh.nx() < parts || mesh.ny() < parts) throw InvalidArgument("multigrid: mesh too small");
    const IndexRect omega{0, mesh.nx(), 0, mesh.ny()};
    const Decomposition coarse = decomposition_operation(omega, parts);
    grids_.emplace_back(coarse.xb, coarse.yb);
    while (static_cast<int>(grids_.back().first.size()) - 1 < mesh.nx() ||
           static_cast<int>(grids_.back().second.size()) - 1 < mesh.ny()) {
        grids_.emplace_back(refine_axis(grids_.back().first, config.mg_ratio),
                            refine_axis(grids_.back().second, config.mg_ratio));
    }
    levels_.push_back(exact_level(a, mesh, basis, {omega}, decomposition_cells(parts), "coarsest"));
    for (std::size_t t = 1; t < grids_.size(); ++t) {
        const auto& [xb, yb] = grids_[t];
        const std::string name = "mg level " + std::to_string(t);
        std::unique_ptr<LevelSolver> inner;
        if (config.kind == PrecondKind::MGJacobi) {
            inner = exact_level(a, mesh, basis, grid_cells(xb, yb), single_cell(), name);
        } else {
            const int cx = static_cast<int>(xb.size()) - 1;
            const int cy = static_cast<int>(yb.size()) - 1;
            std::vector<IndexRect> patches;
            for (int b = 0; b < cy; ++b) {
                for (int a2 = 0; a2 < cx; ++a2) {
                    const int a0 = std::max(a2 - 1, 0), a1 = std::min(a2 + 2, cx);
                    const int b0 = std::max(b - 1, 0), b1 = std::min(b + 2, cy);
                    patches.push_back({xb[static_cast<std::size_t>(a0)], xb[static_cast<std::size_t>(a1)],
                                       yb[static_cast<std::size_t>(b0)], yb[static_cast<std::size_t>(b1)]});
                }
            }
            CellRule rule = [xb = xb, yb = yb](const IndexRect& d, std::vector<IndexRect>& cells) {
                cells.clear();
                for (std::size_t b = 0; b + 1 < yb.size(); ++b) {
                    if (yb[b] < d.j0 || yb[b + 1] > d.j1) continue;
                    for (std::size_t a = 0; a + 1 < xb.size(); ++a) {
                        if (xb[a] < d.i0 || xb[a + 1] > d.i1) continue;
                        cells.push_back({xb[a], xb[a + 1], yb[b], yb[b + 1]});
                    }
                }
            };
            inner = exact_level(a, mesh, basis, patches, rule, name);
        }
        if (config.m0 > 1) {
            levels_.push_back(std::make_unique<RichardsonLevel>(a, std::move(inner), config.m0));
        } else {
            levels_.push_back(std::move(inner));
        }
    }
}

CoVector MultigridPreconditioner::apply(const CoVector& xi) const {
    CoVector u = levels_.front()->apply(xi);
    for (std::size_t t = 1; t < levels_.size(); ++t) u += levels_[t]->apply(xi);
    return u;
}

OneLevelDD::OneLevelDD(const BlockMatrix& a, const Mesh& mesh, const PlaneWaveBasis& basis,
                       const PrecondConfig& config)
    : Preconditioner(config.kind) {
    const int parts = config.hierarchy.parts;
    if (mesh.nx() < parts || mesh.ny() < parts) throw InvalidArgument("domain decomposition: mesh too small");
    const IndexRect omega{0, mesh.nx(), 0, mesh.ny()};
    const Decomposition coarse = decomposition_operation(omega, parts);
    std::vector<IndexRect> subdomains;
    switch (config.kind) {
        case PrecondKind::DDNon:
            subdomains = coarse.cells();
            break;
        case PrecondKind::DDSmall:
            subdomains = enlarge_all(coarse, Overlap::one_element());
            break;
        case PrecondKind::DDLarge:
            subdomains = enlarge_all(coarse, Overlap::complete());
            break;
        default:
            throw InvalidArgument("domain decomposition: unsupported kind " + to_string(config.kind));
    }
    levels_.push_back(exact_level(a, mesh, basis, {omega}, decomposition_cells(parts), "coarsest"));
    levels_.push_back(exact_level(a, mesh, basis, subdomains, element_cells(), "subdomains"));
}

CoVector OneLevelDD::apply(const CoVector& xi) const {
    CoVector u = levels_[0]->apply(xi);
    u += levels_[1]->apply(xi);
    return u;
}

std::unique_ptr<Preconditioner> setup_preconditioner(const BlockMatrix& a, const Mesh& mesh,
                                                     const PlaneWaveBasis& basis, const PrecondConfig& config) {
    switch (config.kind) {
        case PrecondKind::MGJacobi:
        case PrecondKind::MGSchwarz:
            return std::make_unique<MultigridPreconditioner>(a, mesh, basis, config);
        case PrecondKind::DDNon:
        case PrecondKind::DDSmall:
        case PrecondKind::DDLarge:
            return std::make_unique<OneLevelDD>(a, mesh, basis, config);
        default: {
            const Hierarchy h = build_hierarchy(mesh, hierarchy_options_for(config));
            return std::make_unique<MultilevelPreconditioner>(a, mesh, basis, h, config);
        }
    }
}

}  // namespace helmwave
