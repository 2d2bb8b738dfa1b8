#include "helmwave/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "helmwave/types.hpp"

namespace helmwave {

std::vector<int> split_counts(int c, int parts) {
    if (c < 1 || parts < 1) throw InvalidArgument("split_counts: counts must be positive");
    const int n = std::min(parts, c);
    const int q = c / n;
    const int r = c % n;
    std::vector<int> out(static_cast<std::size_t>(n), q);
    for (int i = 0; i < r; ++i) out[static_cast<std::size_t>(i)] = q + 1;
    return out;
}

std::vector<IndexRect> Decomposition::cells() const {
    std::vector<IndexRect> out;
    out.reserve(static_cast<std::size_t>(num_cells()));
    for (int b = 0; b < cells_y(); ++b) {
        for (int a = 0; a < cells_x(); ++a) out.push_back(cell(a, b));
    }
    return out;
}

Decomposition decomposition_operation(const IndexRect& sub, int parts) {
    if (sub.empty()) throw InvalidArgument("decomposition: empty rectangle");
    Decomposition d;
    d.owner = sub;
    d.xb.push_back(sub.i0);
    for (int s : split_counts(sub.width(), parts)) d.xb.push_back(d.xb.back() + s);
    d.yb.push_back(sub.j0);
    for (int s : split_counts(sub.height(), parts)) d.yb.push_back(d.yb.back() + s);
    return d;
}

Overlap Overlap::fraction(double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("overlap: theta must lie in (0, 1]");
    return {Mode::Fraction, theta};
}

std::string Overlap::describe() const {
    if (mode == Mode::OneElement) return "one-element";
    std::ostringstream s;
    s << "theta=" << theta;
    return s.str();
}

namespace {

int grow(const std::vector<int>& bounds, int a, int side, const Overlap& ov) {
    const int n = static_cast<int>(bounds.size()) - 1;
    const int nb = a + side;
    if (nb < 0 || nb >= n) return 0;
    if (ov.mode == Overlap::Mode::OneElement) return 1;
    const int extent = bounds[static_cast<std::size_t>(nb) + 1] - bounds[static_cast<std::size_t>(nb)];
    return static_cast<int>(std::lround(ov.theta * extent));
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

}  // namespace

IndexRect enlarge(const Decomposition& d, int a, int b, const Overlap& overlap) {
    if (a < 0 || a >= d.cells_x() || b < 0 || b >= d.cells_y()) throw InvalidArgument("enlarge: cell out of range");
    IndexRect r = d.cell(a, b);
    r.i0 -= grow(d.xb, a, -1, overlap);
    r.i1 += grow(d.xb, a, +1, overlap);
    r.j0 -= grow(d.yb, b, -1, overlap);
    r.j1 += grow(d.yb, b, +1, overlap);
    r.i0 = std::max(r.i0, d.owner.i0);
    r.i1 = std::min(r.i1, d.owner.i1);
    r.j0 = std::max(r.j0, d.owner.j0);
    r.j1 = std::min(r.j1, d.owner.j1);
    return r;
}

std::vector<IndexRect> enlarge_all(const Decomposition& d, const Overlap& overlap) {
    std::vector<IndexRect> out;
    out.reserve(static_cast<std::size_t>(d.num_cells()));
    for (int b = 0; b < d.cells_y(); ++b) {
        for (int a = 0; a < d.cells_x(); ++a) out.push_back(enlarge(d, a, b, overlap));
    }
    return out;
}

std::vector<std::size_t> Hierarchy::counts() const {
    std::vector<std::size_t> out;
    for (const auto& s : sets) out.push_back(s.size());
    return out;
}

std::vector<int> Hierarchy::max_areas() const {
    std::vector<int> out;
    for (const auto& s : sets) {
        int m = 0;
        for (const auto& r : s) m = std::max(m, r.area());
        out.push_back(m);
    }
    return out;
}

Hierarchy build_hierarchy(int nx, int ny, const HierarchyOptions& options) {
    if (options.parts < 2) throw InvalidArgument("hierarchy: need at least two parts per axis");
    if (nx < options.parts || ny < options.parts) {
        throw InvalidArgument("hierarchy: mesh needs at least " + std::to_string(options.parts) +
                              " elements per axis");
    }
    if (options.stop_threshold < 2) throw InvalidArgument("hierarchy: stop threshold must be at least 2");
    Hierarchy h;
    h.nx = nx;
    h.ny = ny;
    h.options = options;
    h.domain = {0, nx, 0, ny};
    h.coarsest = decomposition_operation(h.domain, options.parts);
    h.sets.push_back(enlarge_all(h.coarsest, options.overlap));
    h.parent.emplace_back(h.sets.back().size(), -1);
    h.multiplicity.emplace_back(h.sets.back().size(), 1.0);

    auto max_area = [](const std::vector<IndexRect>& s) {
        int m = 0;
        for (const auto& r : s) m = std::max(m, r.area());
        return m;
    };

    while (true) {
        const auto& current = h.sets.back();
        const int largest = max_area(current);
        if (h.levels() >= 1 && largest < options.stop_threshold) break;
        std::vector<IndexRect> next;
        std::vector<int> parents;
        std::vector<double> mult;
        const auto& current_mult = h.multiplicity.back();
        std::unordered_map<IndexRect, int, RectHash> seen;
        for (std::size_t s = 0; s < current.size(); ++s) {
            const Decomposition d = decomposition_operation(current[s], options.parts);
            if (d.cells_x() < options.parts || d.cells_y() < options.parts) ++h.degenerate_splits;
            for (const auto& r : enlarge_all(d, options.overlap)) {
                if (options.deduplicate) {
                    const auto [it, fresh] = seen.emplace(r, static_cast<int>(next.size()));
                    if (!fresh) {
                        mult[static_cast<std::size_t>(it->second)] += current_mult[s];
                        continue;
                    }
                }
                next.push_back(r);
                parents.push_back(static_cast<int>(s));
                mult.push_back(current_mult[s]);
            }
        }
        if (max_area(next) >= largest) throw InvalidArgument("hierarchy: subdomains stopped shrinking");
        h.sets.push_back(std::move(next));
        h.parent.push_back(std::move(parents));
        h.multiplicity.push_back(std::move(mult));
    }
    return h;
}

Hierarchy build_hierarchy(const Mesh& mesh, const HierarchyOptions& options) {
    return build_hierarchy(mesh.nx(), mesh.ny(), options);
}

bool covers_grid(const Hierarchy& h) {
    std::vector<char> hit(static_cast<std::size_t>(h.nx) * static_cast<std::size_t>(h.ny), 0);
    for (const auto& r : h.fine_sets()) {
        for (int j = r.j0; j < r.j1; ++j) {
            for (int i = r.i0; i < r.i1; ++i) hit[static_cast<std::size_t>(j) * h.nx + i] = 1;
        }
    }
    return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
}

nlohmann::json to_json(const Hierarchy& h, bool with_rects) {
    nlohmann::json out;
    out["nx"] = h.nx;
    out["ny"] = h.ny;
    out["J"] = h.levels();
    out["overlap"] = h.options.overlap.describe();
    out["stop_threshold"] = h.options.stop_threshold;
    out["parts"] = h.options.parts;
    out["deduplicate"] = h.options.deduplicate;
    out["degenerate_splits"] = h.degenerate_splits;
    auto rect_json = [](const IndexRect& r) { return nlohmann::json::array({r.i0, r.i1, r.j0, r.j1}); };
    nlohmann::json coarse = nlohmann::json::array();
    for (const auto& c : h.coarsest.cells()) coarse.push_back(rect_json(c));
    out["coarsest"] = coarse;
    nlohmann::json levels = nlohmann::json::array();
    const auto areas = h.max_areas();
    for (std::size_t j = 0; j < h.sets.size(); ++j) {
        nlohmann::json level;
        level["j"] = j;
        level["count"] = h.sets[j].size();
        level["max_area"] = areas[j];
        if (with_rects) {
            nlohmann::json rects = nlohmann::json::array();
            for (const auto& r : h.sets[j]) rects.push_back(rect_json(r));
            level["rects"] = rects;
        }
        levels.push_back(level);
    }
    out["levels"] = levels;
    return out;
}

}  // namespace helmwave
