#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "helmwave/mesh.hpp"

namespace helmwave {

/// Half-open rectangle of element indices [i0, i1) x [j0, j1).
struct IndexRect {
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

    int width() const { return i1 - i0; }
    int height() const { return j1 - j0; }
    int area() const { return width() * height(); }
    bool empty() const { return i1 <= i0 || j1 <= j0; }
    bool contains(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
    bool contains(const IndexRect& o) const { return o.i0 >= i0 && o.i1 <= i1 && o.j0 >= j0 && o.j1 <= j1; }
    friend bool operator==(const IndexRect&, const IndexRect&) = default;
    friend auto operator<=>(const IndexRect&, const IndexRect&) = default;
};

/// Sizes of `parts` nearly equal pieces of c, larger pieces first; fewer
/// pieces of size 1 when c < parts.
std::vector<int> split_counts(int c, int parts);

/// Tiling of a rectangle into at most parts x parts coarse cells.
struct Decomposition {
    IndexRect owner;
    std::vector<int> xb;  ///< cell boundaries along x, xb.front() == owner.i0
    std::vector<int> yb;

    int cells_x() const { return static_cast<int>(xb.size()) - 1; }
    int cells_y() const { return static_cast<int>(yb.size()) - 1; }
    int num_cells() const { return cells_x() * cells_y(); }
    IndexRect cell(int a, int b) const { return {xb[a], xb[a + 1], yb[b], yb[b + 1]}; }
    /// All cells, row-major (x fastest).
    std::vector<IndexRect> cells() const;
};

Decomposition decomposition_operation(const IndexRect& sub, int parts = 4);

struct Overlap {
    enum class Mode { Fraction, OneElement };
    Mode mode = Mode::Fraction;
    double theta = 1.0;

    static Overlap complete() { return {Mode::Fraction, 1.0}; }
    static Overlap fraction(double theta);
    static Overlap one_element() { return {Mode::OneElement, 0.0}; }
    std::string describe() const;
};

/// Cell (a, b) of d grown on each side by round(theta * neighbor extent)
/// elements (half away from zero), or by one element, within the owner.
IndexRect enlarge(const Decomposition& d, int a, int b, const Overlap& overlap);

/// Enlarged subdomains of all cells of d, row-major.
std::vector<IndexRect> enlarge_all(const Decomposition& d, const Overlap& overlap);

struct HierarchyOptions {
    Overlap overlap = Overlap::complete();
    int stop_threshold = 25;
    int parts = 4;
    /// Count subdomains with identical rectangles once per level.
    bool deduplicate = true;
};

/// Multilevel overlapping decomposition of the element grid.
///
/// sets[j] is S_j for j = 0..J. The level-j coarse subspaces (j = 1..J)
/// are the decompositions of the members of sets[j-1]; the fine subspaces
/// are the members of sets[J] with every element as its own cell.
struct Hierarchy {
    int nx = 0, ny = 0;
    HierarchyOptions options;
    IndexRect domain;
    Decomposition coarsest;
    std::vector<std::vector<IndexRect>> sets;
    /// parent[j][s]: index in sets[j-1] of the first subdomain producing
    /// sets[j][s]; -1 for j == 0.
    std::vector<std::vector<int>> parent;
    /// multiplicity[j][s]: how often sets[j][s] arises when every member of
    /// sets[j-1] is split without merging duplicates (1 when not merged).
    std::vector<std::vector<double>> multiplicity;
    /// Decompositions where an axis had fewer elements than `parts`.
    std::size_t degenerate_splits = 0;

    int levels() const { return static_cast<int>(sets.size()) - 1; }
    const std::vector<IndexRect>& fine_sets() const { return sets.back(); }
    std::vector<std::size_t> counts() const;
    std::vector<int> max_areas() const;
};

Hierarchy build_hierarchy(int nx, int ny, const HierarchyOptions& options = {});
Hierarchy build_hierarchy(const Mesh& mesh, const HierarchyOptions& options = {});

/// Levels, counts and largest areas; rectangles only if requested.
nlohmann::json to_json(const Hierarchy& h, bool with_rects);

/// Every element of the grid lies in at least one member of the fine sets.
bool covers_grid(const Hierarchy& h);

}  // namespace helmwave
