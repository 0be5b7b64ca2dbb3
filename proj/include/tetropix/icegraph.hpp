#pragma once

// Ice graphs: orientations of the diagonal lattice over a periodic cell whose
// balanced (2 in / 2 out) assignments correspond to T-tetromino tilings.
//
// Lattice geometry for a cell of side c (c divisible by 4), h = c/2:
//   edges  - one per even-aligned 2x2 block (bi, bj), h*h in total
//   nodes  - block corners (2p, 2q) with p + q odd, c*c/8 in total
// A block with bi + bj even runs along its anti-diagonal, joining the upper
// node (2bi, 2bj+2) to the lower node (2bi+2, 2bj); an odd block runs along
// its main diagonal from (2bi, 2bj) to (2bi+2, 2bj+2). Each node has degree
// 4 on the torus.
//
// Arrow bit true points down (head at the lower node). The arrow head marks
// the T center: the diagonal cell of the block next to the head. The T holds
// its center, both off-diagonal cells of the block and one protruding cell
// center + dir, where dir is one axis component of the arrow direction.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "layout.hpp"

namespace tetropix {

class IceGraph {
public:
    /// All arrows pointing up.
    explicit IceGraph(int cell) : IceGraph(cell, std::vector<bool>(edge_count_for(cell), false)) {}

    IceGraph(int cell, std::vector<bool> arrows) : cell_(cell), arrows_(std::move(arrows)) {
        if (arrows_.size() != edge_count_for(cell))
            throw DimensionError("ice graph for cell " + std::to_string(cell) + " needs " +
                                 std::to_string(edge_count_for(cell)) + " arrows");
    }

    /// Arrow bits in block raster order taken from the low bits of `mask`.
    static IceGraph from_mask(int cell, std::uint64_t mask) {
        const std::size_t n = edge_count_for(cell);
        if (n > 64)
            throw UnsupportedError("from_mask: cell too large");
        std::vector<bool> bits(n);
        for (std::size_t e = 0; e < n; ++e)
            bits[e] = (mask >> e) & 1U;
        return IceGraph(cell, std::move(bits));
    }

    static std::size_t edge_count_for(int cell) {
        if (cell < 4 || cell % 4 != 0)
            throw UnsupportedError("ice graphs need a cell size divisible by 4, got " +
                                   std::to_string(cell));
        const std::size_t h = static_cast<std::size_t>(cell / 2);
        return h * h;
    }

    int cell() const noexcept { return cell_; }
    int half() const noexcept { return cell_ / 2; }
    std::size_t edge_count() const noexcept { return arrows_.size(); }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>(cell_ * cell_ / 8); }
    const std::vector<bool>& arrows() const noexcept { return arrows_; }

    bool down(std::size_t e) const { return arrows_.at(e); }
    void set_down(std::size_t e, bool v) { arrows_.at(e) = v; }

    static bool anti_diagonal(int bi, int bj) { return (bi + bj) % 2 == 0; }

    std::pair<int, int> block_of(std::size_t e) const {
        return {static_cast<int>(e) / half(), static_cast<int>(e) % half()};
    }

    /// Upper and lower node of edge e, reduced to the torus.
    std::pair<Cell, Cell> endpoints(std::size_t e) const {
        const auto [bi, bj] = block_of(e);
        Cell up, lo;
        if (anti_diagonal(bi, bj)) {
            up = {2 * bi, 2 * bj + 2};
            lo = {2 * bi + 2, 2 * bj};
        } else {
            up = {2 * bi, 2 * bj};
            lo = {2 * bi + 2, 2 * bj + 2};
        }
        return {wrap(up), wrap(lo)};
    }

    Cell head(std::size_t e) const {
        const auto [up, lo] = endpoints(e);
        return down(e) ? lo : up;
    }

    Cell tail(std::size_t e) const {
        const auto [up, lo] = endpoints(e);
        return down(e) ? up : lo;
    }

    /// Node ids follow raster order of their corner positions.
    std::vector<Cell> nodes() const {
        std::vector<Cell> out;
        for (int p = 0; p < half(); ++p)
            for (int q = 0; q < half(); ++q)
                if ((p + q) % 2 == 1)
                    out.push_back({2 * p, 2 * q});
        return out;
    }

    /// Edges incident to a node (with multiplicity on small tori).
    std::vector<std::size_t> incident(const Cell& node) const {
        std::vector<std::size_t> out;
        const Cell n = wrap(node);
        for (std::size_t e = 0; e < edge_count(); ++e) {
            const auto [up, lo] = endpoints(e);
            if (up == n)
                out.push_back(e);
            if (lo == n)
                out.push_back(e);
        }
        return out;
    }

    friend bool operator==(const IceGraph&, const IceGraph&) = default;

private:
    Cell wrap(const Cell& c) const { return {wrap_index(c.row, cell_), wrap_index(c.col, cell_)}; }

    int cell_ = 0;
    std::vector<bool> arrows_;
};

/// True iff every node has two incoming and two outgoing arrows.
inline bool icegraph_validate(const IceGraph& g) {
    const int k = g.cell();
    std::vector<int> in(static_cast<std::size_t>(k * k), 0), out(in.size(), 0);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const Cell h = g.head(e), t = g.tail(e);
        ++in[static_cast<std::size_t>(h.row * k + h.col)];
        ++out[static_cast<std::size_t>(t.row * k + t.col)];
    }
    for (const Cell& n : g.nodes()) {
        const auto i = static_cast<std::size_t>(n.row * k + n.col);
        if (in[i] != 2 || out[i] != 2)
            return false;
    }
    return true;
}

namespace detail {

struct TPlacement {
    Cell center;
    std::array<Cell, 2> off;
    std::array<Cell, 2> protrusion; // canonical first, then the alternative
};

inline TPlacement t_placement(const IceGraph& g, std::size_t e) {
    const auto [bi, bj] = g.block_of(e);
    const bool dn = g.down(e);
    TPlacement t;
    int dr = 0, dc = 0;
    if (IceGraph::anti_diagonal(bi, bj)) {
        t.center = dn ? Cell{2 * bi + 1, 2 * bj} : Cell{2 * bi, 2 * bj + 1};
        t.off = {Cell{2 * bi, 2 * bj}, Cell{2 * bi + 1, 2 * bj + 1}};
        dr = dn ? 1 : -1;
        dc = -dr;
    } else {
        t.center = dn ? Cell{2 * bi + 1, 2 * bj + 1} : Cell{2 * bi, 2 * bj};
        t.off = {Cell{2 * bi, 2 * bj + 1}, Cell{2 * bi + 1, 2 * bj}};
        dr = dn ? 1 : -1;
        dc = dr;
    }
    // "clockwise" component first
    const Cell vertical{t.center.row + dr, t.center.col};
    const Cell horizontal{t.center.row, t.center.col + dc};
    t.protrusion = dr == dc ? std::array{vertical, horizontal} : std::array{horizontal, vertical};
    return t;
}

} // namespace detail

/// Converts a balanced ice graph into its T-tetromino tiling. Protrusions
/// are chosen by depth-first search over edges in raster order, trying the
/// clockwise component of each arrow first; the first exact cover found is
/// returned, which makes the mapping deterministic.
inline SensorLayout icegraph_to_layout(const IceGraph& g, std::string id = {}) {
    if (!icegraph_validate(g))
        throw PreconditionError("icegraph_to_layout: ice graph is not balanced");
    const int k = g.cell();
    const std::size_t n = g.edge_count();
    auto idx = [k](const Cell& c) {
        return static_cast<std::size_t>(wrap_index(c.row, k) * k + wrap_index(c.col, k));
    };

    std::vector<detail::TPlacement> place(n);
    std::vector<char> used(static_cast<std::size_t>(k * k), 0);
    for (std::size_t e = 0; e < n; ++e) {
        place[e] = detail::t_placement(g, e);
        for (const Cell& c : {place[e].center, place[e].off[0], place[e].off[1]}) {
            if (used[idx(c)])
                throw PreconditionError("icegraph_to_layout: T bodies overlap");
            used[idx(c)] = 1;
        }
    }

    std::vector<int> choice(n, -1);
    std::size_t e = 0;
    while (e < n) {
        if (choice[e] >= 0)
            used[idx(place[e].protrusion[static_cast<std::size_t>(choice[e])])] = 0;
        int next = choice[e] + 1;
        while (next < 2 && used[idx(place[e].protrusion[static_cast<std::size_t>(next)])])
            ++next;
        if (next < 2) {
            choice[e] = next;
            used[idx(place[e].protrusion[static_cast<std::size_t>(next)])] = 1;
            ++e;
        } else {
            choice[e] = -1;
            if (e == 0)
                throw PreconditionError("icegraph_to_layout: no exact cover for this graph");
            --e;
        }
    }

    std::vector<PixelGroup> groups;
    groups.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = place[i];
        const Cell p = t.protrusion[static_cast<std::size_t>(choice[i])];
        PixelGroup grp;
        grp.cells = {t.center, t.off[0], t.off[1], p};
        for (auto& c : grp.cells)
            c = Cell{wrap_index(c.row, k), wrap_index(c.col, k)};
        groups.push_back(grp);
    }
    return SensorLayout(k, ShapeClass::t_only, std::move(groups), std::move(id));
}

/// Reads the arrow assignment back from a T-only tiling: each lattice block
/// must hold a T centered on one of its diagonal cells and containing both
/// off-diagonal cells. Empty when the layout is not of that form.
inline std::optional<IceGraph> layout_to_icegraph(const SensorLayout& layout) {
    const int k = layout.cell();
    if (layout.shape() != ShapeClass::t_only || k < 4 || k % 4 != 0 || !validate_layout(layout).ok())
        return std::nullopt;

    // T center of every group, keyed by torus position
    std::vector<int> center_group(static_cast<std::size_t>(k * k), -1);
    for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
        const auto planar = unwrap_group(layout.groups()[gi], k);
        const auto deg = internal_degrees(*planar);
        for (std::size_t j = 0; j < 4; ++j)
            if (deg[j] == 3) {
                const Cell& c = layout.groups()[gi].cells[j];
                center_group[static_cast<std::size_t>(c.row * k + c.col)] = static_cast<int>(gi);
            }
    }

    IceGraph g(k);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        bool found = false;
        for (bool dn : {false, true}) {
            g.set_down(e, dn);
            const auto t = detail::t_placement(g, e);
            const int gi = center_group[static_cast<std::size_t>(t.center.row * k + t.center.col)];
            if (gi < 0)
                continue;
            const auto& cells = layout.groups()[static_cast<std::size_t>(gi)].cells;
            auto has = [&](const Cell& c) {
                const Cell w{wrap_index(c.row, k), wrap_index(c.col, k)};
                return std::find(cells.begin(), cells.end(), w) != cells.end();
            };
            if (has(t.off[0]) && has(t.off[1])) {
                found = true;
                break;
            }
        }
        if (!found)
            return std::nullopt;
    }
    return g;
}

/// Ice graph of the pinwheel cell returned by layout_t4x4().
inline IceGraph icegraph_t4x4() { return IceGraph(4, {false, true, false, true}); }

/// Draws uniformly random arrow assignments from a seeded 64-bit Mersenne
/// twister until one is balanced, then converts it to a tiling.
inline SensorLayout generate_geared(int cell, std::uint64_t seed, std::uint64_t max_tries) {
    if (cell != 4 && cell != 8)
        throw UnsupportedError("unsupported cell size " + std::to_string(cell) +
                               " (geared generation supports 4 and 8)");
    if (max_tries == 0)
        throw ParameterError("generate_geared: max_tries must be positive");
    std::mt19937_64 rng(seed);
    const std::size_t n = IceGraph::edge_count_for(cell);
    for (std::uint64_t t = 1; t <= max_tries; ++t) {
        const std::uint64_t raw = rng();
        const std::uint64_t mask = n >= 64 ? raw : (raw & ((std::uint64_t{1} << n) - 1));
        const IceGraph g = IceGraph::from_mask(cell, mask);
        if (icegraph_validate(g))
            return icegraph_to_layout(g, "geared" + std::to_string(cell) + "x" +
                                             std::to_string(cell));
    }
    throw SearchFailure("no balanced ice graph for cell " + std::to_string(cell) + " after " +
                            std::to_string(max_tries) + " tries",
                        max_tries);
}

// ---------------------------------------------------------------------------
// Built-in layouts

inline constexpr std::uint64_t geared8x8_seed = 1;
inline constexpr std::uint64_t geared8x8_tries = std::uint64_t{1} << 17;

inline SensorLayout layout_geared8x8() {
    static const SensorLayout cached = generate_geared(8, geared8x8_seed, geared8x8_tries);
    return cached;
}

inline const std::vector<std::string>& builtin_layout_ids() {
    static const std::vector<std::string> ids = {"square2x2", "t4x4", "galdo6x6", "geared8x8"};
    return ids;
}

inline std::optional<SensorLayout> builtin_layout(const std::string& id) {
    if (id == "square2x2")
        return layout_square2x2();
    if (id == "t4x4")
        return layout_t4x4();
    if (id == "galdo6x6")
        return layout_galdo6x6();
    if (id == "geared8x8")
        return layout_geared8x8();
    return std::nullopt;
}

/// Built-in id or path to a layout file.
inline SensorLayout resolve_layout(const std::string& id_or_path) {
    if (auto b = builtin_layout(id_or_path))
        return *b;
    return load_layout(id_or_path);
}

} // namespace tetropix
