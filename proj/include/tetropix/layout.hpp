#pragma once

// Periodic sensor layouts: a k x k cell on a torus partitioned into k^2/4
// pixel groups of four high-resolution pixels each.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace tetropix {

struct Cell {
    int row = 0;
    int col = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline int wrap_index(int v, int n) {
    const int m = v % n;
    return m < 0 ? m + n : m;
}

enum class ShapeClass { square2x2, t_only, tlz_mixed };

inline std::string to_string(ShapeClass s) {
    switch (s) {
    case ShapeClass::square2x2: return "square2x2";
    case ShapeClass::t_only: return "T";
    case ShapeClass::tlz_mixed: return "TLZ";
    }
    return "?";
}

inline ShapeClass parse_shape_class(const std::string& s) {
    if (s == "square2x2")
        return ShapeClass::square2x2;
    if (s == "T")
        return ShapeClass::t_only;
    if (s == "TLZ")
        return ShapeClass::tlz_mixed;
    throw FormatError("unknown shape class '" + s + "' (expected square2x2, T or TLZ)");
}

/// Free tetromino kinds; L covers its mirror J and Z covers S.
enum class Tetromino { I, O, T, L, Z, invalid };

inline char to_char(Tetromino t) {
    switch (t) {
    case Tetromino::I: return 'I';
    case Tetromino::O: return 'O';
    case Tetromino::T: return 'T';
    case Tetromino::L: return 'L';
    case Tetromino::Z: return 'Z';
    case Tetromino::invalid: return '?';
    }
    return '?';
}

using Shape4 = std::array<Cell, 4>;

/// Four pixels of one binned sensor pixel, stored modulo the cell size.
struct PixelGroup {
    Shape4 cells;
};

namespace detail {

inline Shape4 normalized(Shape4 s) {
    int r0 = s[0].row, c0 = s[0].col;
    for (const auto& c : s) {
        r0 = std::min(r0, c.row);
        c0 = std::min(c0, c.col);
    }
    for (auto& c : s) {
        c.row -= r0;
        c.col -= c0;
    }
    std::sort(s.begin(), s.end());
    return s;
}

/// All rotations and reflections of a shape, normalized.
inline std::vector<Shape4> orientations(const Shape4& base) {
    std::vector<Shape4> out;
    for (int mirror = 0; mirror < 2; ++mirror) {
        Shape4 s = base;
        if (mirror)
            for (auto& c : s)
                c.col = -c.col;
        for (int rot = 0; rot < 4; ++rot) {
            const Shape4 n = normalized(s);
            if (std::find(out.begin(), out.end(), n) == out.end())
                out.push_back(n);
            for (auto& c : s)
                c = Cell{c.col, -c.row};
        }
    }
    return out;
}

struct ShapeTable {
    std::vector<std::pair<Tetromino, Shape4>> entries;
    ShapeTable() {
        const std::pair<Tetromino, Shape4> bases[] = {
            {Tetromino::I, {{{0, 0}, {0, 1}, {0, 2}, {0, 3}}}},
            {Tetromino::O, {{{0, 0}, {0, 1}, {1, 0}, {1, 1}}}},
            {Tetromino::T, {{{0, 0}, {0, 1}, {0, 2}, {1, 1}}}},
            {Tetromino::L, {{{0, 0}, {1, 0}, {2, 0}, {2, 1}}}},
            {Tetromino::Z, {{{0, 0}, {0, 1}, {1, 1}, {1, 2}}}},
        };
        for (const auto& [kind, shape] : bases)
            for (const auto& o : orientations(shape))
                entries.emplace_back(kind, o);
    }
};

inline bool adjacent(const Cell& a, const Cell& b) {
    const int dr = std::abs(a.row - b.row), dc = std::abs(a.col - b.col);
    return dr + dc == 1;
}

} // namespace detail

/// Classifies four planar (already unwrapped) cells.
inline Tetromino classify_shape(const Shape4& cells) {
    static const detail::ShapeTable table;
    const Shape4 n = detail::normalized(cells);
    for (const auto& [kind, shape] : table.entries)
        if (shape == n)
            return kind;
    return Tetromino::invalid;
}

/// Number of group-internal 4-neighbours of each cell.
inline std::array<int, 4> internal_degrees(const Shape4& cells) {
    std::array<int, 4> deg{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (i != j && detail::adjacent(cells[i], cells[j]))
                ++deg[i];
    return deg;
}

/// T predicate: exactly one cell with three internal neighbours.
inline bool is_t_shape(const Shape4& cells) {
    const auto deg = internal_degrees(cells);
    return std::count(deg.begin(), deg.end(), 3) == 1;
}

/// Planar representative of a group living on the k x k torus. The first
/// cell keeps its coordinates; the others are placed by walking torus
/// adjacencies, so coordinates may leave [0,k). Empty when the group has
/// repeated cells (mod k) or is not edge-connected on the torus.
inline std::optional<Shape4> unwrap_group(const PixelGroup& g, int k) {
    Shape4 mod;
    for (std::size_t i = 0; i < 4; ++i)
        mod[i] = Cell{wrap_index(g.cells[i].row, k), wrap_index(g.cells[i].col, k)};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            if (mod[i] == mod[j])
                return std::nullopt;

    Shape4 out{};
    std::array<bool, 4> reached{};
    out[0] = g.cells[0];
    reached[0] = true;
    std::array<std::size_t, 4> queue{0, 0, 0, 0};
    std::size_t head = 0, tail = 1;
    static constexpr int dirs[4][2] = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}};
    while (head < tail) {
        const std::size_t cur = queue[head++];
        for (const auto& d : dirs) {
            const Cell next{out[cur].row + d[0], out[cur].col + d[1]};
            const Cell next_mod{wrap_index(next.row, k), wrap_index(next.col, k)};
            for (std::size_t j = 0; j < 4; ++j) {
                if (!reached[j] && mod[j] == next_mod) {
                    reached[j] = true;
                    out[j] = next;
                    queue[tail++] = j;
                }
            }
        }
    }
    if (tail != 4)
        return std::nullopt;
    return out;
}

class SensorLayout {
public:
    SensorLayout() = default;
    SensorLayout(int cell, ShapeClass shape, std::vector<PixelGroup> groups, std::string id = {})
        : cell_(cell), shape_(shape), groups_(std::move(groups)), id_(std::move(id)) {}

    int cell() const noexcept { return cell_; }
    ShapeClass shape() const noexcept { return shape_; }
    const std::vector<PixelGroup>& groups() const noexcept { return groups_; }
    std::size_t group_count() const noexcept { return groups_.size(); }
    const std::string& id() const noexcept { return id_; }

    SensorLayout with_id(std::string id) const {
        SensorLayout copy = *this;
        copy.id_ = std::move(id);
        return copy;
    }

    /// Groups as sorted cell lists (mod cell), themselves sorted; equal for
    /// layouts that describe the same partition.
    std::vector<Shape4> canonical_groups() const {
        std::vector<Shape4> out;
        out.reserve(groups_.size());
        for (const auto& g : groups_) {
            Shape4 s;
            for (std::size_t i = 0; i < 4; ++i)
                s[i] = Cell{wrap_index(g.cells[i].row, cell_), wrap_index(g.cells[i].col, cell_)};
            std::sort(s.begin(), s.end());
            out.push_back(s);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Same cell, shape class and partition; group order and id are ignored.
    friend bool operator==(const SensorLayout& a, const SensorLayout& b) {
        return a.cell_ == b.cell_ && a.shape_ == b.shape_ &&
               a.canonical_groups() == b.canonical_groups();
    }

private:
    int cell_ = 0;
    ShapeClass shape_ = ShapeClass::t_only;
    std::vector<PixelGroup> groups_;
    std::string id_;
};

// ---------------------------------------------------------------------------
// Validation

struct GroupCheck {
    std::size_t index = 0;
    Tetromino kind = Tetromino::invalid;
    bool connected = false;
    bool shape_ok = false;
};

struct ValidationReport {
    int cell = 0;
    ShapeClass shape = ShapeClass::t_only;
    bool cell_ok = false;
    bool cells_in_range = false;
    bool group_count_ok = false;
    bool exact_cover = false;
    bool shapes_ok = false;
    std::optional<Cell> first_bad_cell; // first position violating range or exact cover
    std::vector<GroupCheck> groups;
    std::vector<std::string> failures;

    bool ok() const noexcept { return failures.empty(); }

    std::string summary() const {
        std::ostringstream os;
        os << "cell " << cell << ", shape " << to_string(shape) << ", " << groups.size()
           << " groups\n";
        os << "  group count = cell^2/4 : " << (group_count_ok ? "pass" : "FAIL") << '\n';
        os << "  cells in range         : " << (cells_in_range ? "pass" : "FAIL") << '\n';
        os << "  exact cover            : " << (exact_cover ? "pass" : "FAIL") << '\n';
        os << "  shape class            : " << (shapes_ok ? "pass" : "FAIL") << '\n';
        os << "  group kinds            :";
        for (const auto& g : groups)
            os << ' ' << to_char(g.kind);
        os << '\n';
        for (const auto& f : failures)
            os << "  error: " << f << '\n';
        return os.str();
    }
};

inline bool kind_allowed(ShapeClass s, Tetromino t) {
    switch (s) {
    case ShapeClass::square2x2: return t == Tetromino::O;
    case ShapeClass::t_only: return t == Tetromino::T;
    case ShapeClass::tlz_mixed:
        return t == Tetromino::T || t == Tetromino::L || t == Tetromino::Z;
    }
    return false;
}

inline std::string cell_str(const Cell& c) {
    return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

/// Checks group count, coordinate range, exact cover of the torus cell and
/// the per-group shape predicate of the declared class. Never throws.
inline ValidationReport validate_layout(const SensorLayout& layout) {
    ValidationReport rep;
    const int k = layout.cell();
    rep.cell = k;
    rep.shape = layout.shape();
    rep.cell_ok = k >= 2 && (k * k) % 4 == 0;
    if (!rep.cell_ok) {
        rep.failures.push_back("cell size " + std::to_string(k) +
                               " is not positive with cell^2 divisible by 4");
        return rep;
    }

    rep.group_count_ok = layout.group_count() == static_cast<std::size_t>(k * k / 4);
    if (!rep.group_count_ok)
        rep.failures.push_back("expected " + std::to_string(k * k / 4) + " groups, found " +
                               std::to_string(layout.group_count()));

    rep.cells_in_range = true;
    std::vector<int> cover(static_cast<std::size_t>(k * k), 0);
    for (const auto& g : layout.groups()) {
        for (const auto& c : g.cells) {
            if (c.row < 0 || c.row >= k || c.col < 0 || c.col >= k) {
                if (rep.cells_in_range)
                    rep.failures.push_back("cell " + cell_str(c) + " outside [0," +
                                           std::to_string(k) + ")");
                if (!rep.first_bad_cell)
                    rep.first_bad_cell = c;
                rep.cells_in_range = false;
                continue;
            }
            ++cover[static_cast<std::size_t>(c.row * k + c.col)];
        }
    }

    rep.exact_cover = rep.cells_in_range;
    for (int r = 0; r < k && rep.cells_in_range; ++r) {
        for (int c = 0; c < k; ++c) {
            const int n = cover[static_cast<std::size_t>(r * k + c)];
            if (n != 1) {
                if (rep.exact_cover) {
                    rep.failures.push_back("position " + cell_str({r, c}) + " covered " +
                                           std::to_string(n) + " times");
                    if (!rep.first_bad_cell)
                        rep.first_bad_cell = Cell{r, c};
                }
                rep.exact_cover = false;
            }
        }
    }

    rep.shapes_ok = true;
    for (std::size_t i = 0; i < layout.groups().size(); ++i) {
        GroupCheck gc;
        gc.index = i;
        const auto planar = unwrap_group(layout.groups()[i], k);
        gc.connected = planar.has_value();
        if (planar)
            gc.kind = classify_shape(*planar);
        gc.shape_ok = gc.connected && kind_allowed(layout.shape(), gc.kind);
        if (!gc.shape_ok) {
            if (rep.shapes_ok)
                rep.failures.push_back("group " + std::to_string(i) + " starting at " +
                                       cell_str(layout.groups()[i].cells[0]) + " is " +
                                       (gc.connected ? std::string("a ") + to_char(gc.kind) +
                                                           " shape, not allowed in class " +
                                                           to_string(layout.shape())
                                                     : std::string("not edge-connected")));
            rep.shapes_ok = false;
        }
        rep.groups.push_back(gc);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Layout file format
//
//   cell <k>
//   shape <square2x2|T|TLZ>
//   group r0,c0 r1,c1 r2,c2 r3,c3
//   ...
// '#' starts a comment.

inline SensorLayout parse_layout(std::istream& in, std::string id = {}) {
    int cell = 0;
    std::optional<ShapeClass> shape;
    std::vector<PixelGroup> groups;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) -> FormatError {
        return FormatError("layout line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key))
            continue;
        if (key == "cell") {
            if (cell != 0)
                throw fail("duplicate 'cell'");
            if (!(ls >> cell) || cell <= 0)
                throw fail("'cell' needs a positive integer");
        } else if (key == "shape") {
            if (cell == 0)
                throw fail("'shape' before 'cell'");
            std::string s;
            if (!(ls >> s))
                throw fail("'shape' needs a value");
            shape = parse_shape_class(s);
        } else if (key == "group") {
            if (cell == 0 || !shape)
                throw fail("'group' before 'cell' and 'shape'");
            PixelGroup g;
            for (auto& c : g.cells) {
                std::string tok;
                if (!(ls >> tok))
                    throw fail("group needs four 'row,col' pairs");
                const auto comma = tok.find(',');
                if (comma == std::string::npos)
                    throw fail("malformed pair '" + tok + "'");
                try {
                    std::size_t used_r = 0, used_c = 0;
                    const std::string rs = tok.substr(0, comma), cs = tok.substr(comma + 1);
                    c.row = std::stoi(rs, &used_r);
                    c.col = std::stoi(cs, &used_c);
                    if (used_r != rs.size() || used_c != cs.size())
                        throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    throw fail("malformed pair '" + tok + "'");
                }
            }
            std::string extra;
            if (ls >> extra)
                throw fail("unexpected token '" + extra + "'");
            groups.push_back(g);
        } else {
            throw fail("unknown directive '" + key + "'");
        }
        std::string extra;
        if (key != "group" && (ls >> extra))
            throw fail("unexpected token '" + extra + "'");
    }
    if (cell == 0)
        throw FormatError("layout: missing 'cell' line");
    if (!shape)
        throw FormatError("layout: missing 'shape' line");
    return SensorLayout(cell, *shape, std::move(groups), std::move(id));
}

inline SensorLayout parse_layout(const std::string& text, std::string id = {}) {
    std::istringstream in(text);
    return parse_layout(in, std::move(id));
}

/// Text form with groups sorted by (min row, min col).
inline std::string format_layout(const SensorLayout& layout) {
    std::vector<PixelGroup> groups = layout.groups();
    auto key = [](const PixelGroup& g) {
        int r = g.cells[0].row, c = g.cells[0].col;
        for (const auto& x : g.cells) {
            r = std::min(r, x.row);
            c = std::min(c, x.col);
        }
        return std::pair{r, c};
    };
    std::stable_sort(groups.begin(), groups.end(),
                     [&](const PixelGroup& a, const PixelGroup& b) { return key(a) < key(b); });
    std::ostringstream os;
    if (!layout.id().empty())
        os << "# " << layout.id() << '\n';
    os << "cell " << layout.cell() << '\n';
    os << "shape " << to_string(layout.shape()) << '\n';
    for (const auto& g : groups) {
        os << "group";
        for (const auto& c : g.cells)
            os << ' ' << c.row << ',' << c.col;
        os << '\n';
    }
    return os.str();
}

/// Parses and validates a layout file; the id is the file stem.
inline SensorLayout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open layout '" + path.string() + "'");
    SensorLayout layout = parse_layout(in, path.stem().string());
    const auto rep = validate_layout(layout);
    if (!rep.ok()) {
        std::string msg = "layout '" + path.string() + "' is invalid";
        if (rep.first_bad_cell)
            msg += " at cell " + cell_str(*rep.first_bad_cell);
        msg += ": " + rep.failures.front();
        throw ValidationError(msg);
    }
    return layout;
}

inline void save_layout(const SensorLayout& layout, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write layout '" + path.string() + "'");
    out << format_layout(layout);
    if (!out)
        throw IoError("error while writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Fixed layouts

inline SensorLayout layout_square2x2() {
    return SensorLayout(2, ShapeClass::square2x2, {PixelGroup{{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}}}},
                        "square2x2");
}

/// Four T-tetrominoes in a pinwheel around the cell center. Chirality: the
/// bar of the first group runs along the top row and each following group is
/// the previous one rotated a quarter turn clockwise.
///
///   0 0 0 1
///   3 0 1 1
///   3 3 2 1
///   3 2 2 2
inline SensorLayout layout_t4x4() {
    return SensorLayout(4, ShapeClass::t_only,
                        {
                            PixelGroup{{{{0, 0}, {0, 1}, {0, 2}, {1, 1}}}},
                            PixelGroup{{{{0, 3}, {1, 3}, {2, 3}, {1, 2}}}},
                            PixelGroup{{{{3, 1}, {3, 2}, {3, 3}, {2, 2}}}},
                            PixelGroup{{{{1, 0}, {2, 0}, {3, 0}, {2, 1}}}},
                        },
                        "t4x4");
}

/// 6x6 cell mixing T-, L- and Z-tetrominoes (nine pixels).
///
///   a a b c c c
///   a b b b d c
///   a e e d d f
///   e e g g d f
///   h g g i f f
///   h h h i i i
inline constexpr const char* galdo6x6_text = R"(# galdo6x6
cell 6
shape TLZ
group 0,0 0,1 1,0 2,0
group 0,2 1,1 1,2 1,3
group 0,3 0,4 0,5 1,5
group 1,4 2,3 2,4 3,4
group 2,1 2,2 3,0 3,1
group 2,5 3,5 4,4 4,5
group 3,2 3,3 4,1 4,2
group 4,0 5,0 5,1 5,2
group 4,3 5,3 5,4 5,5
)";

inline SensorLayout layout_galdo6x6() {
    return parse_layout(galdo6x6_text, "galdo6x6");
}

} // namespace tetropix
