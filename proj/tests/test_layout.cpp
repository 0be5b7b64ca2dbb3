#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "tetropix/icegraph.hpp"
#include "tetropix/layout.hpp"

using namespace tetropix;
namespace fs = std::filesystem;

namespace {

fs::path layout_file(const std::string& name) {
    return fs::path(TETROPIX_DATA_DIR) / "layouts" / name;
}

fs::path temp_path(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "tetropix_tests";
    fs::create_directories(dir);
    return dir / name;
}

/// Counts how often each torus position is covered.
std::vector<int> coverage(const SensorLayout& l) {
    const int k = l.cell();
    std::vector<int> cnt(static_cast<std::size_t>(k * k), 0);
    for (const auto& g : l.groups())
        for (const auto& c : g.cells)
            ++cnt[static_cast<std::size_t>(wrap_index(c.row, k) * k + wrap_index(c.col, k))];
    return cnt;
}

} // namespace

TEST(Classify, FreeTetrominoes) {
    EXPECT_EQ(classify_shape({{{0, 0}, {0, 1}, {0, 2}, {0, 3}}}), Tetromino::I);
    EXPECT_EQ(classify_shape({{{0, 0}, {0, 1}, {1, 0}, {1, 1}}}), Tetromino::O);
    EXPECT_EQ(classify_shape({{{0, 0}, {0, 1}, {0, 2}, {1, 1}}}), Tetromino::T);
    EXPECT_EQ(classify_shape({{{0, 1}, {1, 0}, {1, 1}, {2, 1}}}), Tetromino::T);
    EXPECT_EQ(classify_shape({{{0, 0}, {1, 0}, {2, 0}, {2, 1}}}), Tetromino::L);
    EXPECT_EQ(classify_shape({{{0, 1}, {1, 1}, {2, 1}, {2, 0}}}), Tetromino::L); // J
    EXPECT_EQ(classify_shape({{{0, 0}, {0, 1}, {1, 1}, {1, 2}}}), Tetromino::Z);
    EXPECT_EQ(classify_shape({{{0, 1}, {0, 2}, {1, 0}, {1, 1}}}), Tetromino::Z); // S
    EXPECT_EQ(classify_shape({{{0, 0}, {0, 2}, {1, 1}, {2, 2}}}), Tetromino::invalid);
}

TEST(Classify, TPredicateAgreesWithTable) {
    EXPECT_TRUE(is_t_shape({{{0, 0}, {0, 1}, {0, 2}, {1, 1}}}));
    EXPECT_FALSE(is_t_shape({{{0, 0}, {0, 1}, {1, 0}, {1, 1}}}));
    EXPECT_FALSE(is_t_shape({{{0, 0}, {1, 0}, {2, 0}, {2, 1}}}));
}

TEST(UnwrapGroup, FollowsTorusAdjacency) {
    const PixelGroup g{{{{0, 7}, {0, 0}, {0, 1}, {1, 0}}}};
    const auto p = unwrap_group(g, 8);
    ASSERT_TRUE(p);
    EXPECT_EQ(classify_shape(*p), Tetromino::T);
    EXPECT_FALSE(unwrap_group(PixelGroup{{{{0, 0}, {0, 1}, {0, 0}, {1, 1}}}}, 4));
    EXPECT_FALSE(unwrap_group(PixelGroup{{{{0, 0}, {0, 1}, {2, 2}, {2, 3}}}}, 6));
}

TEST(Builtins, Square2x2) {
    const auto l = layout_square2x2();
    EXPECT_EQ(l.cell(), 2);
    EXPECT_EQ(l.group_count(), 1u);
    EXPECT_EQ(l.shape(), ShapeClass::square2x2);
    EXPECT_TRUE(validate_layout(l).ok());
}

TEST(Builtins, T4x4Pinwheel) {
    const auto l = layout_t4x4();
    EXPECT_EQ(l.cell(), 4);
    EXPECT_EQ(l.group_count(), 4u);
    const auto rep = validate_layout(l);
    EXPECT_TRUE(rep.ok()) << rep.summary();
    for (const auto& g : l.groups())
        EXPECT_TRUE(is_t_shape(*unwrap_group(g, 4)));
}

TEST(Builtins, T4x4IsOneOfTheTwoPlanarPinwheels) {
    // Exact covers of the (non-periodic) 4x4 square by four T-tetrominoes.
    std::vector<Shape4> placements;
    const Shape4 base{{{0, 0}, {0, 1}, {0, 2}, {1, 1}}};
    for (const auto& o : detail::orientations(base))
        for (int dr = 0; dr < 4; ++dr)
            for (int dc = 0; dc < 4; ++dc) {
                Shape4 s = o;
                bool inside = true;
                for (auto& c : s) {
                    c.row += dr;
                    c.col += dc;
                    inside &= c.row < 4 && c.col < 4;
                }
                if (inside)
                    placements.push_back(s);
            }
    std::vector<std::vector<Shape4>> covers;
    const std::size_t n = placements.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c)
                for (std::size_t d = c + 1; d < n; ++d) {
                    std::set<Cell> u;
                    for (auto i : {a, b, c, d})
                        u.insert(placements[i].begin(), placements[i].end());
                    if (u.size() == 16)
                        covers.push_back({placements[a], placements[b], placements[c], placements[d]});
                }
    ASSERT_EQ(covers.size(), 2u);
    bool found = false;
    for (const auto& cov : covers) {
        std::vector<PixelGroup> groups;
        for (const auto& s : cov)
            groups.push_back(PixelGroup{s});
        found |= SensorLayout(4, ShapeClass::t_only, groups) == layout_t4x4();
    }
    EXPECT_TRUE(found);
}

TEST(Builtins, Galdo6x6FileAndEmbeddedAgree) {
    const auto file = load_layout(layout_file("galdo6x6.layout"));
    EXPECT_EQ(file.cell(), 6);
    EXPECT_EQ(file.group_count(), 9u);
    EXPECT_EQ(file.shape(), ShapeClass::tlz_mixed);
    EXPECT_EQ(file, layout_galdo6x6());
    const auto rep = validate_layout(file);
    std::set<Tetromino> kinds;
    for (const auto& g : rep.groups)
        kinds.insert(g.kind);
    EXPECT_TRUE(kinds.count(Tetromino::T) && kinds.count(Tetromino::L) && kinds.count(Tetromino::Z));
}

TEST(Builtins, ShippedFilesRoundTrip) {
    for (const auto& id : builtin_layout_ids()) {
        const auto file = load_layout(layout_file(id + ".layout"));
        EXPECT_EQ(file, *builtin_layout(id)) << id;
        EXPECT_EQ(file.id(), id);
    }
}

TEST(Validate, SquareGroupUnderTClassFails) {
    const SensorLayout l(2, ShapeClass::t_only, {PixelGroup{{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}}}});
    const auto rep = validate_layout(l);
    EXPECT_FALSE(rep.ok());
    EXPECT_TRUE(rep.exact_cover);
    EXPECT_FALSE(rep.shapes_ok);
    EXPECT_EQ(rep.groups[0].kind, Tetromino::O);
}

TEST(Validate, OverlapNamesFirstBadCell) {
    auto groups = layout_t4x4().groups();
    groups[1].cells[3] = {1, 1}; // steals a cell of group 0, leaves (1,2) uncovered
    const auto rep = validate_layout(SensorLayout(4, ShapeClass::t_only, groups));
    EXPECT_FALSE(rep.exact_cover);
    ASSERT_TRUE(rep.first_bad_cell);
    EXPECT_EQ(*rep.first_bad_cell, (Cell{1, 1}));
}

TEST(Validate, GroupCountAndRange) {
    auto groups = layout_t4x4().groups();
    groups.pop_back();
    EXPECT_FALSE(validate_layout(SensorLayout(4, ShapeClass::t_only, groups)).group_count_ok);
    auto g2 = layout_t4x4().groups();
    g2[0].cells[0] = {0, 4};
    const auto rep = validate_layout(SensorLayout(4, ShapeClass::t_only, g2));
    EXPECT_FALSE(rep.cells_in_range);
    EXPECT_EQ(*rep.first_bad_cell, (Cell{0, 4}));
    EXPECT_FALSE(validate_layout(SensorLayout(3, ShapeClass::t_only, {})).ok());
}

TEST(Validate, TlzClassRejectsIAndO) {
    const SensorLayout l(4, ShapeClass::tlz_mixed,
                         {PixelGroup{{{{0, 0}, {0, 1}, {0, 2}, {0, 3}}}},
                          PixelGroup{{{{1, 0}, {1, 1}, {1, 2}, {1, 3}}}},
                          PixelGroup{{{{2, 0}, {2, 1}, {3, 0}, {3, 1}}}},
                          PixelGroup{{{{2, 2}, {2, 3}, {3, 2}, {3, 3}}}}});
    const auto rep = validate_layout(l);
    EXPECT_TRUE(rep.exact_cover);
    EXPECT_FALSE(rep.shapes_ok);
}

TEST(Format, ParseAndWrite) {
    const std::string text = "# demo\ncell 4\nshape T\n"
                             "group 3,1 3,2 3,3 2,2\n"
                             "group 0,0 0,1 0,2 1,1  # first\n"
                             "group 1,0 2,0 3,0 2,1\n"
                             "group 0,3 1,3 2,3 1,2\n";
    const auto l = parse_layout(text, "demo");
    EXPECT_EQ(l, layout_t4x4());
    const auto out = format_layout(l);
    EXPECT_NE(out.find("cell 4\nshape T\ngroup 0,0 0,1 0,2 1,1\ngroup 0,3"), std::string::npos) << out;
    EXPECT_EQ(parse_layout(out), l);
}

TEST(Format, ParseErrors) {
    EXPECT_THROW(parse_layout("shape T\n"), FormatError);
    EXPECT_THROW(parse_layout("cell 4\n"), FormatError);
    EXPECT_THROW(parse_layout("cell 4\nshape Q\n"), FormatError);
    EXPECT_THROW(parse_layout("cell 4\nshape T\ngroup 0,0 0,1 0,2\n"), FormatError);
    EXPECT_THROW(parse_layout("cell 4\nshape T\ngroup 0,0 0,1 0,2 1;1\n"), FormatError);
    EXPECT_THROW(parse_layout("cell 4\nshape T\ngroup 0,0 0,1 0,2 1,1 2,2\n"), FormatError);
    EXPECT_THROW(parse_layout("cell 4\nshape T\nblob\n"), FormatError);
    EXPECT_THROW(parse_layout("cell x\n"), FormatError);
}

TEST(LoadLayout, OverlapIsValidationError) {
    const auto p = temp_path("overlap.layout");
    std::ofstream(p) << "cell 4\nshape T\n"
                        "group 0,0 0,1 0,2 1,1\ngroup 0,0 1,3 2,3 1,2\n"
                        "group 3,1 3,2 3,3 2,2\ngroup 1,0 2,0 3,0 2,1\n";
    try {
        load_layout(p);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("(0,0)"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_layout(temp_path("missing.layout")), IoError);
}

TEST(SaveLayout, RoundTrip) {
    const auto p = temp_path("t4x4_rt.layout");
    save_layout(layout_t4x4(), p);
    EXPECT_EQ(load_layout(p), layout_t4x4());
}

TEST(Equality, IgnoresOrderButNotContent) {
    auto g = layout_t4x4().groups();
    std::reverse(g.begin(), g.end());
    std::swap(g[0].cells[0], g[0].cells[2]);
    EXPECT_EQ(SensorLayout(4, ShapeClass::t_only, g), layout_t4x4());
    EXPECT_FALSE(SensorLayout(4, ShapeClass::tlz_mixed, g) == layout_t4x4());
}

TEST(Property, ExactCoverByCountingForAllBuiltins) {
    for (const auto& id : builtin_layout_ids()) {
        const auto l = *builtin_layout(id);
        EXPECT_EQ(l.group_count(), static_cast<std::size_t>(l.cell() * l.cell() / 4)) << id;
        for (int c : coverage(l))
            EXPECT_EQ(c, 1) << id;
    }
}
