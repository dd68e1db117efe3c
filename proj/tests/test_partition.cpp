#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "flowcast/partition.hpp"

using namespace flowcast;
using geom::Point;
using geom::Polygon;
namespace fs = std::filesystem;

namespace {

Zone square_zone(const std::string& id, double x0, double y0, double side, const std::string& level = "grid") {
  return Zone{id, Polygon{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}, level};
}

// 3x3 grid of unit squares, ids Q0..Q8 row-major.
SpatialPartition nine_grid() {
  std::vector<Zone> zones;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) zones.push_back(square_zone("Q" + std::to_string(r * 3 + c), c, r, 1.0));
  return SpatialPartition("grid", zones);
}

// Independent crossing-number ray caster (distinct formulation from the
// library's) for off-boundary points.
bool crossing_oracle(const Point& p, const Polygon& poly) {
  int crossings = 0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    Point a = poly[i], b = poly[(i + 1) % n];
    if ((a.y <= p.y && b.y > p.y) || (b.y <= p.y && a.y > p.y)) {
      double t = (p.y - a.y) / (b.y - a.y);
      if (a.x + t * (b.x - a.x) > p.x) ++crossings;
    }
  }
  return crossings % 2 == 1;
}

}  // namespace

TEST(Zone, ValidationRules) {
  EXPECT_NO_THROW(validate_zone(square_zone("ok", 0, 0, 1)));
  Zone two_vertices{"bad", Polygon{{0, 0}, {1, 1}}, "l"};
  EXPECT_THROW(validate_zone(two_vertices), SchemaError);
  Zone zero_area{"flat", Polygon{{0, 0}, {1, 0}, {2, 0}}, "l"};
  EXPECT_THROW(validate_zone(zero_area), SchemaError);
  Zone bowtie{"bow", Polygon{{0, 0}, {2, 2}, {2, 0}, {0, 2}}, "l"};
  EXPECT_THROW(validate_zone(bowtie), SchemaError);
  Zone no_id{"", Polygon{{0, 0}, {1, 0}, {0, 1}}, "l"};
  EXPECT_THROW(validate_zone(no_id), SchemaError);
}

TEST(Partition, ConstructionInvariants) {
  EXPECT_NO_THROW(nine_grid());
  std::vector<Zone> dup{square_zone("A", 0, 0, 1), square_zone("A", 5, 5, 1)};
  EXPECT_THROW(SpatialPartition("grid", dup), SchemaError);
  std::vector<Zone> mixed{square_zone("A", 0, 0, 1, "levelX"), square_zone("B", 5, 5, 1, "levelY")};
  EXPECT_THROW(SpatialPartition("levelX", mixed), SchemaError);
}

TEST(Partition, PointInZoneTrivial) {
  Zone unit = square_zone("U", 0, 0, 1);
  EXPECT_TRUE(point_in_zone({0.5, 0.5}, unit));
  EXPECT_FALSE(point_in_zone({2, 2}, unit));
}

TEST(Partition, RandomTwelveGonRayCastingOracle) {
  // Star-shaped random 12-gon (angles sorted, random radii) is always simple.
  Rng rng(555);
  for (int rep = 0; rep < 5; ++rep) {
    Polygon poly;
    for (int k = 0; k < 12; ++k) {
      double angle = (k + rng.uniform() * 0.8) * 2.0 * M_PI / 12.0;
      double radius = rng.uniform(0.5, 2.0);
      poly.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    }
    Zone z{"gon", poly, "l"};
    validate_zone(z);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
      Point p{rng.uniform(-2.2, 2.2), rng.uniform(-2.2, 2.2)};
      bool near_edge = false;
      for (size_t e = 0; e < poly.size() && !near_edge; ++e)
        near_edge = geom::point_on_segment(p, poly[e], poly[(e + 1) % poly.size()], 1e-9);
      if (near_edge) continue;
      ++checked;
      ASSERT_EQ(point_in_zone(p, z), crossing_oracle(p, poly)) << "rep " << rep << " point " << p.x << "," << p.y;
    }
    EXPECT_GT(checked, 9900);
  }
}

TEST(Partition, AssignBasicsAndTieBreak) {
  auto part = nine_grid();
  EXPECT_EQ(part.assign({1.5, 0.5}).value(), "Q1");
  EXPECT_EQ(part.assign({2.5, 2.5}).value(), "Q8");
  EXPECT_FALSE(part.assign({-0.5, 0.5}).has_value());
  EXPECT_FALSE(part.assign({3.5, 1.0}).has_value());
  // Shared edge between Q0 (x in [0,1]) and Q1 (x in [1,2]): smallest id wins.
  EXPECT_EQ(part.assign({1.0, 0.5}).value(), "Q0");
  // Four-corner point shared by Q0, Q1, Q3, Q4.
  EXPECT_EQ(part.assign({1.0, 1.0}).value(), "Q0");
  EXPECT_EQ(part.find("Q4")->zone_id, "Q4");
  EXPECT_EQ(part.find("missing"), nullptr);
}

TEST(Partition, BatchAssignMatchesScanOracle) {
  auto part = nine_grid();
  Rng rng(808);
  for (int i = 0; i < 10000; ++i) {
    Point p{rng.uniform(-0.5, 3.5), rng.uniform(-0.5, 3.5)};
    auto got = part.assign(p);
    // Oracle: scan all zones with point_in_zone, take smallest containing id.
    std::set<std::string> containing;
    for (const auto& z : part.zones())
      if (point_in_zone(p, z)) containing.insert(z.zone_id);
    if (containing.empty()) {
      EXPECT_FALSE(got.has_value());
    } else {
      EXPECT_EQ(got.value(), *containing.begin());
    }
  }
}

TEST(Partition, InteriorOverlapDetection) {
  // Disjoint zones: no overlap found.
  EXPECT_FALSE(find_interior_overlap(nine_grid(), 1).has_value());
  // Two clearly overlapping squares: found.
  std::vector<Zone> zones{square_zone("A", 0, 0, 2), square_zone("B", 1, 1, 2)};
  SpatialPartition bad("grid", zones);
  auto overlap = find_interior_overlap(bad, 1);
  ASSERT_TRUE(overlap.has_value());
  EXPECT_EQ(overlap->first, "A");
  EXPECT_EQ(overlap->second, "B");
}

TEST(HexGrid, SpecValidation) {
  HexGridSpec spec;
  spec.bounding_box = {0, 0, 10, 10};
  spec.circumradius_m = 1;
  EXPECT_NO_THROW(spec.validate());
  spec.circumradius_m = 0;
  EXPECT_THROW(spec.validate(), DomainError);
  spec.circumradius_m = 1;
  spec.bounding_box = {0, 0, 0, 10};
  EXPECT_THROW(spec.validate(), DomainError);
}

TEST(HexGrid, CellAreaAndDeterminism) {
  HexGridSpec spec;
  spec.circumradius_m = 1.0;
  spec.bounding_box = {0, 0, 10, 10};
  util::WarningSink sink;
  auto grid = generate_hex_grid(spec, sink);
  EXPECT_TRUE(sink.empty());
  EXPECT_GT(grid.size(), 30u);
  double expect_area = 3.0 * std::sqrt(3.0) / 2.0;
  for (const auto& z : grid.zones()) {
    EXPECT_NEAR(geom::polygon_area(z.boundary), expect_area, 1e-9);
    EXPECT_EQ(z.boundary.size(), 6u);
  }
  // Determinism: same spec, same cells.
  auto grid2 = generate_hex_grid(spec, sink);
  ASSERT_EQ(grid.size(), grid2.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(grid.zones()[i].zone_id, grid2.zones()[i].zone_id);
    for (size_t v = 0; v < 6; ++v) {
      EXPECT_EQ(grid.zones()[i].boundary[v].x, grid2.zones()[i].boundary[v].x);
      EXPECT_EQ(grid.zones()[i].boundary[v].y, grid2.zones()[i].boundary[v].y);
    }
  }
}

TEST(HexGrid, DisjointCoverSampling) {
  HexGridSpec spec;
  spec.circumradius_m = 1.0;
  spec.bounding_box = {0, 0, 10, 10};
  util::WarningSink sink;
  auto grid = generate_hex_grid(spec, sink);
  Rng rng(99);
  int strict_interior = 0;
  for (int i = 0; i < 10000; ++i) {
    Point p{rng.uniform(0, 10), rng.uniform(0, 10)};
    int containing = 0;
    bool near_any_edge = false;
    for (const auto& z : grid.zones()) {
      if (!geom::point_in_polygon(p, z.boundary)) continue;
      ++containing;
      for (size_t e = 0; e < 6 && !near_any_edge; ++e)
        near_any_edge = geom::point_on_segment(p, z.boundary[e], z.boundary[(e + 1) % 6], 1e-9);
    }
    // Every interior point of the box is covered.
    ASSERT_GE(containing, 1) << p.x << "," << p.y;
    EXPECT_TRUE(grid.assign(p).has_value());
    if (!near_any_edge) {
      ++strict_interior;
      ASSERT_EQ(containing, 1) << p.x << "," << p.y;
    }
  }
  EXPECT_GT(strict_interior, 9900);  // boundary hits are measure-zero
  EXPECT_FALSE(find_interior_overlap(grid, 5).has_value());
}

TEST(HexGrid, DegenerateSingleCell) {
  HexGridSpec spec;
  spec.circumradius_m = 50.0;
  spec.bounding_box = {0, 0, 10, 10};
  util::WarningSink sink;
  auto grid = generate_hex_grid(spec, sink);
  EXPECT_EQ(grid.size(), 1u);
  EXPECT_EQ(grid.zones()[0].zone_id, "hex_0_0");
  EXPECT_FALSE(sink.empty());
  // The single cell still covers the whole box.
  EXPECT_TRUE(grid.assign({5, 5}).has_value());
  EXPECT_TRUE(grid.assign({0.01, 9.99}).has_value());
}

TEST(PartitionIo, SaveLoadRoundTrip) {
  fs::path dir = fs::temp_directory_path() / "flowcast_partition_test";
  fs::create_directories(dir);
  std::string path = (dir / "zones.json").string();
  auto part = nine_grid();
  save_partition(path, part);
  auto back = load_partition(path);
  EXPECT_EQ(back.level(), "grid");
  ASSERT_EQ(back.size(), 9u);
  for (size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(back.zones()[i].zone_id, part.zones()[i].zone_id);
    ASSERT_EQ(back.zones()[i].boundary.size(), part.zones()[i].boundary.size());
    for (size_t v = 0; v < 4; ++v) {
      EXPECT_EQ(back.zones()[i].boundary[v].x, part.zones()[i].boundary[v].x);
    }
  }
  // Byte-identical on re-save.
  std::string path2 = (dir / "zones2.json").string();
  save_partition(path2, back);
  EXPECT_EQ(util::read_file(path), util::read_file(path2));
  fs::remove_all(dir);
}

TEST(PartitionIo, LoadRejectsInvalid) {
  fs::path dir = fs::temp_directory_path() / "flowcast_partition_bad";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::string p = (dir / name).string();
    util::write_file(p, content);
    return p;
  };
  EXPECT_THROW(load_partition(write("notjson.json", "hello")), ParseError);
  EXPECT_THROW(load_partition(write("notarray.json", "{}")), SchemaError);
  EXPECT_THROW(load_partition(write("empty.json", "[]")), SchemaError);
  EXPECT_THROW(load_partition(write("missingkeys.json", R"([{"zone_id":"a"}])")), SchemaError);
  EXPECT_THROW(
      load_partition(write("openring.json", R"([{"zone_id":"a","level":"l","ring":[[0,0],[1,0],[1,1],[0,1]]}])")),
      SchemaError);
  // Overlapping interiors are rejected by the sampled check.
  EXPECT_THROW(load_partition(write("overlap.json",
                                    R"([{"zone_id":"a","level":"l","ring":[[0,0],[2,0],[2,2],[0,2],[0,0]]},
                                        {"zone_id":"b","level":"l","ring":[[1,1],[3,1],[3,3],[1,3],[1,1]]}])")),
               SchemaError);
  fs::remove_all(dir);
}
