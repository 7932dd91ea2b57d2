#include <levelvol/field.hpp>
#include <levelvol/grid_io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace levelvol;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "levelvol_grid_io_test";
  fs::create_directories(dir);
  return dir / name;
}

VoxelGrid random_grid() {
  VoxelGrid g;
  g.dims = {5, 4, 3};
  g.spacing = {0.1, 0.2, 0.3};
  g.origin = Point::Constant(3, -0.25);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 60; ++i) g.values.push_back(u(rng));
  return g;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(VoxelGrid, Indexing) {
  const VoxelGrid g = random_grid();
  g.validate();
  EXPECT_EQ(g.size(), 60u);
  EXPECT_NEAR(g.voxel_volume(), 0.006, 1e-15);
  const std::vector<int> idx{2, 1, 2};
  const std::size_t flat = g.flat_index(idx);
  EXPECT_EQ(flat, 2u + 5u * (1u + 4u * 2u));
  EXPECT_EQ(g.multi_index(flat), idx);
  EXPECT_NEAR(g.voxel_center(flat)[2], -0.25 + 0.6, 1e-15);
  EXPECT_NEAR(g.extent().lo[0], -0.3, 1e-15);
  VoxelGrid bad = g;
  bad.values.pop_back();
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(GridIo, RoundTripF64) {
  GridFile f;
  f.grid = random_grid();
  DomainSpec d;
  d.kind = DomainKind::ball;
  d.center = Point::Constant(3, 0.1);
  d.radius = 0.4;
  f.domain = d;
  const fs::path p = scratch("a.json");
  write_grid(p, f);
  const GridFile r = read_grid(p);
  EXPECT_TRUE(r.grid == f.grid);
  ASSERT_TRUE(r.domain.has_value());
  EXPECT_EQ(r.domain->kind, DomainKind::ball);
  EXPECT_EQ(r.domain->radius, 0.4);
  EXPECT_FALSE(r.synth.has_value());
}

TEST(GridIo, F32RewriteIsBitExact) {
  GridFile f;
  f.grid = random_grid();
  f.dtype = SampleType::f32;
  const fs::path p1 = scratch("b.json");
  const fs::path p2 = scratch("c.json");
  write_grid(p1, f);
  const GridFile once = read_grid(p1);
  EXPECT_NE(once.grid.values, f.grid.values);
  EXPECT_NEAR(once.grid.values[7], f.grid.values[7], 1e-7);
  write_grid(p2, once);
  EXPECT_TRUE(read_grid(p2).grid == once.grid);
}

TEST(GridIo, SlabCenterRoundTrip) {
  GridFile f;
  f.grid = random_grid();
  DomainSpec d;
  d.kind = DomainKind::slab;
  d.flat_radius = 0.6;
  d.height = 0.7;
  d.steepness = 100;
  d.center = Point::Constant(2, 0.05);
  f.domain = d;
  const fs::path p = scratch("slab.json");
  write_grid(p, f);
  const GridFile r = read_grid(p);
  ASSERT_TRUE(r.domain.has_value());
  EXPECT_EQ(r.domain->center, d.center);
  const Domain dom = make_domain(*r.domain, 3);
  EXPECT_EQ(dom.kind(), DomainKind::slab);
}

TEST(GridIo, ErrorsNameFieldAndLine) {
  const fs::path p = scratch("bad.json");
  write_text(p, "{\n  \"dims\": [2, 2],\n  \"spacing\": [1, \"x\"],\n  \"origin\": [0, 0],\n  \"dtype\": \"f64\",\n"
                "  \"data\": \"bad.raw\"\n}\n");
  try {
    read_grid(p);
    FAIL() << "expected GridFormatError";
  } catch (const GridFormatError& e) {
    EXPECT_EQ(e.field(), "spacing");
    EXPECT_EQ(e.line(), 3);
  }
  write_text(p, "{ \"dims\": [2, 2] ");
  EXPECT_THROW(read_grid(p), GridFormatError);
  EXPECT_THROW(read_grid(scratch("missing.json")), GridFormatError);
}

TEST(GridIo, ShortPayloadRejected) {
  GridFile f;
  f.grid = random_grid();
  const fs::path p = scratch("short.json");
  write_grid(p, f);
  fs::resize_file(scratch("short.raw"), 16);
  EXPECT_THROW(read_grid(p), GridFormatError);
}
