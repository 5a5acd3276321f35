#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "spectsim/errors.hpp"
#include "spectsim/io.hpp"
#include "test_support.hpp"

namespace spectsim {
namespace {

using testing::TempDir;

void write_raw(const fs::path& p, const std::vector<float>& values) {
  std::ofstream out(p, std::ios::binary);
  for (float v : values) {
    const auto w = std::bit_cast<std::uint32_t>(v);
    const char bytes[4] = {static_cast<char>(w & 0xFF), static_cast<char>((w >> 8) & 0xFF),
                           static_cast<char>((w >> 16) & 0xFF), static_cast<char>(w >> 24)};
    out.write(bytes, 4);
  }
}

TEST(VolumeIo, RoundTripIsExact) {
  TempDir dir("vol_rt");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GridDims dims{3 + seed, 2 + 2 * seed, 1 + seed};
    const auto v = testing::random_volume(dims, 1.5 + static_cast<double>(seed), seed, -5.0, 5.0);
    const auto stem = dir / ("v" + std::to_string(seed));
    write_volume(v, stem, Json{{"note", "x"}});
    const auto back = read_volume(stem);
    EXPECT_EQ(back.dims(), dims);
    EXPECT_EQ(back.voxel_size_mm(), v.voxel_size_mm());
    EXPECT_TRUE(std::equal(v.data().begin(), v.data().end(), back.data().begin()));
    EXPECT_EQ(read_volume_header(stem)["metadata"]["note"], "x");
    // Header or payload path work as well as the stem.
    EXPECT_EQ(read_volume(fs::path(stem.string() + ".vol.json")).dims(), dims);
    EXPECT_EQ(read_volume(fs::path(stem.string() + ".vol.raw")).dims(), dims);
  }
}

TEST(VolumeIo, ReadsHandWrittenFixture) {
  TempDir dir("vol_fixture");
  std::ofstream(dir / "f.vol.json") << R"({"format_version": 1, "dims": [2, 2, 2], "voxel_size_mm": 4.0,
      "order": "[z][y][x]", "dtype": "f32le", "raw_file": "f.vol.raw"})";
  write_raw(dir / "f.vol.raw", {0, 1, 2, 3, 4, 5, 6, 7});
  const auto v = read_volume(dir / "f");
  EXPECT_EQ(v.at(0, 0, 1), 1.0F);
  EXPECT_EQ(v.at(0, 1, 0), 2.0F);
  EXPECT_EQ(v.at(1, 0, 0), 4.0F);
  EXPECT_EQ(v.at(1, 1, 1), 7.0F);
  // Payload bytes are little-endian f32.
  const auto bytes = testing::read_bytes(dir / "f.vol.raw");
  ASSERT_EQ(bytes.size(), 32U);
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 0x3F);  // 1.0f = 0x3F800000
}

TEST(VolumeIo, DetectsCorruption) {
  TempDir dir("vol_corrupt");
  const auto v = testing::random_volume({4, 4, 2}, 4.0, 1);
  write_volume(v, dir / "a");
  fs::resize_file(dir / "a.vol.raw", 31 * 4);
  EXPECT_THROW(read_volume(dir / "a"), CorruptFileError);

  write_volume(v, dir / "b");
  auto header = read_json_file(dir / "b.vol.json");
  header["format_version"] = 2;
  write_json_file(header, dir / "b.vol.json");
  EXPECT_THROW(read_volume(dir / "b"), CorruptFileError);

  write_volume(v, dir / "c");
  header = read_json_file(dir / "c.vol.json");
  header.erase("dims");
  write_json_file(header, dir / "c.vol.json");
  EXPECT_THROW(read_volume(dir / "c"), CorruptFileError);

  std::ofstream(dir / "d.vol.json") << "{ not json";
  EXPECT_THROW(read_volume(dir / "d"), CorruptFileError);

  EXPECT_THROW(read_volume(dir / "missing"), ValidationError);
}

TEST(ProjectionIo, RoundTripKeepsAnglesAndKind) {
  TempDir dir("proj_rt");
  ProjectionSet p(3, 2, 4, {-45.0, 15.0, 75.0}, CountKind::sampled_counts);
  for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] = static_cast<float>(i);
  write_projections(p, dir / "p", Json{{"dose_scale", 0.125}});
  const auto q = read_projections(dir / "p");
  EXPECT_EQ(q.n_views, 3U);
  EXPECT_EQ(q.n_rows, 2U);
  EXPECT_EQ(q.n_bins, 4U);
  EXPECT_EQ(q.angles_deg, p.angles_deg);
  EXPECT_EQ(q.kind, CountKind::sampled_counts);
  EXPECT_EQ(q.data, p.data);
  EXPECT_EQ(read_projection_header(dir / "p")["metadata"]["dose_scale"], 0.125);
}

TEST(ProjectionIo, HandWrittenFixtureAndAngleMismatch) {
  TempDir dir("proj_fixture");
  std::ofstream(dir / "s.proj.json") << R"({"format_version": 1, "n_views": 2, "n_rows": 1, "n_bins": 3,
      "angles_deg": [0.0, 90.0], "kind": "expected_counts", "order": "[view][row][bin]",
      "dtype": "f32le", "raw_file": "s.proj.raw"})";
  write_raw(dir / "s.proj.raw", {1, 2, 3, 4, 5, 6});
  const auto p = read_projections(dir / "s");
  EXPECT_EQ(p.at(1, 0, 0), 4.0F);
  EXPECT_EQ(p.at(0, 0, 2), 3.0F);

  std::ofstream(dir / "t.proj.json") << R"({"format_version": 1, "n_views": 2, "n_rows": 1, "n_bins": 3,
      "angles_deg": [0.0], "kind": "expected_counts", "order": "[view][row][bin]",
      "dtype": "f32le", "raw_file": "s.proj.raw"})";
  EXPECT_THROW(read_projections(dir / "t"), CorruptFileError);
}

TEST(Manifest, RoundTrip) {
  TempDir dir("manifest");
  DatasetManifest m;
  m.pairs.push_back({"p0", 0, "slices/p0/high_z000.vol.json", "slices/p0/low_z000.vol.json", Split::train, 2.5});
  m.pairs.push_back({"p1", 3, "slices/p1/high_z003.vol.json", "slices/p1/low_z003.vol.json", Split::test, 1.0});
  write_manifest(m, dir / "manifest.json");
  const auto doc = read_json_file(dir / "manifest.json");
  EXPECT_EQ(doc["n_train"], 1);
  EXPECT_EQ(doc["n_test"], 1);
  EXPECT_EQ(read_manifest(dir / "manifest.json", false), m);
  // Referenced files do not exist.
  EXPECT_ANY_THROW(read_manifest(dir / "manifest.json", true));
}

TEST(ExportSlicePairs, PaperSizedBookkeeping) {
  TempDir dir("export");
  const GridDims dims{6, 6, 114};
  std::vector<Volume3D> high;
  std::vector<Volume3D> low;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 10; ++i) {
    high.push_back(testing::random_volume(dims, 4.0, 100 + i));
    low.push_back(testing::random_volume(dims, 4.0, 200 + i));
    ids.push_back("patient_0" + std::to_string(i));
  }
  const auto m = export_slice_pairs(high, low, ids, dir.path(), {"patient_09"});
  EXPECT_EQ(m.count(Split::train), 1026U);
  EXPECT_EQ(m.count(Split::test), 114U);
  const auto reread = read_manifest(dir / "manifest.json");
  EXPECT_EQ(reread, m);

  const auto& pair = m.pairs[5];
  EXPECT_EQ(pair.patient_id, "patient_00");
  EXPECT_EQ(pair.slice_index, 5U);
  EXPECT_EQ(pair.norm_scale, static_cast<double>(low[0].max_value()));
  const auto slice = read_volume(dir / pair.high_path);
  EXPECT_EQ(slice.dims(), (GridDims{6, 6, 1}));
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 6; ++x) EXPECT_EQ(slice.at(0, y, x), high[0].at(5, y, x));
}

TEST(ExportSlicePairs, EmptyAndInvalid) {
  TempDir dir("export_empty");
  const auto m = export_slice_pairs({}, {}, {}, dir.path(), {});
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(read_manifest(dir / "manifest.json").pairs.size(), 0U);

  const auto v = testing::random_volume({4, 4, 2}, 4.0, 1);
  EXPECT_THROW(export_slice_pairs({v}, {}, {"a"}, dir / "x", {}), ValidationError);
  EXPECT_THROW(export_slice_pairs({v, v}, {v, v}, {"a", "a"}, dir / "x", {}), ValidationError);
  EXPECT_THROW(export_slice_pairs({v}, {Volume3D({4, 4, 3}, 4.0)}, {"a"}, dir / "x", {}), ValidationError);
  EXPECT_THROW(export_slice_pairs({v}, {Volume3D({4, 4, 2}, 4.0)}, {"a"}, dir / "x", {}), ValidationError);
  EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST(ConfigJson, RoundTrips) {
  PhantomSpec spec = default_torso_spec();
  spec.seed = 42;
  const Json j = spec;
  const auto back = j.get<PhantomSpec>();
  EXPECT_EQ(back.grid_dims, spec.grid_dims);
  ASSERT_EQ(back.organs.size(), spec.organs.size());
  EXPECT_EQ(back.organs[6].name, "liver");
  EXPECT_EQ(back.organs[6].shape.semi_axes_mm, spec.organs[6].shape.semi_axes_mm);
  EXPECT_EQ(back.seed, 42U);

  const Json g = GeometryConfig{};
  EXPECT_EQ(g.get<GeometryConfig>().n_views, 120U);
  OsemConfig c;
  c.model_psf_in_recon = true;
  const Json cj = c;
  EXPECT_TRUE(cj.get<OsemConfig>().model_psf_in_recon);
  const Json bad_dims = Json::array({4, -1, 2});
  EXPECT_THROW(bad_dims.get<GridDims>(), ValidationError);
}

}  // namespace
}  // namespace spectsim
