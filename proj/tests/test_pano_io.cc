#include <gtest/gtest.h>

#include <png.h>

#include <chrono>

#include "oracles.h"
#include "panogeo/error.h"
#include "panogeo/pano_io.h"
#include "panogeo/synthgen.h"

namespace panogeo {
namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// Straight libpng writer for inputs the library refuses to produce.
void write_png_simplified(const fs::path& p, int w, int h, png_uint_32 format, const std::vector<png_byte>& px) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = w;
  img.height = h;
  img.format = format;
  ASSERT_TRUE(png_image_write_to_file(&img, p.c_str(), 0, px.data(), 0, nullptr));
}

nlohmann::json pose_json(const Mat3& r, const Vec3& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({r(i, 0), r(i, 1), r(i, 2), t(i)});
  rows.push_back({0, 0, 0, 1});
  return {{"cam_to_world", rows}};
}

TEST(Pano, SixteenBitRoundTripIsExact) {
  oracle::TempDir dir("pano16");
  EquirectImage img(64, 32, 3);
  std::mt19937_64 rng(81);
  std::uniform_int_distribution<int> q(0, 65535);
  for (float& v : img.data()) v = static_cast<float>(q(rng) / 65535.0);
  write_pano(img, dir / "a.png");
  EXPECT_EQ(read_pano(dir / "a.png"), img);
}

TEST(Pano, EightBitAndGray) {
  oracle::TempDir dir("pano8");
  EquirectImage img(32, 16, 1);
  for (size_t i = 0; i < img.data().size(); ++i) img.data()[i] = static_cast<float>((i % 256) / 255.0);
  write_pano(img, dir / "g.png", 8);
  const EquirectImage back = read_pano(dir / "g.png");
  EXPECT_EQ(back.channels(), 1);
  EXPECT_EQ(back, img);
  EXPECT_THROW(write_pano(img, dir / "x.png", 12), ContractError);
}

TEST(Pano, AspectAndFormatErrors) {
  oracle::TempDir dir("panoerr");
  write_png(Raster(30, 20, 3), dir / "wide.png");
  EXPECT_THROW(read_pano(dir / "wide.png"), FormatError);
  write_text(dir / "junk.png", "not a png at all");
  EXPECT_THROW(read_pano(dir / "junk.png"), FormatError);
  EXPECT_THROW(read_pano(dir / "missing.png"), FormatError);
  // Truncated file.
  write_pano(smooth_panorama(64, 32, 1), dir / "full.png");
  const std::string bytes = oracle::read_file(dir / "full.png");
  write_text(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(read_pano(dir / "cut.png"), FormatError);
}

TEST(Pano, AlphaRejected) {
  oracle::TempDir dir("alpha");
  write_png_simplified(dir / "rgba.png", 8, 4, PNG_FORMAT_RGBA, std::vector<png_byte>(8 * 4 * 4, 200));
  EXPECT_THROW(read_pano(dir / "rgba.png"), FormatError);
  write_png_simplified(dir / "rgb.png", 8, 4, PNG_FORMAT_RGB, std::vector<png_byte>(8 * 4 * 3, 51));
  const EquirectImage ok = read_pano(dir / "rgb.png");
  EXPECT_FLOAT_EQ(ok.at(3, 2, 1), 0.2f);
}

TEST(Pano, FullResolutionAccepted) {
  oracle::TempDir dir("big");
  write_pano(EquirectImage(4096, 2048, 1, 0.5f), dir / "big.png", 8);
  const EquirectImage back = read_pano(dir / "big.png");
  EXPECT_EQ(back.width(), 4096);
  EXPECT_EQ(back.height(), 2048);
}

TEST(Depth, RawValuesAndScale) {
  oracle::TempDir dir("depth");
  DepthMap d(8, 4);
  d.set(0, 0, 1.0);
  d.set(1, 0, 1e-9);
  write_depth(d, dir / "d.png", 256.0);
  const DepthMap raw = read_depth(dir / "d.png", 1.0);
  EXPECT_EQ(raw.distance(0, 0), 256.0);
  EXPECT_EQ(raw.distance(1, 0), 1.0);  // clamped to the smallest valid code
  EXPECT_FALSE(raw.valid(2, 0));
  EXPECT_EQ(raw.valid_count(), 2u);
  EXPECT_EQ(read_depth(dir / "d.png", 256.0).distance(0, 0), 1.0);
}

TEST(Depth, QuantizationBound) {
  oracle::TempDir dir("depthq");
  BoxScene s;
  const DepthMap d = box_depth(s, Pose{Rotation(), Vec3(0.2, 0.3, -0.1)}, 256, 128);
  const double max_d = *std::max_element(d.distances().begin(), d.distances().end());
  const double scale = depth_scale_for(max_d);
  EXPECT_DOUBLE_EQ(scale * max_d, 0.95 * 65535);
  write_depth(d, dir / "d.png", scale);
  const DepthMap back = read_depth(dir / "d.png", scale);
  EXPECT_EQ(back.valid_count(), d.valid_count());
  for (size_t i = 0; i < d.distances().size(); ++i) {
    EXPECT_LE(std::abs(back.distances()[i] - d.distances()[i]), 0.5 / scale + 1e-12);
  }
  // Already-quantized depth survives bit-exactly.
  write_depth(back, dir / "e.png", scale);
  EXPECT_EQ(read_depth(dir / "e.png", scale), back);
  EXPECT_EQ(oracle::read_file(dir / "d.png"), oracle::read_file(dir / "e.png"));
}

TEST(Depth, Errors) {
  oracle::TempDir dir("deptherr");
  const DepthMap d(8, 4, 10.0);
  EXPECT_THROW(write_depth(d, dir / "o.png", 10000.0), ContractError);
  EXPECT_THROW(write_depth(d, dir / "o.png", 0.0), ContractError);
  write_depth(d, dir / "ok.png", 100.0);
  EXPECT_THROW(read_depth(dir / "ok.png", 0.0), FormatError);
  EXPECT_THROW(read_depth(dir / "ok.png", std::nan("")), FormatError);
  write_pano(EquirectImage(8, 4, 1, 0.5f), dir / "eight.png", 8);
  EXPECT_THROW(read_depth(dir / "eight.png", 1.0), FormatError);
  write_pano(EquirectImage(8, 4, 3, 0.5f), dir / "rgb.png", 16);
  EXPECT_THROW(read_depth(dir / "rgb.png", 1.0), FormatError);
  EXPECT_THROW(depth_scale_for(0.0), ContractError);
}

TEST(PoseIo, RoundTripAndLayouts) {
  oracle::TempDir dir("pose");
  Rng rng(82);
  const Pose g{sample_uniform_rotation(rng), Vec3(1.5, -2.25, 0.125)};
  write_pose(g, dir / "p.json");
  const Pose back = read_pose(dir / "p.json");
  EXPECT_EQ(back.trans, g.trans);
  EXPECT_LT((back.rot.matrix() - g.rot.matrix()).cwiseAbs().maxCoeff(), 1e-15);

  nlohmann::json flat;
  flat["cam_to_world"] = {1, 0, 0, 4, 0, 1, 0, 5, 0, 0, 1, 6, 0, 0, 0, 1};
  const Pose f = pose_from_json(flat);
  EXPECT_EQ(f.trans, Vec3(4, 5, 6));
  EXPECT_EQ(f.rot.matrix(), Mat3::Identity());
}

TEST(PoseIo, OrthonormalityThresholds) {
  Mat3 r = Mat3::Identity();
  r(0, 1) = 1e-3;
  std::vector<std::string> warnings;
  const Pose p = pose_from_json(pose_json(r, Vec3::Zero()), &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_LT((p.rot.matrix().transpose() * p.rot.matrix() - Mat3::Identity()).norm(), 1e-12);

  warnings.clear();
  r(0, 1) = 1e-8;
  pose_from_json(pose_json(r, Vec3::Zero()), &warnings);
  EXPECT_TRUE(warnings.empty());

  r(0, 1) = 0.5;
  EXPECT_THROW(pose_from_json(pose_json(r, Vec3::Zero())), FormatError);
  Mat3 flip = Mat3::Identity();
  flip(2, 2) = -1;
  EXPECT_THROW(pose_from_json(pose_json(flip, Vec3::Zero())), FormatError);
  EXPECT_THROW(pose_from_json(pose_json(Mat3::Identity(), Vec3(std::nan(""), 0, 0))), FormatError);
  nlohmann::json bad = pose_json(Mat3::Identity(), Vec3::Zero());
  bad["cam_to_world"][3] = {0, 0, 1, 1};
  EXPECT_THROW(pose_from_json(bad), FormatError);
  EXPECT_THROW(pose_from_json(nlohmann::json::object()), FormatError);
  bad["cam_to_world"] = {1, 2, 3};
  EXPECT_THROW(pose_from_json(bad), FormatError);
}

TEST(Ply, RoundTripIsBitExactInFloat) {
  oracle::TempDir dir("ply");
  std::mt19937_64 rng(83);
  std::normal_distribution<float> g(0.0f, 3.0f);
  std::vector<Vec3> pts;
  std::vector<Rgb8> cols;
  for (int i = 0; i < 1000; ++i) {
    pts.emplace_back(g(rng), g(rng), g(rng));
    cols.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i * 7), 255});
  }
  const PointCloud c(CloudFrame::kCameraLocal, pts, cols);
  write_ply(c, dir / "c.ply");
  const PointCloud back = read_ply(dir / "c.ply");
  EXPECT_EQ(back.frame(), CloudFrame::kCameraLocal);
  EXPECT_EQ(back.points(), c.points());
  EXPECT_EQ(back.colors(), c.colors());

  const PointCloud plain(CloudFrame::kAnchorWorld, pts);
  write_ply(plain, dir / "w.ply");
  const PointCloud w = read_ply(dir / "w.ply");
  EXPECT_EQ(w.frame(), CloudFrame::kAnchorWorld);
  EXPECT_FALSE(w.has_colors());
  EXPECT_NE(oracle::read_file(dir / "w.ply").find("comment frame anchor_world"), std::string::npos);
}

TEST(Ply, MillionPointsUnderTwoSeconds) {
  oracle::TempDir dir("plybig");
  std::mt19937_64 rng(84);
  std::uniform_real_distribution<float> u(-10.0f, 10.0f);
  std::vector<Vec3> pts(1000000);
  for (Vec3& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  const PointCloud c(CloudFrame::kAnchorWorld, std::move(pts));
  const auto t0 = std::chrono::steady_clock::now();
  write_ply(c, dir / "big.ply");
  const PointCloud back = read_ply(dir / "big.ply");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 2.0);
  EXPECT_EQ(back.points(), c.points());
}

TEST(Ply, MalformedInputs) {
  oracle::TempDir dir("plybad");
  write_text(dir / "a.ply", "plx\n");
  EXPECT_THROW(read_ply(dir / "a.ply"), FormatError);
  write_text(dir / "b.ply", "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n");
  EXPECT_THROW(read_ply(dir / "b.ply"), FormatError);
  write_text(dir / "c.ply",
             "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
             "property float z\nend_header\n0123");
  EXPECT_THROW(read_ply(dir / "c.ply"), FormatError);
  write_text(dir / "d.ply",
             "ply\nformat binary_little_endian 1.0\ncomment frame nowhere\nelement vertex 0\nend_header\n");
  EXPECT_THROW(read_ply(dir / "d.ply"), FormatError);
  write_text(dir / "e.ply", "ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\n");
  EXPECT_THROW(read_ply(dir / "e.ply"), FormatError);
  EXPECT_THROW(write_ply(PointCloud(CloudFrame::kAnchorWorld), dir / "f.ply"), ContractError);
}

TEST(Ply, AcceptsDoubleProperties) {
  oracle::TempDir dir("plyd");
  std::string s =
      "ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
      "property double z\nend_header\n";
  const double v[6] = {0.1, 0.2, 0.3, -1.0, 2.0, 1e-3};
  s.append(reinterpret_cast<const char*>(v), sizeof(v));
  write_text(dir / "d.ply", s);
  const PointCloud c = read_ply(dir / "d.ply");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points()[0], Vec3(0.1, 0.2, 0.3));
  EXPECT_EQ(c.points()[1], Vec3(-1.0, 2.0, 1e-3));
}

TEST(Manifest, OrderAndValidation) {
  oracle::TempDir dir("manifest");
  Manifest m;
  m.base_dir = dir.path();
  m.scene = {{"kind", "box"}};
  const BoxScene s;
  for (int i = 0; i < 3; ++i) {
    const Pose cam{Rotation(), Vec3(0.1 * i, 0, 0)};
    const FrameTriplet t{box_rgb(s, cam, 32, 16), box_depth(s, cam, 32, 16), cam};
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%03d", i);
    m.frames.push_back(save_triplet(t, m, stem, 1000.0));
  }
  write_manifest(m, dir / "manifest.json");
  const Manifest back = read_manifest(dir / "manifest.json");
  ASSERT_EQ(back.frames.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back.frames[i].depth_path, m.frames[i].depth_path);
    EXPECT_EQ(load_triplet(back, i).pose.trans.x(), 0.1 * i);
  }
  EXPECT_EQ(back.scene["kind"], "box");
  EXPECT_THROW(load_triplet(back, 3), ContractError);

  nlohmann::json j = nlohmann::json::parse(oracle::read_file(dir / "manifest.json"));
  auto expect_bad = [&](nlohmann::json variant) {
    write_text(dir / "bad.json", variant.dump());
    EXPECT_THROW(read_manifest(dir / "bad.json"), FormatError);
  };
  nlohmann::json v = j;
  v["frames"][1].erase("depth_scale");
  expect_bad(v);
  v = j;
  v["frames"][2]["pose_path"] = "nope.json";
  expect_bad(v);
  v = j;
  v["format_version"] = 2;
  expect_bad(v);
  v = j;
  v.erase("frames");
  expect_bad(v);
  v = j;
  v["frames"][0]["depth_scale"] = -1;
  expect_bad(v);
  write_text(dir / "bad.json", "{ not json");
  EXPECT_THROW(read_manifest(dir / "bad.json"), FormatError);
}

TEST(Tensor, RoundTrip) {
  oracle::TempDir dir("tensor");
  std::vector<double> data(2 * 3 * 4);
  for (size_t i = 0; i < data.size(); ++i) data[i] = std::sin(double(i)) * 1e3;
  write_tensor(dir / "t.bin", {{"shape", {2, 3, 4}}, {"dtype", "f64"}, {"note", "x"}}, data);
  nlohmann::json header;
  EXPECT_EQ(read_tensor(dir / "t.bin", &header), data);
  EXPECT_EQ(header["shape"], nlohmann::json({2, 3, 4}));
  EXPECT_EQ(header["note"], "x");
  EXPECT_EQ(oracle::read_file(dir / "t.bin").substr(0, 8), "PGTENSR1");
  EXPECT_THROW(write_tensor(dir / "u.bin", {{"shape", {5}}, {"dtype", "f64"}}, data), ContractError);
  write_text(dir / "v.bin", "PGTENSRX");
  EXPECT_THROW(read_tensor(dir / "v.bin", &header), FormatError);
  const std::string bytes = oracle::read_file(dir / "t.bin");
  write_text(dir / "w.bin", bytes.substr(0, bytes.size() - 8));
  EXPECT_THROW(read_tensor(dir / "w.bin", &header), FormatError);
}

}  // namespace
}  // namespace panogeo
