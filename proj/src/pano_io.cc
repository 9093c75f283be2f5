#include "panogeo/pano_io.h"

#include <Eigen/Dense>

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "panogeo/error.h"

namespace panogeo {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

// ---------------------------------------------------------------------------
// libpng plumbing. The setjmp frames below only hold trivially destructible
// locals; everything with a destructor lives in the caller-owned PngBuffer.

struct PngBuffer {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;  // native-endian samples
  std::vector<png_bytep> rows;
  std::string error;
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<PngBuffer*>(png_get_error_ptr(png));
  if (buf) buf->error = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw FormatError("cannot open " + path.string());
  return f;
}

bool decode_png(std::FILE* fp, PngBuffer* out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, out, png_error_handler,
                                           png_warning_handler);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  } else if (bit_depth < 8) {
    out->error = "unsupported bit depth " + std::to_string(bit_depth);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if ((color_type & PNG_COLOR_MASK_ALPHA) || png_get_valid(png, info, PNG_INFO_tRNS)) {
    out->error = "alpha channels are not supported";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (bit_depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->channels = png_get_channels(png, info);
  const size_t stride = png_get_rowbytes(png, info);
  out->bytes.resize(stride * out->height);
  out->rows.resize(out->height);
  for (std::uint32_t y = 0; y < out->height; ++y) out->rows[y] = out->bytes.data() + y * stride;
  png_read_image(png, out->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_png(std::FILE* fp, PngBuffer* in) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, in, png_error_handler,
                                            png_warning_handler);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, in->width, in->height, in->bit_depth,
               in->channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (in->bit_depth == 16) png_set_swap(png);
  png_write_image(png, in->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

PngBuffer read_png_file(const fs::path& path) {
  FilePtr f = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file");
  }
  std::rewind(f.get());
  PngBuffer buf;
  if (!decode_png(f.get(), &buf)) {
    throw FormatError(path.string() + ": " + (buf.error.empty() ? "PNG decode failed" : buf.error));
  }
  return buf;
}

void write_png_file(PngBuffer& buf, const fs::path& path) {
  const size_t stride = static_cast<size_t>(buf.width) * buf.channels * (buf.bit_depth / 8);
  buf.rows.resize(buf.height);
  for (std::uint32_t y = 0; y < buf.height; ++y) buf.rows[y] = buf.bytes.data() + y * stride;
  FilePtr f = open_file(path, "wb");
  if (!encode_png(f.get(), &buf)) {
    throw FormatError(path.string() + ": " + (buf.error.empty() ? "PNG encode failed" : buf.error));
  }
  if (std::fflush(f.get()) != 0) throw FormatError("write failed: " + path.string());
}

std::uint16_t sample16(const PngBuffer& b, size_t i) {
  std::uint16_t v;
  std::memcpy(&v, b.bytes.data() + 2 * i, 2);
  return v;
}

PngBuffer raster_to_png(const Raster& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ContractError("bit depth must be 8 or 16");
  if (image.channels() != 1 && image.channels() != 3) {
    throw ContractError("PNG output supports 1 or 3 channels");
  }
  PngBuffer buf;
  buf.width = image.width();
  buf.height = image.height();
  buf.bit_depth = bit_depth;
  buf.channels = image.channels();
  const auto& data = image.data();
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
  buf.bytes.resize(data.size() * (bit_depth / 8));
  for (size_t i = 0; i < data.size(); ++i) {
    const double v = std::clamp(static_cast<double>(data[i]), 0.0, 1.0);
    const long q = std::lround(v * maxv);
    if (bit_depth == 16) {
      const std::uint16_t s = static_cast<std::uint16_t>(q);
      std::memcpy(buf.bytes.data() + 2 * i, &s, 2);
    } else {
      buf.bytes[i] = static_cast<std::uint8_t>(q);
    }
  }
  return buf;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed: " + path.string());
}

nlohmann::json parse_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Panoramas and depth

EquirectImage read_pano(const fs::path& path) {
  const PngBuffer buf = read_png_file(path);
  if (buf.width != 2 * buf.height) {
    throw FormatError(path.string() + ": panorama aspect must be 2:1, got " +
                      std::to_string(buf.width) + "x" + std::to_string(buf.height));
  }
  EquirectImage img(static_cast<int>(buf.width), static_cast<int>(buf.height), buf.channels);
  auto& data = img.data();
  if (buf.bit_depth == 16) {
    for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(sample16(buf, i) / 65535.0);
  } else {
    for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(buf.bytes[i] / 255.0);
  }
  return img;
}

void write_pano(const EquirectImage& image, const fs::path& path, int bit_depth) {
  write_png(image, path, bit_depth);
}

void write_png(const Raster& image, const fs::path& path, int bit_depth) {
  PngBuffer buf = raster_to_png(image, bit_depth);
  write_png_file(buf, path);
}

double depth_scale_for(double max_depth) {
  if (!(max_depth > 0) || !std::isfinite(max_depth)) {
    throw ContractError("max depth must be positive");
  }
  return 0.95 * 65535.0 / max_depth;
}

DepthMap read_depth(const fs::path& path, double depth_scale) {
  if (!(depth_scale > 0) || !std::isfinite(depth_scale)) {
    throw FormatError(path.string() + ": missing or invalid depth_scale");
  }
  const PngBuffer buf = read_png_file(path);
  if (buf.bit_depth != 16 || buf.channels != 1) {
    throw FormatError(path.string() + ": depth must be a 16-bit single-channel PNG");
  }
  if (buf.width != 2 * buf.height) {
    throw FormatError(path.string() + ": depth aspect must be 2:1");
  }
  DepthMap d(static_cast<int>(buf.width), static_cast<int>(buf.height));
  for (std::uint32_t y = 0; y < buf.height; ++y) {
    for (std::uint32_t x = 0; x < buf.width; ++x) {
      const std::uint16_t raw = sample16(buf, static_cast<size_t>(y) * buf.width + x);
      if (raw != 0) d.set(static_cast<int>(x), static_cast<int>(y), raw / depth_scale);
    }
  }
  return d;
}

void write_depth(const DepthMap& depth, const fs::path& path, double depth_scale) {
  if (!(depth_scale > 0) || !std::isfinite(depth_scale)) {
    throw ContractError("depth_scale must be positive");
  }
  PngBuffer buf;
  buf.width = depth.width();
  buf.height = depth.height();
  buf.bit_depth = 16;
  buf.channels = 1;
  buf.bytes.resize(static_cast<size_t>(buf.width) * buf.height * 2);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      std::uint16_t raw = 0;
      if (depth.valid(x, y)) {
        const double q = std::round(depth.distance(x, y) * depth_scale);
        if (q > 65535.0) {
          throw ContractError("depth " + std::to_string(depth.distance(x, y)) +
                              " m exceeds the 16-bit range at scale " +
                              std::to_string(depth_scale));
        }
        raw = static_cast<std::uint16_t>(std::max(1.0, q));
      }
      std::memcpy(buf.bytes.data() + 2 * (static_cast<size_t>(y) * buf.width + x), &raw, 2);
    }
  }
  write_png_file(buf, path);
}

// ---------------------------------------------------------------------------
// Poses

nlohmann::json pose_to_json(const Pose& pose) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back({pose.rot.matrix()(r, 0), pose.rot.matrix()(r, 1), pose.rot.matrix()(r, 2),
                    pose.trans(r)});
  }
  rows.push_back({0.0, 0.0, 0.0, 1.0});
  return {{"cam_to_world", rows}};
}

Pose pose_from_json(const nlohmann::json& j, std::vector<std::string>* warnings) {
  if (!j.is_object() || !j.contains("cam_to_world")) {
    throw FormatError("pose JSON lacks \"cam_to_world\"");
  }
  const auto& m = j["cam_to_world"];
  Eigen::Matrix4d t;
  try {
    if (m.is_array() && m.size() == 4 && m[0].is_array()) {
      for (int r = 0; r < 4; ++r) {
        if (!m[r].is_array() || m[r].size() != 4) throw FormatError("pose rows must have 4 entries");
        for (int c = 0; c < 4; ++c) t(r, c) = m[r][c].get<double>();
      }
    } else if (m.is_array() && m.size() == 16) {
      for (int i = 0; i < 16; ++i) t(i / 4, i % 4) = m[i].get<double>();
    } else {
      throw FormatError("cam_to_world must be a 4x4 row-major matrix");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("pose matrix entries must be numbers: ") + e.what());
  }
  if (!t.allFinite()) throw FormatError("pose matrix has non-finite entries");
  if (t(3, 0) != 0 || t(3, 1) != 0 || t(3, 2) != 0 || t(3, 3) != 1) {
    throw FormatError("pose matrix bottom row must be [0, 0, 0, 1]");
  }
  const Mat3 r = t.topLeftCorner<3, 3>();
  if (!(r.determinant() > 0)) throw FormatError("pose rotation has non-positive determinant");
  const double err = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  Pose pose;
  if (err <= 1e-9 && std::abs(r.determinant() - 1.0) <= 1e-9) {
    pose.rot = Rotation(r);
  } else if (err <= 1e-6) {
    pose.rot = Rotation::project(r);
  } else if (err <= 1e-1) {
    pose.rot = Rotation::project(r);
    if (warnings) {
      warnings->push_back("pose rotation off orthonormal by " + std::to_string(err) +
                          "; re-orthonormalized");
    }
  } else {
    throw FormatError("pose rotation is not orthonormal (error " + std::to_string(err) + ")");
  }
  pose.trans = t.topRightCorner<3, 1>();
  return pose;
}

Pose read_pose(const fs::path& path, std::vector<std::string>* warnings) {
  try {
    return pose_from_json(parse_json(path), warnings);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pose(const Pose& pose, const fs::path& path) {
  write_text_file(path, pose_to_json(pose).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// PLY

void write_ply(const PointCloud& cloud, const fs::path& path) {
  if (cloud.empty()) throw ContractError("write_ply: empty cloud");
  std::string header = "ply\nformat binary_little_endian 1.0\n";
  header += std::string("comment frame ") + to_string(cloud.frame()) + "\n";
  header += "element vertex " + std::to_string(cloud.size()) + "\n";
  header += "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors()) {
    header += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  header += "end_header\n";

  const size_t stride = 12 + (cloud.has_colors() ? 3 : 0);
  std::vector<char> body(stride * cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    char* dst = body.data() + i * stride;
    const float xyz[3] = {static_cast<float>(cloud.points()[i].x()),
                          static_cast<float>(cloud.points()[i].y()),
                          static_cast<float>(cloud.points()[i].z())};
    std::memcpy(dst, xyz, 12);
    if (cloud.has_colors()) std::memcpy(dst + 12, cloud.colors()[i].data(), 3);
  }
  FilePtr f = open_file(path, "wb");
  if (std::fwrite(header.data(), 1, header.size(), f.get()) != header.size() ||
      std::fwrite(body.data(), 1, body.size(), f.get()) != body.size()) {
    throw FormatError("write failed: " + path.string());
  }
}

PointCloud read_ply(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  auto fail = [&](const std::string& why) {
    return FormatError(path.string() + ": malformed PLY header (" + why + ")");
  };

  std::string line;
  if (!std::getline(in, line) || line != "ply") throw fail("missing magic");
  CloudFrame frame = CloudFrame::kAnchorWorld;
  size_t count = 0;
  bool have_format = false, have_vertex = false;
  struct Prop {
    std::string name;
    int size;
    bool is_float;
  };
  std::vector<Prop> props;
  bool ended = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt != "binary_little_endian") throw fail("unsupported format " + fmt);
      have_format = true;
    } else if (key == "comment") {
      std::string tag, name;
      ls >> tag >> name;
      if (tag == "frame") {
        if (name == "camera_local") frame = CloudFrame::kCameraLocal;
        else if (name == "anchor_world") frame = CloudFrame::kAnchorWorld;
        else throw fail("unknown frame " + name);
      }
    } else if (key == "element") {
      std::string name;
      long long n = -1;
      ls >> name >> n;
      if (name != "vertex" || have_vertex || n < 0) throw fail("expected a single vertex element");
      count = static_cast<size_t>(n);
      have_vertex = true;
    } else if (key == "property") {
      std::string type, name;
      ls >> type >> name;
      if (!have_vertex || type == "list") throw fail("unsupported property");
      if (type == "float" || type == "float32") props.push_back({name, 4, true});
      else if (type == "double" || type == "float64") props.push_back({name, 8, true});
      else if (type == "uchar" || type == "uint8") props.push_back({name, 1, false});
      else throw fail("unsupported property type " + type);
    } else if (key == "end_header") {
      ended = true;
      break;
    } else if (!key.empty() && key != "obj_info") {
      throw fail("unexpected line '" + line + "'");
    }
  }
  if (!ended || !have_format || !have_vertex) throw fail("incomplete header");

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  size_t stride = 0;
  std::vector<size_t> offsets;
  for (size_t i = 0; i < props.size(); ++i) {
    offsets.push_back(stride);
    stride += props[i].size;
    const auto& n = props[i].name;
    const int idx = static_cast<int>(i);
    if (n == "x") ix = idx;
    else if (n == "y") iy = idx;
    else if (n == "z") iz = idx;
    else if (n == "red") ir = idx;
    else if (n == "green") ig = idx;
    else if (n == "blue") ib = idx;
  }
  if (ix < 0 || iy < 0 || iz < 0 || !props[ix].is_float || !props[iy].is_float ||
      !props[iz].is_float) {
    throw fail("missing float x/y/z properties");
  }
  const bool colors = ir >= 0 && ig >= 0 && ib >= 0;
  if (colors && (props[ir].is_float || props[ig].is_float || props[ib].is_float)) {
    throw fail("colors must be uchar");
  }

  std::vector<char> body(stride * count);
  in.read(body.data(), static_cast<std::streamsize>(body.size()));
  if (static_cast<size_t>(in.gcount()) != body.size()) {
    throw FormatError(path.string() + ": truncated PLY body");
  }
  auto read_real = [&](const char* rec, int p) {
    if (props[p].size == 4) {
      float v;
      std::memcpy(&v, rec + offsets[p], 4);
      return static_cast<double>(v);
    }
    double v;
    std::memcpy(&v, rec + offsets[p], 8);
    return v;
  };
  std::vector<Vec3> pts(count);
  std::vector<Rgb8> cols;
  if (colors) cols.resize(count);
  for (size_t i = 0; i < count; ++i) {
    const char* rec = body.data() + i * stride;
    pts[i] = Vec3(read_real(rec, ix), read_real(rec, iy), read_real(rec, iz));
    if (colors) {
      cols[i] = {static_cast<std::uint8_t>(rec[offsets[ir]]),
                 static_cast<std::uint8_t>(rec[offsets[ig]]),
                 static_cast<std::uint8_t>(rec[offsets[ib]])};
    }
  }
  return PointCloud(frame, std::move(pts), std::move(cols));
}

// ---------------------------------------------------------------------------
// Manifests

Manifest read_manifest(const fs::path& path) {
  const nlohmann::json j = parse_json(path);
  Manifest m;
  m.base_dir = path.parent_path();
  auto fail = [&](const std::string& why) { return FormatError(path.string() + ": " + why); };
  if (!j.is_object() || !j.contains("format_version")) throw fail("missing format_version");
  if (!j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kManifestFormatVersion) {
    throw fail("unsupported format_version");
  }
  if (j.contains("scene")) m.scene = j["scene"];
  if (!j.contains("frames") || !j["frames"].is_array()) throw fail("missing frames array");
  for (const auto& f : j["frames"]) {
    FrameRecord r;
    auto str = [&](const char* key) {
      return f.contains(key) && f[key].is_string() ? f[key].get<std::string>() : std::string();
    };
    r.rgb_path = str("rgb_path");
    r.depth_path = str("depth_path");
    r.pose_path = str("pose_path");
    r.local_points_path = str("local_points_path");
    r.global_points_path = str("global_points_path");
    if (!r.depth_path.empty()) {
      if (!f.contains("depth_scale") || !f["depth_scale"].is_number()) {
        throw fail("frame record lacks depth_scale");
      }
      r.depth_scale = f["depth_scale"].get<double>();
      if (!(r.depth_scale > 0)) throw fail("depth_scale must be positive");
    }
    for (const std::string* p : {&r.rgb_path, &r.depth_path, &r.pose_path,
                                 &r.local_points_path, &r.global_points_path}) {
      if (!p->empty() && !fs::exists(m.resolve(*p))) throw fail("missing file " + *p);
    }
    m.frames.push_back(std::move(r));
  }
  return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
  nlohmann::json j;
  j["format_version"] = m.format_version;
  j["scene"] = m.scene;
  j["frames"] = nlohmann::json::array();
  for (const FrameRecord& r : m.frames) {
    nlohmann::json f = nlohmann::json::object();
    if (!r.rgb_path.empty()) f["rgb_path"] = r.rgb_path;
    if (!r.depth_path.empty()) {
      f["depth_path"] = r.depth_path;
      f["depth_scale"] = r.depth_scale;
    }
    if (!r.pose_path.empty()) f["pose_path"] = r.pose_path;
    if (!r.local_points_path.empty()) f["local_points_path"] = r.local_points_path;
    if (!r.global_points_path.empty()) f["global_points_path"] = r.global_points_path;
    j["frames"].push_back(f);
  }
  write_text_file(path, j.dump(2) + "\n");
}

FrameTriplet load_triplet(const Manifest& m, size_t index, std::vector<std::string>* warnings) {
  if (index >= m.frames.size()) throw ContractError("frame index out of range");
  const FrameRecord& r = m.frames[index];
  if (r.rgb_path.empty() || r.depth_path.empty() || r.pose_path.empty()) {
    throw FormatError("frame " + std::to_string(index) + " is not a full RGB-depth-pose triplet");
  }
  FrameTriplet t{read_pano(m.resolve(r.rgb_path)), read_depth(m.resolve(r.depth_path), r.depth_scale),
                 read_pose(m.resolve(r.pose_path), warnings)};
  if (t.image.width() != t.depth.width() || t.image.height() != t.depth.height()) {
    throw FormatError("frame " + std::to_string(index) + ": RGB and depth resolutions differ");
  }
  return t;
}

FrameRecord save_triplet(const FrameTriplet& t, const Manifest& m, const std::string& stem,
                         double depth_scale) {
  FrameRecord r;
  r.rgb_path = stem + "_rgb.png";
  r.depth_path = stem + "_depth.png";
  r.depth_scale = depth_scale;
  r.pose_path = stem + "_pose.json";
  write_pano(t.image, m.resolve(r.rgb_path));
  write_depth(t.depth, m.resolve(r.depth_path), depth_scale);
  write_pose(t.pose, m.resolve(r.pose_path));
  return r;
}

// ---------------------------------------------------------------------------
// Tensors

namespace {
constexpr char kTensorMagic[8] = {'P', 'G', 'T', 'E', 'N', 'S', 'R', '1'};
}

void write_tensor(const fs::path& path, nlohmann::json header, const std::vector<double>& data) {
  header["dtype"] = "f64";
  size_t expected = 1;
  for (const auto& d : header.at("shape")) expected *= d.get<size_t>();
  if (expected != data.size()) throw ContractError("tensor shape does not match data length");
  const std::string h = header.dump();
  const std::uint64_t len = h.size();
  FilePtr f = open_file(path, "wb");
  bool ok = std::fwrite(kTensorMagic, 1, 8, f.get()) == 8 &&
            std::fwrite(&len, sizeof(len), 1, f.get()) == 1 &&
            std::fwrite(h.data(), 1, h.size(), f.get()) == h.size() &&
            std::fwrite(data.data(), sizeof(double), data.size(), f.get()) == data.size();
  if (!ok) throw FormatError("write failed: " + path.string());
}

std::vector<double> read_tensor(const fs::path& path, nlohmann::json* header) {
  FilePtr f = open_file(path, "rb");
  char magic[8];
  std::uint64_t len = 0;
  if (std::fread(magic, 1, 8, f.get()) != 8 || std::memcmp(magic, kTensorMagic, 8) != 0 ||
      std::fread(&len, sizeof(len), 1, f.get()) != 1 || len > (1u << 24)) {
    throw FormatError(path.string() + ": not a tensor file");
  }
  std::string h(len, '\0');
  if (std::fread(h.data(), 1, len, f.get()) != len) throw FormatError(path.string() + ": truncated");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(h);
  } catch (const nlohmann::json::exception&) {
    throw FormatError(path.string() + ": bad tensor header");
  }
  if (!j.contains("shape") || j.value("dtype", "") != "f64") {
    throw FormatError(path.string() + ": tensor header needs shape and dtype f64");
  }
  size_t n = 1;
  for (const auto& d : j["shape"]) n *= d.get<size_t>();
  std::vector<double> data(n);
  if (std::fread(data.data(), sizeof(double), n, f.get()) != n) {
    throw FormatError(path.string() + ": truncated tensor data");
  }
  if (header) *header = j;
  return data;
}

}  // namespace panogeo
