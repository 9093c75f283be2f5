#include "cli.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "panogeo/augment.h"
#include "panogeo/error.h"
#include "panogeo/eval_metrics.h"
#include "panogeo/losses.h"
#include "panogeo/pano_io.h"
#include "panogeo/parallel.h"
#include "panogeo/pos_embed.h"
#include "panogeo/report.h"
#include "panogeo/resample.h"
#include "panogeo/synthgen.h"
#include "panogeo/toy_model.h"

namespace panogeo::cli {

namespace {

constexpr const char* kSelf = " [self-chosen default]";

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  int verbosity = 0;
  std::string format = "json";
};

struct Context {
  Globals g;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& msg) const {
    if (g.verbosity > 0) err << msg << "\n";
  }
  void warn(const std::vector<std::string>& warnings) const {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
  }
  ReportFormat format() const { return g.format == "csv" ? ReportFormat::kCsv : ReportFormat::kJson; }
};

std::string frame_stem(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03zu", i);
  return buf;
}

std::pair<int, int> parse_res(const std::string& s) {
  int w = 0, h = 0;
  char x = 0;
  std::istringstream in(s);
  if (!(in >> w >> x >> h) || x != 'x' || !in.eof() || w < 1 || h < 1) {
    throw ContractError("resolution must look like WxH, got '" + s + "'");
  }
  return {w, h};
}

Vec3 parse_vec3(const std::string& s) {
  Vec3 v;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',') {
    throw ContractError("expected x,y,z but got '" + s + "'");
  }
  return v;
}

OrderedJson rot_json(const Rotation& r) {
  OrderedJson rows = OrderedJson::array();
  for (int i = 0; i < 3; ++i) rows.push_back({r.matrix()(i, 0), r.matrix()(i, 1), r.matrix()(i, 2)});
  return rows;
}

void emit(const Context& ctx, const OrderedJson& report, const std::string& path) {
  const std::string text = serialize(report, ctx.format());
  if (path.empty()) {
    ctx.out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw FormatError("cannot write " + path);
}

OrderedJson base_provenance(const Context& ctx, const char* command) {
  return {{"command", command}, {"seed", ctx.g.seed}, {"threads", ctx.g.threads}};
}

std::vector<Pose> manifest_poses(const Manifest& m, const Context& ctx) {
  std::vector<Pose> poses;
  std::vector<std::string> warnings;
  for (const FrameRecord& r : m.frames) {
    if (r.pose_path.empty()) throw FormatError("manifest frame lacks pose_path");
    poses.push_back(read_pose(m.resolve(r.pose_path), &warnings));
  }
  ctx.warn(warnings);
  return poses;
}

std::vector<DepthMap> manifest_depths(const Manifest& m) {
  std::vector<DepthMap> depths;
  for (const FrameRecord& r : m.frames) {
    if (r.depth_path.empty()) throw FormatError("manifest frame lacks depth_path");
    depths.push_back(read_depth(m.resolve(r.depth_path), r.depth_scale));
  }
  return depths;
}

void require_same_count(const Manifest& a, const Manifest& b) {
  if (a.frames.size() != b.frames.size()) {
    throw ContractError("prediction and ground-truth manifests list different frame counts");
  }
}

OrganizedCloud subsample(const OrganizedCloud& c, int stride) {
  OrganizedCloud out = c;
  if (stride <= 1) return out;
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      if (x % stride || y % stride) out.valid[static_cast<size_t>(y) * c.width + x] = 0;
    }
  }
  return out;
}

PointCloud organized_to_cloud(const OrganizedCloud& c, const EquirectImage* rgb, CloudFrame frame,
                              const Pose* pose) {
  std::vector<Vec3> pts;
  std::vector<Rgb8> cols;
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      if (!c.is_valid(x, y)) continue;
      pts.push_back(pose ? pose->apply(c.at(x, y)) : c.at(x, y));
      if (rgb) {
        Rgb8 px;
        for (int ch = 0; ch < 3; ++ch) {
          const float v = rgb->at(x, y, rgb->channels() == 3 ? ch : 0);
          px[ch] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
        }
        cols.push_back(px);
      }
    }
  }
  return PointCloud(frame, std::move(pts), std::move(cols));
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string scene = "box";
  int frames = 3;
  std::string res = "1024x512";
  double spacing = 0.3;
  double jitter = 0.1;
  std::string out;
};

int cmd_synth(const Context& ctx, const SynthArgs& a) {
  const auto [w, h] = parse_res(a.res);
  SceneSetConfig cfg;
  cfg.kind = a.scene == "sphere" ? SceneKind::kSphere : SceneKind::kBox;
  cfg.frames = a.frames;
  cfg.width = w;
  cfg.height = h;
  cfg.spacing = a.spacing;
  cfg.jitter = a.jitter;
  ctx.log("rendering " + std::to_string(a.frames) + " frames at " + a.res);
  const Manifest m = gen_scene_set(cfg, ctx.g.seed, a.out);
  OrderedJson j = {{"manifest", (fs::path(a.out) / "manifest.json").string()},
                   {"frames", m.frames.size()},
                   {"depth_scale", m.frames.front().depth_scale}};
  ctx.out << j.dump(2) << "\n";
  return 0;
}

struct AugmentArgs {
  std::string manifest;
  std::string out;
  std::string mode = "independent";
};

int cmd_augment(const Context& ctx, const AugmentArgs& a) {
  const Manifest in = read_manifest(a.manifest);
  std::vector<FrameTriplet> frames;
  std::vector<std::string> warnings;
  for (size_t i = 0; i < in.frames.size(); ++i) frames.push_back(load_triplet(in, i, &warnings));
  ctx.warn(warnings);
  const AugmentMode mode =
      a.mode == "shared" ? AugmentMode::kShared : AugmentMode::kIndependentPerFrame;
  const AugmentedSet aug = augment_set(frames, ctx.g.seed, mode);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw FormatError("cannot create " + a.out + ": " + ec.message());
  Manifest out;
  out.base_dir = a.out;
  out.scene = in.scene;
  OrderedJson rotations = OrderedJson::array();
  for (size_t i = 0; i < aug.frames.size(); ++i) {
    out.frames.push_back(save_triplet(aug.frames[i], out, frame_stem(i), in.frames[i].depth_scale));
    rotations.push_back(rot_json(aug.rotations[i]));
  }
  out.scene["augmentation"] = {{"seed", ctx.g.seed}, {"mode", a.mode}};
  write_manifest(out, fs::path(a.out) / "manifest.json");
  const OrderedJson rot_doc = {{"seed", ctx.g.seed}, {"mode", a.mode}, {"rotations", rotations}};
  std::ofstream f(fs::path(a.out) / "rotations.json", std::ios::binary);
  if (!f || !(f << rot_doc.dump(2) << "\n")) throw FormatError("cannot write rotations.json");
  ctx.out << rot_doc.dump(2) << "\n";
  return 0;
}

struct RotateArgs {
  std::string in;
  std::string out;
  std::string kind = "rgb";
  double depth_scale = 0.0;
  std::string axis;
  double angle_deg = 0.0;
  bool random = false;
  std::string interp;
  int bits = 16;
};

int cmd_rotate(const Context& ctx, const RotateArgs& a) {
  Rotation r;
  if (a.random) {
    Rng rng(ctx.g.seed);
    r = sample_uniform_rotation(rng);
  } else if (!a.axis.empty()) {
    r = Rotation::from_axis_angle(parse_vec3(a.axis), a.angle_deg * std::numbers::pi / 180.0);
  }
  if (a.kind == "depth") {
    if (!(a.depth_scale > 0)) throw ContractError("--depth-scale is required for depth input");
    const Interp interp = a.interp == "bilinear" ? Interp::kBilinear : Interp::kNearest;
    write_depth(rotate_equirect(read_depth(a.in, a.depth_scale), r, interp), a.out, a.depth_scale);
  } else {
    const Interp interp = a.interp == "nearest" ? Interp::kNearest : Interp::kBilinear;
    write_pano(rotate_equirect(read_pano(a.in), r, interp), a.out, a.bits);
  }
  ctx.out << OrderedJson({{"rotation", rot_json(r)}}).dump(2) << "\n";
  return 0;
}

struct DodecaArgs {
  std::vector<std::string> in;
  std::string out;
  double fov = kDodecaDefaultFovDeg;
  int res = kDodecaDefaultResolution;
  int bits = 16;
};

int cmd_split_dodeca(const Context& ctx, const DodecaArgs& a) {
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw FormatError("cannot create " + a.out + ": " + ec.message());
  OrderedJson views = OrderedJson::array();
  for (size_t p = 0; p < a.in.size(); ++p) {
    const std::vector<PinholeView> split = dodeca_split(read_pano(a.in[p]), a.fov, a.res);
    for (size_t v = 0; v < split.size(); ++v) {
      char name[64];
      std::snprintf(name, sizeof(name), "pano%03zu_view%02zu.png", p, v);
      write_png(split[v].image, fs::path(a.out) / name, a.bits);
      views.push_back({{"pano", a.in[p]},
                       {"view", v},
                       {"file", name},
                       {"fov_deg", split[v].fov_deg},
                       {"view_rot", rot_json(split[v].view_rot)}});
    }
  }
  const OrderedJson doc = {{"fov_deg", a.fov}, {"resolution", a.res}, {"views", views}};
  std::ofstream f(fs::path(a.out) / "views.json", std::ios::binary);
  if (!f || !(f << doc.dump(2) << "\n")) throw FormatError("cannot write views.json");
  ctx.out << OrderedJson({{"views", views.size()}, {"fov_deg", a.fov}, {"resolution", a.res}}).dump(2)
          << "\n";
  return 0;
}

struct Depth2PcArgs {
  std::string manifest;
  std::string out;
  std::string space = "world";
  size_t anchor = 0;
  int stride = 1;
  bool merge = false;
};

int cmd_depth2pc(const Context& ctx, const Depth2PcArgs& a) {
  if (a.stride < 1) throw ContractError("--stride must be >= 1");
  const Manifest m = read_manifest(a.manifest);
  if (m.frames.empty()) throw ContractError("manifest has no frames");
  const std::vector<DepthMap> depths = manifest_depths(m);
  std::vector<Pose> poses;
  if (a.space != "local") {
    poses = manifest_poses(m, ctx);
    if (a.space == "anchor") {
      if (a.anchor >= poses.size()) throw ContractError("--anchor out of range");
      poses = anchor_frame(poses, {}, a.anchor).poses;
    }
  }
  const CloudFrame frame = a.space == "local" ? CloudFrame::kCameraLocal : CloudFrame::kAnchorWorld;

  std::vector<PointCloud> clouds;
  for (size_t i = 0; i < depths.size(); ++i) {
    std::optional<EquirectImage> rgb;
    if (!m.frames[i].rgb_path.empty()) {
      rgb = read_pano(m.resolve(m.frames[i].rgb_path));
      if (rgb->width() != depths[i].width() || rgb->height() != depths[i].height()) rgb.reset();
    }
    clouds.push_back(organized_to_cloud(subsample(depth_to_organized_points(depths[i]), a.stride),
                                        rgb ? &*rgb : nullptr, frame,
                                        poses.empty() ? nullptr : &poses[i]));
  }

  OrderedJson files = OrderedJson::array();
  size_t total = 0;
  if (a.merge) {
    PointCloud merged(frame);
    bool colors = true;
    for (const auto& c : clouds) colors = colors && c.has_colors();
    for (const auto& c : clouds) {
      merged.points().insert(merged.points().end(), c.points().begin(), c.points().end());
      if (colors) merged.colors().insert(merged.colors().end(), c.colors().begin(), c.colors().end());
    }
    write_ply(merged, a.out);
    files.push_back(a.out);
    total = merged.size();
  } else {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw FormatError("cannot create " + a.out + ": " + ec.message());
    for (size_t i = 0; i < clouds.size(); ++i) {
      const fs::path p = fs::path(a.out) / (frame_stem(i) + ".ply");
      write_ply(clouds[i], p);
      files.push_back(p.string());
      total += clouds[i].size();
    }
  }
  ctx.out << OrderedJson({{"space", a.space}, {"points", total}, {"files", files}}).dump(2) << "\n";
  return 0;
}

struct EmbedArgs {
  std::string res = "224x112";
  int patch = 14;
  int dim = kEmbedDimDefault;
  int hidden = kEmbedHiddenDefault;
  std::string out;
};

int cmd_embed(const Context& ctx, const EmbedArgs& a) {
  const auto [w, h] = parse_res(a.res);
  const PatchGrid grid = make_patch_grid(h, w, a.patch);
  const EmbeddingGrid e = grid_embeddings(grid, make_embed_params(ctx.g.seed, a.dim, a.hidden));
  std::vector<double> data(static_cast<size_t>(e.values.size()));
  for (Eigen::Index r = 0; r < e.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < e.values.cols(); ++c) data[r * e.values.cols() + c] = e.values(r, c);
  }
  nlohmann::json header = {{"format_version", 1}, {"shape", {e.gh, e.gw, e.dim}},
                           {"seed", ctx.g.seed},  {"C", e.dim},
                           {"patch", a.patch},    {"hidden", a.hidden},
                           {"width", w},          {"height", h}};
  write_tensor(a.out, header, data);
  ctx.out << OrderedJson({{"tensor", a.out}, {"shape", {e.gh, e.gw, e.dim}}}).dump(2) << "\n";
  return 0;
}

struct LossArgs {
  std::string pred;
  std::string gt;
  std::string out;
  double tau = kDepthEdgeTauDefault;
  double beta = kSmoothL1BetaDefault;
  double lambda_t = LossWeights{}.lambda_t;
  double lambda_g = LossWeights{}.lambda_g;
  std::string pairs = "all";
  size_t anchor = 0;
};

OrganizedCloud transform_organized(const OrganizedCloud& c, const Pose& p) {
  OrganizedCloud out = c;
  for (size_t i = 0; i < out.points.size(); ++i) {
    if (out.valid[i]) out.points[i] = p.apply(out.points[i]);
  }
  return out;
}

// Global points come either one per pixel or one per patch of a 2:1 patch
// grid; the latter are replicated onto the pixels of each patch.
OrganizedCloud global_on_pixel_grid(const PointCloud& g, int width, int height) {
  const size_t pixels = static_cast<size_t>(width) * height;
  OrganizedCloud out{width, height, {}, std::vector<std::uint8_t>(pixels, 1)};
  if (g.size() == pixels) {
    out.points = g.points();
    return out;
  }
  const int gh = static_cast<int>(std::lround(std::sqrt(g.size() / 2.0)));
  const int gw = 2 * gh;
  if (gh < 1 || static_cast<size_t>(gh) * gw != g.size() || width % gw != 0) {
    throw FormatError("global point count matches neither the pixel nor a patch grid");
  }
  const int p = width / gw;
  out.points.resize(pixels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out.points[static_cast<size_t>(y) * width + x] = g.points()[(y / p) * gw + x / p];
    }
  }
  return out;
}

int cmd_loss(const Context& ctx, const LossArgs& a) {
  const Manifest pm = read_manifest(a.pred);
  const Manifest gm = read_manifest(a.gt);
  require_same_count(pm, gm);
  if (pm.frames.empty()) throw ContractError("manifests have no frames");
  if (a.anchor >= gm.frames.size()) throw ContractError("--anchor out of range");
  const std::vector<Pose> pred_poses = manifest_poses(pm, ctx);
  const std::vector<Pose> gt_poses = anchor_frame(manifest_poses(gm, ctx), {}, a.anchor).poses;
  const std::vector<DepthMap> pred_depth = manifest_depths(pm);
  const std::vector<DepthMap> gt_depth_raw = manifest_depths(gm);

  std::vector<GeometryFrame> pred, gt;
  for (size_t i = 0; i < pm.frames.size(); ++i) {
    const DepthMap& pd = pred_depth[i];
    const DepthMap gd = gt_depth_raw[i].width() == pd.width()
                            ? gt_depth_raw[i]
                            : resize_depth_nearest(gt_depth_raw[i], pd.width(), pd.height());
    GeometryFrame p{pred_poses[i], depth_to_organized_points(pd), {}};
    if (!pm.frames[i].global_points_path.empty()) {
      p.global = global_on_pixel_grid(read_ply(pm.resolve(pm.frames[i].global_points_path)),
                                      pd.width(), pd.height());
    } else {
      p.global = transform_organized(p.local, p.pose);
    }
    GeometryFrame g{gt_poses[i], depth_to_organized_points(gd), {}};
    g.global = transform_organized(g.local, g.pose);
    pred.push_back(std::move(p));
    gt.push_back(std::move(g));
  }
  LossConfig cfg;
  cfg.weights = {a.lambda_t, a.lambda_g};
  cfg.tau_rel = a.tau;
  cfg.beta = a.beta;
  cfg.pairs = a.pairs == "anchor" ? PairSet::kAnchorSpokes : PairSet::kAllOrdered;
  cfg.anchor = a.anchor;
  const LossReport r = compute_losses(pred, gt, cfg);
  if (r.normal_set_empty) ctx.warn({"normal supervision set is empty; normal loss reported as 0"});
  OrderedJson prov = base_provenance(ctx, "loss");
  prov["pred"] = a.pred;
  prov["gt"] = a.gt;
  prov["tau_rel"] = a.tau;
  prov["beta"] = a.beta;
  prov["pairs"] = a.pairs;
  prov["anchor"] = a.anchor;
  emit(ctx, report_json(r, prov), a.out);
  return 0;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out;
  std::string align;
  double voxel = kVoxelIndoorDefault;
  std::string corr = "nearest";
  int icp_iterations = 30;
};

int cmd_eval_pose(const Context& ctx, const EvalArgs& a) {
  const Manifest pm = read_manifest(a.pred);
  const Manifest gm = read_manifest(a.gt);
  require_same_count(pm, gm);
  MetricsReport r;
  r.pose = pose_metrics(manifest_poses(pm, ctx), manifest_poses(gm, ctx));
  r.provenance = base_provenance(ctx, "eval-pose");
  r.provenance["pred"] = a.pred;
  r.provenance["gt"] = a.gt;
  r.provenance["zero_translation_threshold"] = kZeroTranslationThreshold;
  emit(ctx, report_json(r), a.out);
  return 0;
}

int cmd_eval_depth(const Context& ctx, const EvalArgs& a) {
  const Manifest pm = read_manifest(a.pred);
  const Manifest gm = read_manifest(a.gt);
  require_same_count(pm, gm);
  if (pm.frames.empty()) throw ContractError("manifests have no frames");
  const DepthAlignment align = a.align == "none"          ? DepthAlignment::kNone
                               : a.align == "scale-shift" ? DepthAlignment::kScaleShift
                                                          : DepthAlignment::kIrlsScale;
  const std::vector<DepthMap> pd = manifest_depths(pm);
  const std::vector<DepthMap> gd = manifest_depths(gm);
  // Per-image metrics averaged over frames.
  DepthMetrics avg;
  avg.scale = avg.shift = 0.0;
  const double n = static_cast<double>(pd.size());
  for (size_t i = 0; i < pd.size(); ++i) {
    const DepthMap g = gd[i].width() == pd[i].width()
                           ? gd[i]
                           : resize_depth_nearest(gd[i], pd[i].width(), pd[i].height());
    const DepthMetrics d = depth_metrics(pd[i], g, align);
    avg.abs_rel += d.abs_rel / n;
    avg.rmse += d.rmse / n;
    avg.delta1 += d.delta1 / n;
    avg.delta2 += d.delta2 / n;
    avg.scale += d.scale / n;
    avg.shift += d.shift / n;
    avg.count += d.count;
    avg.dropped_nonpositive_gt += d.dropped_nonpositive_gt;
  }
  MetricsReport r;
  r.depth = avg;
  r.provenance = base_provenance(ctx, "eval-depth");
  r.provenance["pred"] = a.pred;
  r.provenance["gt"] = a.gt;
  r.provenance["align"] = a.align;
  r.provenance["frames"] = pd.size();
  emit(ctx, report_json(r), a.out);
  return 0;
}

int cmd_eval_pc(const Context& ctx, const EvalArgs& a) {
  PcConfig cfg;
  cfg.voxel_size = a.voxel;
  cfg.align = a.align == "none" ? PcAlign::kNone : PcAlign::kSimilarity;
  cfg.correspondence = a.corr == "index" ? PcCorrespondence::kIndex : PcCorrespondence::kNearest;
  cfg.icp_iterations = a.icp_iterations;
  MetricsReport r;
  r.pc = pc_metrics(read_ply(a.pred), read_ply(a.gt), cfg);
  r.provenance = base_provenance(ctx, "eval-pc");
  r.provenance["pred"] = a.pred;
  r.provenance["gt"] = a.gt;
  r.provenance["voxel_size"] = a.voxel;
  r.provenance["align"] = a.align;
  r.provenance["correspondence"] = a.corr;
  emit(ctx, report_json(r), a.out);
  return 0;
}

struct DemoArgs {
  std::string manifest;
  std::string out;
  std::string res = "224x112";
  ModelConfig model;
  bool no_frame_masking = false;
  bool no_global = false;
};

int cmd_demo_forward(const Context& ctx, DemoArgs a) {
  const auto [w, h] = parse_res(a.res);
  const Manifest in = read_manifest(a.manifest);
  if (in.frames.empty()) throw ContractError("manifest has no frames");
  std::vector<EquirectImage> images;
  for (const FrameRecord& r : in.frames) {
    if (r.rgb_path.empty()) throw FormatError("manifest frame lacks rgb_path");
    images.push_back(resize_equirect(read_pano(in.resolve(r.rgb_path)), w, h));
  }
  a.model.seed = ctx.g.seed;
  const ModelParams params = make_model_params(a.model);
  ForwardOptions opts;
  opts.frame_masking = !a.no_frame_masking;
  opts.global_attention = !a.no_global;
  const std::vector<FramePrediction> preds = forward(images, params, opts);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw FormatError("cannot create " + a.out + ": " + ec.message());
  double max_depth = 0.0;
  for (const auto& p : preds) {
    for (double d : p.depth.distances()) max_depth = std::max(max_depth, d);
  }
  const double scale = depth_scale_for(max_depth);
  Manifest m;
  m.base_dir = a.out;
  m.scene = {{"model",
              {{"dim", a.model.dim},
               {"blocks", a.model.blocks},
               {"patch", a.model.patch},
               {"heads", a.model.heads},
               {"seed", ctx.g.seed},
               {"input_res", a.res}}},
             {"source_manifest", a.manifest}};
  for (size_t i = 0; i < preds.size(); ++i) {
    FrameRecord r;
    const std::string stem = frame_stem(i);
    r.depth_path = stem + "_depth.png";
    r.depth_scale = scale;
    r.pose_path = stem + "_pose.json";
    r.local_points_path = stem + "_local.ply";
    r.global_points_path = stem + "_global.ply";
    write_depth(preds[i].depth, m.resolve(r.depth_path), scale);
    write_pose(preds[i].pose, m.resolve(r.pose_path));
    write_ply(preds[i].local_points, m.resolve(r.local_points_path));
    write_ply(preds[i].global_points, m.resolve(r.global_points_path));
    m.frames.push_back(r);
  }
  write_manifest(m, fs::path(a.out) / "manifest.json");
  ctx.out << OrderedJson({{"manifest", (fs::path(a.out) / "manifest.json").string()},
                          {"frames", preds.size()},
                          {"depth_grid", {preds.front().depth.height(), preds.front().depth.width()}}})
                 .dump(2)
          << "\n";
  return 0;
}

void error_json(std::ostream& err, const char* kind, const std::string& msg) {
  err << OrderedJson({{"error", {{"kind", kind}, {"message", msg}}}}).dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Panoramic geometry toolkit"};
  app.name("panogeo");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbosity, "Progress messages on stderr");
  app.add_option("--format", g.format, "Report format for loss/eval output")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render an analytic scene set with exact depth and poses");
  s->add_option("--scene", synth.scene, "Scene type")->check(CLI::IsMember({"box", "sphere"}))->capture_default_str();
  s->add_option("--frames", synth.frames, "Frames along the trajectory")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--res", synth.res, "Resolution WxH (2:1)")->capture_default_str();
  s->add_option("--spacing", synth.spacing, std::string("Meters between camera centers") + kSelf)->capture_default_str();
  s->add_option("--jitter", synth.jitter, std::string("Rotation jitter in radians") + kSelf)->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->required();

  AugmentArgs aug;
  auto* au = app.add_subcommand("augment", "Apply random SO(3) augmentation to every triplet");
  au->add_option("--manifest", aug.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  au->add_option("--out", aug.out, "Output directory")->required();
  au->add_option("--mode", aug.mode,
                 std::string("One rotation per frame or one shared rotation") + kSelf)
      ->check(CLI::IsMember({"independent", "shared"}))
      ->capture_default_str();

  RotateArgs rot;
  auto* ro = app.add_subcommand("rotate", "Rotate one panorama or depth map");
  ro->add_option("--in", rot.in, "Input PNG")->required()->check(CLI::ExistingFile);
  ro->add_option("--out", rot.out, "Output PNG")->required();
  ro->add_option("--kind", rot.kind, "Input kind")->check(CLI::IsMember({"rgb", "depth"}))->capture_default_str();
  ro->add_option("--depth-scale", rot.depth_scale, "Depth scale (raw per meter) for depth input");
  auto* axis = ro->add_option("--axis", rot.axis, "Rotation axis x,y,z");
  ro->add_option("--angle", rot.angle_deg, "Rotation angle in degrees")->needs(axis);
  ro->add_flag("--random", rot.random, "Draw a uniform rotation from --seed")->excludes(axis);
  ro->add_option("--interp", rot.interp, "bilinear (rgb default) or nearest (depth default)")
      ->check(CLI::IsMember({"bilinear", "nearest"}));
  ro->add_option("--bits", rot.bits, "Output bit depth for rgb")->check(CLI::IsMember({8, 16}))->capture_default_str();

  DodecaArgs dod;
  auto* dd = app.add_subcommand("split-dodeca", "Split panoramas into 12 dodecahedral pinhole views each");
  dd->add_option("--in", dod.in, "Input panoramas")->required()->check(CLI::ExistingFile);
  dd->add_option("--out", dod.out, "Output directory")->required();
  dd->add_option("--fov", dod.fov, std::string("Horizontal field of view, degrees") + kSelf)->capture_default_str();
  dd->add_option("--res", dod.res, std::string("Square view resolution") + kSelf)->check(CLI::PositiveNumber)->capture_default_str();
  dd->add_option("--bits", dod.bits, "Output bit depth")->check(CLI::IsMember({8, 16}))->capture_default_str();

  Depth2PcArgs d2p;
  auto* dp = app.add_subcommand("depth2pc", "Back-project depth maps to PLY point clouds");
  dp->add_option("--manifest", d2p.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  dp->add_option("--out", d2p.out, "Output directory, or file with --merge")->required();
  dp->add_option("--space", d2p.space, "Camera-local, world, or anchored to --anchor")
      ->check(CLI::IsMember({"local", "world", "anchor"}))
      ->capture_default_str();
  dp->add_option("--anchor", d2p.anchor, "Anchor frame index for --space anchor")->capture_default_str();
  dp->add_option("--stride", d2p.stride, "Keep every n-th pixel in x and y")->capture_default_str();
  dp->add_flag("--merge", d2p.merge, "Write one merged cloud");

  EmbedArgs emb;
  auto* em = app.add_subcommand("embed", "Dump spherical positional embeddings of a patch grid");
  em->add_option("--res", emb.res, "Image resolution WxH")->capture_default_str();
  em->add_option("--patch", emb.patch, "Patch size")->check(CLI::PositiveNumber)->capture_default_str();
  em->add_option("--dim", emb.dim, "Embedding width C")->check(CLI::PositiveNumber)->capture_default_str();
  em->add_option("--hidden", emb.hidden, std::string("Hidden width of the embedding MLP") + kSelf)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  em->add_option("--out", emb.out, "Output tensor file")->required();

  LossArgs loss;
  auto* lo = app.add_subcommand("loss", "Multi-task loss of a prediction manifest against ground truth");
  lo->add_option("--pred", loss.pred, "Prediction manifest")->required()->check(CLI::ExistingFile);
  lo->add_option("--gt", loss.gt, "Ground-truth manifest")->required()->check(CLI::ExistingFile);
  lo->add_option("--out", loss.out, "Report file (default stdout)");
  lo->add_option("--tau", loss.tau, std::string("Relative depth-edge threshold") + kSelf)->capture_default_str();
  lo->add_option("--beta", loss.beta, std::string("SmoothL1 threshold, radians") + kSelf)->capture_default_str();
  lo->add_option("--lambda-t", loss.lambda_t, "Translation weight")->capture_default_str();
  lo->add_option("--lambda-g", loss.lambda_g, "Pose term weight")->capture_default_str();
  lo->add_option("--pairs", loss.pairs, std::string("Pose pairs: all ordered pairs or anchor spokes") + kSelf)
      ->check(CLI::IsMember({"all", "anchor"}))
      ->capture_default_str();
  lo->add_option("--anchor", loss.anchor, "Anchor frame of the ground truth")->capture_default_str();

  EvalArgs ep, ed, ec;
  auto* evp = app.add_subcommand("eval-pose", "Relative pose AUC@30 and angular errors");
  evp->add_option("--pred", ep.pred, "Prediction manifest")->required()->check(CLI::ExistingFile);
  evp->add_option("--gt", ep.gt, "Ground-truth manifest")->required()->check(CLI::ExistingFile);
  evp->add_option("--out", ep.out, "Report file (default stdout)");

  ed.align = "irls";
  auto* evd = app.add_subcommand("eval-depth", "Depth AbsRel, RMSE and threshold accuracy");
  evd->add_option("--pred", ed.pred, "Prediction manifest")->required()->check(CLI::ExistingFile);
  evd->add_option("--gt", ed.gt, "Ground-truth manifest")->required()->check(CLI::ExistingFile);
  evd->add_option("--out", ed.out, "Report file (default stdout)");
  evd->add_option("--align", ed.align, "Prediction alignment before scoring")
      ->check(CLI::IsMember({"irls", "scale-shift", "none"}))
      ->capture_default_str();

  ec.align = "similarity";
  auto* evc = app.add_subcommand("eval-pc", "Point-cloud accuracy, completion and overall distance");
  evc->add_option("--pred", ec.pred, "Predicted PLY")->required()->check(CLI::ExistingFile);
  evc->add_option("--gt", ec.gt, "Ground-truth PLY")->required()->check(CLI::ExistingFile);
  evc->add_option("--out", ec.out, "Report file (default stdout)");
  evc->add_option("--voxel", ec.voxel,
                  std::string("Voxel size in meters, 0 disables; 0.25 suits city-scale scenes") + kSelf)
      ->capture_default_str();
  evc->add_option("--align", ec.align, std::string("Pre-alignment of the prediction") + kSelf)
      ->check(CLI::IsMember({"none", "similarity"}))
      ->capture_default_str();
  evc->add_option("--corr", ec.corr, "Correspondences for alignment")
      ->check(CLI::IsMember({"nearest", "index"}))
      ->capture_default_str();
  evc->add_option("--icp-iterations", ec.icp_iterations, std::string("Alignment iterations") + kSelf)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  DemoArgs demo;
  auto* df = app.add_subcommand("demo-forward", "Run the untrained toy model and write predictions");
  df->add_option("--manifest", demo.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  df->add_option("--out", demo.out, "Output directory")->required();
  df->add_option("--res", demo.res, std::string("Model input resolution WxH") + kSelf)->capture_default_str();
  df->add_option("--dim", demo.model.dim, std::string("Token width") + kSelf)->capture_default_str();
  df->add_option("--blocks", demo.model.blocks, std::string("Alternating blocks") + kSelf)->capture_default_str();
  df->add_option("--patch", demo.model.patch, "Patch size")->capture_default_str();
  df->add_option("--heads", demo.model.heads, std::string("Attention heads") + kSelf)->capture_default_str();
  df->add_flag("--no-frame-masking", demo.no_frame_masking, "Let the frame stage see all frames");
  df->add_flag("--no-global", demo.no_global, "Skip the global attention stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Context ctx{g, out, err};
  try {
    set_num_threads(g.threads);
    if (*s) return cmd_synth(ctx, synth);
    if (*au) return cmd_augment(ctx, aug);
    if (*ro) return cmd_rotate(ctx, rot);
    if (*dd) return cmd_split_dodeca(ctx, dod);
    if (*dp) return cmd_depth2pc(ctx, d2p);
    if (*em) return cmd_embed(ctx, emb);
    if (*lo) return cmd_loss(ctx, loss);
    if (*evp) return cmd_eval_pose(ctx, ep);
    if (*evd) return cmd_eval_depth(ctx, ed);
    if (*evc) return cmd_eval_pc(ctx, ec);
    if (*df) return cmd_demo_forward(ctx, demo);
  } catch (const ContractError& e) {
    error_json(err, "contract", e.what());
    return 1;
  } catch (const FormatError& e) {
    error_json(err, "format", e.what());
    return 1;
  } catch (const DomainError& e) {
    error_json(err, "domain", e.what());
    return 1;
  }
  return 2;
}

}  // namespace panogeo::cli
