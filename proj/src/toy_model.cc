#include "panogeo/toy_model.h"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

#include "panogeo/error.h"

namespace panogeo {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ParamSampler {
 public:
  explicit ParamSampler(std::uint64_t seed) : rng_(seed) {}

  Matrix weights(int rows, int cols) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = scale * normal_(rng_);
    }
    return m;
  }

  DenseLayer dense(int out, int in) { return {weights(out, in), Vector::Zero(out)}; }

  std::uint64_t next_seed() { return rng_(); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

LayerNormParams unit_norm(int dim) {
  return {Vector::Ones(dim), Vector::Zero(dim)};
}

AttentionStage make_stage(ParamSampler& s, const ModelConfig& c) {
  AttentionStage st;
  st.norm_attn = unit_norm(c.dim);
  st.attn = {s.weights(c.dim, c.dim), s.weights(c.dim, c.dim), s.weights(c.dim, c.dim),
             s.weights(c.dim, c.dim)};
  st.norm_ffn = unit_norm(c.dim);
  st.ffn_in = s.dense(c.ffn_mult * c.dim, c.dim);
  st.ffn_out = s.dense(c.dim, c.ffn_mult * c.dim);
  return st;
}

Matrix layer_norm(const Matrix& x, const LayerNormParams& p) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    out.row(r) = (((x.row(r).array() - mean) * inv).transpose() * p.gamma.array() +
                  p.beta.array())
                     .transpose();
  }
  return out;
}

// Row-wise dense layer: x (n x in) -> (n x out).
Matrix apply_dense(const Matrix& x, const DenseLayer& l) {
  Matrix y = x * l.w.transpose();
  y.rowwise() += l.b.transpose();
  return y;
}

Matrix apply_mlp(const Matrix& x, const MlpParams& p) {
  Matrix h = x;
  for (size_t i = 0; i < p.layers.size(); ++i) {
    h = apply_dense(h, p.layers[i]);
    if (i + 1 < p.layers.size()) h = h.unaryExpr([](double v) { return gelu(v); });
  }
  return h;
}

// Multi-head self-attention among the rows of x.
Matrix self_attention(const Matrix& x, const AttentionParams& p, int heads) {
  const Eigen::Index dim = x.cols();
  const Eigen::Index dh = dim / heads;
  const Matrix q = x * p.wq.transpose();
  const Matrix k = x * p.wk.transpose();
  const Matrix v = x * p.wv.transpose();
  Matrix out(x.rows(), dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * dh, dh);
    const auto kh = k.middleCols(h * dh, dh);
    const auto vh = v.middleCols(h * dh, dh);
    Matrix scores = (qh * kh.transpose()) * scale;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double mx = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - mx).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    out.middleCols(h * dh, dh) = scores * vh;
  }
  return out * p.wo.transpose();
}

// Pre-norm residual attention + feed-forward on a block of rows.
Matrix run_stage(const Matrix& x, const AttentionStage& st, int heads) {
  Matrix y = x + self_attention(layer_norm(x, st.norm_attn), st.attn, heads);
  Matrix hidden = apply_dense(layer_norm(y, st.norm_ffn), st.ffn_in);
  hidden = hidden.unaryExpr([](double v) { return gelu(v); });
  return y + apply_dense(hidden, st.ffn_out);
}

double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

}  // namespace

ModelParams make_model_params(const ModelConfig& c) {
  if (c.dim < 1 || c.heads < 1 || c.dim % c.heads != 0) {
    throw ContractError("model dim must be a positive multiple of the head count");
  }
  if (c.blocks < 0 || c.patch < 1 || c.ffn_mult < 1) {
    throw ContractError("invalid model configuration");
  }
  ParamSampler s(c.seed);
  ModelParams p;
  p.config = c;
  p.patch_proj = s.dense(c.dim, c.patch * c.patch * 3);
  p.pos_mlp = make_mlp_params({4, c.embed_hidden, c.dim}, s.next_seed());
  for (int b = 0; b < c.blocks; ++b) {
    BlockParams bp;
    bp.frame = make_stage(s, c);
    bp.global = make_stage(s, c);
    p.blocks.push_back(std::move(bp));
  }
  p.final_norm = unit_norm(c.dim);
  for (auto& a : p.adaptors) a = make_mlp_params({c.dim, c.dim, c.dim}, s.next_seed());
  p.pose_head = s.dense(9, 2 * c.dim);
  p.pose_head.b << 1, 0, 0, 0, 1, 0, 0, 0, 0;
  p.depth_head = s.dense(1, 2 * c.dim);
  p.depth_head.b(0) = 1.0;
  p.global_head = s.dense(3, 2 * c.dim);
  return p;
}

PatchTokens patchify(const std::vector<EquirectImage>& images, const ModelParams& params) {
  if (images.empty()) throw ContractError("forward needs at least one image");
  const int w = images.front().width();
  const int h = images.front().height();
  for (const auto& im : images) {
    if (im.width() != w || im.height() != h) {
      throw ContractError("all images in one forward call must share a resolution");
    }
  }
  const int p = params.config.patch;
  PatchTokens out;
  out.grid = make_patch_grid(h, w, p);
  const EmbeddingGrid pe = grid_embeddings(out.grid, params.pos_mlp);

  TokenSet& ts = out.tokens;
  ts.frames = static_cast<int>(images.size());
  ts.gh = out.grid.gh;
  ts.gw = out.grid.gw;
  ts.dim = params.config.dim;
  const int per_frame = ts.gh * ts.gw;
  Matrix flat(static_cast<Eigen::Index>(ts.frames) * per_frame, p * p * 3);
  ts.frame_ids.resize(flat.rows());
  for (int f = 0; f < ts.frames; ++f) {
    const EquirectImage& im = images[f];
    for (int r = 0; r < ts.gh; ++r) {
      for (int c = 0; c < ts.gw; ++c) {
        const Eigen::Index row = static_cast<Eigen::Index>(f) * per_frame + r * ts.gw + c;
        ts.frame_ids[row] = f;
        int k = 0;
        for (int py = 0; py < p; ++py) {
          for (int px = 0; px < p; ++px) {
            for (int ch = 0; ch < 3; ++ch) {
              const int src_ch = im.channels() == 3 ? ch : 0;
              flat(row, k++) = im.at(c * p + px, r * p + py, src_ch);
            }
          }
        }
      }
    }
  }
  ts.tokens = apply_dense(flat, params.patch_proj);
  for (int f = 0; f < ts.frames; ++f) {
    ts.tokens.middleRows(static_cast<Eigen::Index>(f) * per_frame, per_frame) += pe.values;
  }
  return out;
}

TokenSet alternating_forward(const TokenSet& ts, const ModelParams& params,
                             const ForwardOptions& options) {
  TokenSet out = ts;
  const int heads = params.config.heads;
  const int per_frame = ts.tokens_per_frame();
  Matrix x = ts.tokens;
  for (const BlockParams& block : params.blocks) {
    if (options.frame_masking) {
      for (int f = 0; f < ts.frames; ++f) {
        const Eigen::Index start = static_cast<Eigen::Index>(f) * per_frame;
        x.middleRows(start, per_frame) =
            run_stage(x.middleRows(start, per_frame), block.frame, heads);
      }
    } else {
      x = run_stage(x, block.frame, heads);
    }
    if (options.global_attention) x = run_stage(x, block.global, heads);
  }
  out.tokens = layer_norm(x, params.final_norm);
  return out;
}

Pose decode_pose(const Eigen::Matrix<double, 9, 1>& v) {
  Vec3 a1 = v.segment<3>(0);
  Vec3 a2 = v.segment<3>(3);
  if (!(a1.norm() > 1e-12)) a1 = Vec3::UnitX();
  const Vec3 b1 = a1.normalized();
  Vec3 u2 = a2 - b1.dot(a2) * b1;
  if (!(u2.norm() > 1e-12)) {
    // Any direction orthogonal to b1.
    const Vec3 helper = std::abs(b1.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    u2 = helper - b1.dot(helper) * b1;
  }
  const Vec3 b2 = u2.normalized();
  Mat3 r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b1.cross(b2);
  return Pose{Rotation::project(r), v.segment<3>(6)};
}

std::vector<FramePrediction> decode_heads(const TokenSet& ts, const PatchGrid& grid,
                                          const ModelParams& params) {
  if (grid.gh != ts.gh || grid.gw != ts.gw) throw ContractError("grid/token shape mismatch");
  const EmbeddingGrid pe = grid_embeddings(grid, params.pos_mlp);
  std::array<Matrix, 3> adapted;
  for (int k = 0; k < 3; ++k) adapted[k] = apply_mlp(pe.values, params.adaptors[k]);

  const int per_frame = ts.tokens_per_frame();
  std::vector<FramePrediction> out;
  out.reserve(ts.frames);
  for (int f = 0; f < ts.frames; ++f) {
    const Matrix tok = ts.frame_tokens(f);
    auto features = [&](int k) {
      Matrix m(per_frame, 2 * ts.dim);
      m << tok, adapted[k];
      return m;
    };

    const Matrix pooled = features(0).colwise().mean();
    const Matrix pose_vec = apply_dense(pooled, params.pose_head);
    const Pose pose = decode_pose(pose_vec.row(0).transpose());

    const Matrix depth_raw = apply_dense(features(1), params.depth_head);
    const int p = grid.patch;
    DepthMap depth(ts.gw * p, ts.gh * p);
    for (int y = 0; y < depth.height(); ++y) {
      for (int x = 0; x < depth.width(); ++x) {
        depth.set(x, y, softplus(depth_raw((y / p) * ts.gw + x / p, 0)) + 1e-6);
      }
    }

    const Matrix glob = apply_dense(features(2), params.global_head);
    std::vector<Vec3> gpts(per_frame);
    for (int i = 0; i < per_frame; ++i) gpts[i] = glob.row(i).transpose();

    out.push_back(FramePrediction{pose, depth, depth_to_local_points(depth),
                                  PointCloud(CloudFrame::kAnchorWorld, std::move(gpts))});
  }
  return out;
}

std::vector<FramePrediction> forward(const std::vector<EquirectImage>& images,
                                     const ModelParams& params,
                                     const ForwardOptions& options) {
  const PatchTokens pt = patchify(images, params);
  return decode_heads(alternating_forward(pt.tokens, params, options), pt.grid, params);
}

}  // namespace panogeo
