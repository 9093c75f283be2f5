#pragma once

// Untrained, seeded, desk-scale replica of the alternating-attention forward
// pass. It exists to exercise structural properties (set equivariance, frame
// masking, head wiring) rather than to predict anything useful. The image
// encoder is a seeded linear patch projection.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

#include "panogeo/pos_embed.h"
#include "panogeo/rigid_motion.h"
#include "panogeo/sphere_geom.h"

namespace panogeo {

struct ModelConfig {
  int dim = 32;
  int blocks = 2;
  int patch = 14;
  int heads = 4;
  int ffn_mult = 2;
  int embed_hidden = kEmbedHiddenDefault;
  std::uint64_t seed = 0;
};

struct AttentionParams {
  Eigen::MatrixXd wq, wk, wv, wo;  // dim x dim each
};

struct LayerNormParams {
  Eigen::VectorXd gamma, beta;
};

struct AttentionStage {
  LayerNormParams norm_attn;
  AttentionParams attn;
  LayerNormParams norm_ffn;
  DenseLayer ffn_in;   // (ffn_mult * dim) x dim
  DenseLayer ffn_out;  // dim x (ffn_mult * dim)
};

struct BlockParams {
  AttentionStage frame;   // attention restricted to one frame
  AttentionStage global;  // attention over every frame's tokens
};

struct ModelParams {
  ModelConfig config;
  DenseLayer patch_proj;  // dim x (patch * patch * 3)
  MlpParams pos_mlp;      // 4 -> hidden -> dim
  std::vector<BlockParams> blocks;
  LayerNormParams final_norm;
  std::array<MlpParams, 3> adaptors;  // pose, depth, global points
  DenseLayer pose_head;    // 9 x (2 * dim)
  DenseLayer depth_head;   // 1 x (2 * dim)
  DenseLayer global_head;  // 3 x (2 * dim)
};

// Fully determined by the config (including its seed).
ModelParams make_model_params(const ModelConfig& config);

// Tokens of all frames stacked frame-major: row f * gh * gw + r * gw + c.
struct TokenSet {
  int frames = 0;
  int gh = 0;
  int gw = 0;
  int dim = 0;
  Eigen::MatrixXd tokens;
  std::vector<int> frame_ids;  // one per row

  int tokens_per_frame() const { return gh * gw; }
  Eigen::MatrixXd frame_tokens(int f) const {
    return tokens.middleRows(static_cast<Eigen::Index>(f) * tokens_per_frame(),
                             tokens_per_frame());
  }
};

struct PatchTokens {
  TokenSet tokens;
  PatchGrid grid;
};

// Linear patch projection plus spherical positional embedding. Images must
// share one resolution divisible by the patch size; single-channel images
// are replicated to three channels.
PatchTokens patchify(const std::vector<EquirectImage>& images, const ModelParams& params);

struct ForwardOptions {
  bool frame_masking = true;     // restrict the first stage to one frame
  bool global_attention = true;  // false replaces the global stage by identity
};

TokenSet alternating_forward(const TokenSet& ts, const ModelParams& params,
                             const ForwardOptions& options = {});

struct FramePrediction {
  Pose pose;
  DepthMap depth;            // per-patch values upsampled nearest to pixels
  PointCloud local_points;   // spherical ray model applied to depth
  PointCloud global_points;  // one per patch, row-major
};

// 6D Gram-Schmidt rotation from v[0:3], v[3:6]; translation v[6:9].
Pose decode_pose(const Eigen::Matrix<double, 9, 1>& v);

std::vector<FramePrediction> decode_heads(const TokenSet& ts, const PatchGrid& grid,
                                          const ModelParams& params);

std::vector<FramePrediction> forward(const std::vector<EquirectImage>& images,
                                     const ModelParams& params,
                                     const ForwardOptions& options = {});

}  // namespace panogeo
