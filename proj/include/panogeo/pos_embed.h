#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "panogeo/sphere_geom.h"

namespace panogeo {

// Patch grid over an equirectangular image; centers are the angles of each
// patch's central (fractional) pixel.
struct PatchGrid {
  int patch = 0;
  int gh = 0;
  int gw = 0;
  std::vector<SphericalCoord> centers;  // row-major, gh * gw

  const SphericalCoord& center(int row, int col) const {
    return centers[static_cast<size_t>(row) * gw + col];
  }
};

// Throws ContractError unless patch divides both dimensions.
PatchGrid make_patch_grid(int height, int width, int patch);

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

// Feed-forward network with GELU between layers and a linear output layer.
struct MlpParams {
  std::vector<DenseLayer> layers;

  int in_dim() const { return static_cast<int>(layers.front().w.cols()); }
  int out_dim() const { return static_cast<int>(layers.back().w.rows()); }
};

inline constexpr int kEmbedHiddenDefault = 64;
inline constexpr int kEmbedDimDefault = 768;

// Gaussian weights scaled by 1/sqrt(fan_in), zero biases.
MlpParams make_mlp_params(const std::vector<int>& sizes, std::uint64_t seed);
// The 4 -> hidden -> dim embedding network.
MlpParams make_embed_params(std::uint64_t seed, int dim = kEmbedDimDefault,
                            int hidden = kEmbedHiddenDefault);

// Exact (erf) GELU and the supremum of its derivative, attained at sqrt(2).
double gelu(double x);
double gelu_lipschitz();

// [sin theta, cos theta, sin phi, cos phi]
Eigen::Vector4d spherical_fourier(const SphericalCoord& c);

Eigen::VectorXd mlp_forward(const Eigen::VectorXd& v, const MlpParams& params);
inline Eigen::VectorXd embed(const Eigen::VectorXd& v, const MlpParams& params) {
  return mlp_forward(v, params);
}

// Upper bound on the Lipschitz constant of the network in the Euclidean
// norm: product of layer spectral norms times the GELU slope bound per
// hidden activation.
double lipschitz_bound(const MlpParams& params);

struct EmbeddingGrid {
  int gh = 0;
  int gw = 0;
  int dim = 0;
  Eigen::MatrixXd values;  // (gh * gw) x dim, patch-major

  Eigen::VectorXd at(int row, int col) const {
    return values.row(static_cast<Eigen::Index>(row) * gw + col).transpose();
  }
};

EmbeddingGrid grid_embeddings(const PatchGrid& grid, const MlpParams& params);

}  // namespace panogeo
