#include "panogeo/pos_embed.h"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "panogeo/error.h"
#include "panogeo/parallel.h"

namespace panogeo {

PatchGrid make_patch_grid(int height, int width, int patch) {
  if (patch < 1 || height % patch != 0 || width % patch != 0) {
    throw ContractError("patch size " + std::to_string(patch) +
                        " does not divide " + std::to_string(width) + "x" +
                        std::to_string(height));
  }
  PatchGrid g;
  g.patch = patch;
  g.gh = height / patch;
  g.gw = width / patch;
  g.centers.reserve(static_cast<size_t>(g.gh) * g.gw);
  const double half = (patch - 1) / 2.0;
  for (int r = 0; r < g.gh; ++r) {
    for (int c = 0; c < g.gw; ++c) {
      g.centers.push_back(
          pixel_to_angles(c * patch + half, r * patch + half, width, height));
    }
  }
  return g;
}

MlpParams make_mlp_params(const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw ContractError("MLP needs at least two layer sizes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MlpParams p;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    if (in < 1 || out < 1) throw ContractError("MLP layer sizes must be positive");
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < out; ++i) {
      for (int j = 0; j < in; ++j) layer.w(i, j) = scale * normal(rng);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams make_embed_params(std::uint64_t seed, int dim, int hidden) {
  return make_mlp_params({4, hidden, dim}, seed);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_lipschitz() {
  // d/dx [x Phi(x)] = Phi(x) + x phi(x), maximized at x = sqrt(2).
  const double x = std::numbers::sqrt2;
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi);
  return cdf + x * pdf;
}

Eigen::Vector4d spherical_fourier(const SphericalCoord& c) {
  return Eigen::Vector4d(std::sin(c.theta), std::cos(c.theta), std::sin(c.phi),
                         std::cos(c.phi));
}

Eigen::VectorXd mlp_forward(const Eigen::VectorXd& v, const MlpParams& params) {
  if (params.layers.empty()) throw ContractError("empty MLP");
  if (v.size() != params.in_dim()) {
    throw ContractError("MLP input has dimension " + std::to_string(v.size()) +
                        ", expected " + std::to_string(params.in_dim()));
  }
  Eigen::VectorXd h = v;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    h = layer.w * h + layer.b;
    if (l + 1 < params.layers.size()) h = h.unaryExpr([](double x) { return gelu(x); });
  }
  return h;
}

double lipschitz_bound(const MlpParams& params) {
  double bound = 1.0;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(params.layers[l].w);
    bound *= svd.singularValues()(0);
    if (l + 1 < params.layers.size()) bound *= gelu_lipschitz();
  }
  return bound;
}

EmbeddingGrid grid_embeddings(const PatchGrid& grid, const MlpParams& params) {
  EmbeddingGrid out;
  out.gh = grid.gh;
  out.gw = grid.gw;
  out.dim = params.out_dim();
  out.values.resize(static_cast<Eigen::Index>(grid.centers.size()), out.dim);
  parallel_for(0, static_cast<int>(grid.centers.size()), [&](int i) {
    out.values.row(i) = mlp_forward(spherical_fourier(grid.centers[i]), params).transpose();
  });
  return out;
}

}  // namespace panogeo
