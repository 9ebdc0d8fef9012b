#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lgs/tree.hpp"

namespace lgs {

// The affine synthesis channel producing layer l from layer l+1:
//   out = A(b) * in + z,   z ~ N(0, diag(sigma^2)).
// Each output node regresses on its upper-layer neighbors; for a single
// parent with edge weight gamma this reduces to weight gamma and noise
// variance 1 - gamma^2. A mirror edge gives a deterministic copy row
// (weight 1, sigma 0). Weights are stored unsigned; signs enter through
// signed_matrix.
struct StageChannel {
  int layer = 0;                            // layer being generated
  std::vector<int> out_nodes;               // node indices at layer l, sorted
  std::vector<int> in_nodes;                // node indices at layer l+1, sorted
  std::vector<std::vector<int>> parent_pos; // per out row: columns into in_nodes
  std::vector<Eigen::VectorXd> weights;     // per out row: unsigned weights
  Eigen::VectorXd sigma;                    // noise std per out row
  std::vector<char> mirror_copy;            // rows with sigma == 0

  // Full dense connection matrix under a sign assignment: entry (r, c) is
  // s_out(r) * s_in(c) * weight, where observables carry sign +1.
  Eigen::MatrixXd signed_matrix(const GaussianTree& t, const SignAssignment& b) const;
};

// Builds the channel for layer l in [0, L-1]. Requires that every node at
// layer l has all of its strictly-upper neighbors at exactly layer l+1
// (hyper-chain form; run transforms first if needed).
StageChannel make_stage_channel(const GaussianTree& t, const LayerDecomposition& d,
                                int l);

// Latent node indices at layer l, sorted ascending; bit j of a realization
// index refers to the j-th entry.
std::vector<int> layer_latents(const GaussianTree& t, const LayerDecomposition& d,
                               int l);

// Overwrites the signs of layer-l latents from the bits of realization r
// (bit set means +1). Other entries are left untouched.
void set_layer_signs(SignAssignment& b, const GaussianTree& t,
                     const LayerDecomposition& d, int l, std::uint64_t r);

}  // namespace lgs
