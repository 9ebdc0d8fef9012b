#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lgs/channel.hpp"
#include "lgs/rng.hpp"
#include "lgs/tree.hpp"

namespace lgs {

struct RateTuple {
  double r_y = 0.0;  // nats per symbol
  double r_b = 0.0;
};

struct CodebookSize {
  std::uint64_t m = 1;
  double bits = 0.0;       // N * R in bits before capping
  bool saturated = false;  // bits exceeded the 30-bit cap; m clamped to 2^30
};

// M = ceil(2^{N R / ln 2}); the exponent is capped at 30 bits so that index
// arithmetic stays exact, with the cap reported instead of failing (large-N
// sweeps routinely exceed it and only ever touch a few codewords).
CodebookSize codebook_size(int n, double rate_nats);

struct Provenance {
  std::uint64_t y_index = 0;  // upper-layer codeword
  std::uint64_t b_index = 0;  // upper-layer sign codeword
};

// Layered codebooks, generated top-down. Codewords are addressed lazily:
// every entry is a pure function of (seed, layer, codeword index, time slot,
// sign realization), so codebooks of astronomical size cost nothing until a
// codeword is materialized.
//
// A layer-l codeword holds, for each time slot t and each sign realization
// r in [0, 2^{k_l}), one real vector over the layer-l node set. Sign
// codewords hold N i.i.d. sign vectors over the layer-l latents. Non-top
// codewords record which upper (y, b) pair generated them.
class CodebookStack {
 public:
  CodebookStack(GaussianTree tree, LayerDecomposition layers, int block_len,
                std::vector<RateTuple> rates,  // rates[l-1] feeds layer l
                SignDistribution pi, std::uint64_t seed);

  const GaussianTree& tree() const { return tree_; }
  const LayerDecomposition& layers() const { return layers_; }
  int top_layer() const { return layers_.top_layer; }
  int block_len() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  const SignDistribution& pi() const { return pi_; }

  int dim(int l) const { return (int)layers_.nodes_at[l].size(); }
  int k(int l) const { return (int)latents_[l].size(); }
  const std::vector<int>& nodes_at(int l) const { return sorted_nodes_[l]; }
  const std::vector<int>& latents_at(int l) const { return latents_[l]; }
  std::uint64_t m_y(int l) const { return size_y_[l].m; }
  std::uint64_t m_b(int l) const { return size_b_[l].m; }
  const CodebookSize& y_size(int l) const { return size_y_[l]; }
  const CodebookSize& b_size(int l) const { return size_b_[l]; }
  // channel generating layer l from layer l+1, l in [0, L-1]
  const StageChannel& channel(int l) const { return channels_[l]; }

  // N x k_l matrix of +-1 entries
  Eigen::MatrixXi sign_codeword(int l, std::uint64_t m) const;
  // upper-layer indices that generated codeword i of layer l < L
  Provenance provenance(int l, std::uint64_t i) const;
  // codeword i at fixed sign realization r: N x dim(l)
  Eigen::MatrixXd codeword_block(int l, std::uint64_t i, std::uint64_t r) const;
  // codeword i resolved against sign codeword m (per-slot realization)
  Eigen::MatrixXd resolved(int l, std::uint64_t i, std::uint64_t m) const;

  nlohmann::json manifest() const;
  // materialized binary dump (all codewords, all realizations); refuses
  // codebooks above the materialization guard
  void save(std::ostream& out) const;

 private:
  Eigen::VectorXd content_row(int l, std::uint64_t i, int t, std::uint64_t r,
                              const Eigen::MatrixXd* upper_resolved,
                              const Eigen::MatrixXi* upper_signs) const;

  GaussianTree tree_;
  LayerDecomposition layers_;
  int n_;
  std::vector<RateTuple> rates_;
  SignDistribution pi_;
  std::uint64_t seed_;
  RngStream base_;
  std::vector<std::vector<int>> sorted_nodes_;  // per layer
  std::vector<std::vector<int>> latents_;       // per layer, sorted
  std::vector<CodebookSize> size_y_, size_b_;   // per layer (index = layer)
  std::vector<StageChannel> channels_;          // index l: layer l+1 -> l
  Eigen::MatrixXd top_chol_;                    // L factor of top covariance
};

}  // namespace lgs
