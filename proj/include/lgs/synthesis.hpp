#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lgs/codebook.hpp"
#include "lgs/rng.hpp"
#include "lgs/tree.hpp"

namespace lgs {

// One use of the affine synthesis channel: A*y plus independent noise with
// the given per-component standard deviations.
Eigen::VectorXd channel_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& sigma_z, RngStream& rng);

struct ChainEntry {
  int layer = 0;
  std::uint64_t y_index = 0;
  std::uint64_t b_index = 0;
};

struct SynthesisOutput {
  // observable sequences, one column per observable in ascending node-index
  // order over the whole tree (observables may live at any layer)
  Eigen::MatrixXd x;
  std::vector<ChainEntry> chain;            // layers 1..L, in order
  std::vector<Eigen::MatrixXd> resolved;    // per layer 1..L: N x dim(l)
  std::vector<Eigen::MatrixXi> signs;       // per layer 1..L: N x k_l
};

// Algorithm: pick uniform (codeword, sign-codeword) indices at layer 1, walk
// the recorded provenance up to the top layer, then run the final channel
// pass into layer 0 with fresh noise.
SynthesisOutput synthesize_one(const CodebookStack& cb, RngStream& rng);

struct BatchResult {
  std::vector<SynthesisOutput> outputs;
  Eigen::MatrixXd pooled;            // (draws * N) x n_observables
  std::vector<NodeId> observable_ids;
};

// Independent draws over fixed codebooks; draw d uses a substream derived
// from (seed, d), so results do not depend on evaluation order.
BatchResult synthesize_batch(const CodebookStack& cb, int draws,
                             std::uint64_t seed);

}  // namespace lgs
