#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lgs/tree.hpp"

namespace lgs {

struct TransformRecord {
  enum class Kind { PseudoNode, LayerMove };
  Kind kind;
  std::vector<NodeId> affected;    // nodes touched (moved, or clique members)
  std::vector<NodeId> created;     // new node ids (pseudo insertion)
  NodeId mirrored = -1;            // source observable for a pseudo node
  std::vector<int> new_layers;     // parallel to affected, for layer moves
};

struct TransformLog {
  std::vector<TransformRecord> records;

  bool empty() const { return records.empty(); }
  void append(const TransformLog& other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
  }
  nlohmann::json to_json() const;
};

struct TransformResult {
  GaussianTree tree;
  LayerDecomposition layers;
  TransformLog log;
};

// Replaces every internal (degree >= 2) observable x by a fresh pseudo latent
// node carrying all of x's edges; x is reattached to the pseudo node through
// a deterministic mirror edge. The observable marginal is preserved exactly.
TransformResult insert_pseudo_nodes(const GaussianTree& t,
                                    const LayerDecomposition& d);

// Re-assigns layers so that no two nodes outside the top layer share a layer
// while being adjacent: nodes are staged by their distance from the top node
// set, with ties promoted into the top set. Pure relabeling; the tree itself
// is unchanged.
TransformResult reorder_layers(const GaussianTree& t, const LayerDecomposition& d);

// Pseudo insertion to fixpoint followed by reordering; output satisfies
// check_hyper_chain. Iteration capped at the node count.
TransformResult normalize_for_synthesis(const GaussianTree& t,
                                        const LayerDecomposition& d);

struct HyperChainReport {
  bool ok = true;
  std::vector<std::string> problems;
};

// Structural preconditions for layered synthesis: intra-layer edges only at
// the top layer, every non-top node has all upper neighbors exactly one layer
// above, and every node below the top has at least one upper neighbor.
HyperChainReport check_hyper_chain(const GaussianTree& t,
                                   const LayerDecomposition& d);

}  // namespace lgs
