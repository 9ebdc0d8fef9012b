#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lgs {

using NodeId = int;

enum class NodeKind { Observable, Latent, Pseudo };

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TreeNode {
  NodeId id;
  NodeKind kind;
};

struct TreeEdge {
  NodeId u, v;
  double gamma;
  bool mirror = false;  // deterministic copy edge created by pseudo insertion
};

struct AdjEntry {
  int nbr;  // node index
  double gamma;
  bool mirror;
};

// Latent Gaussian tree: unit-variance zero-mean variables on a tree, edge
// weights are correlation magnitudes; correlation signs live in
// SignAssignment, not here. Immutable after construction.
class GaussianTree {
 public:
  GaussianTree(std::vector<TreeNode> nodes, std::vector<TreeEdge> edges);

  static GaussianTree parse(const nlohmann::json& doc);
  static GaussianTree parse_file(const std::string& path);
  nlohmann::json to_json() const;

  int size() const { return static_cast<int>(nodes_.size()); }
  const TreeNode& node(int idx) const { return nodes_[idx]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int index_of(NodeId id) const;
  const std::vector<AdjEntry>& adj(int idx) const { return adj_[idx]; }
  const std::vector<TreeEdge>& edges() const { return edges_; }

  bool is_latent(int idx) const { return nodes_[idx].kind != NodeKind::Observable; }
  std::vector<int> observable_indices() const;
  std::vector<int> latent_indices() const;  // includes pseudo nodes
  std::vector<NodeId> observable_ids() const;
  int latent_count() const;
  int degree(int idx) const { return static_cast<int>(adj_[idx].size()); }

  // every latent node has >= 3 neighbors
  bool is_minimal() const;

  // node indices from a to b inclusive
  std::vector<int> path(int a, int b) const;
  // the unique node lying on all three pairwise paths
  int median(int a, int b, int c) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<AdjEntry>> adj_;
  std::map<NodeId, int> index_;
};

// Assignment of nodes to synthesis layers. Layer 0 is the first-synthesized
// (bottom) layer; top_layer is L. Before transforms, a latent node's layer is
// its shortest-path edge distance to the observable set and all observables
// sit at layer 0.
struct LayerDecomposition {
  std::vector<int> layer_of;                // by node index
  int top_layer = 0;                        // L
  std::vector<std::vector<int>> nodes_at;   // layer -> sorted node indices
  std::vector<int> latent_count_at;         // k_l per layer

  void rebuild_from_layer_of(const GaussianTree& t);
};

LayerDecomposition assign_layers(const GaussianTree& t);

// One sign value in {-1,+1} per node index; observables are pinned to +1.
struct SignAssignment {
  std::vector<int> s;

  static SignAssignment all_plus(const GaussianTree& t);
  int operator[](int idx) const { return s[idx]; }
};

// Independent Bernoulli sign parameters pi = p(B = +1) per latent node.
struct SignDistribution {
  std::vector<double> pi;  // by node index; ignored for observables

  static SignDistribution uniform(const GaussianTree& t);
  static SignDistribution constant(const GaussianTree& t, double p);
  double weight(const GaussianTree& t, const SignAssignment& b) const;
  void validate(const GaussianTree& t) const;
};

// All 2^k sign assignments over the latent nodes of t, in bit order over
// latent indices (bit 0 = lowest latent index; bit set means +1).
std::vector<SignAssignment> enumerate_signs(const GaussianTree& t);
SignAssignment sign_from_bits(const GaussianTree& t, std::uint64_t bits);

}  // namespace lgs
