#pragma once

#include <vector>

#include "lgs/rng.hpp"
#include "lgs/tree.hpp"

namespace fixtures {

using lgs::GaussianTree;
using lgs::NodeKind;
using lgs::TreeEdge;
using lgs::TreeNode;

// three observable leaves around one latent hub
inline GaussianTree star(double g1 = 0.6, double g2 = 0.6, double g3 = 0.6) {
  return GaussianTree(
      {{1, NodeKind::Observable},
       {2, NodeKind::Observable},
       {3, NodeKind::Observable},
       {10, NodeKind::Latent}},
      {{1, 10, g1}, {2, 10, g2}, {3, 10, g3}});
}

// four observables, two adjacent latents with two leaves each
inline GaussianTree latent_pair(double g = 0.6, double g12 = 0.5) {
  return GaussianTree(
      {{1, NodeKind::Observable},
       {2, NodeKind::Observable},
       {3, NodeKind::Observable},
       {4, NodeKind::Observable},
       {10, NodeKind::Latent},
       {11, NodeKind::Latent}},
      {{1, 10, g}, {2, 10, g}, {3, 11, g}, {4, 11, g}, {10, 11, g12}});
}

// two-layer tree: two adjacent top latents, four mid latents, eight leaves
inline GaussianTree two_layer() {
  std::vector<TreeNode> nodes;
  for (int i = 1; i <= 8; ++i) nodes.push_back({i, NodeKind::Observable});
  for (int i = 11; i <= 14; ++i) nodes.push_back({i, NodeKind::Latent});
  nodes.push_back({21, NodeKind::Latent});
  nodes.push_back({22, NodeKind::Latent});
  std::vector<TreeEdge> edges = {
      {1, 11, 0.6},  {2, 11, 0.7},  {3, 12, 0.5},  {4, 12, 0.6},
      {5, 13, 0.7},  {6, 13, 0.6},  {7, 14, 0.5},  {8, 14, 0.8},
      {11, 21, 0.6}, {12, 21, 0.5}, {13, 22, 0.7}, {14, 22, 0.6},
      {21, 22, 0.4}};
  return GaussianTree(std::move(nodes), std::move(edges));
}

// two-layer tree with an internal observable (node 6) bridging three latents
inline GaussianTree internal_obs() {
  std::vector<TreeNode> nodes;
  for (int i : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10})
    nodes.push_back({i, NodeKind::Observable});
  for (int i : {11, 12, 13, 14, 15, 21}) nodes.push_back({i, NodeKind::Latent});
  std::vector<TreeEdge> edges = {
      {1, 11, 0.6},  {2, 11, 0.7},          // leaves of 11
      {3, 12, 0.5},                         // leaf of 12
      {4, 13, 0.7},  {5, 13, 0.6},          // leaves of 13
      {7, 14, 0.5},  {8, 14, 0.8},          // leaves of 14
      {9, 15, 0.6},  {10, 15, 0.7},         // leaves of 15
      {6, 12, 0.55}, {6, 13, 0.65}, {6, 14, 0.45},  // internal observable
      {11, 21, 0.6}, {12, 21, 0.5}, {15, 21, 0.7}};
  return GaussianTree(std::move(nodes), std::move(edges));
}

// intra-layer edge: latents 13 and 14 are adjacent at layer 1
inline GaussianTree cross_edge() {
  std::vector<TreeNode> nodes;
  for (int i = 1; i <= 7; ++i) nodes.push_back({i, NodeKind::Observable});
  for (int i : {11, 12, 13, 14, 21}) nodes.push_back({i, NodeKind::Latent});
  std::vector<TreeEdge> edges = {
      {1, 11, 0.6},  {2, 11, 0.7}, {3, 12, 0.5},  {4, 12, 0.6},
      {5, 13, 0.7},  {6, 14, 0.6}, {7, 14, 0.5},
      {11, 21, 0.6}, {12, 21, 0.5}, {13, 21, 0.7}, {13, 14, 0.55}};
  return GaussianTree(std::move(nodes), std::move(edges));
}

// random minimal tree whose observables are all leaves; k latents in
// [1, k_max], extra leaves added up to n_max observables
inline GaussianTree random_all_leaf(lgs::RngStream& rng, int k_max, int n_max) {
  int k = 1 + (int)rng.below((std::uint64_t)k_max);
  std::vector<TreeNode> nodes;
  std::vector<TreeEdge> edges;
  std::vector<int> degree(k, 0);
  auto gamma = [&rng]() {
    double g = 0.2 + 0.7 * rng.uniform();
    return rng.uniform() < 0.5 ? -g : g;
  };
  for (int i = 0; i < k; ++i) nodes.push_back({100 + i, NodeKind::Latent});
  for (int i = 1; i < k; ++i) {
    int p = (int)rng.below((std::uint64_t)i);
    edges.push_back({100 + i, 100 + p, gamma()});
    ++degree[i];
    ++degree[p];
  }
  int next_obs = 1;
  for (int i = 0; i < k; ++i) {
    while (degree[i] < 3) {
      nodes.push_back({next_obs, NodeKind::Observable});
      edges.push_back({next_obs, 100 + i, gamma()});
      ++next_obs;
      ++degree[i];
    }
  }
  while (next_obs - 1 < n_max && rng.uniform() < 0.5) {
    int i = (int)rng.below((std::uint64_t)k);
    nodes.push_back({next_obs, NodeKind::Observable});
    edges.push_back({next_obs, 100 + i, gamma()});
    ++next_obs;
    ++degree[i];
  }
  // a single latent needs at least 3 leaves to be minimal; guaranteed above
  return GaussianTree(std::move(nodes), std::move(edges));
}

}  // namespace fixtures
