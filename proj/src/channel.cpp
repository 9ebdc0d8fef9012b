#include "lgs/channel.hpp"

#include <algorithm>
#include <cmath>

#include "lgs/covariance.hpp"

namespace lgs {

Eigen::MatrixXd StageChannel::signed_matrix(const GaussianTree& t,
                                            const SignAssignment& b) const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(out_nodes.size(), in_nodes.size());
  for (std::size_t r = 0; r < out_nodes.size(); ++r) {
    int sv = t.is_latent(out_nodes[r]) ? b[out_nodes[r]] : 1;
    for (Eigen::Index j = 0; j < weights[r].size(); ++j) {
      int p = in_nodes[parent_pos[r][j]];
      int sp = t.is_latent(p) ? b[p] : 1;
      A(r, parent_pos[r][j]) = sv * sp * weights[r](j);
    }
  }
  return A;
}

StageChannel make_stage_channel(const GaussianTree& t, const LayerDecomposition& d,
                                int l) {
  if (l < 0 || l >= d.top_layer)
    throw ValidationError("channel layer out of range");
  StageChannel ch;
  ch.layer = l;
  ch.out_nodes = d.nodes_at[l];
  ch.in_nodes = d.nodes_at[l + 1];
  std::sort(ch.out_nodes.begin(), ch.out_nodes.end());
  std::sort(ch.in_nodes.begin(), ch.in_nodes.end());

  ch.sigma.resize(ch.out_nodes.size());
  for (std::size_t r = 0; r < ch.out_nodes.size(); ++r) {
    int v = ch.out_nodes[r];
    std::vector<int> parents;
    std::vector<double> gammas;
    bool mirror = false;
    for (const AdjEntry& e : t.adj(v)) {
      if (d.layer_of[e.nbr] <= l) continue;
      if (d.layer_of[e.nbr] != l + 1)
        throw ValidationError("upper neighbor skips a layer; normalize first");
      parents.push_back(e.nbr);
      gammas.push_back(e.gamma);
      mirror = mirror || e.mirror;
    }
    if (parents.empty())
      throw ValidationError("node below the top layer has no upper neighbor");
    std::vector<int> pos;
    for (int p : parents) {
      auto it = std::lower_bound(ch.in_nodes.begin(), ch.in_nodes.end(), p);
      pos.push_back(static_cast<int>(it - ch.in_nodes.begin()));
    }
    ch.parent_pos.push_back(std::move(pos));
    if (mirror) {
      if (parents.size() != 1)
        throw ValidationError("mirror copy must have a single parent");
      ch.weights.emplace_back(Eigen::VectorXd::Ones(1));
      ch.sigma(r) = 0.0;
      ch.mirror_copy.push_back(1);
      continue;
    }
    auto S = marginal_covariance(t, SignAssignment::all_plus(t), parents);
    Eigen::VectorXd C =
        Eigen::Map<const Eigen::VectorXd>(gammas.data(), gammas.size());
    Eigen::VectorXd w = S.m.ldlt().solve(C);
    double var = 1.0 - w.dot(C);
    if (var <= 0.0) throw ValidationError("non-positive channel noise variance");
    ch.weights.push_back(std::move(w));
    ch.sigma(r) = std::sqrt(var);
    ch.mirror_copy.push_back(0);
  }
  return ch;
}

std::vector<int> layer_latents(const GaussianTree& t, const LayerDecomposition& d,
                               int l) {
  std::vector<int> out;
  for (int i : d.nodes_at[l])
    if (t.is_latent(i)) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

void set_layer_signs(SignAssignment& b, const GaussianTree& t,
                     const LayerDecomposition& d, int l, std::uint64_t r) {
  auto lat = layer_latents(t, d, l);
  for (std::size_t j = 0; j < lat.size(); ++j)
    b.s[lat[j]] = (r >> j) & 1 ? 1 : -1;
}

}  // namespace lgs
