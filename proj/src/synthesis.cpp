#include "lgs/synthesis.hpp"

#include <algorithm>

namespace lgs {

Eigen::VectorXd channel_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& sigma_z, RngStream& rng) {
  if (A.cols() != y.size() || A.rows() != sigma_z.size())
    throw ValidationError("channel dimension mismatch");
  Eigen::VectorXd out = A * y;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += sigma_z(i) * rng.gauss();
  return out;
}

SynthesisOutput synthesize_one(const CodebookStack& cb, RngStream& rng) {
  const GaussianTree& t = cb.tree();
  const LayerDecomposition& d = cb.layers();
  const int top = cb.top_layer();
  const int n_slots = cb.block_len();

  SynthesisOutput out;
  std::uint64_t yi = rng.below(cb.m_y(1));
  std::uint64_t bi = rng.below(cb.m_b(1));
  out.chain.push_back({1, yi, bi});
  for (int l = 1; l < top; ++l) {
    Provenance p = cb.provenance(l, out.chain.back().y_index);
    out.chain.push_back({l + 1, p.y_index, p.b_index});
  }
  for (const ChainEntry& e : out.chain) {
    out.signs.push_back(cb.sign_codeword(e.layer, e.b_index));
    out.resolved.push_back(cb.resolved(e.layer, e.y_index, e.b_index));
  }

  // final channel pass: layer 0 from the resolved layer-1 sequence
  const StageChannel& ch = cb.channel(0);
  const Eigen::MatrixXd& y1 = out.resolved[0];
  const Eigen::MatrixXi& b1 = out.signs[0];
  const auto& lat1 = cb.latents_at(1);
  const auto& lat0 = cb.latents_at(0);
  Eigen::MatrixXd layer0(n_slots, cb.dim(0));
  for (int t_slot = 0; t_slot < n_slots; ++t_slot) {
    for (int row = 0; row < cb.dim(0); ++row) {
      int v = ch.out_nodes[row];
      double sv = 1.0;
      if (t.is_latent(v)) {
        // layer 0 has no sign codebook; latents here (possible only in
        // unusual shapes) get fresh signs from pi
        auto it = std::lower_bound(lat0.begin(), lat0.end(), v);
        (void)it;
        sv = rng.uniform() < cb.pi().pi[v] ? 1.0 : -1.0;
      }
      double acc = 0.0;
      for (Eigen::Index j = 0; j < ch.weights[row].size(); ++j) {
        int c = ch.parent_pos[row][j];
        int p = ch.in_nodes[c];
        double sp = 1.0;
        if (t.is_latent(p)) {
          auto it = std::lower_bound(lat1.begin(), lat1.end(), p);
          sp = (double)b1(t_slot, (int)(it - lat1.begin()));
        }
        acc += ch.weights[row](j) * sp * y1(t_slot, c);
      }
      layer0(t_slot, row) = sv * acc + ch.sigma(row) * rng.gauss();
    }
  }

  // collect observable columns across layers
  std::vector<int> obs = t.observable_indices();
  out.x.resize(n_slots, (int)obs.size());
  for (std::size_t c = 0; c < obs.size(); ++c) {
    int v = obs[c];
    int l = d.layer_of[v];
    if (l == 0) {
      auto it = std::lower_bound(ch.out_nodes.begin(), ch.out_nodes.end(), v);
      out.x.col((Eigen::Index)c) = layer0.col(it - ch.out_nodes.begin());
    } else {
      const std::vector<int>& nodes = cb.nodes_at(l);
      auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
      out.x.col((Eigen::Index)c) = out.resolved[l - 1].col(it - nodes.begin());
    }
  }
  return out;
}

BatchResult synthesize_batch(const CodebookStack& cb, int draws,
                             std::uint64_t seed) {
  if (draws < 1) throw ValidationError("need at least one draw");
  BatchResult res;
  res.observable_ids = cb.tree().observable_ids();
  const int n_slots = cb.block_len();
  res.pooled.resize((Eigen::Index)draws * n_slots, (Eigen::Index)res.observable_ids.size());
  RngStream base(seed);
  for (int dr = 0; dr < draws; ++dr) {
    RngStream rng = base.substream(0x647261, (std::uint64_t)dr);
    SynthesisOutput o = synthesize_one(cb, rng);
    res.pooled.middleRows((Eigen::Index)dr * n_slots, n_slots) = o.x;
    res.outputs.push_back(std::move(o));
  }
  return res;
}

}  // namespace lgs
