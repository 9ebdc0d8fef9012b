#include "lgs/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "lgs/covariance.hpp"

namespace lgs {

namespace {
// substream tags, so distinct purposes never collide
constexpr std::uint64_t kTagSign = 1, kTagTop = 2, kTagProv = 3, kTagNoise = 4;
constexpr double kLn2 = 0.6931471805599453094172321214582;
constexpr int kBitCap = 30;
}  // namespace

CodebookSize codebook_size(int n, double rate_nats) {
  if (n < 1) throw ValidationError("block length must be positive");
  if (rate_nats < 0.0) throw ValidationError("negative code rate");
  CodebookSize s;
  s.bits = n * rate_nats / kLn2;
  if (s.bits > kBitCap) {
    s.saturated = true;
    s.m = std::uint64_t{1} << kBitCap;
  } else {
    s.m = (std::uint64_t)std::ceil(std::exp2(s.bits));
    if (s.m < 1) s.m = 1;
  }
  return s;
}

CodebookStack::CodebookStack(GaussianTree tree, LayerDecomposition layers,
                             int block_len, std::vector<RateTuple> rates,
                             SignDistribution pi, std::uint64_t seed)
    : tree_(std::move(tree)),
      layers_(std::move(layers)),
      n_(block_len),
      rates_(std::move(rates)),
      pi_(std::move(pi)),
      seed_(seed),
      base_(seed) {
  if (n_ < 1) throw ValidationError("block length must be positive");
  const int top = layers_.top_layer;
  if (top < 1) throw ValidationError("tree has no latent layer to synthesize from");
  if ((int)rates_.size() != top)
    throw ValidationError("need one rate pair per latent layer");
  pi_.validate(tree_);

  sorted_nodes_.resize(top + 1);
  latents_.resize(top + 1);
  size_y_.assign(top + 1, {});
  size_b_.assign(top + 1, {});
  for (int l = 0; l <= top; ++l) {
    sorted_nodes_[l] = layers_.nodes_at[l];
    std::sort(sorted_nodes_[l].begin(), sorted_nodes_[l].end());
    latents_[l] = layer_latents(tree_, layers_, l);
    if ((int)latents_[l].size() > 10)
      throw ResourceError("more than 10 latent nodes in one layer");
    if (l >= 1) {
      size_y_[l] = codebook_size(n_, rates_[l - 1].r_y);
      size_b_[l] = codebook_size(n_, rates_[l - 1].r_b);
    }
  }
  for (int l = 0; l < top; ++l)
    channels_.push_back(make_stage_channel(tree_, layers_, l));

  Eigen::MatrixXd top_cov =
      marginal_covariance(tree_, SignAssignment::all_plus(tree_), sorted_nodes_[top]).m;
  Eigen::LLT<Eigen::MatrixXd> llt(top_cov);
  if (llt.info() != Eigen::Success)
    throw ValidationError("top-layer covariance is not positive definite");
  top_chol_ = llt.matrixL();
}

Eigen::MatrixXi CodebookStack::sign_codeword(int l, std::uint64_t m) const {
  const int kl = k(l);
  Eigen::MatrixXi s(n_, kl);
  RngStream rng = base_.substream(kTagSign, (std::uint64_t)l, m);
  for (int t = 0; t < n_; ++t)
    for (int j = 0; j < kl; ++j)
      s(t, j) = rng.uniform() < pi_.pi[latents_[l][j]] ? 1 : -1;
  return s;
}

Provenance CodebookStack::provenance(int l, std::uint64_t i) const {
  if (l >= layers_.top_layer)
    throw ValidationError("top-layer codewords have no provenance");
  RngStream rng = base_.substream(kTagProv, (std::uint64_t)l, i);
  Provenance p;
  p.y_index = rng.below(m_y(l + 1));
  p.b_index = rng.below(m_b(l + 1));
  return p;
}

Eigen::VectorXd CodebookStack::content_row(int l, std::uint64_t i, int t,
                                           std::uint64_t r,
                                           const Eigen::MatrixXd* upper_resolved,
                                           const Eigen::MatrixXi* upper_signs) const {
  const int top = layers_.top_layer;
  if (l == top) {
    RngStream rng = base_.substream(kTagTop, i).substream((std::uint64_t)t, r);
    Eigen::VectorXd z(dim(l));
    for (int j = 0; j < dim(l); ++j) z(j) = rng.gauss();
    Eigen::VectorXd w = top_chol_ * z;
    for (int j = 0; j < k(l); ++j) {
      auto it = std::lower_bound(sorted_nodes_[l].begin(), sorted_nodes_[l].end(),
                                 latents_[l][j]);
      int pos = (int)(it - sorted_nodes_[l].begin());
      if (!((r >> j) & 1)) w(pos) = -w(pos);
    }
    return w;
  }
  const StageChannel& ch = channels_[l];
  RngStream rng = base_.substream(kTagNoise, (std::uint64_t)l, i)
                      .substream((std::uint64_t)t, r);
  Eigen::VectorXd out(dim(l));
  for (int row = 0; row < dim(l); ++row) {
    int v = ch.out_nodes[row];
    double sv = 1.0;
    if (tree_.is_latent(v)) {
      auto it = std::lower_bound(latents_[l].begin(), latents_[l].end(), v);
      int bit = (int)(it - latents_[l].begin());
      sv = ((r >> bit) & 1) ? 1.0 : -1.0;
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ch.weights[row].size(); ++j) {
      int c = ch.parent_pos[row][j];
      int p = ch.in_nodes[c];
      double sp = 1.0;
      if (tree_.is_latent(p)) {
        auto it = std::lower_bound(latents_[l + 1].begin(), latents_[l + 1].end(), p);
        int bit = (int)(it - latents_[l + 1].begin());
        sp = (double)(*upper_signs)(t, bit);
      }
      acc += ch.weights[row](j) * sp * (*upper_resolved)(t, c);
    }
    // fixed per-row noise consumption keeps entries addressable
    double z = rng.gauss();
    out(row) = sv * acc + ch.sigma(row) * z;
  }
  return out;
}

Eigen::MatrixXd CodebookStack::codeword_block(int l, std::uint64_t i,
                                              std::uint64_t r) const {
  Eigen::MatrixXd block(n_, dim(l));
  if (l == layers_.top_layer) {
    for (int t = 0; t < n_; ++t)
      block.row(t) = content_row(l, i, t, r, nullptr, nullptr).transpose();
    return block;
  }
  Provenance p = provenance(l, i);
  Eigen::MatrixXi us = sign_codeword(l + 1, p.b_index);
  Eigen::MatrixXd ur = resolved(l + 1, p.y_index, p.b_index);
  for (int t = 0; t < n_; ++t)
    block.row(t) = content_row(l, i, t, r, &ur, &us).transpose();
  return block;
}

Eigen::MatrixXd CodebookStack::resolved(int l, std::uint64_t i,
                                        std::uint64_t m) const {
  Eigen::MatrixXi s = sign_codeword(l, m);
  auto slot_realization = [&](int t) {
    std::uint64_t r = 0;
    for (int j = 0; j < k(l); ++j)
      if (s(t, j) > 0) r |= std::uint64_t{1} << j;
    return r;
  };
  Eigen::MatrixXd out(n_, dim(l));
  if (l == layers_.top_layer) {
    for (int t = 0; t < n_; ++t)
      out.row(t) =
          content_row(l, i, t, slot_realization(t), nullptr, nullptr).transpose();
    return out;
  }
  Provenance p = provenance(l, i);
  Eigen::MatrixXi us = sign_codeword(l + 1, p.b_index);
  Eigen::MatrixXd ur = resolved(l + 1, p.y_index, p.b_index);
  for (int t = 0; t < n_; ++t)
    out.row(t) = content_row(l, i, t, slot_realization(t), &ur, &us).transpose();
  return out;
}

nlohmann::json CodebookStack::manifest() const {
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 1; l <= layers_.top_layer; ++l) {
    layers.push_back({{"layer", l},
                      {"M_Y", m_y(l)},
                      {"M_B", m_b(l)},
                      {"k", k(l)},
                      {"dim", dim(l)},
                      {"rate_y_nats", rates_[l - 1].r_y},
                      {"rate_b_nats", rates_[l - 1].r_b},
                      {"saturated", size_y_[l].saturated || size_b_[l].saturated}});
  }
  return {{"N", n_}, {"seed", seed_}, {"layers", layers}};
}

void CodebookStack::save(std::ostream& out) const {
  const int top = layers_.top_layer;
  std::uint64_t total_doubles = 0;
  for (int l = 1; l <= top; ++l) {
    if (m_y(l) > 4096 || m_b(l) > 4096)
      throw ResourceError("codebook too large to materialize for serialization");
    total_doubles +=
        m_y(l) * (std::uint64_t)n_ * (std::uint64_t{1} << k(l)) * (std::uint64_t)dim(l);
  }
  if (total_doubles > (std::uint64_t{1} << 27))
    throw ResourceError("codebook too large to materialize for serialization");

  out.write("LGSCB1\n", 7);
  auto put_u64 = [&](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  put_u64((std::uint64_t)top);
  put_u64((std::uint64_t)n_);
  for (int l = top; l >= 1; --l) {
    put_u64((std::uint64_t)l);
    put_u64(m_y(l));
    put_u64(m_b(l));
    put_u64((std::uint64_t)k(l));
    put_u64((std::uint64_t)dim(l));
    for (std::uint64_t m = 0; m < m_b(l); ++m) {
      Eigen::MatrixXi s = sign_codeword(l, m);
      for (int t = 0; t < n_; ++t)
        for (int j = 0; j < k(l); ++j) {
          char c = s(t, j) > 0 ? 1 : -1;
          out.write(&c, 1);
        }
    }
    for (std::uint64_t i = 0; i < m_y(l); ++i) {
      if (l < top) {
        Provenance p = provenance(l, i);
        put_u64(p.y_index);
        put_u64(p.b_index);
      }
      for (std::uint64_t r = 0; r < (std::uint64_t{1} << k(l)); ++r) {
        Eigen::MatrixXd b = codeword_block(l, i, r);
        for (int t = 0; t < n_; ++t)
          out.write(reinterpret_cast<const char*>(b.row(t).eval().data()),
                    8 * (std::streamsize)dim(l));
      }
    }
  }
}

}  // namespace lgs
