#include "lgs/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgs/channel.hpp"
#include "lgs/rng.hpp"

namespace lgs {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Zero-mean Gaussian density with a cached Cholesky factor. Unpivoted, so
// logdet is bitwise invariant under symmetric +-1 scaling of the input.
struct GaussDens {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet = 0.0;
  int dim = 0;

  explicit GaussDens(const Eigen::MatrixXd& S) : llt(S), dim((int)S.rows()) {
    if (llt.info() != Eigen::Success)
      throw ValidationError("covariance is not positive definite");
    logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }

  double logpdf(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u = llt.matrixL().solve(x);
    return -0.5 * (dim * kLog2Pi + logdet + u.squaredNorm());
  }

  // L * z for z ~ N(0, I)
  Eigen::VectorXd sample(RngStream& rng) const {
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z(i) = rng.gauss();
    return llt.matrixL() * z;
  }
};

double logsumexp(const std::vector<double>& a) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : a) m = std::max(m, v);
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

double half_logdet(const Eigen::MatrixXd& S) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw ValidationError("covariance is not positive definite");
  return llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

struct MeanStderr {
  double mean, se;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= (xs.size() - 1.0);
  return {m, std::sqrt(v / xs.size())};
}

}  // namespace

double edge_corr_squared(const CovarianceMatrix& sigma_x, int i, int j, int k) {
  if (i == j || i == k || j == k)
    throw ValidationError("edge correlation needs three distinct indices");
  double rjk = sigma_x.m(j, k);
  if (std::abs(rjk) < 1e-300)
    throw ValidationError("zero correlation between reference pair");
  double v = sigma_x.m(i, j) * sigma_x.m(i, k) / rjk;
  if (!(v > 0.0 && v < 1.0))
    throw ValidationError("squared edge correlation outside (0,1): input is not tree-representable");
  return v;
}

MIEstimate mutual_info_leaf(const CovarianceMatrix& sigma_x, const GaussianTree& t) {
  auto obs = t.observable_indices();
  const int n = static_cast<int>(obs.size());
  if ((int)sigma_x.m.rows() != n)
    throw ValidationError("covariance size does not match observable count");
  double log_prod = 0.0;
  for (int a = 0; a < n; ++a) {
    int node = obs[a];
    if (t.degree(node) != 1 || !t.is_latent(t.adj(node)[0].nbr))
      throw ValidationError("closed-form leaf formula requires all observables to be leaves");
    int parent = t.adj(node)[0].nbr;
    bool found = false;
    for (int j = 0; j < n && !found; ++j) {
      if (j == a) continue;
      for (int k = j + 1; k < n && !found; ++k) {
        if (k == a) continue;
        if (t.median(node, obs[j], obs[k]) != parent) continue;
        log_prod += std::log(1.0 - edge_corr_squared(sigma_x, a, j, k));
        found = true;
      }
    }
    if (!found) throw ValidationError("no valid reference pair for an observable");
  }
  MIEstimate e;
  e.value = half_logdet(sigma_x.m) - 0.5 * log_prod;
  return e;
}

MIEstimate gaussian_mi(const GaussianTree& t, const SignAssignment& b,
                       const std::vector<int>& set_a, const std::vector<int>& set_b) {
  std::vector<int> joint = set_a;
  joint.insert(joint.end(), set_b.begin(), set_b.end());
  double la = half_logdet(marginal_covariance(t, b, set_a).m);
  double lb = half_logdet(marginal_covariance(t, b, set_b).m);
  double lj = half_logdet(marginal_covariance(t, b, joint).m);
  MIEstimate e;
  e.value = la + lb - lj;
  return e;
}

MIEstimate mutual_info_direct(const GaussianTree& t, const SignAssignment& b) {
  return gaussian_mi(t, b, t.observable_indices(), t.latent_indices());
}

namespace {

// Shared machinery for the sign-mixture estimators: the joint of (X, Y) given
// b factors through sign-free blocks Sigma_X, S (latent), C (cross) as
//   Sigma_Y|b = D_b S D_b,  Sigma_XY|b = C D_b,
// so x | y, b ~ N(W D_b y, K) with W = C S^-1 and K = Sigma_X - W C^T.
struct MixtureModel {
  std::vector<int> obs, lat;
  int n = 0, k = 0;
  Eigen::MatrixXd W;
  GaussDens dens_s, dens_x, dens_k;
  std::vector<Eigen::VectorXd> signs;   // 2^k vectors in {-1,+1}^k
  std::vector<double> log_eta;          // per assignment

  MixtureModel(const GaussianTree& t, const SignDistribution& pi)
      : obs(t.observable_indices()),
        lat(t.latent_indices()),
        n((int)obs.size()),
        k((int)lat.size()),
        W(),
        dens_s(make_block(t, lat)),
        dens_x(make_block(t, obs)),
        dens_k(Eigen::MatrixXd::Identity(n, n)) {
    if (k > 16) throw ResourceError("too many latent nodes for mixture enumeration");
    pi.validate(t);
    auto all_plus = SignAssignment::all_plus(t);
    std::vector<int> joint = obs;
    joint.insert(joint.end(), lat.begin(), lat.end());
    Eigen::MatrixXd full = marginal_covariance(t, all_plus, joint).m;
    Eigen::MatrixXd sx = full.topLeftCorner(n, n);
    Eigen::MatrixXd c = full.topRightCorner(n, k);
    Eigen::MatrixXd s = full.bottomRightCorner(k, k);
    W = dens_s.llt.solve(c.transpose()).transpose();
    Eigen::MatrixXd kk = sx - W * c.transpose();
    kk = 0.5 * (kk + kk.transpose()).eval();
    dens_k = GaussDens(kk);
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
      Eigen::VectorXd d(k);
      double le = 0.0;
      for (int j = 0; j < k; ++j) {
        bool plus = (bits >> j) & 1;
        d(j) = plus ? 1.0 : -1.0;
        le += std::log(plus ? pi.pi[lat[j]] : 1.0 - pi.pi[lat[j]]);
      }
      signs.push_back(d);
      log_eta.push_back(le);
    }
  }

  static Eigen::MatrixXd make_block(const GaussianTree& t, const std::vector<int>& s) {
    return marginal_covariance(t, SignAssignment::all_plus(t), s).m;
  }
};

}  // namespace

MIEstimate mixture_mi(const GaussianTree& t, const SignDistribution& pi,
                      int mc_samples, std::uint64_t seed) {
  if (mc_samples < 100) throw ValidationError("mc_samples too small (< 100)");
  MixtureModel m(t, pi);
  RngStream rng = RngStream(seed).substream(0x6d69);  // dedicated stream
  std::vector<double> terms;
  terms.reserve(mc_samples);
  const std::size_t nb = m.signs.size();
  std::vector<double> num(nb), den(nb);
  Eigen::VectorXd d(m.k);
  for (int s = 0; s < mc_samples; ++s) {
    // fixed per-sample consumption: k uniforms, k + n normals (CRN-friendly)
    for (int j = 0; j < m.k; ++j)
      d(j) = rng.uniform() < pi.pi[m.lat[j]] ? 1.0 : -1.0;
    Eigen::VectorXd w = m.dens_s.sample(rng);      // unsigned latent draw
    Eigen::VectorXd y = d.asDiagonal() * w;        // signed observation of Y
    Eigen::VectorXd x = m.W * w + m.dens_k.sample(rng);
    for (std::size_t bi = 0; bi < nb; ++bi) {
      Eigen::VectorXd dy = m.signs[bi].asDiagonal() * y;
      double ly = m.log_eta[bi] + m.dens_s.logpdf(dy);
      den[bi] = ly;
      num[bi] = ly + m.dens_k.logpdf(x - m.W * dy);
    }
    terms.push_back(logsumexp(num) - logsumexp(den) - m.dens_x.logpdf(x));
  }
  auto ms = mean_stderr(terms);
  MIEstimate e;
  e.value = ms.mean;
  e.stderr_ = ms.se;
  e.method = MIEstimate::Method::MonteCarlo;
  return e;
}

SignOptimalityReport uniform_sign_optimality_check(const GaussianTree& t,
                                                  int grid_per_axis,
                                                  int mc_samples,
                                                  std::uint64_t seed) {
  const int k = t.latent_count();
  if (k > 3) throw ResourceError("sign-optimality grid limited to k <= 3");
  if (grid_per_axis < 3) throw ValidationError("grid needs at least 3 points per axis");
  std::vector<double> axis(grid_per_axis);
  for (int i = 0; i < grid_per_axis; ++i)
    axis[i] = (i + 1) / (grid_per_axis + 1.0);

  SignOptimalityReport rep;
  auto lat = t.latent_indices();
  std::vector<int> idx(k, 0);
  long total = 1;
  for (int j = 0; j < k; ++j) total *= grid_per_axis;
  for (long g = 0; g < total; ++g) {
    long r = g;
    SignDistribution pi = SignDistribution::constant(t, 0.5);
    SignOptimalityPoint pt;
    for (int j = 0; j < k; ++j) {
      double v = axis[r % grid_per_axis];
      r /= grid_per_axis;
      pi.pi[lat[j]] = v;
      pt.pi.push_back(v);
    }
    // same seed at every grid point: common random numbers across the grid
    MIEstimate e = mixture_mi(t, pi, mc_samples, seed);
    pt.mi = e.value;
    pt.stderr_ = e.stderr_;
    rep.grid.push_back(std::move(pt));
  }
  rep.argmin = 0;
  rep.uniform_index = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int g = 0; g < (int)rep.grid.size(); ++g) {
    if (rep.grid[g].mi < rep.grid[rep.argmin].mi) rep.argmin = g;
    double dist = 0.0;
    for (double v : rep.grid[g].pi) dist += (v - 0.5) * (v - 0.5);
    if (dist < best_dist) {
      best_dist = dist;
      rep.uniform_index = g;
    }
  }
  const auto& u = rep.grid[rep.uniform_index];
  const auto& mn = rep.grid[rep.argmin];
  double se = std::sqrt(u.stderr_ * u.stderr_ + mn.stderr_ * mn.stderr_);
  rep.uniform_within_2se = u.mi - mn.mi <= 2.0 * se;
  return rep;
}

RateBounds layer_rate_bounds(const GaussianTree& t, const LayerDecomposition& d,
                             int l, const SignDistribution& pi,
                             int mc_samples, std::uint64_t seed) {
  if (mc_samples < 100) throw ValidationError("mc_samples too small (< 100)");
  pi.validate(t);
  StageChannel ch = make_stage_channel(t, d, l);

  // deterministic-copy rows carry no information or noise; drop them
  std::vector<int> rows;
  std::vector<int> out_sub;
  for (std::size_t r = 0; r < ch.out_nodes.size(); ++r) {
    if (ch.mirror_copy[r]) continue;
    rows.push_back((int)r);
    out_sub.push_back(ch.out_nodes[r]);
  }
  const int m = (int)rows.size();
  if (m == 0) throw ValidationError("layer has only deterministic copies");

  auto all_plus = SignAssignment::all_plus(t);
  Eigen::MatrixXd sig_out = marginal_covariance(t, all_plus, out_sub).m;
  double hld_out = half_logdet(sig_out);

  RateBounds rb;
  rb.layer = l;
  double log_noise = 0.0;
  for (int r : rows) log_noise += 2.0 * std::log(ch.sigma(r));
  rb.sum_bound = hld_out - 0.5 * log_noise;

  // Monte Carlo for the y bound: h(out | b_out) minus the plug-in entropy of
  // out given the upper-layer value (upper signs marginalized out).
  auto up_lat = layer_latents(t, d, l + 1);
  const int ku = (int)up_lat.size();
  if (ku > 16) throw ResourceError("too many upper-layer latents to enumerate");
  GaussDens dens_up(marginal_covariance(t, all_plus, ch.in_nodes).m);
  const int nin = (int)ch.in_nodes.size();

  // position of each upper latent within in_nodes, for sign application
  std::vector<int> up_pos;
  for (int v : up_lat) {
    auto it = std::lower_bound(ch.in_nodes.begin(), ch.in_nodes.end(), v);
    up_pos.push_back((int)(it - ch.in_nodes.begin()));
  }
  std::vector<Eigen::VectorXd> up_signs;  // over in_nodes, observables +1
  std::vector<double> log_eta;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << ku); ++bits) {
    Eigen::VectorXd s = Eigen::VectorXd::Ones(nin);
    double le = 0.0;
    for (int j = 0; j < ku; ++j) {
      bool plus = (bits >> j) & 1;
      s(up_pos[j]) = plus ? 1.0 : -1.0;
      le += std::log(plus ? pi.pi[up_lat[j]] : 1.0 - pi.pi[up_lat[j]]);
    }
    up_signs.push_back(s);
    log_eta.push_back(le);
  }

  auto out_lat = layer_latents(t, d, l);
  RngStream rng = RngStream(seed).substream(0x7262, (std::uint64_t)l);
  std::vector<double> logp;
  logp.reserve(mc_samples);
  const std::size_t nb = up_signs.size();
  std::vector<double> num(nb), den(nb);
  const double row_const = -0.5 * (m * kLog2Pi + log_noise);
  for (int s = 0; s < mc_samples; ++s) {
    // draw upper signs and value
    Eigen::VectorXd du = Eigen::VectorXd::Ones(nin);
    for (int j = 0; j < ku; ++j)
      du(up_pos[j]) = rng.uniform() < pi.pi[up_lat[j]] ? 1.0 : -1.0;
    Eigen::VectorXd wu = dens_up.sample(rng);
    Eigen::VectorXd y_up = du.asDiagonal() * wu;
    // draw this layer's signs
    SignAssignment b = all_plus;
    for (int v : out_lat) b.s[v] = rng.uniform() < pi.pi[v] ? 1 : -1;
    // channel pass (non-copy rows only)
    Eigen::VectorXd y_out(m);
    auto mean_row = [&](int r, const Eigen::VectorXd& sgn_in) {
      int v = ch.out_nodes[r];
      double sv = t.is_latent(v) ? (double)b[v] : 1.0;
      double acc = 0.0;
      for (Eigen::Index j = 0; j < ch.weights[r].size(); ++j) {
        int c = ch.parent_pos[r][j];
        acc += ch.weights[r](j) * sgn_in(c) * y_up(c);
      }
      return sv * acc;
    };
    // the true mean uses the drawn upper signs already baked into y_up,
    // i.e. sgn_in = ones
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(nin);
    for (int ri = 0; ri < m; ++ri) {
      int r = rows[ri];
      y_out(ri) = mean_row(r, ones) + ch.sigma(r) * rng.gauss();
    }
    for (std::size_t bi = 0; bi < nb; ++bi) {
      Eigen::VectorXd dy = up_signs[bi].asDiagonal() * y_up;
      double ly = log_eta[bi] + dens_up.logpdf(dy);
      den[bi] = ly;
      // channel mean if the upper signs were up_signs[bi]: flipping an input
      // sign flips that column's contribution, i.e. sgn_in = up_signs[bi]
      double quad = 0.0;
      for (int ri = 0; ri < m; ++ri) {
        int r = rows[ri];
        double mu = mean_row(r, up_signs[bi]);
        double z = (y_out(ri) - mu) / ch.sigma(r);
        quad += z * z;
      }
      num[bi] = ly + row_const - 0.5 * quad;
    }
    logp.push_back(logsumexp(num) - logsumexp(den));
  }
  auto ms = mean_stderr(logp);
  double h1 = hld_out + 0.5 * m * (kLog2Pi + 1.0);
  double h2 = -ms.mean;  // plug-in conditional entropy, constants included
  rb.y_bound = h1 - h2;
  rb.y_bound_stderr = ms.se;
  return rb;
}

}  // namespace lgs
