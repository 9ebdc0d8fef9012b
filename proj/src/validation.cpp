#include "lgs/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "lgs/codebook.hpp"
#include "lgs/info.hpp"
#include "lgs/synthesis.hpp"
#include "lgs/transforms.hpp"

namespace lgs {

namespace {

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGlX[8] = {0.0950125098376374, 0.2816035507792589,
                            0.4580167776572274, 0.6178762444026438,
                            0.7554044083550030, 0.8656312023878318,
                            0.9445750230732326, 0.9894009349916499};
constexpr double kGlW[8] = {0.1894506104550685, 0.1826034150449236,
                            0.1691565193950025, 0.1495959888165767,
                            0.1246289712555339, 0.0951585116824928,
                            0.0622535239386479, 0.0271524594117541};

}  // namespace

EmpiricalCov empirical_covariance(const Eigen::MatrixXd& samples,
                                  const Eigen::MatrixXd& target) {
  if (samples.rows() < 2) throw ValidationError("need at least two samples");
  EmpiricalCov e;
  Eigen::RowVectorXd mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - mean;
  e.cov = centered.transpose() * centered / (samples.rows() - 1.0);
  Eigen::MatrixXd diff = e.cov - target;
  e.frobenius_error = diff.norm();
  e.max_abs_entry_error = diff.array().abs().maxCoeff();
  return e;
}

double histogram_tv_1d(const Eigen::VectorXd& samples, int bins, double lo,
                       double hi) {
  if (samples.size() == 0) throw ValidationError("empty sample set");
  if (bins < 10) throw ValidationError("need at least 10 bins");
  if (hi - lo < 8.0) throw ValidationError("histogram range too narrow");
  const double w = (hi - lo) / bins;
  std::vector<double> emp(bins + 1, 0.0);  // last cell: out of range
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    double x = samples(i);
    if (x < lo || x >= hi)
      emp[bins] += 1.0;
    else
      emp[(int)((x - lo) / w)] += 1.0;
  }
  for (double& v : emp) v /= (double)samples.size();
  double tv = 0.0, inside = 0.0;
  for (int b = 0; b < bins; ++b) {
    double p = phi_cdf(lo + (b + 1) * w) - phi_cdf(lo + b * w);
    inside += p;
    tv += std::abs(emp[b] - p);
  }
  tv += std::abs(emp[bins] - (1.0 - inside));
  return 0.5 * tv;
}

double histogram_tv_2d(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       double rho, int bins, double lo, double hi) {
  if (a.size() != b.size() || a.size() == 0)
    throw ValidationError("mismatched or empty sample set");
  if (bins < 10) throw ValidationError("need at least 10 bins");
  const double w = (hi - lo) / bins;
  const double s = std::sqrt(1.0 - rho * rho);
  std::vector<double> emp((std::size_t)bins * bins + 1, 0.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double x = a(i), y = b(i);
    if (x < lo || x >= hi || y < lo || y >= hi) {
      emp.back() += 1.0;
    } else {
      int bx = (int)((x - lo) / w), by = (int)((y - lo) / w);
      emp[(std::size_t)bx * bins + by] += 1.0;
    }
  }
  for (double& v : emp) v /= (double)a.size();

  // target mass per cell: integrate phi(x) * [Phi grid of conditional] over
  // the outer bin with Gauss-Legendre
  double tv = 0.0, inside = 0.0;
  std::vector<double> col(bins);
  for (int bx = 0; bx < bins; ++bx) {
    std::fill(col.begin(), col.end(), 0.0);
    double x0 = lo + bx * w, x1 = x0 + w;
    double c = 0.5 * (x0 + x1), h = 0.5 * (x1 - x0);
    for (int g = 0; g < 16; ++g) {
      double node = g < 8 ? c - h * kGlX[g] : c + h * kGlX[g - 8];
      double wt = h * kGlW[g % 8];
      double pdf = std::exp(-0.5 * node * node) / std::sqrt(2.0 * M_PI);
      for (int by = 0; by < bins; ++by) {
        double y0 = lo + by * w, y1 = y0 + w;
        double m = phi_cdf((y1 - rho * node) / s) - phi_cdf((y0 - rho * node) / s);
        col[by] += wt * pdf * m;
      }
    }
    for (int by = 0; by < bins; ++by) {
      inside += col[by];
      tv += std::abs(emp[(std::size_t)bx * bins + by] - col[by]);
    }
  }
  tv += std::abs(emp.back() - (1.0 - inside));
  return 0.5 * tv;
}

KsResult ks_test_normal(Eigen::VectorXd samples) {
  const Eigen::Index n = samples.size();
  if (n < 5) throw ValidationError("too few samples for a KS test");
  std::sort(samples.data(), samples.data() + n);
  double d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double f = phi_cdf(samples(i));
    d = std::max(d, std::max(f - (double)i / n, (double)(i + 1) / n - f));
  }
  KsResult r;
  r.statistic = d;
  double sq = std::sqrt((double)n);
  double lambda = (sq + 0.12 + 0.11 / sq) * d;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j)
    p += 2.0 * (j % 2 ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
  r.p_value = std::min(1.0, std::max(0.0, p));
  return r;
}

SignInvarianceReport sign_invariance_suite(const GaussianTree& t) {
  auto assignments = enumerate_signs(t);  // throws past the k cap
  SignInvarianceReport rep;
  rep.assignments = (int)assignments.size();
  auto obs = t.observable_indices();
  Eigen::MatrixXd ref;
  double ref_mi = 0.0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    Eigen::MatrixXd sx = marginal_covariance(t, assignments[i], obs).m;
    double mi = mutual_info_direct(t, assignments[i]).value;
    if (i == 0) {
      ref = sx;
      ref_mi = mi;
      continue;
    }
    rep.max_cov_deviation =
        std::max(rep.max_cov_deviation, (sx - ref).array().abs().maxCoeff());
    rep.max_mi_deviation = std::max(rep.max_mi_deviation, std::abs(mi - ref_mi));
  }
  rep.pass = rep.max_cov_deviation <= 1e-12 && rep.max_mi_deviation <= 1e-12;
  return rep;
}

nlohmann::json ConvergenceReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const SweepPoint& p : points) {
    pts.push_back({{"n_block", p.n_block},
                   {"rate_mult", p.rate_mult},
                   {"negative_arm", p.negative_arm},
                   {"samples", p.samples},
                   {"frobenius_error", p.frobenius_error},
                   {"max_abs_entry_error", p.max_abs_entry_error},
                   {"tv_1d", p.tv_1d},
                   {"tv_2d", p.tv_2d}});
  }
  return {{"seed", seed}, {"draws", draws}, {"points", pts}};
}

std::string ConvergenceReport::to_csv() const {
  std::string out = "n_block,rate_mult,negative_arm,samples,metric,index,value\n";
  char buf[160];
  auto row = [&](const SweepPoint& p, const char* metric, int index, double v) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%ld,%s,%d,%.17g\n", p.n_block,
                  p.rate_mult, p.negative_arm ? 1 : 0, p.samples, metric, index, v);
    out += buf;
  };
  for (const SweepPoint& p : points) {
    row(p, "frobenius_error", 0, p.frobenius_error);
    row(p, "max_abs_entry_error", 0, p.max_abs_entry_error);
    for (std::size_t i = 0; i < p.tv_1d.size(); ++i)
      row(p, "tv_1d", (int)i, p.tv_1d[i]);
    for (std::size_t i = 0; i < p.tv_2d.size(); ++i)
      row(p, "tv_2d", (int)i, p.tv_2d[i]);
  }
  return out;
}

ConvergenceReport convergence_sweep(const GaussianTree& t,
                                    const std::vector<double>& rate_mults,
                                    const std::vector<int>& n_grid, int draws,
                                    int bins, std::uint64_t seed) {
  ConvergenceReport rep;
  rep.seed = seed;
  rep.draws = draws;

  TransformResult norm = normalize_for_synthesis(t, assign_layers(t));
  const GaussianTree& nt = norm.tree;
  Eigen::MatrixXd target =
      marginal_covariance(nt, SignAssignment::all_plus(nt),
                          nt.observable_indices())
          .m;
  SignDistribution pi = SignDistribution::uniform(nt);

  std::vector<RateBounds> bounds;
  for (int l = 0; l < norm.layers.top_layer; ++l)
    bounds.push_back(layer_rate_bounds(nt, norm.layers, l, pi, 20000,
                                       RngStream(seed).substream(0x7274, l).next_u64()));

  for (std::size_t mi = 0; mi < rate_mults.size(); ++mi) {
    double mult = rate_mults[mi];
    std::vector<RateTuple> rates;
    for (const RateBounds& b : bounds) {
      RateTuple r;
      r.r_y = mult * std::max(b.y_bound, 0.0);
      r.r_b = mult * std::max(b.sum_bound - b.y_bound, 0.0);
      rates.push_back(r);
    }
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      int n_block = n_grid[ni];
      std::uint64_t cb_seed =
          RngStream(seed).substream(0x6362, mi, ni).next_u64();
      CodebookStack cb(nt, norm.layers, n_block, rates, pi, cb_seed);
      std::uint64_t draw_seed =
          RngStream(seed).substream(0x6472, mi, ni).next_u64();
      BatchResult batch = synthesize_batch(cb, draws, draw_seed);

      SweepPoint pt;
      pt.n_block = n_block;
      pt.rate_mult = mult;
      pt.negative_arm = mult <= 0.25;
      pt.samples = (long)batch.pooled.rows();
      EmpiricalCov ec = empirical_covariance(batch.pooled, target);
      pt.frobenius_error = ec.frobenius_error;
      pt.max_abs_entry_error = ec.max_abs_entry_error;
      for (Eigen::Index c = 0; c < batch.pooled.cols(); ++c)
        pt.tv_1d.push_back(histogram_tv_1d(batch.pooled.col(c), bins));
      for (Eigen::Index c = 0; c + 1 < batch.pooled.cols(); ++c)
        pt.tv_2d.push_back(histogram_tv_2d(batch.pooled.col(c),
                                           batch.pooled.col(c + 1),
                                           target(c, c + 1), bins));
      rep.points.push_back(std::move(pt));
    }
  }
  return rep;
}

}  // namespace lgs
