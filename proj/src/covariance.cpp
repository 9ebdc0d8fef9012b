#include "lgs/covariance.hpp"

#include <cmath>
#include <cstdio>
#include <deque>

namespace lgs {

std::string CovarianceMatrix::to_csv() const {
  std::string out;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(ids[j]);
  }
  out += '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

CovarianceMatrix marginal_covariance(const GaussianTree& t, const SignAssignment& b,
                                     const std::vector<int>& subset) {
  const int k = static_cast<int>(subset.size());
  CovarianceMatrix cov;
  cov.m.setIdentity(k, k);
  cov.ids.reserve(k);
  for (int idx : subset) cov.ids.push_back(t.node(idx).id);

  // One BFS per subset node gives signed path products to every other node.
  std::vector<double> prod(t.size());
  std::vector<char> seen(t.size());
  std::vector<int> pos(t.size(), -1);
  for (int c = 0; c < k; ++c) pos[subset[c]] = c;

  auto sign_of = [&](int idx) { return t.is_latent(idx) ? b[idx] : 1; };

  for (int r = 0; r < k; ++r) {
    int src = subset[r];
    std::fill(seen.begin(), seen.end(), 0);
    prod[src] = 1.0;
    seen[src] = 1;
    std::deque<int> q{src};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (const AdjEntry& e : t.adj(u)) {
        if (seen[e.nbr]) continue;
        seen[e.nbr] = 1;
        prod[e.nbr] = prod[u] * e.gamma * sign_of(u) * sign_of(e.nbr);
        q.push_back(e.nbr);
      }
    }
    for (int c = 0; c < k; ++c) {
      if (c == r) continue;
      cov.m(r, c) = prod[subset[c]];
    }
  }
  // symmetrize exactly (path products are symmetric, but enforce bitwise)
  for (int r = 0; r < k; ++r)
    for (int c = r + 1; c < k; ++c) cov.m(c, r) = cov.m(r, c);
  return cov;
}

CovarianceMatrix observable_covariance(const GaussianTree& t) {
  return marginal_covariance(t, SignAssignment::all_plus(t), t.observable_indices());
}

CorrelationSpaceReport validate_correlation_space(const CovarianceMatrix& sigma) {
  CorrelationSpaceReport rep;
  const int n = static_cast<int>(sigma.m.rows());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double rij = sigma.m(i, j), rik = sigma.m(i, k), rjk = sigma.m(j, k);
        if (rij * rik * rjk <= 0.0) {
          rep.ok = false;
          rep.violations.push_back({i, j, k, "non-positive triple product"});
          continue;
        }
        auto check = [&](double a, double b, double c) {
          return std::abs(a) + 1e-12 >= std::abs(b * c);
        };
        if (!check(rij, rik, rjk) || !check(rik, rij, rjk) || !check(rjk, rij, rik)) {
          rep.ok = false;
          rep.violations.push_back({i, j, k, "pairwise magnitude condition fails"});
        }
      }
  return rep;
}

std::vector<SignAssignment> enumerate_sign_equivalents(const GaussianTree& t) {
  if (!t.is_minimal())
    throw ValidationError("sign-class enumeration requires a minimal tree");
  return enumerate_signs(t);
}

bool covariances_identical(const std::vector<Eigen::MatrixXd>& ms, double tol) {
  for (std::size_t i = 1; i < ms.size(); ++i) {
    if (ms[i].rows() != ms[0].rows() || ms[i].cols() != ms[0].cols()) return false;
    if (((ms[i] - ms[0]).array().abs() > tol).any()) return false;
  }
  return true;
}

}  // namespace lgs
