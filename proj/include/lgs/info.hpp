#pragma once

#include <cstdint>
#include <vector>

#include "lgs/covariance.hpp"
#include "lgs/tree.hpp"

namespace lgs {

struct MIEstimate {
  double value = 0.0;   // nats
  double stderr_ = 0.0; // 0 for closed form
  enum class Method { ClosedForm, MonteCarlo } method = Method::ClosedForm;
};

// rho_{ij} rho_{ik} / rho_{jk} for distinct observable positions in sigma_x;
// equals the squared leaf-to-parent correlation on tree-representable input.
double edge_corr_squared(const CovarianceMatrix& sigma_x, int i, int j, int k);

// Closed-form I(X; Y) from observable correlations alone, valid when every
// observable is a leaf: 1/2 ln(|Sigma_X| / prod_i (1 - rho_ij rho_ik / rho_jk))
// using, per observable i, the first pair (j, k) in index order whose tree
// median with i is i's parent latent.
MIEstimate mutual_info_leaf(const CovarianceMatrix& sigma_x, const GaussianTree& t);

// Gaussian MI between two node-index sets under a sign realization, from the
// joint and marginal determinants.
MIEstimate gaussian_mi(const GaussianTree& t, const SignAssignment& b,
                       const std::vector<int>& set_a, const std::vector<int>& set_b);

// I(X; Y) under a fixed sign realization (observables vs all latents).
MIEstimate mutual_info_direct(const GaussianTree& t, const SignAssignment& b);

struct RateBounds {
  int layer = 0;
  double sum_bound = 0.0;       // nats, closed form
  double y_bound = 0.0;         // nats, Monte Carlo
  double y_bound_stderr = 0.0;
};

// Lower bounds on the common-randomness rates feeding layer l from layer l+1.
// sum_bound is closed form; y_bound subtracts a plug-in Monte Carlo estimate
// of the conditional mixture entropy. Deterministic-copy components are
// excluded from both. Requires mc_samples >= 100.
RateBounds layer_rate_bounds(const GaussianTree& t, const LayerDecomposition& d,
                             int l, const SignDistribution& pi,
                             int mc_samples, std::uint64_t seed);

// Plug-in Monte Carlo estimate of I(X; Y) when Y is the sign-mixture over the
// 2^k realizations weighted by pi.
MIEstimate mixture_mi(const GaussianTree& t, const SignDistribution& pi,
                      int mc_samples, std::uint64_t seed);

struct SignOptimalityPoint {
  std::vector<double> pi;  // one value per latent, in latent-index order
  double mi = 0.0;
  double stderr_ = 0.0;
};

struct SignOptimalityReport {
  std::vector<SignOptimalityPoint> grid;
  int argmin = 0;               // index into grid
  int uniform_index = 0;        // grid point closest to all-1/2
  bool uniform_within_2se = false;
};

// Evaluates mixture_mi over a grid of per-latent Bernoulli parameters
// (grid_per_axis points per latent, equally spaced in (0,1)) and reports
// whether the uniform point sits within two combined standard errors of the
// grid minimum. All grid points share one random-number stream so the
// comparison uses common random numbers. Requires k <= 3.
SignOptimalityReport uniform_sign_optimality_check(const GaussianTree& t,
                                                   int grid_per_axis,
                                                   int mc_samples,
                                                   std::uint64_t seed);

}  // namespace lgs
