#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lgs/covariance.hpp"
#include "lgs/tree.hpp"

namespace lgs {

struct EmpiricalCov {
  Eigen::MatrixXd cov;
  double frobenius_error = 0.0;
  double max_abs_entry_error = 0.0;
};

// Unbiased sample covariance (mean removed) with error against a target.
EmpiricalCov empirical_covariance(const Eigen::MatrixXd& samples,
                                  const Eigen::MatrixXd& target);

// Binned total-variation estimate of a sample against the standard normal,
// over [lo, hi] plus a shared out-of-range cell.
double histogram_tv_1d(const Eigen::VectorXd& samples, int bins = 50,
                       double lo = -4.5, double hi = 4.5);

// Same against the unit-variance bivariate normal with correlation rho;
// target cell masses by Gauss-Legendre integration of the conditional CDF.
double histogram_tv_2d(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       double rho, int bins = 50, double lo = -4.5,
                       double hi = 4.5);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov against the standard normal, asymptotic
// p-value.
KsResult ks_test_normal(Eigen::VectorXd samples);

struct SignInvarianceReport {
  bool pass = false;
  int assignments = 0;
  double max_cov_deviation = 0.0;
  double max_mi_deviation = 0.0;
};

// Brute-force check that every sign assignment yields the same observable
// covariance (to 1e-12) and the same direct MI. Enumeration capped at k=16.
SignInvarianceReport sign_invariance_suite(const GaussianTree& t);

struct SweepPoint {
  int n_block = 0;
  double rate_mult = 0.0;
  bool negative_arm = false;
  long samples = 0;
  double frobenius_error = 0.0;
  double max_abs_entry_error = 0.0;
  std::vector<double> tv_1d;  // per observable column
  std::vector<double> tv_2d;  // per adjacent column pair
};

struct ConvergenceReport {
  std::uint64_t seed = 0;
  int draws = 0;
  std::vector<SweepPoint> points;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // tidy: one row per point per metric
};

// End-to-end sweep: normalizes the tree, prices the per-layer rates from
// layer_rate_bounds, builds codebooks and synthesizes at every
// (rate multiplier, block length) grid point, and reports covariance and
// histogram errors against the exact observable covariance. Multipliers
// <= 0.25 are tagged as the negative (low-rate) arm.
ConvergenceReport convergence_sweep(const GaussianTree& t,
                                    const std::vector<double>& rate_mults,
                                    const std::vector<int>& n_grid, int draws,
                                    int bins, std::uint64_t seed);

}  // namespace lgs
