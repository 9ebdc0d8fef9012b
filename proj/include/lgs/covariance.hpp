#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lgs/tree.hpp"

namespace lgs {

// Covariance over an ordered node subset; unit diagonal by construction.
struct CovarianceMatrix {
  Eigen::MatrixXd m;
  std::vector<NodeId> ids;  // column/row labels, same order as m

  std::string to_csv() const;  // header row of ids, then row-major values
};

// Exact covariance implied by the tree: entry (u,v) is the product of signed
// edge weights along the tree path, each edge weight gamma_ij picking up the
// sign bits of its latent endpoints. subset entries are node indices.
CovarianceMatrix marginal_covariance(const GaussianTree& t, const SignAssignment& b,
                                     const std::vector<int>& subset);

// Convenience: covariance of all observables under all-plus signs.
CovarianceMatrix observable_covariance(const GaussianTree& t);

struct TripletViolation {
  int i, j, k;  // indices into sigma
  std::string reason;
};

struct CorrelationSpaceReport {
  bool ok = true;
  std::vector<TripletViolation> violations;
};

// Checks, for every triplet, |rho_ij| >= |rho_ik rho_jk| (all three pairings)
// and rho_ij rho_ik rho_jk > 0.
CorrelationSpaceReport validate_correlation_space(const CovarianceMatrix& sigma);

// All 2^k sign assignments of a minimal tree. Throws ValidationError on a
// non-minimal tree, ResourceError when k > 16.
std::vector<SignAssignment> enumerate_sign_equivalents(const GaussianTree& t);

// True when every matrix in the set is entrywise within tol of the first.
bool covariances_identical(const std::vector<Eigen::MatrixXd>& ms, double tol);

}  // namespace lgs
