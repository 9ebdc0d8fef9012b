#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "lgs/covariance.hpp"
#include "lgs/synthesis.hpp"
#include "lgs/transforms.hpp"
#include "lgs/validation.hpp"

using namespace lgs;

TEST_CASE("channel apply") {
  RngStream rng(1);
  Eigen::MatrixXd a(1, 1);
  a << 0.6;
  Eigen::VectorXd y(1), zero(1);
  y << 1.0;
  zero << 0.0;
  auto out = channel_apply(a, y, zero, rng);
  CHECK(out(0) == doctest::Approx(0.6).epsilon(1e-15));

  Eigen::VectorXd sig(1);
  sig << 0.8;
  double acc = 0.0;
  for (int i = 0; i < 2000; ++i) acc += channel_apply(a, y, sig, rng)(0);
  CHECK(acc / 2000 == doctest::Approx(0.6).epsilon(0.2));

  Eigen::VectorXd bad(2);
  CHECK_THROWS_AS(channel_apply(a, bad, zero, rng), ValidationError);
}

TEST_CASE("sign flip negates one column of the connection matrix") {
  GaussianTree t = fixtures::two_layer();
  auto d = assign_layers(t);
  StageChannel ch = make_stage_channel(t, d, 1);
  auto plus = SignAssignment::all_plus(t);
  auto flip = plus;
  flip.s[t.index_of(21)] = -1;
  Eigen::MatrixXd a0 = ch.signed_matrix(t, plus);
  Eigen::MatrixXd a1 = ch.signed_matrix(t, flip);
  auto col21 = std::lower_bound(ch.in_nodes.begin(), ch.in_nodes.end(),
                                t.index_of(21)) -
               ch.in_nodes.begin();
  for (Eigen::Index c = 0; c < a0.cols(); ++c)
    for (Eigen::Index r = 0; r < a0.rows(); ++r)
      CHECK(a1(r, c) == (c == col21 ? -a0(r, c) : a0(r, c)));
  // one nonzero per row in this single-parent tree
  for (Eigen::Index r = 0; r < a0.rows(); ++r)
    CHECK((a0.row(r).array() != 0.0).count() == 1);
}

TEST_CASE("single-codeword star synthesis matches the conditional law") {
  GaussianTree t = fixtures::star();
  auto d = assign_layers(t);
  CodebookStack cb(t, d, 64, {{0.0, 0.0}}, SignDistribution::uniform(t), 77);
  CHECK(cb.m_y(1) == 1);
  CHECK(cb.m_b(1) == 1);
  BatchResult batch = synthesize_batch(cb, 400, 5);
  // every draw reuses the same resolved codeword
  Eigen::MatrixXd y = batch.outputs[0].resolved[0];
  for (int i = 1; i < 10; ++i)
    CHECK((batch.outputs[i].resolved[0] - y).cwiseAbs().maxCoeff() == 0.0);
  // conditional residuals have variance 1 - gamma^2 per component
  auto b1 = batch.outputs[0].signs[0];
  for (int col = 0; col < 3; ++col) {
    std::vector<double> res;
    for (const auto& o : batch.outputs)
      for (int tslot = 0; tslot < 64; ++tslot)
        res.push_back(o.x(tslot, col) - 0.6 * b1(tslot, 0) * y(tslot, 0));
    double m = 0.0, v = 0.0;
    for (double r : res) m += r;
    m /= res.size();
    for (double r : res) v += (r - m) * (r - m);
    v /= res.size() - 1;
    CHECK(m == doctest::Approx(0.0).epsilon(0.05));
    CHECK(v == doctest::Approx(0.64).epsilon(0.05));
  }
}

TEST_CASE("two-layer chain and provenance consistency") {
  GaussianTree t = fixtures::two_layer();
  auto d = assign_layers(t);
  CodebookStack cb(t, d, 16, {{0.5, 0.5}, {0.5, 0.5}},
                   SignDistribution::uniform(t), 19);
  RngStream rng(3);
  SynthesisOutput o = synthesize_one(cb, rng);
  REQUIRE(o.chain.size() == 2);
  CHECK(o.chain[0].layer == 1);
  CHECK(o.chain[1].layer == 2);
  Provenance p = cb.provenance(1, o.chain[0].y_index);
  CHECK(p.y_index == o.chain[1].y_index);
  CHECK(p.b_index == o.chain[1].b_index);
  // re-resolving the chain reproduces the stored sequences bit for bit
  for (std::size_t c = 0; c < o.chain.size(); ++c) {
    auto again = cb.resolved(o.chain[c].layer, o.chain[c].y_index,
                             o.chain[c].b_index);
    CHECK((again - o.resolved[c]).cwiseAbs().maxCoeff() == 0.0);
  }
  // x columns are finite and shaped correctly
  CHECK(o.x.rows() == 16);
  CHECK(o.x.cols() == 8);
  CHECK(o.x.allFinite());
}

TEST_CASE("batch determinism and pooling") {
  GaussianTree t = fixtures::two_layer();
  auto d = assign_layers(t);
  CodebookStack cb(t, d, 8, {{0.4, 0.4}, {0.4, 0.4}},
                   SignDistribution::uniform(t), 101);
  auto a = synthesize_batch(cb, 5, 42);
  auto b = synthesize_batch(cb, 5, 42);
  CHECK((a.pooled - b.pooled).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.pooled.rows() == 40);
  auto c = synthesize_batch(cb, 5, 43);
  CHECK((a.pooled - c.pooled).cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS_AS(synthesize_batch(cb, 0, 1), ValidationError);
}

TEST_CASE("channel residuals are Gaussian") {
  GaussianTree t = fixtures::star();
  auto d = assign_layers(t);
  CodebookStack cb(t, d, 128, {{0.0, 0.0}}, SignDistribution::uniform(t), 55);
  BatchResult batch = synthesize_batch(cb, 100, 9);
  Eigen::MatrixXd y = batch.outputs[0].resolved[0];
  auto b1 = batch.outputs[0].signs[0];
  const double sigma = std::sqrt(1.0 - 0.36);
  for (int col = 0; col < 3; ++col) {
    std::vector<double> res;
    for (const auto& o : batch.outputs)
      for (int tslot = 0; tslot < 128; ++tslot)
        res.push_back((o.x(tslot, col) - 0.6 * b1(tslot, 0) * y(tslot, 0)) / sigma);
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(res.data(), (Eigen::Index)res.size());
    auto ks = ks_test_normal(v);
    CHECK(ks.p_value > 0.01);
  }
}

TEST_CASE("synthesis after normalization covers reordered observables") {
  GaussianTree t = fixtures::cross_edge();
  auto norm = normalize_for_synthesis(t, assign_layers(t));
  std::vector<RateTuple> rates(norm.layers.top_layer, {1.0, 1.0});
  CodebookStack cb(norm.tree, norm.layers, 16, rates,
                   SignDistribution::uniform(norm.tree), 7);
  auto batch = synthesize_batch(cb, 10, 2);
  CHECK(batch.pooled.rows() == 160);
  CHECK(batch.pooled.cols() == 7);
  CHECK(batch.pooled.allFinite());
}
