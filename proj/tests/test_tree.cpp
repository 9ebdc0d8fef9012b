#include <doctest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "lgs/tree.hpp"

using namespace lgs;

namespace {
nlohmann::json star_spec(double g = 0.6) {
  return {{"nodes",
           {{{"id", 1}, {"kind", "observable"}},
            {{"id", 2}, {"kind", "observable"}},
            {{"id", 3}, {"kind", "observable"}},
            {{"id", 10}, {"kind", "latent"}}}},
          {"edges",
           {{{"u", 1}, {"v", 10}, {"gamma", g}},
            {{"u", 2}, {"v", 10}, {"gamma", g}},
            {{"u", 3}, {"v", 10}, {"gamma", g}}}}};
}
}  // namespace

TEST_CASE("parse star spec") {
  GaussianTree t = GaussianTree::parse(star_spec());
  CHECK(t.size() == 4);
  CHECK(t.latent_count() == 1);
  CHECK(t.observable_indices().size() == 3);
  CHECK(t.is_minimal());
  auto d = assign_layers(t);
  CHECK(d.top_layer == 1);
  CHECK(d.layer_of[t.index_of(10)] == 1);
  CHECK(d.layer_of[t.index_of(1)] == 0);
}

TEST_CASE("parse round trip") {
  GaussianTree t = GaussianTree::parse(star_spec());
  GaussianTree t2 = GaussianTree::parse(t.to_json());
  CHECK(t2.size() == t.size());
  CHECK(t2.edges().size() == t.edges().size());
}

TEST_CASE("four-leaf two-latent tree") {
  GaussianTree t = fixtures::latent_pair();
  CHECK(t.latent_count() == 2);
  CHECK(t.observable_indices().size() == 4);
  CHECK(t.is_minimal());
  auto d = assign_layers(t);
  CHECK(d.top_layer == 1);
  CHECK(d.latent_count_at[1] == 2);
}

TEST_CASE("parse rejections") {
  auto bad_gamma = star_spec(1.0);
  CHECK_THROWS_AS(GaussianTree::parse(bad_gamma), ValidationError);
  auto tiny_gamma = star_spec(1e-12);
  CHECK_THROWS_AS(GaussianTree::parse(tiny_gamma), ValidationError);

  auto dup = star_spec();
  dup["nodes"][1]["id"] = 1;
  CHECK_THROWS_AS(GaussianTree::parse(dup), ValidationError);

  auto cyclic = star_spec();
  cyclic["edges"][2] = {{"u", 1}, {"v", 2}, {"gamma", 0.5}};
  CHECK_THROWS_AS(GaussianTree::parse(cyclic), ValidationError);

  auto missing = star_spec();
  missing["edges"].erase(2);
  CHECK_THROWS_AS(GaussianTree::parse(missing), ValidationError);

  CHECK_THROWS_AS(GaussianTree::parse(nlohmann::json::array()), ValidationError);
}

TEST_CASE("two-layer layer assignment") {
  GaussianTree t = fixtures::two_layer();
  auto d = assign_layers(t);
  CHECK(d.top_layer == 2);
  CHECK(d.latent_count_at[1] == 4);
  CHECK(d.latent_count_at[2] == 2);
  for (int i = 1; i <= 8; ++i) CHECK(d.layer_of[t.index_of(i)] == 0);
}

TEST_CASE("path and median") {
  GaussianTree t = fixtures::latent_pair();
  auto p = t.path(t.index_of(1), t.index_of(3));
  CHECK(p.size() == 4);
  CHECK(p.front() == t.index_of(1));
  CHECK(p.back() == t.index_of(3));
  CHECK(t.median(t.index_of(1), t.index_of(2), t.index_of(3)) == t.index_of(10));
  CHECK(t.median(t.index_of(3), t.index_of(4), t.index_of(1)) == t.index_of(11));
}

TEST_CASE("minimality flag") {
  // latent with degree 2 is not minimal
  GaussianTree t({{1, NodeKind::Observable},
                  {2, NodeKind::Observable},
                  {10, NodeKind::Latent}},
                 {{1, 10, 0.5}, {2, 10, 0.5}});
  CHECK_FALSE(t.is_minimal());
}

TEST_CASE("sign enumeration") {
  GaussianTree t = fixtures::latent_pair();
  auto all = enumerate_signs(t);
  CHECK(all.size() == 4);
  auto b = sign_from_bits(t, 0b01);
  // bit 0 refers to the lowest latent index
  auto lats = t.latent_indices();
  CHECK(b[lats[0]] == 1);
  CHECK(b[lats[1]] == -1);
}

TEST_CASE("sign distribution weights") {
  GaussianTree t = fixtures::star();
  auto pi = SignDistribution::uniform(t);
  pi.validate(t);
  double total = 0.0;
  for (const auto& b : enumerate_signs(t)) total += pi.weight(t, b);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  auto bad = SignDistribution::constant(t, 1.0);
  CHECK_THROWS_AS(bad.validate(t), ValidationError);
}
