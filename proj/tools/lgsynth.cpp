#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lgs/codebook.hpp"
#include "lgs/covariance.hpp"
#include "lgs/info.hpp"
#include "lgs/synthesis.hpp"
#include "lgs/transforms.hpp"
#include "lgs/tree.hpp"
#include "lgs/validation.hpp"

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214582;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

int run_validate(const std::string& tree_path) {
  auto t = lgs::GaussianTree::parse_file(tree_path);
  bool minimal = t.is_minimal();
  auto sigma = lgs::observable_covariance(t);
  auto corr = lgs::validate_correlation_space(sigma);
  nlohmann::json rep;
  rep["minimal"] = minimal;
  rep["correlation_space_ok"] = corr.ok;
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : corr.violations)
    viol.push_back({{"i", v.i}, {"j", v.j}, {"k", v.k}, {"reason", v.reason}});
  rep["violations"] = viol;
  if (minimal) {
    auto inv = lgs::sign_invariance_suite(t);
    rep["sign_invariance_pass"] = inv.pass;
    rep["sign_assignments"] = inv.assignments;
  }
  std::cout << rep.dump(2) << "\n";
  if (!minimal)
    std::cerr << "warning: tree is not minimal (a latent node has degree < 3)\n";
  if (!corr.ok) {
    std::cerr << "correlation-space conditions violated\n";
    return 1;
  }
  std::cerr << "validation passed\n";
  return 0;
}

int run_rates(const std::string& tree_path, std::uint64_t seed, int mc_samples,
              bool bits) {
  auto t = lgs::GaussianTree::parse_file(tree_path);
  auto norm = lgs::normalize_for_synthesis(t, lgs::assign_layers(t));
  auto pi = lgs::SignDistribution::uniform(norm.tree);
  double unit = bits ? kLn2 : 1.0;
  nlohmann::json out = nlohmann::json::array();
  for (int l = 0; l < norm.layers.top_layer; ++l) {
    auto rb = lgs::layer_rate_bounds(norm.tree, norm.layers, l, pi, mc_samples,
                                     lgs::RngStream(seed).substream(0x7274, l).next_u64());
    out.push_back({{"layer", rb.layer},
                   {"sum_bound", rb.sum_bound / unit},
                   {"y_bound", rb.y_bound / unit},
                   {"stderr", rb.y_bound_stderr / unit},
                   {"units", bits ? "bits" : "nats"},
                   {"method", "closed_form+monte_carlo"},
                   {"seed", seed},
                   {"samples", mc_samples}});
  }
  std::cout << out.dump(2) << "\n";
  std::cerr << "computed bounds for " << norm.layers.top_layer << " layer(s)\n";
  return 0;
}

int run_synth(const std::string& tree_path, std::uint64_t seed, int n_block,
              double rate_mult, int draws, int mc_samples,
              const std::string& out_dir) {
  auto t = lgs::GaussianTree::parse_file(tree_path);
  auto norm = lgs::normalize_for_synthesis(t, lgs::assign_layers(t));
  auto pi = lgs::SignDistribution::uniform(norm.tree);

  std::vector<lgs::RateTuple> rates;
  for (int l = 0; l < norm.layers.top_layer; ++l) {
    auto rb = lgs::layer_rate_bounds(norm.tree, norm.layers, l, pi, mc_samples,
                                     lgs::RngStream(seed).substream(0x7274, l).next_u64());
    lgs::RateTuple r;
    r.r_y = rate_mult * std::max(rb.y_bound, 0.0);
    r.r_b = rate_mult * std::max(rb.sum_bound - rb.y_bound, 0.0);
    rates.push_back(r);
  }
  lgs::CodebookStack cb(norm.tree, norm.layers, n_block, rates, pi,
                        lgs::RngStream(seed).substream(0x6362).next_u64());
  auto batch = lgs::synthesize_batch(
      cb, draws, lgs::RngStream(seed).substream(0x6472).next_u64());

  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);

  std::string csv;
  for (std::size_t c = 0; c < batch.observable_ids.size(); ++c) {
    if (c) csv += ',';
    csv += std::to_string(batch.observable_ids[c]);
  }
  csv += '\n';
  for (Eigen::Index r = 0; r < batch.pooled.rows(); ++r) {
    for (Eigen::Index c = 0; c < batch.pooled.cols(); ++c) {
      if (c) csv += ',';
      csv += fmt(batch.pooled(r, c));
    }
    csv += '\n';
  }
  write_file(dir / "samples.csv", csv);

  std::string chains;
  for (std::size_t d = 0; d < batch.outputs.size(); ++d) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : batch.outputs[d].chain)
      entries.push_back({{"layer", e.layer},
                         {"y_index", e.y_index},
                         {"b_index", e.b_index}});
    chains += nlohmann::json{{"draw", d}, {"chain", entries}}.dump();
    chains += '\n';
  }
  write_file(dir / "chain.jsonl", chains);
  write_file(dir / "transforms.json", norm.log.to_json().dump(2) + "\n");
  write_file(dir / "manifest.json", cb.manifest().dump(2) + "\n");

  std::cerr << "wrote " << batch.pooled.rows() << " sample rows to " << out_dir
            << "\n";
  return 0;
}

int run_sweep(const std::string& tree_path, std::uint64_t seed,
              std::vector<int> n_grid, std::vector<double> mults, int draws,
              int bins, const std::string& out_dir) {
  auto t = lgs::GaussianTree::parse_file(tree_path);
  auto rep = lgs::convergence_sweep(t, mults, n_grid, draws, bins, seed);
  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);
  write_file(dir / "report.json", rep.to_json().dump(2) + "\n");
  write_file(dir / "report.csv", rep.to_csv());
  std::cerr << "sweep finished: " << rep.points.size() << " grid points\n";
  return 0;
}

int run_signopt(const std::string& tree_path, std::uint64_t seed, int grid,
                int mc_samples) {
  auto t = lgs::GaussianTree::parse_file(tree_path);
  auto rep = lgs::uniform_sign_optimality_check(t, grid, mc_samples, seed);
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : rep.grid)
    pts.push_back({{"pi", p.pi}, {"mi", p.mi}, {"stderr", p.stderr_}});
  nlohmann::json out = {{"grid", pts},
                        {"argmin", rep.argmin},
                        {"argmin_pi", rep.grid[rep.argmin].pi},
                        {"uniform_index", rep.uniform_index},
                        {"uniform_within_2se", rep.uniform_within_2se},
                        {"seed", seed},
                        {"samples", mc_samples}};
  std::cout << out.dump(2) << "\n";
  std::cerr << (rep.uniform_within_2se
                    ? "uniform point is within 2 stderr of the minimum\n"
                    : "uniform point is NOT within 2 stderr of the minimum\n");
  return rep.uniform_within_2se ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered synthesis of latent Gaussian trees"};
  app.require_subcommand(1);

  std::string tree_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int n_block = 256, draws = 100, mc_samples = 100000, bins = 50, grid = 9;
  double rate_mult = 1.2;
  std::vector<int> n_grid = {64, 256, 1024};
  std::vector<double> mults = {1.2, 0.0};
  bool bits = false;

  auto add_common = [&](CLI::App* sub, bool needs_seed) {
    sub->add_option("--tree", tree_path, "tree spec (JSON)")->required();
    auto* s = sub->add_option("--seed", seed, "PRNG seed");
    if (needs_seed) s->required();
    (void)seed_set;
  };

  auto* v = app.add_subcommand("validate", "structural and statistical checks");
  add_common(v, false);

  auto* r = app.add_subcommand("rates", "per-layer rate lower bounds");
  add_common(r, true);
  r->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");
  r->add_flag("--bits", bits, "report bits instead of nats");

  auto* s = app.add_subcommand("synth", "build codebooks and synthesize");
  add_common(s, true);
  s->add_option("--n", n_block, "block length N");
  s->add_option("--rate-mult", rate_mult, "rate multiplier over the bounds");
  s->add_option("--draws", draws, "number of output draws");
  s->add_option("--mc-samples", mc_samples, "Monte Carlo samples for rate pricing");
  s->add_option("--out", out_dir, "output directory");

  auto* w = app.add_subcommand("sweep", "convergence sweep over N and rates");
  add_common(w, true);
  w->add_option("--n", n_grid, "block length grid");
  w->add_option("--rate-mult", mults, "rate multiplier grid");
  w->add_option("--draws", draws, "draws per grid point");
  w->add_option("--bins", bins, "histogram bins per dimension");
  w->add_option("--out", out_dir, "output directory");

  auto* o = app.add_subcommand("signopt", "uniform-sign optimality grid check");
  add_common(o, true);
  o->add_option("--grid", grid, "grid points per latent axis");
  o->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (v->parsed()) return run_validate(tree_path);
    if (r->parsed()) return run_rates(tree_path, seed, mc_samples, bits);
    if (s->parsed())
      return run_synth(tree_path, seed, n_block, rate_mult, draws, mc_samples,
                       out_dir);
    if (w->parsed())
      return run_sweep(tree_path, seed, n_grid, mults, draws, bins, out_dir);
    if (o->parsed()) return run_signopt(tree_path, seed, grid, mc_samples);
  } catch (const lgs::ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 3;
  } catch (const lgs::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
