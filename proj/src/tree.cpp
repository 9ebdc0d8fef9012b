#include "lgs/tree.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace lgs {

namespace {
constexpr double kGammaFloor = 1e-9;

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) {
    for (int i = 0; i < n; ++i) p[i] = i;
  }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[a] = b;
    return true;
  }
};
}  // namespace

GaussianTree::GaussianTree(std::vector<TreeNode> nodes, std::vector<TreeEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  if (nodes_.empty()) throw ValidationError("tree has no nodes");
  std::sort(nodes_.begin(), nodes_.end(),
            [](const TreeNode& a, const TreeNode& b) { return a.id < b.id; });
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second)
      throw ValidationError("duplicate node id " + std::to_string(nodes_[i].id));
  }
  if (static_cast<int>(edges_.size()) != size() - 1)
    throw ValidationError("edge count must be node count - 1 for a tree");
  adj_.resize(size());
  Dsu dsu(size());
  for (const TreeEdge& e : edges_) {
    auto iu = index_.find(e.u);
    auto iv = index_.find(e.v);
    if (iu == index_.end() || iv == index_.end())
      throw ValidationError("edge references unknown node id");
    if (e.mirror) {
      if (e.gamma != 1.0)
        throw ValidationError("mirror edge must have weight 1");
    } else {
      double a = std::abs(e.gamma);
      if (a <= kGammaFloor || a >= 1.0 - kGammaFloor)
        throw ValidationError("edge weight magnitude must lie in (0,1), got " +
                              std::to_string(e.gamma));
    }
    if (!dsu.unite(iu->second, iv->second))
      throw ValidationError("edge set contains a cycle");
    adj_[iu->second].push_back({iv->second, e.gamma, e.mirror});
    adj_[iv->second].push_back({iu->second, e.gamma, e.mirror});
  }
  for (auto& a : adj_)
    std::sort(a.begin(), a.end(),
              [](const AdjEntry& x, const AdjEntry& y) { return x.nbr < y.nbr; });
  // n-1 acyclic edges on n nodes imply connectivity, but a failed unite above
  // already threw; nothing more to check.
}

GaussianTree GaussianTree::parse(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
    throw ValidationError("tree spec must be an object with nodes and edges");
  std::vector<TreeNode> nodes;
  for (const auto& n : doc.at("nodes")) {
    NodeId id = n.at("id").get<NodeId>();
    std::string kind = n.at("kind").get<std::string>();
    NodeKind k;
    if (kind == "observable")
      k = NodeKind::Observable;
    else if (kind == "latent")
      k = NodeKind::Latent;
    else if (kind == "pseudo")
      k = NodeKind::Pseudo;
    else
      throw ValidationError("unknown node kind: " + kind);
    nodes.push_back({id, k});
  }
  std::vector<TreeEdge> edges;
  for (const auto& e : doc.at("edges")) {
    TreeEdge te;
    te.u = e.at("u").get<NodeId>();
    te.v = e.at("v").get<NodeId>();
    te.gamma = e.at("gamma").get<double>();
    te.mirror = e.value("mirror", false);
    edges.push_back(te);
  }
  return GaussianTree(std::move(nodes), std::move(edges));
}

GaussianTree GaussianTree::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open tree spec: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed tree spec: ") + e.what());
  }
  return parse(doc);
}

nlohmann::json GaussianTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : nodes_) {
    const char* kind = n.kind == NodeKind::Observable ? "observable"
                       : n.kind == NodeKind::Latent   ? "latent"
                                                      : "pseudo";
    nodes.push_back({{"id", n.id}, {"kind", kind}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const TreeEdge& e : edges_) {
    nlohmann::json je = {{"u", e.u}, {"v", e.v}, {"gamma", e.gamma}};
    if (e.mirror) je["mirror"] = true;
    edges.push_back(je);
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

int GaussianTree::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw ValidationError("unknown node id " + std::to_string(id));
  return it->second;
}

std::vector<int> GaussianTree::observable_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (!is_latent(i)) out.push_back(i);
  return out;
}

std::vector<int> GaussianTree::latent_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (is_latent(i)) out.push_back(i);
  return out;
}

std::vector<NodeId> GaussianTree::observable_ids() const {
  std::vector<NodeId> out;
  for (int i : observable_indices()) out.push_back(nodes_[i].id);
  return out;
}

int GaussianTree::latent_count() const {
  return static_cast<int>(latent_indices().size());
}

bool GaussianTree::is_minimal() const {
  for (int i = 0; i < size(); ++i)
    if (is_latent(i) && degree(i) < 3) return false;
  return true;
}

std::vector<int> GaussianTree::path(int a, int b) const {
  std::vector<int> parent(size(), -1);
  std::deque<int> q{a};
  std::vector<char> seen(size(), 0);
  seen[a] = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (u == b) break;
    for (const AdjEntry& e : adj_[u]) {
      if (!seen[e.nbr]) {
        seen[e.nbr] = 1;
        parent[e.nbr] = u;
        q.push_back(e.nbr);
      }
    }
  }
  std::vector<int> out;
  for (int v = b; v != -1; v = parent[v]) out.push_back(v);
  std::reverse(out.begin(), out.end());
  return out;
}

int GaussianTree::median(int a, int b, int c) const {
  auto pab = path(a, b);
  auto pac = path(a, c);
  std::set<int> on_ab(pab.begin(), pab.end());
  // walk a->c; the last node still on path(a,b) is the branch point
  int m = a;
  for (int v : pac) {
    if (on_ab.count(v)) m = v;
  }
  return m;
}

void LayerDecomposition::rebuild_from_layer_of(const GaussianTree& t) {
  top_layer = 0;
  for (int l : layer_of) top_layer = std::max(top_layer, l);
  nodes_at.assign(top_layer + 1, {});
  latent_count_at.assign(top_layer + 1, 0);
  for (int i = 0; i < t.size(); ++i) {
    nodes_at[layer_of[i]].push_back(i);
    if (t.is_latent(i)) ++latent_count_at[layer_of[i]];
  }
}

LayerDecomposition assign_layers(const GaussianTree& t) {
  // multi-source BFS from the observable set; mirror edges carry no distance
  LayerDecomposition d;
  d.layer_of.assign(t.size(), -1);
  std::deque<int> q;
  for (int i = 0; i < t.size(); ++i) {
    if (!t.is_latent(i) && !(t.degree(i) == 1 && t.adj(i)[0].mirror)) {
      d.layer_of[i] = 0;
      q.push_back(i);
    }
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (const AdjEntry& e : t.adj(u)) {
      if (e.mirror) continue;
      if (d.layer_of[e.nbr] == -1) {
        d.layer_of[e.nbr] = d.layer_of[u] + 1;
        q.push_back(e.nbr);
      }
    }
  }
  // observables hanging off a mirror edge sit one layer below their twin
  for (int i = 0; i < t.size(); ++i) {
    if (d.layer_of[i] == -1) {
      for (const AdjEntry& e : t.adj(i)) {
        if (d.layer_of[e.nbr] >= 1) d.layer_of[i] = d.layer_of[e.nbr] - 1;
      }
      if (d.layer_of[i] == -1)
        throw ValidationError("node unreachable from observable set");
    }
  }
  d.rebuild_from_layer_of(t);
  return d;
}

SignAssignment SignAssignment::all_plus(const GaussianTree& t) {
  SignAssignment b;
  b.s.assign(t.size(), 1);
  return b;
}

SignDistribution SignDistribution::uniform(const GaussianTree& t) {
  return constant(t, 0.5);
}

SignDistribution SignDistribution::constant(const GaussianTree& t, double p) {
  SignDistribution d;
  d.pi.assign(t.size(), p);
  return d;
}

void SignDistribution::validate(const GaussianTree& t) const {
  if (static_cast<int>(pi.size()) != t.size())
    throw ValidationError("sign distribution size mismatch");
  for (int i : t.latent_indices())
    if (!(pi[i] > 0.0 && pi[i] < 1.0))
      throw ValidationError("sign parameter must lie in (0,1)");
}

double SignDistribution::weight(const GaussianTree& t, const SignAssignment& b) const {
  double w = 1.0;
  for (int i : t.latent_indices()) w *= b[i] > 0 ? pi[i] : 1.0 - pi[i];
  return w;
}

SignAssignment sign_from_bits(const GaussianTree& t, std::uint64_t bits) {
  SignAssignment b = SignAssignment::all_plus(t);
  int j = 0;
  for (int i : t.latent_indices()) {
    b.s[i] = (bits >> j) & 1 ? 1 : -1;
    ++j;
  }
  return b;
}

std::vector<SignAssignment> enumerate_signs(const GaussianTree& t) {
  int k = t.latent_count();
  if (k > 16) throw ResourceError("too many latent nodes to enumerate signs");
  std::vector<SignAssignment> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits)
    out.push_back(sign_from_bits(t, bits));
  return out;
}

}  // namespace lgs
