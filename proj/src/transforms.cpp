#include "lgs/transforms.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <nlohmann/json.hpp>

namespace lgs {

nlohmann::json TransformLog::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const TransformRecord& r : records) {
    nlohmann::json jr;
    jr["kind"] = r.kind == TransformRecord::Kind::PseudoNode ? "pseudo_node"
                                                             : "layer_move";
    jr["affected"] = r.affected;
    if (!r.created.empty()) jr["created"] = r.created;
    if (r.mirrored >= 0) jr["mirrored"] = r.mirrored;
    if (!r.new_layers.empty()) jr["new_layers"] = r.new_layers;
    out.push_back(jr);
  }
  return out;
}

TransformResult insert_pseudo_nodes(const GaussianTree& t,
                                    const LayerDecomposition& d) {
  (void)d;
  std::vector<TreeNode> nodes = t.nodes();
  std::vector<TreeEdge> edges = t.edges();
  NodeId next_id = 0;
  for (const TreeNode& n : nodes) next_id = std::max(next_id, n.id + 1);

  TransformLog log;
  for (int i = 0; i < t.size(); ++i) {
    if (t.is_latent(i) || t.degree(i) < 2) continue;
    NodeId x = t.node(i).id;
    NodeId p = next_id++;
    nodes.push_back({p, NodeKind::Pseudo});
    TransformRecord rec;
    rec.kind = TransformRecord::Kind::PseudoNode;
    rec.mirrored = x;
    rec.created = {p};
    for (TreeEdge& e : edges) {
      if (e.u == x || e.v == x) {
        rec.affected.push_back(e.u == x ? e.v : e.u);
        (e.u == x ? e.u : e.v) = p;
      }
    }
    edges.push_back({x, p, 1.0, true});
    log.records.push_back(std::move(rec));
  }
  GaussianTree t2(std::move(nodes), std::move(edges));
  LayerDecomposition d2 = assign_layers(t2);
  return {std::move(t2), std::move(d2), std::move(log)};
}

TransformResult reorder_layers(const GaussianTree& t, const LayerDecomposition& d) {
  // Top set: nodes at the current top layer. Stage everything by distance
  // from that set; a tie (two adjacent nodes equidistant from the top) is
  // resolved by promoting both into the top set and restarting.
  std::set<int> top(d.nodes_at[d.top_layer].begin(), d.nodes_at[d.top_layer].end());
  std::vector<int> depth;
  for (int guard = 0; guard <= t.size(); ++guard) {
    depth.assign(t.size(), -1);
    std::deque<int> q;
    for (int v : top) {
      depth[v] = 0;
      q.push_back(v);
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (const AdjEntry& e : t.adj(u)) {
        if (depth[e.nbr] == -1) {
          depth[e.nbr] = depth[u] + 1;
          q.push_back(e.nbr);
        }
      }
    }
    bool tie = false;
    for (const TreeEdge& e : t.edges()) {
      int u = t.index_of(e.u), v = t.index_of(e.v);
      if (depth[u] == depth[v] && !(top.count(u) && top.count(v))) {
        top.insert(u);
        top.insert(v);
        tie = true;
      }
    }
    if (!tie) break;
    if (guard == t.size())
      throw ValidationError("layer reordering failed to converge");
  }
  int max_depth = 0;
  for (int v : depth) max_depth = std::max(max_depth, v);

  LayerDecomposition d2;
  d2.layer_of.resize(t.size());
  for (int i = 0; i < t.size(); ++i) d2.layer_of[i] = max_depth - depth[i];
  d2.rebuild_from_layer_of(t);

  TransformLog log;
  TransformRecord rec;
  rec.kind = TransformRecord::Kind::LayerMove;
  for (int i = 0; i < t.size(); ++i) {
    if (d2.layer_of[i] != d.layer_of[i]) {
      rec.affected.push_back(t.node(i).id);
      rec.new_layers.push_back(d2.layer_of[i]);
    }
  }
  if (!rec.affected.empty()) log.records.push_back(std::move(rec));
  return {t, std::move(d2), std::move(log)};
}

TransformResult normalize_for_synthesis(const GaussianTree& t,
                                        const LayerDecomposition& d) {
  TransformResult cur{t, d, {}};
  // Pseudo insertion to fixpoint. A single pass normally suffices (pseudo
  // nodes are latent, so no new internal observables appear), but guard
  // against surprises.
  for (int guard = 0;; ++guard) {
    if (guard > t.size())
      throw ValidationError("normalization failed to reach a fixpoint");
    TransformResult ps = insert_pseudo_nodes(cur.tree, cur.layers);
    bool changed = !ps.log.empty();
    cur.log.append(ps.log);
    cur.tree = std::move(ps.tree);
    cur.layers = std::move(ps.layers);
    if (!changed) break;
  }
  // Reordering is a pure relabeling and cannot create internal observables,
  // so one pass completes the normalization.
  {
    TransformResult ro = reorder_layers(cur.tree, cur.layers);
    cur.log.append(ro.log);
    cur.layers = std::move(ro.layers);
  }
  auto rep = check_hyper_chain(cur.tree, cur.layers);
  if (!rep.ok)
    throw ValidationError("normalization did not produce a layered chain: " +
                          rep.problems.front());
  return cur;
}

HyperChainReport check_hyper_chain(const GaussianTree& t,
                                   const LayerDecomposition& d) {
  HyperChainReport rep;
  auto fail = [&](std::string s) {
    rep.ok = false;
    rep.problems.push_back(std::move(s));
  };
  for (const TreeEdge& e : t.edges()) {
    int u = t.index_of(e.u), v = t.index_of(e.v);
    int lu = d.layer_of[u], lv = d.layer_of[v];
    if (lu == lv && lu != d.top_layer)
      fail("intra-layer edge below the top layer: " + std::to_string(e.u) + "-" +
           std::to_string(e.v));
    if (lu != lv && std::abs(lu - lv) != 1)
      fail("edge skips a layer: " + std::to_string(e.u) + "-" + std::to_string(e.v));
  }
  for (int i = 0; i < t.size(); ++i) {
    if (d.layer_of[i] == d.top_layer) continue;
    bool has_upper = false;
    for (const AdjEntry& e : t.adj(i))
      has_upper = has_upper || d.layer_of[e.nbr] == d.layer_of[i] + 1;
    if (!has_upper)
      fail("node without an upper neighbor: " + std::to_string(t.node(i).id));
  }
  return rep;
}

}  // namespace lgs
