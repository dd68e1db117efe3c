#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowcast/partition.hpp"
#include "flowcast/timeutil.hpp"
#include "flowcast/trips.hpp"

namespace flowcast {

// A trip reduced to its zone assignment; empty zone id means the endpoint
// fell outside every zone of the partition.
struct AssignedTrip {
  Timestamp start_ts = 0;
  std::string origin_zone;
  std::string dest_zone;

  bool fully_assigned() const { return !origin_zone.empty() && !dest_zone.empty(); }
};

struct AssignResult {
  std::vector<AssignedTrip> trips;  // all trips, in input order (including unassigned ones)
  int64_t n_unassigned = 0;         // trips with at least one endpoint outside the partition
};

inline AssignResult assign_trips(const std::vector<TripRecord>& trips, const SpatialPartition& part) {
  AssignResult out;
  out.trips.reserve(trips.size());
  for (const auto& t : trips) {
    AssignedTrip a;
    a.start_ts = t.start_ts;
    a.origin_zone = part.assign(t.origin).value_or("");
    a.dest_zone = part.assign(t.destination).value_or("");
    if (!a.fully_assigned()) ++out.n_unassigned;
    out.trips.push_back(std::move(a));
  }
  return out;
}

// The weighted directed flow graph of one (spatial level, time bucket):
// nodes are the zones that appear on at least one trip endpoint in the
// bucket, edge weights are trip counts (>= 1; zero-count pairs are absent).
// Self-loops are first-class edges; path-based metrics skip them.
class FlowGraph {
 public:
  FlowGraph() = default;

  FlowGraph(std::string level, TimeBucket bucket, const std::vector<std::tuple<std::string, std::string, int64_t>>& weighted_edges)
      : level_(std::move(level)), bucket_(bucket) {
    std::set<std::string> node_set;
    for (const auto& [o, d, w] : weighted_edges) {
      if (w <= 0) throw DomainError("flow graph edge weight must be >= 1");
      node_set.insert(o);
      node_set.insert(d);
    }
    nodes_.assign(node_set.begin(), node_set.end());
    for (size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = i;
    out_nbrs_.assign(nodes_.size(), {});
    in_nbrs_.assign(nodes_.size(), {});
    for (const auto& [o, d, w] : weighted_edges) {
      auto key = std::make_pair(index_.at(o), index_.at(d));
      auto [it, inserted] = weights_.emplace(key, w);
      if (!inserted) it->second += w;
    }
    for (const auto& [key, w] : weights_) {
      total_weight_ += w;
      if (key.first != key.second) {
        out_nbrs_[key.first].push_back(key.second);
        in_nbrs_[key.second].push_back(key.first);
      }
    }
    for (auto& v : out_nbrs_) std::sort(v.begin(), v.end());
    for (auto& v : in_nbrs_) std::sort(v.begin(), v.end());
  }

  const std::string& level() const { return level_; }
  const TimeBucket& bucket() const { return bucket_; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  size_t size() const { return nodes_.size(); }
  const std::map<std::pair<size_t, size_t>, int64_t>& edges() const { return weights_; }
  size_t num_edges() const { return weights_.size(); }
  int64_t total_weight() const { return total_weight_; }

  bool has_node(const std::string& id) const { return index_.count(id) > 0; }
  size_t node_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DomainError("node not in flow graph: " + id);
    return it->second;
  }

  int64_t weight(size_t o, size_t d) const {
    auto it = weights_.find({o, d});
    return it == weights_.end() ? 0 : it->second;
  }
  int64_t weight_by_id(const std::string& o, const std::string& d) const {
    auto io = index_.find(o);
    auto id = index_.find(d);
    if (io == index_.end() || id == index_.end()) return 0;
    return weight(io->second, id->second);
  }

  // Distinct neighbors through out-/in-edges, self-loops excluded.
  const std::vector<size_t>& out_neighbors(size_t v) const { return out_nbrs_[v]; }
  const std::vector<size_t>& in_neighbors(size_t v) const { return in_nbrs_[v]; }

  // Unweighted directed degrees counting edges (self-loop counts once in
  // each direction, matching "self-loops are edges").
  int64_t in_degree(size_t v) const { return static_cast<int64_t>(in_nbrs_[v].size()) + (weight(v, v) > 0 ? 1 : 0); }
  int64_t out_degree(size_t v) const {
    return static_cast<int64_t>(out_nbrs_[v].size()) + (weight(v, v) > 0 ? 1 : 0);
  }

 private:
  std::string level_;
  TimeBucket bucket_;
  std::vector<std::string> nodes_;
  std::map<std::string, size_t> index_;
  std::map<std::pair<size_t, size_t>, int64_t> weights_;
  std::vector<std::vector<size_t>> out_nbrs_;
  std::vector<std::vector<size_t>> in_nbrs_;
  int64_t total_weight_ = 0;
};

// Buckets assigned trips by start_ts and builds one flow graph per non-empty
// bucket. Trips with an unassigned endpoint are dropped and counted.
inline std::map<Timestamp, FlowGraph> aggregate_od(const std::vector<AssignedTrip>& trips, Scale scale,
                                                   const std::string& level, int64_t* n_dropped = nullptr) {
  std::map<Timestamp, std::map<std::pair<std::string, std::string>, int64_t>> counts;
  int64_t dropped = 0;
  for (const auto& t : trips) {
    if (!t.fully_assigned()) {
      ++dropped;
      continue;
    }
    Timestamp b = truncate_to_scale(t.start_ts, scale);
    counts[b][{t.origin_zone, t.dest_zone}] += 1;
  }
  if (n_dropped) *n_dropped = dropped;
  std::map<Timestamp, FlowGraph> out;
  for (const auto& [start, edge_counts] : counts) {
    std::vector<std::tuple<std::string, std::string, int64_t>> edges;
    edges.reserve(edge_counts.size());
    for (const auto& [od, w] : edge_counts) edges.emplace_back(od.first, od.second, w);
    out.emplace(start, FlowGraph(level, TimeBucket{scale, start}, edges));
  }
  return out;
}

// ----------------------------------------------------------------- metrics

enum class Direction { All, In, Out };

// Fraction of other nodes a node touches: distinct neighbors through the
// requested edge direction (self excluded) over (n - 1).
inline std::vector<double> degree_centrality(const FlowGraph& g, Direction dir) {
  size_t n = g.size();
  if (n < 2) throw DomainError("degree centrality needs at least 2 nodes");
  std::vector<double> out(n, 0.0);
  for (size_t v = 0; v < n; ++v) {
    size_t count = 0;
    switch (dir) {
      case Direction::In: count = g.in_neighbors(v).size(); break;
      case Direction::Out: count = g.out_neighbors(v).size(); break;
      case Direction::All: {
        std::vector<size_t> u;
        std::set_union(g.in_neighbors(v).begin(), g.in_neighbors(v).end(), g.out_neighbors(v).begin(),
                       g.out_neighbors(v).end(), std::back_inserter(u));
        count = u.size();
        break;
      }
    }
    out[v] = static_cast<double>(count) / static_cast<double>(n - 1);
  }
  return out;
}

// Weighted degrees: strength_in(v) = sum of w_uv, strength_out(v) = sum of
// w_vu; a self-loop contributes its weight to both.
inline std::vector<std::pair<double, double>> node_strength(const FlowGraph& g) {
  std::vector<std::pair<double, double>> out(g.size(), {0.0, 0.0});
  for (const auto& [key, w] : g.edges()) {
    out[key.second].first += static_cast<double>(w);
    out[key.first].second += static_cast<double>(w);
  }
  return out;
}

struct BetweennessResult {
  std::vector<double> node;                          // normalized by (n-1)(n-2)
  std::map<std::pair<size_t, size_t>, double> edge;  // normalized by n(n-1); self-loops -> 0
};

// Brandes' algorithm over unweighted directed shortest paths. Self-loops are
// ignored; endpoints are excluded from node scores.
inline BetweennessResult betweenness(const FlowGraph& g) {
  size_t n = g.size();
  BetweennessResult res;
  res.node.assign(n, 0.0);
  for (const auto& [key, w] : g.edges())
    if (key.first != key.second) res.edge[key] = 0.0;

  if (n >= 2) {
    std::vector<double> sigma(n), delta(n);
    std::vector<int64_t> dist(n);
    std::vector<std::vector<size_t>> preds(n);
    std::vector<size_t> stack;
    for (size_t s = 0; s < n; ++s) {
      std::fill(sigma.begin(), sigma.end(), 0.0);
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(delta.begin(), delta.end(), 0.0);
      for (auto& p : preds) p.clear();
      stack.clear();
      sigma[s] = 1.0;
      dist[s] = 0;
      std::deque<size_t> queue{s};
      while (!queue.empty()) {
        size_t v = queue.front();
        queue.pop_front();
        stack.push_back(v);
        for (size_t w : g.out_neighbors(v)) {
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            queue.push_back(w);
          }
          if (dist[w] == dist[v] + 1) {
            sigma[w] += sigma[v];
            preds[w].push_back(v);
          }
        }
      }
      for (size_t i = stack.size(); i-- > 0;) {
        size_t w = stack[i];
        for (size_t v : preds[w]) {
          double share = sigma[v] / sigma[w] * (1.0 + delta[w]);
          delta[v] += share;
          auto it = res.edge.find({v, w});
          if (it != res.edge.end()) it->second += share;
        }
        if (w != s) res.node[w] += delta[w];
      }
    }
  }

  if (n >= 3) {
    double node_norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    for (auto& v : res.node) v /= node_norm;
  } else {
    std::fill(res.node.begin(), res.node.end(), 0.0);
  }
  if (n >= 2) {
    double edge_norm = static_cast<double>(n) * static_cast<double>(n - 1);
    for (auto& [_, v] : res.edge) v /= edge_norm;
  }
  return res;
}

// Minimum directed hop count, ignoring self-loops; nullopt when t is
// unreachable from s.
inline std::optional<int64_t> shortest_path_length(const FlowGraph& g, size_t s, size_t t) {
  if (s >= g.size() || t >= g.size()) throw DomainError("shortest_path_length: node index out of range");
  if (s == t) return 0;
  std::vector<int64_t> dist(g.size(), -1);
  dist[s] = 0;
  std::deque<size_t> queue{s};
  while (!queue.empty()) {
    size_t v = queue.front();
    queue.pop_front();
    for (size_t w : g.out_neighbors(v)) {
      if (dist[w] >= 0) continue;
      dist[w] = dist[v] + 1;
      if (w == t) return dist[w];
      queue.push_back(w);
    }
  }
  return std::nullopt;
}

// All-hops BFS from one source (shared by feature extraction).
inline std::vector<int64_t> bfs_hops(const FlowGraph& g, size_t s) {
  std::vector<int64_t> dist(g.size(), -1);
  dist[s] = 0;
  std::deque<size_t> queue{s};
  while (!queue.empty()) {
    size_t v = queue.front();
    queue.pop_front();
    for (size_t w : g.out_neighbors(v)) {
      if (dist[w] >= 0) continue;
      dist[w] = dist[v] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

// Local edge connectivity: unit capacity per distinct directed edge
// (self-loops ignored), computed by Edmonds-Karp, i.e. the number of
// edge-disjoint s->t paths.
inline int64_t edge_connectivity(const FlowGraph& g, size_t s, size_t t) {
  size_t n = g.size();
  if (s >= n || t >= n) throw DomainError("edge_connectivity: node index out of range");
  if (s == t) throw DomainError("edge_connectivity requires distinct source and target");
  // Residual capacities as a dense matrix (bounded use: the caller switches
  // to a degree bound beyond 500 nodes).
  std::vector<int8_t> cap(n * n, 0);
  for (const auto& [key, w] : g.edges())
    if (key.first != key.second) cap[key.first * n + key.second] = 1;
  int64_t flow = 0;
  std::vector<int64_t> parent(n);
  while (true) {
    std::fill(parent.begin(), parent.end(), -1);
    parent[s] = static_cast<int64_t>(s);
    std::deque<size_t> queue{s};
    while (!queue.empty() && parent[t] < 0) {
      size_t v = queue.front();
      queue.pop_front();
      for (size_t w = 0; w < n; ++w) {
        if (parent[w] < 0 && cap[v * n + w] > 0) {
          parent[w] = static_cast<int64_t>(v);
          queue.push_back(w);
        }
      }
    }
    if (parent[t] < 0) break;
    for (size_t v = t; v != s;) {
      size_t p = static_cast<size_t>(parent[v]);
      cap[p * n + v] -= 1;
      cap[v * n + p] += 1;
      v = p;
    }
    ++flow;
  }
  return flow;
}

// Mean neighbor total degree per observed degree k: degrees are unweighted
// in+out with self-loops excluded; neighbors are the union of in- and
// out-neighbors; isolated nodes contribute no entry.
inline std::map<int64_t, double> average_degree_connectivity(const FlowGraph& g) {
  size_t n = g.size();
  std::vector<int64_t> deg(n, 0);
  for (size_t v = 0; v < n; ++v)
    deg[v] = static_cast<int64_t>(g.in_neighbors(v).size() + g.out_neighbors(v).size());
  std::map<int64_t, std::pair<double, int64_t>> acc;  // k -> (sum of neighbor-degree means, count)
  for (size_t v = 0; v < n; ++v) {
    std::vector<size_t> nbrs;
    std::set_union(g.in_neighbors(v).begin(), g.in_neighbors(v).end(), g.out_neighbors(v).begin(),
                   g.out_neighbors(v).end(), std::back_inserter(nbrs));
    if (nbrs.empty()) continue;
    double sum = 0;
    for (size_t u : nbrs) sum += static_cast<double>(deg[u]);
    auto& slot = acc[deg[v]];
    slot.first += sum / static_cast<double>(nbrs.size());
    slot.second += 1;
  }
  std::map<int64_t, double> out;
  for (const auto& [k, sc] : acc) out[k] = sc.first / static_cast<double>(sc.second);
  return out;
}

// Directed clustering (Fagiolo): per node,
//   C_i = (A + A^T)^3                / (2 * (d_tot (d_tot - 1) - 2 d_bidir))
//              evaluated at [i][i]
// with A the unweighted adjacency without self-loops; nodes whose
// denominator vanishes (degree < 2 or fully reciprocal pair) score 0.
inline double average_clustering(const FlowGraph& g) {
  size_t n = g.size();
  if (n == 0) throw DomainError("average_clustering needs at least 1 node");
  std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
  for (const auto& [key, w] : g.edges()) {
    if (key.first == key.second) continue;
    s[key.first][key.second] += 1.0;
    s[key.second][key.first] += 1.0;
  }
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    int64_t d_tot = static_cast<int64_t>(g.in_neighbors(i).size() + g.out_neighbors(i).size());
    int64_t d_bidir = 0;
    for (size_t j : g.out_neighbors(i))
      if (g.weight(j, i) > 0) ++d_bidir;
    double denom = 2.0 * (static_cast<double>(d_tot) * (d_tot - 1) - 2.0 * static_cast<double>(d_bidir));
    if (denom <= 0) continue;  // contributes 0
    // (S^3)_ii = sum over j,k of S_ij S_jk S_ki.
    double paths = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (s[i][j] == 0.0) continue;
      for (size_t k = 0; k < n; ++k) {
        if (s[j][k] == 0.0 || s[k][i] == 0.0) continue;
        paths += s[i][j] * s[j][k] * s[k][i];
      }
    }
    total += paths / denom;
  }
  return total / static_cast<double>(n);
}

// ---------------------------------------------------- feature extraction

// All network features for one requested (origin, dest) pair, computed on
// the LAG graph (the previous bucket's graph), so nothing here can leak the
// target bucket's flows. Zones absent from the lag graph get zero node
// features and the unreachable path sentinel.
struct EdgeNetworkFeatures {
  // origin-node features
  double orig_degree_centrality = 0, orig_in_degree_centrality = 0, orig_out_degree_centrality = 0;
  double orig_betweenness = 0, orig_in_degree = 0, orig_out_degree = 0;
  double orig_strength_in = 0, orig_strength_out = 0;
  // destination-node features
  double dest_degree_centrality = 0, dest_in_degree_centrality = 0, dest_out_degree_centrality = 0;
  double dest_betweenness = 0, dest_in_degree = 0, dest_out_degree = 0;
  double dest_strength_in = 0, dest_strength_out = 0;
  // edge features
  double edge_betweenness = 0;
  double edge_connectivity = 0;
  bool connectivity_exact = true;
  double shortest_path_length = 0;  // sentinel: number of nodes when unreachable
  bool path_unreachable = false;
  double edge_present = 0;  // 1 when the pair had flow in the lag graph
  double previous_count = 0;
  // graph-level features
  double num_nodes = 0, num_edges = 0;
  double avg_degree_connectivity = 0;  // weight-free mean over the per-k map
  double average_clustering = 0;
};

// Node count threshold beyond which per-pair max-flow is replaced by the
// min(out-degree(s), in-degree(t)) upper bound.
constexpr size_t kConnectivityExactLimit = 500;

inline std::vector<EdgeNetworkFeatures> extract_network_features(
    const FlowGraph& g_prev, const std::vector<std::pair<std::string, std::string>>& edges_of_interest) {
  size_t n = g_prev.size();
  // Graph-wide metrics, computed once.
  std::vector<double> dc_all, dc_in, dc_out;
  if (n >= 2) {
    dc_all = degree_centrality(g_prev, Direction::All);
    dc_in = degree_centrality(g_prev, Direction::In);
    dc_out = degree_centrality(g_prev, Direction::Out);
  } else {
    dc_all.assign(n, 0.0);
    dc_in.assign(n, 0.0);
    dc_out.assign(n, 0.0);
  }
  auto strengths = node_strength(g_prev);
  auto btw = betweenness(g_prev);
  double clustering = n > 0 ? average_clustering(g_prev) : 0.0;
  auto adc_map = average_degree_connectivity(g_prev);
  double adc_scalar = 0.0;
  if (!adc_map.empty()) {
    for (const auto& [_, v] : adc_map) adc_scalar += v;
    adc_scalar /= static_cast<double>(adc_map.size());
  }

  // Per-source BFS cache for shortest paths.
  std::map<size_t, std::vector<int64_t>> bfs_cache;
  // Per-pair connectivity cache.
  std::map<std::pair<size_t, size_t>, int64_t> conn_cache;

  std::vector<EdgeNetworkFeatures> rows;
  rows.reserve(edges_of_interest.size());
  for (const auto& [o_id, d_id] : edges_of_interest) {
    EdgeNetworkFeatures f;
    f.num_nodes = static_cast<double>(n);
    f.num_edges = static_cast<double>(g_prev.num_edges());
    f.avg_degree_connectivity = adc_scalar;
    f.average_clustering = clustering;

    bool has_o = g_prev.has_node(o_id);
    bool has_d = g_prev.has_node(d_id);
    size_t oi = has_o ? g_prev.node_index(o_id) : 0;
    size_t di = has_d ? g_prev.node_index(d_id) : 0;

    if (has_o) {
      f.orig_degree_centrality = dc_all[oi];
      f.orig_in_degree_centrality = dc_in[oi];
      f.orig_out_degree_centrality = dc_out[oi];
      f.orig_betweenness = btw.node[oi];
      f.orig_in_degree = static_cast<double>(g_prev.in_degree(oi));
      f.orig_out_degree = static_cast<double>(g_prev.out_degree(oi));
      f.orig_strength_in = strengths[oi].first;
      f.orig_strength_out = strengths[oi].second;
    }
    if (has_d) {
      f.dest_degree_centrality = dc_all[di];
      f.dest_in_degree_centrality = dc_in[di];
      f.dest_out_degree_centrality = dc_out[di];
      f.dest_betweenness = btw.node[di];
      f.dest_in_degree = static_cast<double>(g_prev.in_degree(di));
      f.dest_out_degree = static_cast<double>(g_prev.out_degree(di));
      f.dest_strength_in = strengths[di].first;
      f.dest_strength_out = strengths[di].second;
    }

    f.previous_count = static_cast<double>(g_prev.weight_by_id(o_id, d_id));
    f.edge_present = f.previous_count > 0 ? 1.0 : 0.0;
    if (has_o && has_d) {
      auto it = btw.edge.find({oi, di});
      f.edge_betweenness = it == btw.edge.end() ? 0.0 : it->second;
      if (oi == di) {
        f.shortest_path_length = 0.0;
        // Connectivity is undefined for self-pairs; report 0 without the
        // exact flag changing (the row schema needs a number).
        f.edge_connectivity = 0.0;
      } else {
        auto& hops = bfs_cache.try_emplace(oi).first->second;
        if (hops.empty()) hops = bfs_hops(g_prev, oi);
        if (hops[di] < 0) {
          f.path_unreachable = true;
          f.shortest_path_length = static_cast<double>(n);
        } else {
          f.shortest_path_length = static_cast<double>(hops[di]);
        }
        if (n > kConnectivityExactLimit) {
          f.edge_connectivity = static_cast<double>(
              std::min(g_prev.out_neighbors(oi).size(), g_prev.in_neighbors(di).size()));
          f.connectivity_exact = false;
        } else {
          auto key = std::make_pair(oi, di);
          auto cit = conn_cache.find(key);
          if (cit == conn_cache.end()) cit = conn_cache.emplace(key, edge_connectivity(g_prev, oi, di)).first;
          f.edge_connectivity = static_cast<double>(cit->second);
        }
      }
    } else {
      // A zone outside the lag graph is unreachable by definition.
      f.path_unreachable = true;
      f.shortest_path_length = static_cast<double>(n);
      f.edge_connectivity = 0.0;
    }
    rows.push_back(f);
  }
  return rows;
}

}  // namespace flowcast

#include <json.hpp>

#include "flowcast/io.hpp"
#include "flowcast/numio.hpp"

namespace flowcast {

// Human-readable summary for one (level, bucket) graph: global shape plus a
// per-node metric table and the heaviest flows.
inline nlohmann::ordered_json graph_report_json(const FlowGraph& g, size_t top_edges = 20) {
  nlohmann::ordered_json j;
  j["level"] = g.level();
  j["scale"] = scale_name(g.bucket().scale);
  j["bucket_start"] = format_iso8601(g.bucket().start);
  j["num_nodes"] = g.size();
  j["num_edges"] = g.num_edges();
  j["total_weight"] = g.total_weight();
  j["average_clustering"] = g.size() > 0 ? average_clustering(g) : 0.0;
  nlohmann::ordered_json adc = nlohmann::ordered_json::object();
  for (const auto& [k, v] : average_degree_connectivity(g)) adc[std::to_string(k)] = v;
  j["average_degree_connectivity"] = adc;

  std::vector<double> dc_all(g.size(), 0.0), dc_in(g.size(), 0.0), dc_out(g.size(), 0.0);
  if (g.size() >= 2) {
    dc_all = degree_centrality(g, Direction::All);
    dc_in = degree_centrality(g, Direction::In);
    dc_out = degree_centrality(g, Direction::Out);
  }
  auto strengths = node_strength(g);
  auto btw = betweenness(g);
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (size_t v = 0; v < g.size(); ++v) {
    nlohmann::ordered_json nj;
    nj["id"] = g.nodes()[v];
    nj["in_degree"] = g.in_degree(v);
    nj["out_degree"] = g.out_degree(v);
    nj["strength_in"] = strengths[v].first;
    nj["strength_out"] = strengths[v].second;
    nj["degree_centrality"] = dc_all[v];
    nj["in_degree_centrality"] = dc_in[v];
    nj["out_degree_centrality"] = dc_out[v];
    nj["betweenness"] = btw.node[v];
    nodes.push_back(nj);
  }
  j["nodes"] = nodes;

  std::vector<std::tuple<int64_t, std::string, std::string>> heavy;
  for (const auto& [key, w] : g.edges()) heavy.emplace_back(w, g.nodes()[key.first], g.nodes()[key.second]);
  std::sort(heavy.begin(), heavy.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  if (heavy.size() > top_edges) heavy.resize(top_edges);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& [w, o, d] : heavy) {
    nlohmann::ordered_json ej;
    ej["origin"] = o;
    ej["dest"] = d;
    ej["weight"] = w;
    edges.push_back(ej);
  }
  j["top_edges"] = edges;
  return j;
}

inline void save_graph_report(const std::string& path, const FlowGraph& g) {
  util::write_file(path, graph_report_json(g).dump(1) + "\n");
}

}  // namespace flowcast
