#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowcast/flowgraph.hpp"
#include "flowcast/linalg.hpp"
#include "flowcast/rng.hpp"

using namespace flowcast;

namespace {

using EdgeList = std::vector<std::tuple<std::string, std::string, int64_t>>;

FlowGraph G(const EdgeList& edges) {
  return FlowGraph("test", TimeBucket{Scale::Daily, 0}, edges);
}

std::string node_name(size_t i) { return "z" + std::to_string(i); }

// ------------------------------------------------------------- oracles
// Everything below recomputes metrics from the raw edge list by definition,
// using different algorithms than the library (Floyd-Warshall, exhaustive
// path enumeration, subset removal, matrix powers).

struct RawGraph {
  size_t n = 0;
  std::set<std::pair<size_t, size_t>> arcs;       // without self-loops
  std::set<std::pair<size_t, size_t>> self_loops;  // (v, v) pairs present
  std::map<std::pair<size_t, size_t>, int64_t> weights;  // all edges

  static RawGraph from(const FlowGraph& g) {
    RawGraph r;
    r.n = g.size();
    for (const auto& [key, w] : g.edges()) {
      r.weights[key] = w;
      if (key.first == key.second)
        r.self_loops.insert(key);
      else
        r.arcs.insert(key);
    }
    return r;
  }

  std::vector<std::vector<size_t>> out_adj() const {
    std::vector<std::vector<size_t>> adj(n);
    for (const auto& [u, v] : arcs) adj[u].push_back(v);
    return adj;
  }
};

constexpr int kInf = 1 << 20;

std::vector<std::vector<int>> floyd_warshall(const RawGraph& r) {
  std::vector<std::vector<int>> d(r.n, std::vector<int>(r.n, kInf));
  for (size_t i = 0; i < r.n; ++i) d[i][i] = 0;
  for (const auto& [u, v] : r.arcs) d[u][v] = 1;
  for (size_t k = 0; k < r.n; ++k)
    for (size_t i = 0; i < r.n; ++i)
      for (size_t j = 0; j < r.n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// Enumerates every simple path of exactly dist[s][t] hops from s to t and
// tallies how many pass through each interior node and each arc.
struct PathTally {
  int64_t sigma = 0;
  std::map<size_t, int64_t> through_node;
  std::map<std::pair<size_t, size_t>, int64_t> through_edge;
};

PathTally enumerate_shortest_paths(const RawGraph& r, const std::vector<std::vector<size_t>>& adj,
                                   int target_len, size_t s, size_t t) {
  PathTally tally;
  std::vector<size_t> path{s};
  std::vector<bool> on_path(r.n, false);
  on_path[s] = true;
  std::function<void(size_t, int)> dfs = [&](size_t v, int depth) {
    if (depth == target_len) {
      if (v != t) return;
      ++tally.sigma;
      for (size_t i = 1; i + 1 < path.size(); ++i) ++tally.through_node[path[i]];
      for (size_t i = 0; i + 1 < path.size(); ++i) ++tally.through_edge[{path[i], path[i + 1]}];
      return;
    }
    if (v == t) return;  // a shortest path cannot revisit t
    for (size_t w : adj[v]) {
      if (on_path[w]) continue;
      on_path[w] = true;
      path.push_back(w);
      dfs(w, depth + 1);
      path.pop_back();
      on_path[w] = false;
    }
  };
  dfs(s, 0);
  return tally;
}

struct BetweennessOracle {
  std::vector<double> node;
  std::map<std::pair<size_t, size_t>, double> edge;
};

BetweennessOracle betweenness_by_enumeration(const RawGraph& r) {
  BetweennessOracle out;
  out.node.assign(r.n, 0.0);
  for (const auto& arc : r.arcs) out.edge[arc] = 0.0;
  auto dist = floyd_warshall(r);
  auto adj = r.out_adj();
  for (size_t s = 0; s < r.n; ++s) {
    for (size_t t = 0; t < r.n; ++t) {
      if (s == t || dist[s][t] >= kInf) continue;
      auto tally = enumerate_shortest_paths(r, adj, dist[s][t], s, t);
      for (const auto& [v, c] : tally.through_node)
        out.node[v] += static_cast<double>(c) / static_cast<double>(tally.sigma);
      for (const auto& [e, c] : tally.through_edge)
        out.edge[e] += static_cast<double>(c) / static_cast<double>(tally.sigma);
    }
  }
  if (r.n >= 3) {
    double norm = static_cast<double>(r.n - 1) * static_cast<double>(r.n - 2);
    for (auto& v : out.node) v /= norm;
  } else {
    std::fill(out.node.begin(), out.node.end(), 0.0);
  }
  if (r.n >= 2) {
    double norm = static_cast<double>(r.n) * static_cast<double>(r.n - 1);
    for (auto& [_, v] : out.edge) v /= norm;
  }
  return out;
}

// Smallest number of arcs whose removal makes t unreachable from s, found by
// trying every arc subset in order of increasing size.
int64_t connectivity_by_subset_removal(const RawGraph& r, size_t s, size_t t) {
  std::vector<std::pair<size_t, size_t>> arcs(r.arcs.begin(), r.arcs.end());
  size_t m = arcs.size();
  auto reachable = [&](uint32_t removed_mask) {
    std::vector<bool> seen(r.n, false);
    std::vector<size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      size_t v = stack.back();
      stack.pop_back();
      if (v == t) return true;
      for (size_t i = 0; i < m; ++i) {
        if (removed_mask & (1u << i)) continue;
        if (arcs[i].first != v || seen[arcs[i].second]) continue;
        seen[arcs[i].second] = true;
        stack.push_back(arcs[i].second);
      }
    }
    return false;
  };
  for (size_t k = 0; k <= m; ++k) {
    for (uint32_t mask = 0; mask < (1u << m); ++mask) {
      if (static_cast<size_t>(__builtin_popcount(mask)) != k) continue;
      if (!reachable(mask)) return static_cast<int64_t>(k);
    }
  }
  return static_cast<int64_t>(m);
}

// Directed clustering recomputed via an explicit matrix cube of A + A^T.
double clustering_by_matrix_cube(const RawGraph& r) {
  if (r.n == 0) return 0.0;
  linalg::Matrix s(r.n, r.n);
  for (const auto& [u, v] : r.arcs) {
    s(u, v) += 1.0;
    s(v, u) += 1.0;
  }
  linalg::Matrix cube = linalg::multiply(linalg::multiply(s, s), s);
  std::vector<std::set<size_t>> in_n(r.n), out_n(r.n);
  for (const auto& [u, v] : r.arcs) {
    out_n[u].insert(v);
    in_n[v].insert(u);
  }
  double total = 0.0;
  for (size_t i = 0; i < r.n; ++i) {
    double d_tot = static_cast<double>(in_n[i].size() + out_n[i].size());
    double d_bidir = 0;
    for (size_t j : out_n[i])
      if (in_n[i].count(j)) ++d_bidir;
    double denom = 2.0 * (d_tot * (d_tot - 1.0) - 2.0 * d_bidir);
    if (denom > 0) total += cube(i, i) / denom;
  }
  return total / static_cast<double>(r.n);
}

std::map<int64_t, double> adc_by_definition(const RawGraph& r) {
  std::vector<std::set<size_t>> nbrs(r.n);
  std::vector<int64_t> deg(r.n, 0);
  for (const auto& [u, v] : r.arcs) {
    nbrs[u].insert(v);
    nbrs[v].insert(u);
    ++deg[u];
    ++deg[v];
  }
  std::map<int64_t, std::vector<double>> groups;
  for (size_t v = 0; v < r.n; ++v) {
    if (nbrs[v].empty()) continue;
    double sum = 0;
    for (size_t u : nbrs[v]) sum += static_cast<double>(deg[u]);
    groups[deg[v]].push_back(sum / static_cast<double>(nbrs[v].size()));
  }
  std::map<int64_t, double> out;
  for (const auto& [k, vals] : groups) {
    double s = 0;
    for (double v : vals) s += v;
    out[k] = s / static_cast<double>(vals.size());
  }
  return out;
}

FlowGraph random_graph(uint64_t seed, size_t max_n, double p, bool allow_self_loops) {
  Rng rng(seed);
  size_t n = 2 + rng.uniform_index(max_n - 1);  // 2..max_n
  EdgeList edges;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j && !allow_self_loops) continue;
      if (rng.uniform() < p) edges.emplace_back(node_name(i), node_name(j), 1 + static_cast<int64_t>(rng.uniform_index(9)));
    }
  }
  if (edges.empty()) edges.emplace_back(node_name(0), node_name(1), 1);
  return G(edges);
}

}  // namespace

// --------------------------------------------------------- construction

TEST(FlowGraph, MergesDuplicateEdgesAndOrdersNodes) {
  FlowGraph g = G({{"b", "a", 2}, {"a", "b", 1}, {"b", "a", 3}, {"c", "c", 4}});
  EXPECT_EQ(g.nodes(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_EQ(g.weight_by_id("b", "a"), 5);
  EXPECT_EQ(g.weight_by_id("a", "b"), 1);
  EXPECT_EQ(g.weight_by_id("c", "c"), 4);
  EXPECT_EQ(g.weight_by_id("a", "c"), 0);
  EXPECT_EQ(g.weight_by_id("a", "zzz"), 0);
  EXPECT_EQ(g.total_weight(), 10);
  EXPECT_THROW(g.node_index("zzz"), DomainError);
  EXPECT_THROW(G({{"a", "b", 0}}), DomainError);
}

TEST(FlowGraph, DegreesCountEdgesIncludingSelfLoops) {
  FlowGraph g = G({{"a", "a", 5}, {"a", "b", 2}, {"c", "a", 1}});
  size_t a = g.node_index("a");
  EXPECT_EQ(g.in_degree(a), 2);   // self-loop + c->a
  EXPECT_EQ(g.out_degree(a), 2);  // self-loop + a->b
  EXPECT_EQ(g.out_neighbors(a), (std::vector<size_t>{g.node_index("b")}));
  EXPECT_EQ(g.in_neighbors(a), (std::vector<size_t>{g.node_index("c")}));
}

// ---------------------------------------------------------- aggregation

TEST(AggregateOd, BucketsByStartTimestampPerScale) {
  std::vector<AssignedTrip> trips = {
      {parse_iso8601("2022-03-05T10:15:00"), "A", "B"},
      {parse_iso8601("2022-03-05T10:45:00"), "A", "B"},
      {parse_iso8601("2022-03-05T11:05:00"), "B", "A"},
      {parse_iso8601("2022-03-06T00:00:00"), "A", "A"},
      {parse_iso8601("2022-04-01T09:00:00"), "B", "B"},
  };
  auto hourly = aggregate_od(trips, Scale::Hourly, "poly");
  ASSERT_EQ(hourly.size(), 4u);
  EXPECT_EQ(hourly.at(parse_iso8601("2022-03-05T10:00:00")).weight_by_id("A", "B"), 2);
  EXPECT_EQ(hourly.at(parse_iso8601("2022-03-05T11:00:00")).weight_by_id("B", "A"), 1);

  auto daily = aggregate_od(trips, Scale::Daily, "poly");
  ASSERT_EQ(daily.size(), 3u);
  auto& d1 = daily.at(parse_iso8601("2022-03-05T00:00:00"));
  EXPECT_EQ(d1.total_weight(), 3);
  EXPECT_EQ(d1.level(), "poly");
  EXPECT_EQ(d1.bucket().scale, Scale::Daily);

  auto monthly = aggregate_od(trips, Scale::Monthly, "poly");
  ASSERT_EQ(monthly.size(), 2u);
  EXPECT_EQ(monthly.at(parse_iso8601("2022-03-01T00:00:00")).total_weight(), 4);
  EXPECT_EQ(monthly.at(parse_iso8601("2022-04-01T00:00:00")).total_weight(), 1);
}

TEST(AggregateOd, DropsAndCountsUnassignedTrips) {
  std::vector<AssignedTrip> trips = {
      {0, "A", "B"}, {10, "", "B"}, {20, "A", ""}, {30, "", ""}, {40, "B", "A"},
  };
  int64_t dropped = -1;
  auto graphs = aggregate_od(trips, Scale::Daily, "poly", &dropped);
  EXPECT_EQ(dropped, 3);
  ASSERT_EQ(graphs.size(), 1u);
  EXPECT_EQ(graphs.at(0).total_weight(), 2);
}

TEST(AggregateOd, WeightConservationOnRandomTrips) {
  // Nine unit-square zones tiling [0,3)x[0,3).
  std::vector<Zone> zones;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double x = c, y = r;
      zones.push_back(Zone{"Q" + std::to_string(r * 3 + c),
                           {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}},
                           "nine"});
    }
  SpatialPartition part("nine", zones);

  Rng rng(20220822);
  std::vector<TripRecord> trips;
  // Guarantee every ordered pair (81 of them) appears at least once.
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      TripRecord t;
      t.trip_id = "pair_" + std::to_string(i) + "_" + std::to_string(j);
      t.start_ts = parse_iso8601("2022-05-01T08:00:00") + (i * 9 + j);
      t.end_ts = t.start_ts + 600;
      t.origin = {(i % 3) + 0.5, (i / 3) + 0.5};
      t.destination = {(j % 3) + 0.5, (j / 3) + 0.5};
      t.duration_s = 600;
      trips.push_back(t);
    }
  // Random trips inside the tiling, spread over three days.
  for (int k = 0; k < 400; ++k) {
    TripRecord t;
    t.trip_id = "r" + std::to_string(k);
    t.start_ts = parse_iso8601("2022-05-01T00:00:00") + static_cast<Timestamp>(rng.uniform_index(3 * 86400));
    t.end_ts = t.start_ts + 600;
    t.origin = {rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
    t.destination = {rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
    t.duration_s = 600;
    trips.push_back(t);
  }
  // Trips that fall outside the tiling must be dropped and counted.
  for (int k = 0; k < 7; ++k) {
    TripRecord t;
    t.trip_id = "out" + std::to_string(k);
    t.start_ts = parse_iso8601("2022-05-01T12:00:00");
    t.end_ts = t.start_ts + 600;
    t.origin = {k < 4 ? -5.0 : 1.5, 1.5};
    t.destination = {k < 4 ? 1.5 : 99.0, 1.5};
    t.duration_s = 600;
    trips.push_back(t);
  }

  auto assigned = assign_trips(trips, part);
  EXPECT_EQ(assigned.n_unassigned, 7);

  int64_t dropped = 0;
  auto graphs = aggregate_od(assigned.trips, Scale::Daily, "nine", &dropped);
  EXPECT_EQ(dropped, 7);
  int64_t total = 0;
  for (const auto& [_, g] : graphs) total += g.total_weight();
  EXPECT_EQ(total, static_cast<int64_t>(trips.size()) - 7);

  // The all-pairs day covers the full 9-node, 81-edge structure.
  const auto& day1 = graphs.at(parse_iso8601("2022-05-01T00:00:00"));
  EXPECT_EQ(day1.size(), 9u);
  EXPECT_EQ(day1.num_edges(), 81u);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      EXPECT_GE(day1.weight_by_id("Q" + std::to_string(i), "Q" + std::to_string(j)), 1);
}

// ------------------------------------------------------------ hand cases

TEST(DegreeCentrality, HandValuesAndDegenerateError) {
  FlowGraph g = G({{"a", "b", 1}, {"b", "a", 1}, {"a", "c", 2}, {"a", "a", 9}});
  size_t a = g.node_index("a"), b = g.node_index("b"), c = g.node_index("c");
  auto all = degree_centrality(g, Direction::All);
  auto in = degree_centrality(g, Direction::In);
  auto out = degree_centrality(g, Direction::Out);
  EXPECT_DOUBLE_EQ(all[a], 1.0);        // neighbors {b, c}, self excluded
  EXPECT_DOUBLE_EQ(all[b], 0.5);
  EXPECT_DOUBLE_EQ(all[c], 0.5);
  EXPECT_DOUBLE_EQ(in[a], 0.5);         // only b -> a
  EXPECT_DOUBLE_EQ(out[a], 1.0);
  EXPECT_DOUBLE_EQ(in[c], 0.5);
  EXPECT_DOUBLE_EQ(out[c], 0.0);
  FlowGraph lone = G({{"x", "x", 3}});
  EXPECT_THROW(degree_centrality(lone, Direction::All), DomainError);
}

TEST(NodeStrength, SelfLoopCountsInBothDirections) {
  FlowGraph g = G({{"a", "a", 5}, {"a", "b", 2}, {"c", "a", 7}});
  auto s = node_strength(g);
  size_t a = g.node_index("a"), b = g.node_index("b"), c = g.node_index("c");
  EXPECT_DOUBLE_EQ(s[a].first, 12.0);  // in: self 5 + c->a 7
  EXPECT_DOUBLE_EQ(s[a].second, 7.0);  // out: self 5 + a->b 2
  EXPECT_DOUBLE_EQ(s[b].first, 2.0);
  EXPECT_DOUBLE_EQ(s[b].second, 0.0);
  EXPECT_DOUBLE_EQ(s[c].first, 0.0);
  EXPECT_DOUBLE_EQ(s[c].second, 7.0);
}

TEST(Betweenness, DirectedPathHandValues) {
  FlowGraph g = G({{"a", "b", 1}, {"b", "c", 1}});
  auto res = betweenness(g);
  size_t a = g.node_index("a"), b = g.node_index("b"), c = g.node_index("c");
  EXPECT_NEAR(res.node[a], 0.0, 1e-15);
  EXPECT_NEAR(res.node[b], 0.5, 1e-15);  // 1 pair / ((3-1)(3-2))
  EXPECT_NEAR(res.node[c], 0.0, 1e-15);
  EXPECT_NEAR(res.edge.at({a, b}), 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(res.edge.at({b, c}), 2.0 / 6.0, 1e-15);
}

TEST(Betweenness, CompleteDigraphIsZeroNodesUniformEdges) {
  EdgeList edges;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) edges.emplace_back(node_name(i), node_name(j), 1);
  auto res = betweenness(G(edges));
  for (double v : res.node) EXPECT_NEAR(v, 0.0, 1e-15);
  for (const auto& [_, v] : res.edge) EXPECT_NEAR(v, 1.0 / 12.0, 1e-15);
}

TEST(Betweenness, StarHubHasNoBetweennessWithoutReturnEdges) {
  FlowGraph g = G({{"hub", "l1", 1}, {"hub", "l2", 1}, {"hub", "l3", 1}});
  auto res = betweenness(g);
  for (double v : res.node) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Betweenness, SelfLoopsAreIgnored) {
  FlowGraph with_loop = G({{"a", "b", 1}, {"b", "c", 1}, {"b", "b", 99}});
  FlowGraph without = G({{"a", "b", 1}, {"b", "c", 1}});
  auto r1 = betweenness(with_loop);
  auto r2 = betweenness(without);
  ASSERT_EQ(r1.node.size(), r2.node.size());
  for (size_t i = 0; i < r1.node.size(); ++i) EXPECT_NEAR(r1.node[i], r2.node[i], 1e-15);
  EXPECT_EQ(r1.edge.count({with_loop.node_index("b"), with_loop.node_index("b")}), 0u);
}

TEST(ShortestPath, HandValuesAndErrors) {
  FlowGraph g = G({{"a", "b", 1}, {"b", "c", 1}, {"c", "c", 5}, {"d", "a", 1}});
  size_t a = g.node_index("a"), c = g.node_index("c"), d = g.node_index("d");
  EXPECT_EQ(shortest_path_length(g, a, a).value(), 0);
  EXPECT_EQ(shortest_path_length(g, a, c).value(), 2);
  EXPECT_EQ(shortest_path_length(g, d, c).value(), 3);
  EXPECT_FALSE(shortest_path_length(g, c, a).has_value());  // only a self-loop at c
  EXPECT_THROW(shortest_path_length(g, 0, 99), DomainError);
}

TEST(EdgeConnectivity, HandValuesAndErrors) {
  // Two arc-disjoint routes a->b: direct and via m.
  FlowGraph g = G({{"a", "b", 1}, {"a", "m", 1}, {"m", "b", 1}});
  size_t a = g.node_index("a"), b = g.node_index("b"), m = g.node_index("m");
  EXPECT_EQ(edge_connectivity(g, a, b), 2);
  EXPECT_EQ(edge_connectivity(g, b, a), 0);  // no reverse arcs
  EXPECT_EQ(edge_connectivity(g, a, m), 1);
  EXPECT_THROW(edge_connectivity(g, a, a), DomainError);
  EXPECT_THROW(edge_connectivity(g, a, 99), DomainError);

  EdgeList k4;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) k4.emplace_back(node_name(i), node_name(j), 1);
  FlowGraph full = G(k4);
  EXPECT_EQ(edge_connectivity(full, 0, 3), 3);
}

TEST(Clustering, HandValues) {
  // Fully reciprocal triangle: every node perfectly clustered.
  FlowGraph recip = G({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1}, {"a", "c", 1}, {"c", "a", 1}});
  EXPECT_NEAR(average_clustering(recip), 1.0, 1e-12);

  // One-way 3-cycle.
  FlowGraph cycle = G({{"a", "b", 1}, {"b", "c", 1}, {"c", "a", 1}});
  EXPECT_NEAR(average_clustering(cycle), 0.5, 1e-12);

  // Trees and stars have no triangles.
  FlowGraph star = G({{"h", "a", 1}, {"h", "b", 1}, {"h", "c", 1}});
  EXPECT_NEAR(average_clustering(star), 0.0, 1e-15);
  FlowGraph chain = G({{"a", "b", 1}, {"b", "c", 1}, {"c", "d", 1}});
  EXPECT_NEAR(average_clustering(chain), 0.0, 1e-15);

  // Self-loops do not create triangles.
  FlowGraph lone = G({{"x", "x", 3}});
  EXPECT_NEAR(average_clustering(lone), 0.0, 1e-15);
}

TEST(AverageDegreeConnectivity, HandValues) {
  // Chain a->b->c: degrees 1, 2, 1 (self-loops excluded).
  FlowGraph g = G({{"a", "b", 1}, {"b", "c", 1}, {"a", "a", 9}});
  auto adc = average_degree_connectivity(g);
  ASSERT_EQ(adc.size(), 2u);
  EXPECT_DOUBLE_EQ(adc.at(1), 2.0);  // a and c both neighbor only b (degree 2)
  EXPECT_DOUBLE_EQ(adc.at(2), 1.0);  // b's neighbors a and c average to 1
}

// ----------------------------------------------------- randomized oracles

TEST(GraphOracles, TwoHundredRandomDigraphs) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    double p = 0.15 + 0.1 * static_cast<double>(seed % 8);
    FlowGraph g = random_graph(seed * 7919 + 1, 8, p, seed % 3 == 0);
    RawGraph raw = RawGraph::from(g);
    SCOPED_TRACE("seed=" + std::to_string(seed) + " n=" + std::to_string(g.size()) +
                 " m=" + std::to_string(g.num_edges()));

    // Degree centralities against neighbor sets rebuilt from the edge list.
    if (raw.n < 2) {
      EXPECT_THROW(degree_centrality(g, Direction::All), DomainError);
    } else {
      std::vector<std::set<size_t>> ins(raw.n), outs(raw.n), alls(raw.n);
      for (const auto& [u, v] : raw.arcs) {
        outs[u].insert(v);
        ins[v].insert(u);
        alls[u].insert(v);
        alls[v].insert(u);
      }
      auto dc_all = degree_centrality(g, Direction::All);
      auto dc_in = degree_centrality(g, Direction::In);
      auto dc_out = degree_centrality(g, Direction::Out);
      for (size_t v = 0; v < raw.n; ++v) {
        double denom = static_cast<double>(raw.n - 1);
        EXPECT_NEAR(dc_all[v], alls[v].size() / denom, 1e-9);
        EXPECT_NEAR(dc_in[v], ins[v].size() / denom, 1e-9);
        EXPECT_NEAR(dc_out[v], outs[v].size() / denom, 1e-9);
      }
    }

    // Strengths against a plain accumulation over the edge list.
    {
      std::vector<double> sin(raw.n, 0), sout(raw.n, 0);
      for (const auto& [key, w] : raw.weights) {
        sin[key.second] += static_cast<double>(w);
        sout[key.first] += static_cast<double>(w);
      }
      auto s = node_strength(g);
      for (size_t v = 0; v < raw.n; ++v) {
        EXPECT_NEAR(s[v].first, sin[v], 1e-9);
        EXPECT_NEAR(s[v].second, sout[v], 1e-9);
      }
    }

    // Betweenness against exhaustive shortest-path enumeration.
    {
      auto oracle = betweenness_by_enumeration(raw);
      auto fast = betweenness(g);
      for (size_t v = 0; v < raw.n; ++v) EXPECT_NEAR(fast.node[v], oracle.node[v], 1e-9);
      ASSERT_EQ(fast.edge.size(), oracle.edge.size());
      for (const auto& [e, val] : oracle.edge) EXPECT_NEAR(fast.edge.at(e), val, 1e-9);
    }

    // Hop distances against Floyd-Warshall.
    {
      auto dist = floyd_warshall(raw);
      for (size_t s = 0; s < raw.n; ++s) {
        auto hops = bfs_hops(g, s);
        for (size_t t = 0; t < raw.n; ++t) {
          auto sp = shortest_path_length(g, s, t);
          if (dist[s][t] >= kInf) {
            EXPECT_FALSE(sp.has_value());
            EXPECT_EQ(hops[t], -1);
          } else {
            ASSERT_TRUE(sp.has_value());
            EXPECT_EQ(sp.value(), dist[s][t]);
            EXPECT_EQ(hops[t], dist[s][t]);
          }
        }
      }
    }

    // Clustering against the matrix-cube evaluation.
    EXPECT_NEAR(average_clustering(g), clustering_by_matrix_cube(raw), 1e-9);

    // Average degree connectivity against the grouped-mean definition.
    {
      auto oracle = adc_by_definition(raw);
      auto fast = average_degree_connectivity(g);
      ASSERT_EQ(fast.size(), oracle.size());
      for (const auto& [k, v] : oracle) EXPECT_NEAR(fast.at(k), v, 1e-9);
    }
  }
}

TEST(GraphOracles, EdgeConnectivityBySubsetRemoval) {
  int checked = 0;
  for (uint64_t seed = 0; checked < 60 && seed < 400; ++seed) {
    FlowGraph g = random_graph(seed * 104729 + 7, 6, 0.3 + 0.05 * (seed % 4), false);
    RawGraph raw = RawGraph::from(g);
    if (raw.arcs.size() > 14 || raw.n < 2) continue;
    Rng rng(seed + 1);
    for (int rep = 0; rep < 3; ++rep) {
      size_t s = rng.uniform_index(raw.n);
      size_t t = rng.uniform_index(raw.n);
      if (s == t) continue;
      EXPECT_EQ(edge_connectivity(g, s, t), connectivity_by_subset_removal(raw, s, t))
          << "seed=" << seed << " s=" << s << " t=" << t;
    }
    ++checked;
  }
  EXPECT_GE(checked, 60);
}

TEST(GraphOracles, MetricsAreInvariantUnderRelabeling) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    FlowGraph g = random_graph(seed * 31 + 5, 7, 0.4, true);
    size_t n = g.size();
    // Relabel node i -> "w<perm[i]>"; the new graph sorts by the new names.
    Rng rng(seed + 99);
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    auto new_name = [&](size_t old_idx) { return "w" + std::to_string(perm[old_idx]); };
    EdgeList relabeled;
    for (const auto& [key, w] : g.edges()) relabeled.emplace_back(new_name(key.first), new_name(key.second), w);
    FlowGraph h = G(relabeled);
    ASSERT_EQ(h.size(), n);
    // old index i corresponds to h's node named new_name(i).
    std::vector<size_t> to_h(n);
    for (size_t i = 0; i < n; ++i) to_h[i] = h.node_index(new_name(i));

    auto sg = node_strength(g);
    auto sh = node_strength(h);
    auto bg = betweenness(g);
    auto bh = betweenness(h);
    std::vector<double> dcg, dch;
    if (n >= 2) {
      dcg = degree_centrality(g, Direction::All);
      dch = degree_centrality(h, Direction::All);
    }
    for (size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(sg[i].first, sh[to_h[i]].first, 1e-12);
      EXPECT_NEAR(sg[i].second, sh[to_h[i]].second, 1e-12);
      EXPECT_NEAR(bg.node[i], bh.node[to_h[i]], 1e-12);
      if (n >= 2) EXPECT_NEAR(dcg[i], dch[to_h[i]], 1e-12);
    }
    for (const auto& [e, v] : bg.edge) EXPECT_NEAR(bh.edge.at({to_h[e.first], to_h[e.second]}), v, 1e-12);
    EXPECT_NEAR(average_clustering(g), average_clustering(h), 1e-12);
    auto adcg = average_degree_connectivity(g);
    auto adch = average_degree_connectivity(h);
    ASSERT_EQ(adcg.size(), adch.size());
    for (const auto& [k, v] : adcg) EXPECT_NEAR(adch.at(k), v, 1e-12);
  }
}

// ------------------------------------------------------ feature extraction

TEST(NetworkFeatures, LagGraphLookupsAndAbsences) {
  FlowGraph prev = G({{"A", "B", 3}, {"B", "C", 2}, {"C", "A", 1}, {"A", "A", 4}});
  auto rows = extract_network_features(
      prev, {{"A", "B"}, {"B", "A"}, {"A", "Z"}, {"A", "A"}});
  ASSERT_EQ(rows.size(), 4u);

  const auto& ab = rows[0];
  EXPECT_DOUBLE_EQ(ab.previous_count, 3.0);
  EXPECT_DOUBLE_EQ(ab.edge_present, 1.0);
  EXPECT_DOUBLE_EQ(ab.shortest_path_length, 1.0);
  EXPECT_FALSE(ab.path_unreachable);
  EXPECT_DOUBLE_EQ(ab.edge_connectivity, 1.0);
  EXPECT_TRUE(ab.connectivity_exact);
  EXPECT_DOUBLE_EQ(ab.num_nodes, 3.0);
  EXPECT_DOUBLE_EQ(ab.num_edges, 4.0);
  EXPECT_DOUBLE_EQ(ab.orig_strength_in, 5.0);   // A: self 4 + C->A 1
  EXPECT_DOUBLE_EQ(ab.orig_strength_out, 7.0);  // A: self 4 + A->B 3
  EXPECT_DOUBLE_EQ(ab.dest_strength_in, 3.0);
  EXPECT_GT(ab.orig_betweenness, 0.0);  // cycle: every node relays one pair

  const auto& ba = rows[1];  // pair absent, but both nodes exist; path B->A is 2 hops
  EXPECT_DOUBLE_EQ(ba.previous_count, 0.0);
  EXPECT_DOUBLE_EQ(ba.edge_present, 0.0);
  EXPECT_DOUBLE_EQ(ba.edge_betweenness, 0.0);
  EXPECT_DOUBLE_EQ(ba.shortest_path_length, 2.0);
  EXPECT_FALSE(ba.path_unreachable);
  EXPECT_DOUBLE_EQ(ba.edge_connectivity, 1.0);

  const auto& az = rows[2];  // destination zone never seen in lag graph
  EXPECT_DOUBLE_EQ(az.previous_count, 0.0);
  EXPECT_TRUE(az.path_unreachable);
  EXPECT_DOUBLE_EQ(az.shortest_path_length, 3.0);  // sentinel: node count
  EXPECT_DOUBLE_EQ(az.edge_connectivity, 0.0);
  EXPECT_DOUBLE_EQ(az.dest_strength_in, 0.0);
  EXPECT_DOUBLE_EQ(az.dest_degree_centrality, 0.0);

  const auto& aa = rows[3];  // self-pair with a weighted self-loop
  EXPECT_DOUBLE_EQ(aa.previous_count, 4.0);
  EXPECT_DOUBLE_EQ(aa.edge_present, 1.0);
  EXPECT_DOUBLE_EQ(aa.shortest_path_length, 0.0);
  EXPECT_FALSE(aa.path_unreachable);
  EXPECT_DOUBLE_EQ(aa.edge_connectivity, 0.0);
}

TEST(NetworkFeatures, LargeGraphUsesDegreeBoundForConnectivity) {
  EdgeList edges;
  for (int i = 1; i <= 501; ++i) edges.emplace_back("hub", "leaf" + std::to_string(i), 1);
  edges.emplace_back("leaf1", "hub", 1);
  FlowGraph g = G(edges);
  ASSERT_EQ(g.size(), 502u);
  auto rows = extract_network_features(g, {{"leaf1", "leaf2"}, {"hub", "leaf2"}});
  EXPECT_FALSE(rows[0].connectivity_exact);
  EXPECT_DOUBLE_EQ(rows[0].edge_connectivity, 1.0);  // min(out(leaf1)=1, in(leaf2)=1)
  EXPECT_FALSE(rows[1].connectivity_exact);
  EXPECT_DOUBLE_EQ(rows[1].edge_connectivity, 1.0);  // min(out(hub)=501, in(leaf2)=1)
  EXPECT_DOUBLE_EQ(rows[0].shortest_path_length, 2.0);  // leaf1 -> hub -> leaf2
}

TEST(NetworkFeatures, SingleNodeLagGraphYieldsZeroCentralities) {
  FlowGraph g = G({{"A", "A", 2}});
  auto rows = extract_network_features(g, {{"A", "A"}, {"A", "B"}});
  EXPECT_DOUBLE_EQ(rows[0].orig_degree_centrality, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].previous_count, 2.0);
  EXPECT_DOUBLE_EQ(rows[1].previous_count, 0.0);
  EXPECT_TRUE(rows[1].path_unreachable);
  EXPECT_DOUBLE_EQ(rows[1].shortest_path_length, 1.0);  // sentinel = node count
}

// ------------------------------------------------------------- reporting

TEST(GraphReport, JsonRoundTripAndDeterminism) {
  FlowGraph g = G({{"A", "B", 3}, {"B", "A", 1}, {"B", "C", 2}, {"A", "A", 4}});
  auto j = graph_report_json(g);
  EXPECT_EQ(j["level"], "test");
  EXPECT_EQ(j["scale"], "daily");
  EXPECT_EQ(j["bucket_start"], "1970-01-01T00:00:00Z");
  EXPECT_EQ(j["num_nodes"], 3);
  EXPECT_EQ(j["num_edges"], 4);
  EXPECT_EQ(j["total_weight"], 10);
  ASSERT_EQ(j["nodes"].size(), 3u);
  EXPECT_EQ(j["nodes"][0]["id"], "A");
  EXPECT_EQ(j["nodes"][0]["strength_in"], 5.0);
  ASSERT_EQ(j["top_edges"].size(), 4u);
  EXPECT_EQ(j["top_edges"][0]["weight"], 4);  // heaviest first
  EXPECT_EQ(j["top_edges"][0]["origin"], "A");
  EXPECT_EQ(graph_report_json(g).dump(), j.dump());  // deterministic bytes
}
