#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dsgraph/error.hpp"
#include "dsgraph/random.hpp"

namespace dsgraph {

using Vertex = int;
using Edge = std::pair<Vertex, Vertex>;

/// Undirected simple graph on {0, ..., d-1}. Edges are stored as sorted,
/// deduplicated pairs (u, v) with u < v.
class Graph {
 public:
  Graph() = default;

  int num_vertices() const noexcept { return d_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(Vertex u, Vertex v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(d_), 0);
    for (const auto& [u, v] : edges_) {
      ++deg[static_cast<std::size_t>(u)];
      ++deg[static_cast<std::size_t>(v)];
    }
    return deg;
  }

  std::vector<std::vector<Vertex>> adjacency_lists() const {
    std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(d_));
    for (const auto& [u, v] : edges_) {
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
    }
    return adj;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  friend Graph build_graph(int d, std::vector<Edge> edges);
  int d_ = 0;
  std::vector<Edge> edges_;
};

/// Normalizes (orders, sorts, dedups) the edge list.
inline Graph build_graph(int d, std::vector<Edge> edges) {
  if (d <= 0) throw Error(ErrorKind::InvalidArgument, "vertex count must be positive");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= d || v >= d) {
      throw Error(ErrorKind::IndexOutOfRange, "edge (" + std::to_string(u) + "," +
                                                  std::to_string(v) + ") outside [0," +
                                                  std::to_string(d) + ")");
    }
    if (u == v) throw Error(ErrorKind::SelfLoop, "self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g;
  g.d_ = d;
  g.edges_ = std::move(edges);
  return g;
}

/// Combinatorial Laplacian: degree diagonal minus adjacency.
inline Eigen::MatrixXd laplacian(const Graph& g) {
  const int d = g.num_vertices();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [u, v] : g.edges()) {
    lap(u, v) -= 1.0;
    lap(v, u) -= 1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
  }
  return lap;
}

/// Breadth-first connectivity check restricted to `members` (all vertices when empty).
inline bool is_connected(const Graph& g, const std::vector<Vertex>& members = {}) {
  const int d = g.num_vertices();
  std::vector<char> in_set(static_cast<std::size_t>(d), members.empty() ? 1 : 0);
  for (Vertex v : members) in_set[static_cast<std::size_t>(v)] = 1;
  const Vertex start = members.empty() ? 0 : members.front();
  const std::size_t target = members.empty() ? static_cast<std::size_t>(d) : members.size();

  const auto adj = g.adjacency_lists();
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  std::queue<Vertex> frontier;
  frontier.push(start);
  seen[static_cast<std::size_t>(start)] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const Vertex u = frontier.front();
    frontier.pop();
    for (Vertex w : adj[static_cast<std::size_t>(u)]) {
      const auto wi = static_cast<std::size_t>(w);
      if (in_set[wi] && !seen[wi]) {
        seen[wi] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == target;
}

// ---------------------------------------------------------------------------
// Generators

struct RandomConnectedSpec {
  int d = 0;
  int num_edges = 0;
};

/// Two cliques of sizes `size_a` and `size_b` (vertices [0,a) and [a,a+b)),
/// each thinned by `removals_per_clique` edges, joined by `bridge_count` edges.
struct ClusteredSpec {
  int size_a = 38;
  int size_b = 7;
  int removals_per_clique = 2;
  int bridge_count = 2;
};

struct PathSpec {
  int d = 0;
};

struct CirculantSpec {
  int d = 0;
  std::vector<int> offsets{1, 2};
};

struct GraphSpec {
  std::variant<RandomConnectedSpec, ClusteredSpec, PathSpec, CirculantSpec> variant;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::int64_t complete_edge_count(std::int64_t n) { return n * (n - 1) / 2; }

// Random spanning tree by a random walk on the complete graph (Aldous-Broder),
// then extra edges drawn uniformly from the remaining non-edges.
inline Graph random_connected(const RandomConnectedSpec& spec, Rng& rng) {
  const int d = spec.d;
  if (d <= 0) throw Error(ErrorKind::InfeasibleSpec, "random_connected needs d >= 1");
  if (spec.num_edges < d - 1 || spec.num_edges > complete_edge_count(d)) {
    throw Error(ErrorKind::InfeasibleSpec,
                "random_connected needs d-1 <= edges <= d(d-1)/2, got " +
                    std::to_string(spec.num_edges));
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(spec.num_edges));
  if (d > 1) {
    std::vector<char> visited(static_cast<std::size_t>(d), 0);
    auto current = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(d)));
    visited[static_cast<std::size_t>(current)] = 1;
    int remaining = d - 1;
    while (remaining > 0) {
      auto next = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(d - 1)));
      if (next >= current) ++next;
      if (!visited[static_cast<std::size_t>(next)]) {
        visited[static_cast<std::size_t>(next)] = 1;
        edges.emplace_back(std::min(current, next), std::max(current, next));
        --remaining;
      }
      current = next;
    }
  }
  const auto extra = static_cast<std::size_t>(spec.num_edges - (d - 1));
  if (extra > 0) {
    std::vector<Edge> tree = edges;
    std::sort(tree.begin(), tree.end());
    std::vector<Edge> candidates;
    for (Vertex u = 0; u < d; ++u) {
      for (Vertex v = u + 1; v < d; ++v) {
        if (!std::binary_search(tree.begin(), tree.end(), Edge{u, v})) candidates.emplace_back(u, v);
      }
    }
    // Partial Fisher-Yates: the first `extra` slots are a uniform sample.
    for (std::size_t i = 0; i < extra; ++i) {
      const auto j = i + rng.below(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      edges.push_back(candidates[i]);
    }
  }
  return build_graph(d, std::move(edges));
}

inline std::vector<Edge> thinned_clique(Vertex first, int size, int removals, Rng& rng) {
  std::vector<Edge> all;
  for (Vertex u = first; u < first + size; ++u) {
    for (Vertex v = u + 1; v < first + size; ++v) all.emplace_back(u, v);
  }
  if (removals < 0 || static_cast<std::size_t>(removals) > all.size()) {
    throw Error(ErrorKind::InfeasibleSpec, "cannot remove " + std::to_string(removals) +
                                               " edges from a clique of size " +
                                               std::to_string(size));
  }
  std::vector<Vertex> members(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) members[static_cast<std::size_t>(i)] = first + i;

  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Edge> pool = all;
    for (int i = 0; i < removals; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<Edge> kept(pool.begin() + removals, pool.end());
    const Graph local = build_graph(first + size, kept);
    if (size <= 1 || is_connected(local, members)) return kept;
  }
  throw Error(ErrorKind::InfeasibleSpec, "could not thin clique without disconnecting it");
}

inline Graph clustered(const ClusteredSpec& spec, Rng& rng) {
  if (spec.size_a <= 0 || spec.size_b <= 0) {
    throw Error(ErrorKind::InfeasibleSpec, "clique sizes must be positive");
  }
  const std::int64_t cross = static_cast<std::int64_t>(spec.size_a) * spec.size_b;
  if (spec.bridge_count < 1 || spec.bridge_count > cross) {
    throw Error(ErrorKind::InfeasibleSpec, "bridge count must lie in [1, size_a*size_b]");
  }
  auto edges = thinned_clique(0, spec.size_a, spec.removals_per_clique, rng);
  auto second = thinned_clique(spec.size_a, spec.size_b, spec.removals_per_clique, rng);
  edges.insert(edges.end(), second.begin(), second.end());

  std::vector<Edge> bridges;
  while (static_cast<int>(bridges.size()) < spec.bridge_count) {
    const auto u = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(spec.size_a)));
    const auto v = static_cast<Vertex>(spec.size_a + static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(spec.size_b))));
    if (std::find(bridges.begin(), bridges.end(), Edge{u, v}) == bridges.end()) bridges.emplace_back(u, v);
  }
  edges.insert(edges.end(), bridges.begin(), bridges.end());
  return build_graph(spec.size_a + spec.size_b, std::move(edges));
}

inline Graph path(const PathSpec& spec) {
  if (spec.d <= 0) throw Error(ErrorKind::InfeasibleSpec, "path needs d >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < spec.d; ++v) edges.emplace_back(v, v + 1);
  return build_graph(spec.d, std::move(edges));
}

inline Graph circulant(const CirculantSpec& spec) {
  if (spec.d <= 0) throw Error(ErrorKind::InfeasibleSpec, "circulant needs d >= 1");
  std::vector<Edge> edges;
  for (int offset : spec.offsets) {
    if (offset < 1 || offset > spec.d / 2) {
      throw Error(ErrorKind::InfeasibleSpec,
                  "circulant offset " + std::to_string(offset) + " outside [1, d/2]");
    }
    for (Vertex v = 0; v < spec.d; ++v) edges.emplace_back(v, (v + offset) % spec.d);
  }
  return build_graph(spec.d, std::move(edges));
}

}  // namespace detail

/// Deterministic given `spec.seed`; path and circulant ignore the seed.
inline Graph generate_graph(const GraphSpec& spec) {
  Rng rng(spec.seed);
  return std::visit(
      [&](const auto& v) -> Graph {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RandomConnectedSpec>) return detail::random_connected(v, rng);
        if constexpr (std::is_same_v<T, ClusteredSpec>) return detail::clustered(v, rng);
        if constexpr (std::is_same_v<T, PathSpec>) return detail::path(v);
        if constexpr (std::is_same_v<T, CirculantSpec>) return detail::circulant(v);
      },
      spec.variant);
}

// ---------------------------------------------------------------------------
// Edge-list files: "u v" per line, '#' comments, optional leading "d=<int>".

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool parse_int(std::string_view token, long long& out) {
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace detail

inline Graph parse_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  long long header_d = -1;
  long long max_vertex = -1;
  bool seen_content = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (!seen_content && line.substr(0, 2) == "d=") {
      seen_content = true;
      if (!detail::parse_int(detail::trim(line.substr(2)), header_d) || header_d <= 0) {
        throw ParseError(line_no, "invalid vertex-count header");
      }
      continue;
    }
    seen_content = true;

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const auto start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    long long u = 0;
    long long v = 0;
    if (tokens.size() != 2 || !detail::parse_int(tokens[0], u) || !detail::parse_int(tokens[1], v)) {
      throw ParseError(line_no, "expected two vertex indices");
    }
    if (u < 0 || v < 0 || u > INT32_MAX || v > INT32_MAX) throw ParseError(line_no, "vertex index out of range");
    if (u == v) throw ParseError(line_no, "self-loop");
    if (header_d > 0 && (u >= header_d || v >= header_d)) {
      throw ParseError(line_no, "vertex index exceeds header d=" + std::to_string(header_d));
    }
    max_vertex = std::max({max_vertex, u, v});
    edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
  }
  const long long d = header_d > 0 ? header_d : max_vertex + 1;
  if (d <= 0) throw ParseError(line_no, "edge list defines no vertices");
  return build_graph(static_cast<int>(d), std::move(edges));
}

inline std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "d=" << g.num_vertices() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

}  // namespace dsgraph
