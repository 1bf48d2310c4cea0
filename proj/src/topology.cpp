#include "gge/topology.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gge/rng.hpp"

namespace gge {

long long Graph::edge_count() const {
  long long deg_sum = 0;
  for (const auto& nb : neighbors) deg_sum += static_cast<long long>(nb.size());
  return deg_sum / 2;
}

int Graph::neighbor_index(int i, int j) const {
  const auto& nb = neighbors[i];
  auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return -1;
  return static_cast<int>(it - nb.begin());
}

double rgg_radius(int n) {
  if (n < 2) throw std::invalid_argument("rgg_radius: need n >= 2");
  return std::sqrt(2.0 * std::log(static_cast<double>(n)) / n);
}

bool is_connected(const Graph& g) {
  if (g.n <= 0) return false;
  std::vector<char> seen(g.n, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : g.neighbors[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == g.n;
}

int max_degree(const Graph& g) {
  if (g.n <= 0) throw std::invalid_argument("max_degree: empty graph");
  int d = 0;
  for (int i = 0; i < g.n; ++i) d = std::max(d, g.degree(i));
  return d;
}

Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                 std::vector<std::array<double, 2>> locations) {
  if (n <= 0) throw std::invalid_argument("from_edges: n must be positive");
  if (!locations.empty() && static_cast<int>(locations.size()) != n)
    throw std::invalid_argument("from_edges: locations must cover every node");
  Graph g;
  g.n = n;
  g.neighbors.assign(n, {});
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("from_edges: endpoint out of range");
    if (a == b) throw std::invalid_argument("from_edges: self-loop");
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second)
      throw std::invalid_argument("from_edges: duplicate edge");
    g.neighbors[a].push_back(b);
    g.neighbors[b].push_back(a);
  }
  for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
  g.locations = std::move(locations);
  return g;
}

Graph generate_rgg(int n, std::uint64_t seed, int redraw_limit) {
  if (n < 2) throw std::invalid_argument("generate_rgg: need n >= 2");
  if (redraw_limit < 0) throw std::invalid_argument("generate_rgg: bad redraw_limit");
  const double r = rgg_radius(n);
  const double r2 = r * r;
  for (int attempt = 0; attempt <= redraw_limit; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<std::array<double, 2>> pts(n);
    for (auto& p : pts) {
      p[0] = rng.uniform01();
      p[1] = rng.uniform01();
    }
    Graph g;
    g.n = n;
    g.neighbors.assign(n, {});
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double dx = pts[i][0] - pts[j][0];
        double dy = pts[i][1] - pts[j][1];
        if (dx * dx + dy * dy < r2) {
          g.neighbors[i].push_back(j);
          g.neighbors[j].push_back(i);
        }
      }
    }
    // neighbor lists are built in ascending order already
    g.locations = std::move(pts);
    if (is_connected(g)) {
      g.redraws = attempt;
      return g;
    }
  }
  throw std::runtime_error("generate_rgg: no connected draw within redraw limit");
}

Graph generate_grid(int side) {
  if (side < 2) throw std::invalid_argument("generate_grid: need side >= 2");
  const int n = side * side;
  Graph g;
  g.n = n;
  g.neighbors.assign(n, {});
  g.locations.resize(n);
  auto id = [side](int i, int j) { return i * side + j; };
  const double denom = static_cast<double>(side - 1);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      int v = id(i, j);
      g.locations[v] = {i / denom, j / denom};
      if (i + 1 < side) {
        g.neighbors[v].push_back(id(i + 1, j));
        g.neighbors[id(i + 1, j)].push_back(v);
      }
      if (j + 1 < side) {
        g.neighbors[v].push_back(id(i, j + 1));
        g.neighbors[id(i, j + 1)].push_back(v);
      }
    }
  }
  for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
  return g;
}

DenseMatrix expected_gossip_matrix(const Graph& g) {
  if (g.n <= 0) throw std::invalid_argument("expected_gossip_matrix: empty graph");
  const int n = g.n;
  for (int i = 0; i < n; ++i)
    if (g.degree(i) == 0)
      throw std::invalid_argument("expected_gossip_matrix: isolated node");
  DenseMatrix w(n);
  for (int i = 0; i < n; ++i) w.at(i, i) = 1.0;
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    for (int j : g.neighbors[i]) {
      if (j <= i) continue;
      double p = inv_n * (1.0 / g.degree(i) + 1.0 / g.degree(j));
      w.at(i, j) += 0.5 * p;
      w.at(j, i) += 0.5 * p;
      w.at(i, i) -= 0.5 * p;
      w.at(j, j) -= 0.5 * p;
    }
  }
  return w;
}

namespace {

Eigen::MatrixXd to_eigen_symmetric(const DenseMatrix& m, const char* who) {
  if (m.n < 2) throw std::invalid_argument(std::string(who) + ": need n >= 2");
  if (m.a.size() != static_cast<std::size_t>(m.n) * m.n)
    throw std::invalid_argument(std::string(who) + ": malformed matrix");
  Eigen::MatrixXd a(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) a(i, j) = m.at(i, j);
  double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12)
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
  return a;
}

}  // namespace

double lambda2(const DenseMatrix& m) { return second_eigenpair(m).first; }

std::pair<double, std::vector<double>> second_eigenpair(const DenseMatrix& m) {
  Eigen::MatrixXd a = to_eigen_symmetric(m, "second_eigenpair");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("second_eigenpair: eigensolver failed");
  const int n = m.n;
  // eigenvalues come back in ascending order
  double lam = es.eigenvalues()(n - 2);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = es.eigenvectors()(i, n - 2);
  return {lam, std::move(v)};
}

void write_edge_list(const Graph& g, std::ostream& os) {
  os << "n " << g.n << "\n";
  for (int i = 0; i < g.n; ++i)
    for (int j : g.neighbors[i])
      if (i < j) os << i << " " << j << "\n";
  if (g.has_locations()) {
    char buf[128];
    for (int i = 0; i < g.n; ++i) {
      std::snprintf(buf, sizeof(buf), "loc %d %.17g %.17g", i, g.locations[i][0],
                    g.locations[i][1]);
      os << buf << "\n";
    }
  }
}

Graph read_edge_list(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto fail = [&lineno](const std::string& msg) {
    throw std::runtime_error("edge list line " + std::to_string(lineno) + ": " + msg);
  };
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::array<double, 2>> locations;
  bool any_loc = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    std::string rest;
    if (tok == "n") {
      if (n >= 0) fail("duplicate header");
      if (!(ss >> n) || n <= 0) fail("bad node count");
      if (ss >> rest) fail("trailing tokens");
    } else if (tok == "loc") {
      if (n < 0) fail("loc before header");
      int i;
      double x, y;
      if (!(ss >> i >> x >> y) || i < 0 || i >= n) fail("bad loc line");
      if (ss >> rest) fail("trailing tokens");
      if (!any_loc) {
        locations.assign(n, {0.0, 0.0});
        any_loc = true;
      }
      locations[i] = {x, y};
    } else {
      if (n < 0) fail("edge before header");
      int i = 0, j = 0;
      std::istringstream es(line);
      if (!(es >> i >> j)) fail("bad edge line");
      if (es >> rest) fail("trailing tokens");
      if (i >= j) fail("edges must satisfy i < j");
      edges.emplace_back(i, j);
    }
  }
  if (n < 0) throw std::runtime_error("edge list: missing header");
  return from_edges(n, edges, std::move(locations));
}

}  // namespace gge
