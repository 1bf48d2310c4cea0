#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace gge {

// Undirected simple graph. Immutable once built: generators and from_edges
// validate and sort; nothing mutates a Graph afterwards.
struct Graph {
  int n = 0;
  std::vector<std::vector<int>> neighbors;       // each list sorted ascending
  std::vector<std::array<double, 2>> locations;  // empty for coordinate-free graphs
  int redraws = 0;  // connectivity redraws consumed by generate_rgg

  bool has_locations() const { return !locations.empty(); }
  int degree(int i) const { return static_cast<int>(neighbors[i].size()); }
  long long edge_count() const;
  // position of j in neighbors[i], -1 if not adjacent
  int neighbor_index(int i, int j) const;
};

struct DenseMatrix {
  int n = 0;
  std::vector<double> a;  // row-major, n*n

  DenseMatrix() = default;
  explicit DenseMatrix(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// connectivity radius sqrt(2 ln n / n) for n points in the unit square
double rgg_radius(int n);

// n i.i.d. uniform points in the unit square, edge iff distance < rgg_radius(n).
// Disconnected draws are redrawn with the next derived seed; the number of
// redraws is recorded on the returned graph. Throws after redraw_limit redraws.
Graph generate_rgg(int n, std::uint64_t seed, int redraw_limit = 1000);

// side x side four-connected lattice, locations scaled to the unit square
Graph generate_grid(int side);

Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                 std::vector<std::array<double, 2>> locations = {});

bool is_connected(const Graph& g);
int max_degree(const Graph& g);

// Expected one-step averaging matrix of randomized gossip under the natural
// random walk: the initiator is uniform, its partner uniform among neighbors.
// Pair {i,j} is active with probability p_ij = (1/n)(1/|N_i| + 1/|N_j|), and a
// step applies I - (1/2)(e_i - e_j)(e_i - e_j)^T, so
//   W = I - (1/2) sum_{(i,j) in E} p_ij (e_i - e_j)(e_i - e_j)^T.
DenseMatrix expected_gossip_matrix(const Graph& g);

// second-largest eigenvalue of a symmetric matrix; rejects non-symmetric input
double lambda2(const DenseMatrix& m);
// second-largest eigenvalue together with its unit eigenvector
std::pair<double, std::vector<double>> second_eigenpair(const DenseMatrix& m);

// Edge-list text format: "n <count>" header, one "i j" line per edge with
// i < j in lexicographic order, then optional "loc i x y" lines.
void write_edge_list(const Graph& g, std::ostream& os);
Graph read_edge_list(std::istream& is);

}  // namespace gge
