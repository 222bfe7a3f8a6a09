#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rensem {

// Intervention contrast: exposure a_from -> a_to, plausible neighborhood
// exposure share s_from -> s_to (shares live in [0,1]).
struct ExposureShift {
  double a_from = 0.0;
  double a_to = 1.0;
  double s_from = 0.0;
  double s_to = 1.0;

  void validate() const;
};

struct IsolatedNodesError : std::runtime_error {
  std::vector<int> nodes;
  explicit IsolatedNodesError(std::vector<int> isolated);
};

// Undirected, unweighted interference network on nodes 0..n-1.
// The adjacency E is stored dense with a unit diagonal (every node is in its
// own neighborhood); n_i denotes the off-diagonal degree |N+_i|, which is
// required to be >= 1 for every node. Immutable after construction and safe
// to share across threads.
class Network {
 public:
  static Network from_edges(int n, const std::vector<std::pair<int, int>>& edges);
  static Network from_adjacency(const Eigen::MatrixXd& adjacency);

  int size() const { return n_; }
  int degree(int i) const { return degrees_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& degrees() const { return degrees_; }

  // First-degree neighborhood N+_i (sorted ascending, excludes i).
  const std::vector<int>& neighbors(int i) const {
    return neighbors_[static_cast<std::size_t>(i)];
  }
  // Second-degree neighborhood N++_i: nodes at graph distance exactly two
  // (sorted ascending, excludes i and all of N+_i).
  const std::vector<int>& second_neighbors(int i) const {
    return second_neighbors_[static_cast<std::size_t>(i)];
  }

  // E with unit diagonal.
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  // Row-normalized adjacency: entry (i,j) = E_ij / n_i for j != i, zero
  // diagonal. Every row sums to one.
  Eigen::MatrixXd row_normalized() const;

  // Unique undirected edges (i < j), lexicographically sorted.
  std::vector<std::pair<int, int>> edges() const;

  // S1: neighborhood average, out[i] = (1/n_i) sum_{j in N+_i} a[j].
  Eigen::VectorXd s1_apply(const Eigen::VectorXd& a) const;

  // S2/S3: two-step neighborhood averages
  //   S2_i(a) = sum_{j in N+_i} (n_i n_j)^-1 sum_{k in N+_j ∩ N+_i} a_k
  //   S3_i(a) = sum_{j in N+_i} (n_i n_j)^-1 sum_{k in N+_j ∩ N++_i} a_k
  // (both k-sums exclude i and j by construction of the index sets).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> s2_s3_apply(const Eigen::VectorXd& a) const;

 private:
  Network(int n, Eigen::MatrixXd adjacency);

  int n_ = 0;
  Eigen::MatrixXd adjacency_;
  std::vector<int> degrees_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> second_neighbors_;
};

// Plausible neighborhood share: the element of {0, 1/n, ..., n/n} nearest to
// s, ties rounded half away from zero: [s*n]/n with [x] = round-half-away.
double plausible_share(double s, int degree);

// Network-level contrast statistics for an exposure shift.
//   delta1 = (1/N) sum_i sum_{j in N+_i} (n_i n_j)^-1
//   delta2 = (1/N) sum_i (s~_i(s_to) - s~_i(s_from))
//   delta3 = (1/N) sum_i [ sum_{j in N+_i} (n_i n_j)^-1 |N+_j ∩ N+_i| ]
//            * (s~_i(s_to) - s~_i(s_from))
// where s~_i(s) = plausible_share(s, n_i). All three lie in [-1, 1].
struct NetworkDeltas {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

NetworkDeltas network_deltas(const Network& net, const ExposureShift& shift);

// Cycle graph 0-1-...-n-1-0, n >= 3.
Network gen_ring(int n);

// G(n, p) with p = target_avg_degree / (n-1), followed by isolated-node
// repair: each degree-zero node is joined to one uniformly random other node.
// target_avg_degree must lie in (0, n-1]. Deterministic in the seed.
Network gen_erdos_renyi(int n, double target_avg_degree, std::uint64_t seed);

}  // namespace rensem
