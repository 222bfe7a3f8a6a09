#include "rensem/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rensem/rng.hpp"

namespace rensem {

void ExposureShift::validate() const {
  if (!(s_from >= 0.0 && s_from <= 1.0) || !(s_to >= 0.0 && s_to <= 1.0)) {
    throw std::invalid_argument("ExposureShift: shares must lie in [0,1], got s_from=" +
                                std::to_string(s_from) + " s_to=" + std::to_string(s_to));
  }
  if (!std::isfinite(a_from) || !std::isfinite(a_to)) {
    throw std::invalid_argument("ExposureShift: exposure levels must be finite");
  }
}

namespace {
std::string join_nodes(const std::vector<int>& nodes) {
  std::ostringstream os;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) os << ",";
    os << nodes[i];
  }
  return os.str();
}
}  // namespace

IsolatedNodesError::IsolatedNodesError(std::vector<int> isolated)
    : std::runtime_error("network has isolated nodes (degree 0): [" + join_nodes(isolated) + "]"),
      nodes(std::move(isolated)) {}

Network::Network(int n, Eigen::MatrixXd adjacency) : n_(n), adjacency_(std::move(adjacency)) {
  degrees_.resize(static_cast<std::size_t>(n_));
  neighbors_.resize(static_cast<std::size_t>(n_));
  std::vector<int> isolated;
  for (int i = 0; i < n_; ++i) {
    auto& nb = neighbors_[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_; ++j) {
      if (j != i && adjacency_(i, j) != 0.0) nb.push_back(j);
    }
    degrees_[static_cast<std::size_t>(i)] = static_cast<int>(nb.size());
    if (nb.empty()) isolated.push_back(i);
  }
  if (!isolated.empty()) throw IsolatedNodesError(std::move(isolated));

  // Second-degree neighborhoods: distance exactly two.
  second_neighbors_.resize(static_cast<std::size_t>(n_));
  std::vector<char> mark(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    std::fill(mark.begin(), mark.end(), 0);
    mark[static_cast<std::size_t>(i)] = 1;
    for (int j : neighbors_[static_cast<std::size_t>(i)]) mark[static_cast<std::size_t>(j)] = 1;
    auto& snb = second_neighbors_[static_cast<std::size_t>(i)];
    for (int j : neighbors_[static_cast<std::size_t>(i)]) {
      for (int k : neighbors_[static_cast<std::size_t>(j)]) {
        if (!mark[static_cast<std::size_t>(k)]) {
          mark[static_cast<std::size_t>(k)] = 1;
          snb.push_back(k);
        }
      }
    }
    std::sort(snb.begin(), snb.end());
  }
}

Network Network::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 2) throw std::invalid_argument("Network: need at least 2 nodes, got " + std::to_string(n));
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n);
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw std::invalid_argument("Network: edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") out of range for n=" + std::to_string(n));
    }
    if (a == b) continue;  // self-loops are implicit in the unit diagonal
    e(a, b) = 1.0;
    e(b, a) = 1.0;
  }
  return Network(n, std::move(e));
}

Network Network::from_adjacency(const Eigen::MatrixXd& adjacency) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() < 2) {
    throw std::invalid_argument("Network: adjacency must be square with n >= 2");
  }
  const int n = static_cast<int>(adjacency.rows());
  Eigen::MatrixXd e = adjacency;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = e(i, j);
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("Network: adjacency entries must be 0 or 1, got " +
                                    std::to_string(v) + " at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
      if (j > i && e(i, j) != e(j, i)) {
        throw std::invalid_argument("Network: adjacency must be symmetric, mismatch at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
    e(i, i) = 1.0;  // unit diagonal convention
  }
  return Network(n, std::move(e));
}

Eigen::MatrixXd Network::row_normalized() const {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    const double inv = 1.0 / static_cast<double>(degree(i));
    for (int j : neighbors(i)) t(i, j) = inv;
  }
  return t;
}

std::vector<std::pair<int, int>> Network::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i) {
    for (int j : neighbors(i)) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

Eigen::VectorXd Network::s1_apply(const Eigen::VectorXd& a) const {
  if (a.size() != n_) {
    throw std::invalid_argument("s1_apply: vector length " + std::to_string(a.size()) +
                                " != network size " + std::to_string(n_));
  }
  Eigen::VectorXd out(n_);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int j : neighbors(i)) s += a[j];
    out[i] = s / static_cast<double>(degree(i));
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Network::s2_s3_apply(const Eigen::VectorXd& a) const {
  if (a.size() != n_) {
    throw std::invalid_argument("s2_s3_apply: vector length " + std::to_string(a.size()) +
                                " != network size " + std::to_string(n_));
  }
  Eigen::VectorXd s2 = Eigen::VectorXd::Zero(n_);
  Eigen::VectorXd s3 = Eigen::VectorXd::Zero(n_);
  // mark: 1 on N+_i, 2 on i itself; untouched entries are either second-degree
  // or further away. Distance exactly two == second_neighbors membership, so
  // a node k reached from j with mark 0 needs an explicit distance-2 check;
  // it always passes because k is adjacent to j in N+_i.
  std::vector<char> mark(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    std::fill(mark.begin(), mark.end(), 0);
    mark[static_cast<std::size_t>(i)] = 2;
    for (int j : neighbors(i)) mark[static_cast<std::size_t>(j)] = 1;
    double acc2 = 0.0, acc3 = 0.0;
    for (int j : neighbors(i)) {
      const double denom = static_cast<double>(degree(i) * degree(j));
      for (int k : neighbors(j)) {
        const char m = mark[static_cast<std::size_t>(k)];
        if (m == 2) continue;  // k == i contributes to neither sum
        if (m == 1) {
          acc2 += a[k] / denom;  // k in N+_i (k != j automatic: k in N+_j)
        } else {
          acc3 += a[k] / denom;  // k at distance two from i
        }
      }
    }
    s2[i] = acc2;
    s3[i] = acc3;
  }
  return {std::move(s2), std::move(s3)};
}

double plausible_share(double s, int degree) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("plausible_share: s must lie in [0,1], got " + std::to_string(s));
  }
  if (degree < 1) {
    throw std::invalid_argument("plausible_share: degree must be >= 1, got " + std::to_string(degree));
  }
  // std::round is round-half-away-from-zero, the required tie rule.
  return std::round(s * static_cast<double>(degree)) / static_cast<double>(degree);
}

NetworkDeltas network_deltas(const Network& net, const ExposureShift& shift) {
  shift.validate();
  const int n = net.size();
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  std::vector<char> mark(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int ni = net.degree(i);
    double row1 = 0.0;
    for (int j : net.neighbors(i)) row1 += 1.0 / static_cast<double>(ni * net.degree(j));
    d1 += row1;

    const double sdiff = plausible_share(shift.s_to, ni) - plausible_share(shift.s_from, ni);
    d2 += sdiff;

    // weight_i = sum_{j in N+_i} (n_i n_j)^-1 |N+_j ∩ N+_i|, accumulated one
    // (j,k) pair at a time to mirror the defining triple sum exactly.
    std::fill(mark.begin(), mark.end(), 0);
    for (int j : net.neighbors(i)) mark[static_cast<std::size_t>(j)] = 1;
    double w = 0.0;
    for (int j : net.neighbors(i)) {
      const double denom = static_cast<double>(ni * net.degree(j));
      for (int k : net.neighbors(j)) {
        if (k != i && mark[static_cast<std::size_t>(k)]) w += 1.0 / denom;
      }
    }
    d3 += w * sdiff;
  }
  const double dn = static_cast<double>(n);
  return {d1 / dn, d2 / dn, d3 / dn};
}

Network gen_ring(int n) {
  if (n < 3) throw std::invalid_argument("gen_ring: need n >= 3, got " + std::to_string(n));
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Network::from_edges(n, edges);
}

Network gen_erdos_renyi(int n, double target_avg_degree, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_erdos_renyi: need n >= 2, got " + std::to_string(n));
  if (!(target_avg_degree > 0.0) || target_avg_degree > static_cast<double>(n - 1)) {
    throw std::invalid_argument("gen_erdos_renyi: target_avg_degree must lie in (0, n-1], got " +
                                std::to_string(target_avg_degree));
  }
  const double p = target_avg_degree / static_cast<double>(n - 1);
  std::mt19937_64 engine = make_engine(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n);
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unif(engine) < p) {
        e(i, j) = e(j, i) = 1.0;
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
      }
    }
  }
  // Isolated-node repair: join each degree-zero node to one uniform other.
  for (int i = 0; i < n; ++i) {
    if (deg[static_cast<std::size_t>(i)] > 0) continue;
    std::uniform_int_distribution<int> pick(0, n - 2);
    int j = pick(engine);
    if (j >= i) ++j;
    e(i, j) = e(j, i) = 1.0;
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  }
  return Network::from_adjacency(e);
}

}  // namespace rensem
