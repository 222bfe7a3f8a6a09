#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "rensem/likelihood.hpp"
#include "rensem/model.hpp"
#include "rensem/network.hpp"

using namespace rensem;

namespace {

RenSemParams demo_params() {
  RenSemParams p;
  p.beta = Eigen::VectorXd(7);
  p.beta << -0.5, 1.1, 0.6, 0.9, 0.3, 1.4, -0.8;
  p.gamma = Eigen::VectorXd(5);
  p.gamma << 0.4, -1.2, 0.7, 1.0, 0.5;
  p.alpha = Eigen::VectorXd(2);
  p.alpha << 0.3, -0.6;
  p.var_y = 1.4;
  p.var_by = 0.6;
  p.var_m = 0.9;
  p.var_bm = 0.35;
  return p;
}

Dataset demo_data(std::shared_ptr<const Network> net, std::uint64_t seed) {
  return simulate_dataset(net, demo_params(), ConfounderSpec{1, 0.0, 1.0}, seed);
}

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b))); }

// Full dense-matrix log-likelihood computed from first principles.
LikelihoodParts dense_loglik(const Dataset& d, const RenSemParams& p) {
  const Eigen::MatrixXd& e = d.net->adjacency();
  LikelihoodParts parts;
  parts.l_y = oracle::dense_gaussian_loglik(e, design_y(d), d.y, p.beta, p.var_y, p.var_by);
  parts.l_m = oracle::dense_gaussian_loglik(e, design_m(d), d.m, p.gamma, p.var_m, p.var_bm);
  const Eigen::MatrixXd xa = design_a(d);
  for (int i = 0; i < d.size(); ++i) {
    const double pi = logistic_prob(xa.row(i).dot(p.alpha));
    parts.l_a += d.a[i] * std::log(pi) + (1.0 - d.a[i]) * std::log(1.0 - pi);
  }
  return parts;
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("parameter layout") {
  const ParameterLayout lay(1);
  CHECK(lay.size() == 18);
  CHECK(lay.n_beta() == 7);
  CHECK(lay.n_gamma() == 5);
  CHECK(lay.n_alpha() == 2);
  CHECK(lay.beta(0) == 0);
  CHECK(lay.gamma(0) == 7);
  CHECK(lay.alpha(0) == 12);
  CHECK(lay.var_y() == 14);
  CHECK(lay.var_by() == 15);
  CHECK(lay.var_m() == 16);
  CHECK(lay.var_bm() == 17);
  CHECK(ParameterLayout(0).size() == 13);
  CHECK(ParameterLayout(2).size() == 23);

  const auto names = lay.names();
  REQUIRE(static_cast<int>(names.size()) == 18);
  CHECK(names[0] == "beta0");
  CHECK(names[6] == "beta6");
  CHECK(names[7] == "gamma0");
  CHECK(names[12] == "alpha0");
  CHECK(names[14] == "var_y");
  CHECK(names[15] == "var_by");
  CHECK(names[16] == "var_m");
  CHECK(names[17] == "var_bm");

  const RenSemParams p = demo_params();
  const Eigen::VectorXd phi = lay.pack(p);
  REQUIRE(phi.size() == 18);
  CHECK(phi[0] == p.beta[0]);
  CHECK(phi[7] == p.gamma[0]);
  CHECK(phi[12] == p.alpha[0]);
  CHECK(phi[14] == p.var_y);
  CHECK(phi[17] == p.var_bm);
  const RenSemParams back = lay.unpack(phi);
  CHECK((back.beta - p.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.gamma - p.gamma).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.alpha - p.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.var_y == p.var_y);
  CHECK(back.var_by == p.var_by);
  CHECK(back.var_m == p.var_m);
  CHECK(back.var_bm == p.var_bm);
}

TEST_CASE("spectral decomposition of EE^T") {
  for (auto make : {+[] { return gen_ring(31); }, +[] { return gen_erdos_renyi(40, 6.0, 5); }}) {
    const Network net = make();
    const SpectralCovariance spec(net);
    const Eigen::MatrixXd ee = net.adjacency() * net.adjacency().transpose();
    const Eigen::MatrixXd recon =
        spec.u() * spec.lambda().asDiagonal() * spec.u().transpose();
    CHECK((recon - ee).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(spec.lambda().minCoeff() >= 0.0);
    // orthonormal basis
    const Eigen::MatrixXd utu = spec.u().transpose() * spec.u();
    CHECK((utu - Eigen::MatrixXd::Identity(net.size(), net.size())).cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::VectorXd d = spec.effective(1.3, 0.4, "outcome");
    CHECK((d - (1.3 + 0.4 * spec.lambda().array()).matrix()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd sigma = 1.3 * Eigen::MatrixXd::Identity(net.size(), net.size()) + 0.4 * ee;
    CHECK(rel(spec.logdet(d), oracle::dense_logdet(net.adjacency(), 1.3, 0.4)) <= 1e-10);

    std::mt19937_64 eng(17);
    std::normal_distribution<double> norm;
    Eigen::VectorXd v(net.size());
    for (int i = 0; i < v.size(); ++i) v[i] = norm(eng);
    const Eigen::VectorXd sol = spec.solve(d, v);
    CHECK((sol - oracle::dense_solve(net.adjacency(), 1.3, 0.4, v)).cwiseAbs().maxCoeff() <= 1e-8);
    // a genuine inverse: Sigma * sol == v
    CHECK((sigma * sol - v).cwiseAbs().maxCoeff() <= 1e-8);
  }

  const SpectralCovariance spec(gen_ring(10));
  for (const char* component : {"outcome", "mediator"}) {
    try {
      spec.effective(0.0, 0.0, component);
      FAIL("expected runtime_error for " << component);
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(component) != std::string::npos);
    }
  }
}

TEST_CASE("log-likelihood matches the dense oracle") {
  for (auto net : {std::make_shared<const Network>(gen_ring(45)),
                   std::make_shared<const Network>(gen_erdos_renyi(60, 8.0, 2))}) {
    const Dataset d = demo_data(net, 31);
    const LikelihoodContext ctx(d);
    const RenSemParams p = demo_params();
    const LikelihoodParts got = ctx.loglik(p);
    const LikelihoodParts want = dense_loglik(d, p);
    CHECK(rel(got.l_y, want.l_y) <= 1e-10);
    CHECK(rel(got.l_m, want.l_m) <= 1e-10);
    CHECK(rel(got.l_a, want.l_a) <= 1e-12);
    CHECK(rel(got.total(), want.total()) <= 1e-10);

    // one-shot helpers agree with the context
    CHECK(loglik(d, p).total() == got.total());
    CHECK((score(d, p) - ctx.score(p)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((hessian(d, p) - ctx.hessian(p)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("score matches finite differences") {
  const auto net = std::make_shared<const Network>(gen_erdos_renyi(25, 4.0, 9));
  const Dataset d = demo_data(net, 57);
  const LikelihoodContext ctx(d);
  const ParameterLayout& lay = ctx.layout();

  std::mt19937_64 eng(303);
  std::uniform_real_distribution<double> coef(-1.2, 1.2), var(0.4, 2.0);
  for (int point = 0; point < 4; ++point) {
    Eigen::VectorXd phi(lay.size());
    for (int k = 0; k < lay.size(); ++k) phi[k] = coef(eng);
    phi[lay.var_y()] = var(eng);
    phi[lay.var_by()] = var(eng);
    phi[lay.var_m()] = var(eng);
    phi[lay.var_bm()] = var(eng);

    const auto f = [&](const Eigen::VectorXd& x) {
      return ctx.loglik(lay.unpack(x)).total();
    };
    const Eigen::VectorXd fd = oracle::fd_gradient(f, phi, 1e-5);
    const Eigen::VectorXd an = ctx.score(lay.unpack(phi));
    for (int k = 0; k < lay.size(); ++k) {
      CAPTURE(point);
      CAPTURE(k);
      CHECK(rel(fd[k], an[k]) <= 1e-5);
    }
  }
}

TEST_CASE("hessian matches finite differences of the score") {
  const auto net = std::make_shared<const Network>(gen_erdos_renyi(25, 4.0, 9));
  const Dataset d = demo_data(net, 58);
  const LikelihoodContext ctx(d);
  const ParameterLayout& lay = ctx.layout();

  std::mt19937_64 eng(404);
  std::uniform_real_distribution<double> coef(-1.2, 1.2), var(0.4, 2.0);
  for (int point = 0; point < 3; ++point) {
    Eigen::VectorXd phi(lay.size());
    for (int k = 0; k < lay.size(); ++k) phi[k] = coef(eng);
    phi[lay.var_y()] = var(eng);
    phi[lay.var_by()] = var(eng);
    phi[lay.var_m()] = var(eng);
    phi[lay.var_bm()] = var(eng);

    const auto grad = [&](const Eigen::VectorXd& x) {
      return ctx.score(lay.unpack(x));
    };
    const Eigen::MatrixXd fd = oracle::fd_jacobian(grad, phi, 1e-6);
    const Eigen::MatrixXd an = ctx.hessian(lay.unpack(phi));
    CHECK((an - an.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    for (int r = 0; r < lay.size(); ++r) {
      for (int s = 0; s < lay.size(); ++s) {
        CAPTURE(point);
        CAPTURE(r);
        CAPTURE(s);
        CHECK(rel(fd(r, s), an(r, s)) <= 1e-4);
      }
    }
  }
}

TEST_CASE("cross-group hessian blocks are exact zeros") {
  const auto net = std::make_shared<const Network>(gen_erdos_renyi(30, 5.0, 13));
  const Dataset d = demo_data(net, 77);
  const LikelihoodContext ctx(d);
  const ParameterLayout& lay = ctx.layout();
  const Eigen::MatrixXd h = ctx.hessian(demo_params());

  std::vector<int> grp_y, grp_m, grp_a;
  for (int k = 0; k < lay.n_beta(); ++k) grp_y.push_back(lay.beta(k));
  grp_y.push_back(lay.var_y());
  grp_y.push_back(lay.var_by());
  for (int k = 0; k < lay.n_gamma(); ++k) grp_m.push_back(lay.gamma(k));
  grp_m.push_back(lay.var_m());
  grp_m.push_back(lay.var_bm());
  for (int k = 0; k < lay.n_alpha(); ++k) grp_a.push_back(lay.alpha(k));

  const auto all_zero = [&](const std::vector<int>& r, const std::vector<int>& c) {
    for (int i : r)
      for (int j : c)
        if (h(i, j) != 0.0) return false;
    return true;
  };
  CHECK(all_zero(grp_y, grp_m));
  CHECK(all_zero(grp_y, grp_a));
  CHECK(all_zero(grp_m, grp_a));
}

TEST_CASE("observed information is exactly the negated hessian") {
  const auto net = std::make_shared<const Network>(gen_ring(20));
  const Dataset d = demo_data(net, 91);
  const LikelihoodContext ctx(d);
  const RenSemParams p = demo_params();
  CHECK((ctx.observed_information(p) + ctx.hessian(p)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("likelihood is invariant under node relabeling") {
  const auto net = std::make_shared<const Network>(gen_erdos_renyi(24, 4.0, 21));
  const Dataset d = demo_data(net, 101);
  const int n = net->size();

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 eng(55);
  std::shuffle(perm.begin(), perm.end(), eng);

  std::vector<std::pair<int, int>> edges2;
  for (auto [i, j] : net->edges()) edges2.emplace_back(perm[i], perm[j]);
  const auto net2 = std::make_shared<const Network>(Network::from_edges(n, edges2));
  Dataset d2;
  d2.net = net2;
  d2.a.resize(n);
  d2.m.resize(n);
  d2.y.resize(n);
  d2.c.resize(n, d.c.cols());
  for (int i = 0; i < n; ++i) {
    d2.a[perm[i]] = d.a[i];
    d2.m[perm[i]] = d.m[i];
    d2.y[perm[i]] = d.y[i];
    d2.c.row(perm[i]) = d.c.row(i);
  }

  const RenSemParams p = demo_params();
  const LikelihoodParts l1 = loglik(d, p);
  const LikelihoodParts l2 = loglik(d2, p);
  CHECK(rel(l1.l_y, l2.l_y) <= 1e-9);
  CHECK(rel(l1.l_m, l2.l_m) <= 1e-9);
  CHECK(rel(l1.l_a, l2.l_a) <= 1e-12);
}

TEST_CASE("degenerate parameters are rejected") {
  const auto net = std::make_shared<const Network>(gen_ring(12));
  const Dataset d = demo_data(net, 111);
  const LikelihoodContext ctx(d);
  RenSemParams p = demo_params();
  p.var_y = 0.0;
  CHECK_THROWS_AS(ctx.loglik(p), std::invalid_argument);
  p = demo_params();
  p.var_m = 0.0;
  CHECK_THROWS_AS(ctx.score(p), std::invalid_argument);
  p = demo_params();
  p.alpha = Eigen::VectorXd::Zero(3);  // p mismatch
  CHECK_THROWS_AS(ctx.loglik(p), std::invalid_argument);
  // var_by = 0 is fine (pure iid errors)
  p = demo_params();
  p.var_by = 0.0;
  p.var_bm = 0.0;
  CHECK_NOTHROW(ctx.loglik(p));
}

}  // TEST_SUITE
