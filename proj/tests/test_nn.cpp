#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "stocon/nn.hpp"

using namespace stocon;

namespace {

// Flattened parameter view for finite-difference probing.
std::vector<double*> param_ptrs(Mlp& net) {
  std::vector<double*> p;
  for (auto& w : net.W)
    for (auto& v : w) p.push_back(&v);
  for (auto& b : net.b)
    for (auto& v : b) p.push_back(&v);
  return p;
}

std::vector<double> grad_flat(const MlpGrads& g) {
  std::vector<double> out;
  for (const auto& w : g.W) out.insert(out.end(), w.begin(), w.end());
  for (const auto& b : g.b) out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Scalar test loss: sum over outputs of c_j * y_j with fixed c, averaged
// over the batch. Its upstream gradient is c / M per sample.
double batch_loss(const Mlp& net, const std::vector<double>& X, int M,
                  const std::vector<double>& c) {
  std::vector<double> y(net.out_dim());
  double s = 0.0;
  for (int i = 0; i < M; ++i) {
    mlp_forward(net, X.data() + static_cast<std::size_t>(i) * net.in_dim(), y.data());
    for (int j = 0; j < net.out_dim(); ++j) s += c[j] * y[j];
  }
  return s / M;
}

}  // namespace

TEST_CASE("zero network outputs match symmetry") {
  auto id = Mlp::make({3, 4, 2}, Act::Elu, Head::Identity);
  double x[3] = {0.3, -1.0, 5.0};
  double y[2] = {9.0, 9.0};
  mlp_forward(id, x, y);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);

  auto sm = Mlp::make({2, 3}, Act::Elu, Head::Softmax);
  double y3[3];
  mlp_forward(sm, x, y3);
  for (int i = 0; i < 3; ++i) CHECK(y3[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("elu pass-through evaluates by hand") {
  auto net = Mlp::make({1, 1, 1}, Act::Elu, Head::Identity);
  net.W[0][0] = 1.0;
  net.W[1][0] = 1.0;
  double x = -std::log(2.0), y = 0.0;
  mlp_forward(net, &x, &y);
  CHECK(y == doctest::Approx(-0.5).epsilon(1e-12));
  // Continuity at 0.
  double lo = -1e-9, hi = 1e-9, ylo, yhi;
  mlp_forward(net, &lo, &ylo);
  mlp_forward(net, &hi, &yhi);
  CHECK(std::abs(ylo - yhi) < 1e-8);
}

TEST_CASE("softmax normalizes and shifts do not change the ranking") {
  auto net = Mlp::make({2, 5, 4}, Act::Tanh, Head::Softmax);
  Rng rng(11);
  glorot_init(net, rng);
  double x[2] = {0.7, -0.2};
  double y[4];
  mlp_forward(net, x, y);
  double s = 0.0;
  int arg = 0;
  for (int i = 0; i < 4; ++i) {
    s += y[i];
    if (y[i] > y[arg]) arg = i;
    CHECK(y[i] > 0.0);
    CHECK(y[i] < 1.0);
  }
  CHECK(std::abs(s - 1.0) <= 1e-12);
  for (double& b : net.b.back()) b += 3.7;  // constant shift of all pre-activations
  double y2[4];
  mlp_forward(net, x, y2);
  int arg2 = 0;
  for (int i = 0; i < 4; ++i)
    if (y2[i] > y2[arg2]) arg2 = i;
  CHECK(arg == arg2);
}

TEST_CASE("scaled sigmoid output stays inside its range") {
  auto net = Mlp::make({1, 3, 1}, Act::Elu, Head::ScaledSigmoid, 0.05, 10.0);
  Rng rng(12);
  glorot_init(net, rng);
  for (double x : {-100.0, -1.0, 0.0, 1.0, 100.0}) {
    double y;
    mlp_forward(net, &x, &y);
    CHECK(y >= 0.05);
    CHECK(y <= 10.0);
  }
}

TEST_CASE("analytic gradients match central differences on 20 random nets") {
  Rng rng(13);
  const Act acts[] = {Act::Elu, Act::Relu, Act::Tanh, Act::Sigmoid};
  const Head heads[] = {Head::Identity, Head::Sigmoid, Head::Softmax, Head::ScaledSigmoid};
  int checked_params = 0;
  for (int t = 0; t < 20; ++t) {
    const int in = 1 + static_cast<int>(rng.below(4));
    const int out = 1 + static_cast<int>(rng.below(3));
    std::vector<int> sizes = {in};
    const int depth = 1 + static_cast<int>(rng.below(3));
    for (int l = 0; l < depth; ++l) sizes.push_back(2 + static_cast<int>(rng.below(9)));
    sizes.push_back(out);
    Act act = acts[rng.below(4)];
    if (act == Act::Relu) act = Act::Tanh;  // kink at 0 breaks FD comparisons
    auto net = Mlp::make(sizes, act, heads[t % 4], -0.5, 2.0);
    glorot_init(net, rng);
    Vec mean(in), stdev(in);
    for (int j = 0; j < in; ++j) {
      mean[j] = 0.1 * static_cast<double>(rng.normal());
      stdev[j] = 0.5 + rng.uniform();
    }
    set_normalizer(net, mean, stdev);

    const int M = 3;
    std::vector<double> X(static_cast<std::size_t>(M) * in);
    for (auto& v : X) v = rng.normal();
    std::vector<double> c(out);
    for (auto& v : c) v = rng.normal();
    std::vector<double> dLdY(static_cast<std::size_t>(M) * out);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < out; ++j) dLdY[static_cast<std::size_t>(i) * out + j] = c[j] / M;

    MlpGrads g;
    mlp_gradient(net, X.data(), M, dLdY.data(), 0.0, g);
    const auto flat = grad_flat(g);
    auto ptrs = param_ptrs(net);
    REQUIRE(flat.size() == ptrs.size());

    for (std::size_t k = 0; k < ptrs.size(); ++k) {
      const double save = *ptrs[k];
      const double h = 1e-5;
      *ptrs[k] = save + h;
      const double up = batch_loss(net, X, M, c);
      *ptrs[k] = save - h;
      const double dn = batch_loss(net, X, M, c);
      *ptrs[k] = save;
      const double fd = (up - dn) / (2.0 * h);
      const double scale = std::max({1e-6, std::abs(fd), std::abs(flat[k])});
      CHECK(std::abs(fd - flat[k]) / scale < 1e-4);
      ++checked_params;
    }
  }
  CHECK(checked_params > 1000);
}

TEST_CASE("l2 gradient is 2 l2 w when the upstream gradient vanishes") {
  auto net = Mlp::make({2, 3, 1}, Act::Elu, Head::Identity);
  Rng rng(14);
  glorot_init(net, rng);
  std::vector<double> X = {0.1, 0.2};
  std::vector<double> dLdY = {0.0};
  MlpGrads g;
  mlp_gradient(net, X.data(), 1, dLdY.data(), 0.01, g);
  for (int l = 0; l < net.layers(); ++l)
    for (std::size_t i = 0; i < g.W[l].size(); ++i)
      CHECK(g.W[l][i] == doctest::Approx(0.02 * net.W[l][i]).epsilon(1e-12));
}

TEST_CASE("adam: zero gradient leaves parameters fixed, first step is sign-like") {
  auto net = Mlp::make({1, 2, 1}, Act::Elu, Head::Identity);
  Rng rng(15);
  glorot_init(net, rng);
  const auto before = net.W[0];
  AdamState st;
  st.init(net);
  st.lr = 0.01;
  MlpGrads g;
  g.init(net);
  adam_step(st, net, g);
  CHECK(net.W[0] == before);

  // Fresh state: the bias-corrected first step has magnitude lr for any g.
  AdamState st2;
  st2.init(net);
  st2.lr = 0.01;
  g.W[0][0] = 0.37;
  const double w0 = net.W[0][0];
  adam_step(st2, net, g);
  CHECK(net.W[0][0] == doctest::Approx(w0 - 0.01).epsilon(1e-6));
}

TEST_CASE("training fits a line and is deterministic") {
  Rng data_rng(16);
  const int n = 512;
  std::vector<double> X(n), Y(n);
  for (int i = 0; i < n; ++i) {
    X[i] = 2.0 * data_rng.uniform() - 1.0;
    Y[i] = 2.0 * X[i];
  }
  auto run = [&](std::uint64_t seed) {
    auto net = Mlp::make({1, 1}, Act::Elu, Head::Identity);
    Rng rng(seed);
    glorot_init(net, rng);
    TrainConfig cfg;
    cfg.batch_size = 64;
    cfg.lr = 0.05;
    cfg.l2 = 0.0;
    cfg.epochs_max = 200;
    cfg.patience = 20;
    auto res = fit_regression(net, X.data(), Y.data(), n, X.data(), Y.data(), 100, cfg, rng);
    return std::pair{net.W[0][0], res};
  };
  auto [slope, res] = run(100);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.025));
  CHECK(res.valid_loss.back() >= 0.0);

  auto [slope2, res2] = run(100);
  CHECK(slope == slope2);
  CHECK(res.train_loss == res2.train_loss);
  CHECK(res.valid_loss == res2.valid_loss);
}

TEST_CASE("pure shrinkage objective decreases the parameter norm") {
  auto net = Mlp::make({1, 3, 1}, Act::Elu, Head::Identity);
  Rng rng(17);
  glorot_init(net, rng);
  double norm0 = 0.0;
  for (const auto& w : net.W)
    for (double v : w) norm0 += v * v;

  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.epochs_min = 5;
  cfg.epochs_max = 30;
  cfg.lr = 0.01;
  cfg.l2 = 0.0;
  LossGradFn loss = [&](const int*, int, std::vector<MlpGrads>* g) {
    double s = 0.0;
    for (int l = 0; l < net.layers(); ++l)
      for (std::size_t i = 0; i < net.W[l].size(); ++i) {
        s += net.W[l][i] * net.W[l][i];
        if (g) (*g)[0].W[l][i] = 2.0 * net.W[l][i];
      }
    return s;
  };
  LossFn valid = [&](const int*, int) {
    double s = 0.0;
    for (const auto& w : net.W)
      for (double v : w) s += v * v;
    return s;
  };
  train({&net}, 64, loss, 10, valid, cfg, rng);
  double norm1 = 0.0;
  for (const auto& w : net.W)
    for (double v : w) norm1 += v * v;
  CHECK(norm1 < norm0);
}

TEST_CASE("reported training loss includes the l2 term") {
  auto net = Mlp::make({1, 4, 1}, Act::Elu, Head::Identity);
  Rng rng(21);
  glorot_init(net, rng);
  std::vector<double> X = {0.0, 0.5, 1.0, -0.5}, Y = {0.0, 0.0, 0.0, 0.0};
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs_min = 1;
  cfg.epochs_max = 1;
  cfg.patience = 1;
  auto net2 = net;
  cfg.l2 = 0.0;
  auto r0 = fit_regression(net, X.data(), Y.data(), 4, X.data(), Y.data(), 4, cfg, rng);
  cfg.l2 = 0.05;
  auto r1 = fit_regression(net2, X.data(), Y.data(), 4, X.data(), Y.data(), 4, cfg, rng);
  CHECK(r1.train_loss[0] > r0.train_loss[0]);
}

TEST_CASE("warm start copies the function") {
  auto a = Mlp::make({2, 6, 3}, Act::Elu, Head::Softmax);
  auto b = Mlp::make({2, 6, 3}, Act::Elu, Head::Softmax);
  Rng rng(18);
  glorot_init(a, rng);
  glorot_init(b, rng);
  set_normalizer(b, {0.5, -0.5}, {2.0, 3.0});
  warm_start(a, b);
  for (int t = 0; t < 10; ++t) {
    double x[2] = {rng.normal(), rng.normal()};
    double ya[3], yb[3];
    mlp_forward(a, x, ya);
    mlp_forward(b, x, yb);
    for (int j = 0; j < 3; ++j) CHECK(ya[j] == yb[j]);
  }
  auto c = Mlp::make({2, 5, 3}, Act::Elu, Head::Softmax);
  CHECK_THROWS_AS(warm_start(c, b), SolverError);
}

TEST_CASE("normalizer statistics and floor") {
  std::vector<double> s = {-1.0, 1.0};
  auto [mean, stdev] = fit_normalizer(s.data(), 2, 1);
  CHECK(mean[0] == 0.0);
  CHECK(stdev[0] == 1.0);

  std::vector<double> constant = {3.0, 3.0, 3.0};
  auto [m2, s2] = fit_normalizer(constant.data(), 3, 1);
  CHECK(m2[0] == 3.0);
  CHECK(s2[0] == 1e-8);

  Rng rng(19);
  const int n = 20000;
  std::vector<double> big(n);
  for (auto& v : big) v = 5.0 + 2.0 * rng.normal();
  auto [m3, s3] = fit_normalizer(big.data(), n, 1);
  CHECK(m3[0] == doctest::Approx(5.0).epsilon(0.02));
  CHECK(s3[0] == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("serialization round-trips bit for bit") {
  auto net = Mlp::make({3, 7, 5, 2}, Act::Sigmoid, Head::ScaledSigmoid, -1.25, 3.5);
  Rng rng(20);
  glorot_init(net, rng);
  set_normalizer(net, {0.1, 0.2, 0.3}, {1.0, 2.0, 3.0});
  const std::string text = mlp_to_json(net);
  Mlp back = mlp_from_json(text);
  CHECK(back.sizes == net.sizes);
  CHECK(back.W == net.W);
  CHECK(back.b == net.b);
  CHECK(back.norm_mean == net.norm_mean);
  CHECK(back.norm_std == net.norm_std);
  CHECK(mlp_to_json(back) == text);

  save_mlp(net, "test_net.json");
  Mlp fromfile = load_mlp("test_net.json");
  CHECK(fromfile.W == net.W);
  std::remove("test_net.json");
}
