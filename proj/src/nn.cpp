#include "stocon/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "stocon/kernels.hpp"

namespace stocon {

const char* act_name(Act a) {
  switch (a) {
    case Act::Elu: return "elu";
    case Act::Relu: return "relu";
    case Act::Tanh: return "tanh";
    case Act::Sigmoid: return "sigmoid";
  }
  return "?";
}

const char* head_name(Head h) {
  switch (h) {
    case Head::Identity: return "identity";
    case Head::Sigmoid: return "sigmoid";
    case Head::Softmax: return "softmax";
    case Head::ScaledSigmoid: return "scaled_sigmoid";
  }
  return "?";
}

Act act_from_name(const std::string& s) {
  if (s == "elu") return Act::Elu;
  if (s == "relu") return Act::Relu;
  if (s == "tanh") return Act::Tanh;
  if (s == "sigmoid") return Act::Sigmoid;
  throw SolverError("unknown activation: " + s);
}

Head head_from_name(const std::string& s) {
  if (s == "identity") return Head::Identity;
  if (s == "sigmoid") return Head::Sigmoid;
  if (s == "softmax") return Head::Softmax;
  if (s == "scaled_sigmoid") return Head::ScaledSigmoid;
  throw SolverError("unknown output head: " + s);
}

Mlp Mlp::make(std::vector<int> sizes, Act hidden, Head head, double head_lo, double head_hi) {
  if (sizes.size() < 2) throw SolverError("network needs at least input and output layers");
  for (int s : sizes)
    if (s < 1) throw SolverError("layer sizes must be positive");
  Mlp net;
  net.sizes = std::move(sizes);
  net.hidden = hidden;
  net.head = head;
  net.head_lo = head_lo;
  net.head_hi = head_hi;
  const int L = static_cast<int>(net.sizes.size()) - 1;
  net.W.resize(L);
  net.b.resize(L);
  for (int l = 0; l < L; ++l) {
    net.W[l].assign(static_cast<std::size_t>(net.sizes[l + 1]) * net.sizes[l], 0.0);
    net.b[l].assign(net.sizes[l + 1], 0.0);
  }
  return net;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
  return n;
}

bool Mlp::same_architecture(const Mlp& other) const {
  return sizes == other.sizes && hidden == other.hidden && head == other.head &&
         head_lo == other.head_lo && head_hi == other.head_hi;
}

void MlpWork::resize(const Mlp& net) {
  const int L = net.layers();
  y.resize(L + 1);
  z.resize(L + 1);
  int widest = 0;
  for (int l = 0; l <= L; ++l) {
    y[l].resize(net.sizes[l]);
    if (l >= 1) z[l].resize(net.sizes[l]);
    widest = std::max(widest, net.sizes[l]);
  }
  dz.resize(widest);
  dy.resize(widest);
}

void MlpGrads::init(const Mlp& net) {
  W.resize(net.W.size());
  b.resize(net.b.size());
  for (std::size_t l = 0; l < W.size(); ++l) {
    W[l].assign(net.W[l].size(), 0.0);
    b[l].assign(net.b[l].size(), 0.0);
  }
}

void MlpGrads::zero() {
  for (auto& w : W) std::fill(w.begin(), w.end(), 0.0);
  for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

void MlpGrads::add_scaled(double alpha, const MlpGrads& other) {
  for (std::size_t l = 0; l < W.size(); ++l) {
    kern::axpy(alpha, other.W[l].data(), W[l].data(), W[l].size());
    kern::axpy(alpha, other.b[l].data(), b[l].data(), b[l].size());
  }
}

void MlpGrads::scale(double alpha) {
  for (auto& w : W)
    for (double& v : w) v *= alpha;
  for (auto& v : b)
    for (double& u : v) u *= alpha;
}

void glorot_init(Mlp& net, Rng& rng) {
  for (int l = 0; l < net.layers(); ++l) {
    const double bound = std::sqrt(6.0 / (net.sizes[l] + net.sizes[l + 1]));
    for (double& w : net.W[l]) w = bound * (2.0 * rng.uniform() - 1.0);
    std::fill(net.b[l].begin(), net.b[l].end(), 0.0);
  }
}

std::pair<Vec, Vec> fit_normalizer(const double* X, int M, int dim) {
  if (M < 2) throw SolverError("fit_normalizer needs at least 2 samples");
  Vec mean(dim, 0.0), stdev(dim, 0.0);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < dim; ++j) mean[j] += X[static_cast<std::size_t>(i) * dim + j];
  for (int j = 0; j < dim; ++j) mean[j] /= M;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < dim; ++j) {
      const double d = X[static_cast<std::size_t>(i) * dim + j] - mean[j];
      stdev[j] += d * d;
    }
  for (int j = 0; j < dim; ++j) stdev[j] = std::max(1e-8, std::sqrt(stdev[j] / M));
  return {std::move(mean), std::move(stdev)};
}

void set_normalizer(Mlp& net, Vec mean, Vec stdev) {
  if (static_cast<int>(mean.size()) != net.in_dim() || mean.size() != stdev.size())
    throw SolverError("normalizer dimension mismatch");
  net.norm_mean = std::move(mean);
  net.norm_std = std::move(stdev);
}

namespace {

inline double act_apply(Act a, double z) {
  switch (a) {
    case Act::Elu: return z > 0.0 ? z : std::expm1(z);
    case Act::Relu: return z > 0.0 ? z : 0.0;
    case Act::Tanh: return std::tanh(z);
    case Act::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return 0.0;
}

// Derivative expressed through (z, y) to reuse the forward value.
inline double act_deriv(Act a, double z, double y) {
  switch (a) {
    case Act::Elu: return z > 0.0 ? 1.0 : y + 1.0;
    case Act::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Act::Tanh: return 1.0 - y * y;
    case Act::Sigmoid: return y * (1.0 - y);
  }
  return 0.0;
}

void apply_head(const Mlp& net, const double* z, double* y, int m) {
  switch (net.head) {
    case Head::Identity:
      std::copy_n(z, m, y);
      return;
    case Head::Sigmoid:
      for (int i = 0; i < m; ++i) y[i] = 1.0 / (1.0 + std::exp(-z[i]));
      return;
    case Head::ScaledSigmoid:
      for (int i = 0; i < m; ++i)
        y[i] = net.head_lo + (net.head_hi - net.head_lo) / (1.0 + std::exp(-z[i]));
      return;
    case Head::Softmax: {
      double zmax = z[0];
      for (int i = 1; i < m; ++i) zmax = std::max(zmax, z[i]);
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += (y[i] = std::exp(z[i] - zmax));
      for (int i = 0; i < m; ++i) y[i] /= s;
      return;
    }
  }
}

}  // namespace

void mlp_forward(const Mlp& net, const double* x, double* out, MlpWork& work) {
  work.resize(net);
  const int L = net.layers();
  const int in = net.in_dim();
  if (net.norm_mean.empty()) {
    std::copy_n(x, in, work.y[0].data());
  } else {
    for (int j = 0; j < in; ++j) work.y[0][j] = (x[j] - net.norm_mean[j]) / net.norm_std[j];
  }
  for (int l = 0; l < L; ++l) {
    const int rows = net.sizes[l + 1];
    const int cols = net.sizes[l];
    kern::matvec(net.W[l].data(), rows, cols, work.y[l].data(), work.z[l + 1].data());
    for (int i = 0; i < rows; ++i) work.z[l + 1][i] += net.b[l][i];
    if (l + 1 < L) {
      for (int i = 0; i < rows; ++i) work.y[l + 1][i] = act_apply(net.hidden, work.z[l + 1][i]);
    } else {
      apply_head(net, work.z[L].data(), work.y[L].data(), rows);
    }
  }
  std::copy_n(work.y[L].data(), net.out_dim(), out);
}

void mlp_forward(const Mlp& net, const double* x, double* out) {
  thread_local MlpWork work;
  mlp_forward(net, x, out, work);
}

void mlp_forward_batch(const Mlp& net, const double* X, int M, double* Y) {
  MlpWork work;
  const int in = net.in_dim(), out = net.out_dim();
  for (int i = 0; i < M; ++i)
    mlp_forward(net, X + static_cast<std::size_t>(i) * in,
                Y + static_cast<std::size_t>(i) * out, work);
}

void mlp_backward(const Mlp& net, MlpWork& work, const double* dLdy, MlpGrads& g,
                  double* dLdx) {
  const int L = net.layers();
  const int out = net.out_dim();
  Vec& dz = work.dz;
  Vec& dy = work.dy;

  switch (net.head) {
    case Head::Identity:
      std::copy_n(dLdy, out, dz.data());
      break;
    case Head::Sigmoid:
      for (int i = 0; i < out; ++i) {
        const double y = work.y[L][i];
        dz[i] = dLdy[i] * y * (1.0 - y);
      }
      break;
    case Head::ScaledSigmoid:
      for (int i = 0; i < out; ++i) {
        const double y = work.y[L][i];
        dz[i] = dLdy[i] * (y - net.head_lo) * (net.head_hi - y) / (net.head_hi - net.head_lo);
      }
      break;
    case Head::Softmax: {
      const double dot = kern::dot(dLdy, work.y[L].data(), out);
      for (int i = 0; i < out; ++i) dz[i] = work.y[L][i] * (dLdy[i] - dot);
      break;
    }
  }

  for (int l = L - 1; l >= 0; --l) {
    const int rows = net.sizes[l + 1];
    const int cols = net.sizes[l];
    kern::outer_acc(g.W[l].data(), rows, cols, 1.0, dz.data(), work.y[l].data());
    kern::axpy(1.0, dz.data(), g.b[l].data(), rows);
    if (l > 0) {
      kern::matvec_t(net.W[l].data(), rows, cols, dz.data(), dy.data());
      for (int i = 0; i < cols; ++i)
        dz[i] = dy[i] * act_deriv(net.hidden, work.z[l][i], work.y[l][i]);
    } else if (dLdx != nullptr) {
      kern::matvec_t(net.W[0].data(), rows, cols, dz.data(), dLdx);
      if (!net.norm_std.empty())
        for (int i = 0; i < cols; ++i) dLdx[i] /= net.norm_std[i];
    }
  }
}

void mlp_gradient(const Mlp& net, const double* X, int M, const double* dLdY, double l2,
                  MlpGrads& g) {
  if (M < 1) throw SolverError("empty batch");
  g.init(net);
  g.zero();
  MlpWork work;
  Vec out(net.out_dim());
  for (int i = 0; i < M; ++i) {
    mlp_forward(net, X + static_cast<std::size_t>(i) * net.in_dim(), out.data(), work);
    mlp_backward(net, work, dLdY + static_cast<std::size_t>(i) * net.out_dim(), g);
  }
  for (int l = 0; l < net.layers(); ++l)
    kern::axpy(2.0 * l2, net.W[l].data(), g.W[l].data(), g.W[l].size());
  for (std::size_t l = 0; l < g.W.size(); ++l) {
    for (double v : g.W[l])
      if (!std::isfinite(v)) throw SolverError("gradient blowup");
  }
}

void AdamState::init(const Mlp& net) {
  const std::size_t L = net.W.size();
  mW.resize(L);
  vW.resize(L);
  mb.resize(L);
  vb.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    mW[l].assign(net.W[l].size(), 0.0);
    vW[l].assign(net.W[l].size(), 0.0);
    mb[l].assign(net.b[l].size(), 0.0);
    vb[l].assign(net.b[l].size(), 0.0);
  }
  step = 0;
}

void adam_step(AdamState& st, Mlp& net, const MlpGrads& g) {
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    auto update = [&](Vec& p, const Vec& grad, Vec& m, Vec& v, bool weights) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = grad[i] + (weights ? 2.0 * st.l2 * p[i] : 0.0);
        m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * gi;
        v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * gi * gi;
        p[i] -= st.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + st.eps);
      }
    };
    update(net.W[l], g.W[l], st.mW[l], st.vW[l], true);
    update(net.b[l], g.b[l], st.mb[l], st.vb[l], false);
  }
}

namespace {

double l2_term(const std::vector<Mlp*>& nets, double l2) {
  double s = 0.0;
  for (const Mlp* net : nets)
    for (const auto& w : net->W) s += kern::sumsq(w.data(), w.size());
  return l2 * s;
}

struct Snapshot {
  std::vector<std::vector<Vec>> W, b;
  void take(const std::vector<Mlp*>& nets) {
    W.resize(nets.size());
    b.resize(nets.size());
    for (std::size_t k = 0; k < nets.size(); ++k) {
      W[k] = nets[k]->W;
      b[k] = nets[k]->b;
    }
  }
  void restore(const std::vector<Mlp*>& nets) const {
    for (std::size_t k = 0; k < nets.size(); ++k) {
      nets[k]->W = W[k];
      nets[k]->b = b[k];
    }
  }
};

}  // namespace

TrainResult train(std::vector<Mlp*> nets, int n_train, const LossGradFn& loss_fn, int n_valid,
                  const LossFn& valid_fn, const TrainConfig& cfg, Rng rng) {
  if (nets.empty() || n_train < 1) throw SolverError("train: nothing to train");
  std::vector<AdamState> opt(nets.size());
  std::vector<MlpGrads> grads(nets.size());
  for (std::size_t k = 0; k < nets.size(); ++k) {
    opt[k].init(*nets[k]);
    opt[k].lr = cfg.lr;
    opt[k].l2 = cfg.l2;
    grads[k].init(*nets[k]);
  }

  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> vidx(n_valid);
  std::iota(vidx.begin(), vidx.end(), 0);

  Rng shuffle_rng = rng.stream(rng_tag::kShuffle);
  TrainResult res;
  Snapshot best;
  best.take(nets);
  res.best_valid = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.epochs_max; ++epoch) {
    for (int i = n_train - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    int nb = 0;
    for (int start = 0; start < n_train; start += cfg.batch_size, ++nb) {
      const int count = std::min(cfg.batch_size, n_train - start);
      for (auto& g : grads) g.zero();
      const double data_loss = loss_fn(order.data() + start, count, &grads);
      if (!std::isfinite(data_loss)) throw SolverError("training loss diverged");
      epoch_loss += data_loss + l2_term(nets, cfg.l2);
      for (std::size_t k = 0; k < nets.size(); ++k) adam_step(opt[k], *nets[k], grads[k]);
    }
    res.train_loss.push_back(epoch_loss / std::max(1, nb));

    const double vl = n_valid > 0 ? valid_fn(vidx.data(), n_valid) : res.train_loss.back();
    if (!std::isfinite(vl)) throw SolverError("validation loss diverged");
    res.valid_loss.push_back(vl);
    if (vl < res.best_valid) {
      res.best_valid = vl;
      res.best_epoch = epoch;
      best.take(nets);
    }
    res.epochs = epoch + 1;
    if (epoch + 1 >= cfg.epochs_min && epoch - res.best_epoch >= cfg.patience) break;
  }
  best.restore(nets);
  return res;
}

TrainResult fit_regression(Mlp& net, const double* X, const double* Y, int n_train,
                           const double* Xv, const double* Yv, int n_valid,
                           const TrainConfig& cfg, Rng rng) {
  const int in = net.in_dim(), out = net.out_dim();
  MlpWork work;
  Vec pred(out), dLdy(out);

  auto mse = [&](const Mlp& m, const double* XX, const double* YY, const int* idx,
                 int count) {
    double s = 0.0;
    for (int i = 0; i < count; ++i) {
      const std::size_t r = static_cast<std::size_t>(idx[i]);
      mlp_forward(m, XX + r * in, pred.data(), work);
      for (int j = 0; j < out; ++j) {
        const double e = pred[j] - YY[r * out + j];
        s += e * e;
      }
    }
    return s / count;
  };

  LossGradFn loss_fn = [&](const int* idx, int count, std::vector<MlpGrads>* g) {
    double s = 0.0;
    for (int i = 0; i < count; ++i) {
      const std::size_t r = static_cast<std::size_t>(idx[i]);
      mlp_forward(net, X + r * in, pred.data(), work);
      for (int j = 0; j < out; ++j) {
        const double e = pred[j] - Y[r * out + j];
        s += e * e;
        dLdy[j] = 2.0 * e / count;
      }
      if (g) mlp_backward(net, work, dLdy.data(), (*g)[0]);
    }
    return s / count;
  };
  LossFn valid_fn = [&](const int* idx, int count) { return mse(net, Xv, Yv, idx, count); };

  return train({&net}, n_train, loss_fn, n_valid, valid_fn, cfg, rng);
}

void warm_start(Mlp& target, const Mlp& source) {
  if (!target.same_architecture(source)) throw SolverError("warm_start architecture mismatch");
  target.W = source.W;
  target.b = source.b;
  target.norm_mean = source.norm_mean;
  target.norm_std = source.norm_std;
}

namespace {
using nlohmann::json;
}

std::string mlp_to_json(const Mlp& net) {
  json j;
  j["sizes"] = net.sizes;
  j["hidden"] = act_name(net.hidden);
  j["head"] = head_name(net.head);
  j["head_lo"] = net.head_lo;
  j["head_hi"] = net.head_hi;
  j["norm_mean"] = net.norm_mean;
  j["norm_std"] = net.norm_std;
  j["W"] = net.W;
  j["b"] = net.b;
  return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
  json j = json::parse(text);
  Mlp net = Mlp::make(j.at("sizes").get<std::vector<int>>(),
                      act_from_name(j.at("hidden").get<std::string>()),
                      head_from_name(j.at("head").get<std::string>()),
                      j.at("head_lo").get<double>(), j.at("head_hi").get<double>());
  net.norm_mean = j.at("norm_mean").get<Vec>();
  net.norm_std = j.at("norm_std").get<Vec>();
  auto W = j.at("W").get<std::vector<Vec>>();
  auto b = j.at("b").get<std::vector<Vec>>();
  if (W.size() != net.W.size() || b.size() != net.b.size())
    throw SolverError("network file layer count mismatch");
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (W[l].size() != net.W[l].size() || b[l].size() != net.b[l].size())
      throw SolverError("network file layer shape mismatch");
  }
  net.W = std::move(W);
  net.b = std::move(b);
  return net;
}

void save_mlp(const Mlp& net, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw SolverError("cannot write " + path);
  f << mlp_to_json(net) << "\n";
}

Mlp load_mlp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SolverError("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return mlp_from_json(text);
}

}  // namespace stocon
