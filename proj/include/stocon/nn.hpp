#pragma once

#include <string>
#include <vector>

#include "stocon/mdp.hpp"
#include "stocon/rng.hpp"

namespace stocon {

enum class Act { Elu, Relu, Tanh, Sigmoid };
enum class Head { Identity, Sigmoid, Softmax, ScaledSigmoid };

const char* act_name(Act a);
const char* head_name(Head h);
Act act_from_name(const std::string& s);
Head head_from_name(const std::string& s);

struct Mlp {
  std::vector<int> sizes;  // sizes[0] = input dim, sizes.back() = output dim
  std::vector<Vec> W;      // W[l] is sizes[l+1] x sizes[l], row-major
  std::vector<Vec> b;      // b[l] has sizes[l+1] entries
  Act hidden = Act::Elu;
  Head head = Head::Identity;
  double head_lo = 0.0, head_hi = 1.0;  // ScaledSigmoid range
  Vec norm_mean, norm_std;              // empty = no input normalization

  static Mlp make(std::vector<int> sizes, Act hidden, Head head, double head_lo = 0.0,
                  double head_hi = 1.0);

  int in_dim() const { return sizes.front(); }
  int out_dim() const { return sizes.back(); }
  int layers() const { return static_cast<int>(W.size()); }
  std::size_t param_count() const;
  bool same_architecture(const Mlp& other) const;
};

struct MlpWork {
  std::vector<Vec> y;  // y[0] = normalized input, y[l] = layer l activation
  std::vector<Vec> z;  // z[l] = layer l pre-activation, l >= 1
  Vec dz, dy;
  void resize(const Mlp& net);
};

struct MlpGrads {
  std::vector<Vec> W, b;
  void init(const Mlp& net);
  void zero();
  void add_scaled(double alpha, const MlpGrads& other);
  void scale(double alpha);
};

// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.
void glorot_init(Mlp& net, Rng& rng);

// Per-coordinate mean and stdev of M row-major samples, stdev floored at 1e-8.
std::pair<Vec, Vec> fit_normalizer(const double* X, int M, int dim);
void set_normalizer(Mlp& net, Vec mean, Vec stdev);

void mlp_forward(const Mlp& net, const double* x, double* out, MlpWork& work);
void mlp_forward(const Mlp& net, const double* x, double* out);
// Row-major batch of M inputs -> M outputs.
void mlp_forward_batch(const Mlp& net, const double* X, int M, double* Y);

// Single-sample backward pass; `work` must hold the matching forward state.
// dLdy is dL/d(output) after the head. Parameter gradients are accumulated
// (+=) into g. When dLdx is non-null, receives dL/d(raw input).
void mlp_backward(const Mlp& net, MlpWork& work, const double* dLdy, MlpGrads& g,
                  double* dLdx = nullptr);

// Mean gradient over a batch, plus 2*l2*W per weight. Y holds the per-sample
// upstream gradients of the MEAN batch loss (already divided by M).
void mlp_gradient(const Mlp& net, const double* X, int M, const double* dLdY, double l2,
                  MlpGrads& g);

struct AdamState {
  std::vector<Vec> mW, vW, mb, vb;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double l2 = 0.0;  // applied to weights only
  void init(const Mlp& net);
};

// g must hold the mean data-loss gradient; the L2 gradient is added here.
void adam_step(AdamState& st, Mlp& net, const MlpGrads& g);

struct TrainConfig {
  int batch_size = 64;
  int max_batches = 100;  // training set size = batch_size * max_batches
  int epochs_min = 10;
  int epochs_max = 100;
  int validation_size = 100;
  int patience = 10;
  double lr = 1e-3;
  double l2 = 0.01;
};

struct TrainResult {
  std::vector<double> train_loss;  // per epoch, L2 term included
  std::vector<double> valid_loss;  // per epoch
  double best_valid = 0.0;
  int best_epoch = -1;
  int epochs = 0;
};

// Mean data loss over the index set; when g is non-null, fills one mean
// parameter gradient per net (L2 excluded; the optimizer adds it).
using LossGradFn =
    std::function<double(const int* idx, int count, std::vector<MlpGrads>* g)>;
using LossFn = std::function<double(const int* idx, int count)>;

// Mini-batch Adam over a fixed training set of n_train samples addressed by
// index. Epoch order is a deterministic shuffle from rng. After every epoch
// the validation loss over [0, n_valid) is evaluated; training stops once the
// best validation epoch is `patience` epochs old (never before epochs_min,
// never after epochs_max) and the best parameters are restored.
TrainResult train(std::vector<Mlp*> nets, int n_train, const LossGradFn& loss_fn, int n_valid,
                  const LossFn& valid_fn, const TrainConfig& cfg, Rng rng);

// Squared-error fit of net to row-major targets; covers the value-regression
// steps. Validation pairs may alias the training arrays.
TrainResult fit_regression(Mlp& net, const double* X, const double* Y, int n_train,
                           const double* Xv, const double* Yv, int n_valid,
                           const TrainConfig& cfg, Rng rng);

// Copies parameters and normalization; target then computes the same function
// as source. Architectures must match.
void warm_start(Mlp& target, const Mlp& source);

std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace stocon
