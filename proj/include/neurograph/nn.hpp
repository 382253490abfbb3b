#ifndef NEUROGRAPH_NN_HPP
#define NEUROGRAPH_NN_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "neurograph/rng.hpp"
#include "neurograph/tensor.hpp"

namespace ng {

// Named view of a learnable tensor and its gradient buffer.
struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

// 1D convolution along time, one input channel to `filters` feature maps,
// applied identically to every graph node. N x C x T -> N x C x F x T'
// with T' = T - kernel + 1 (no padding).
struct TemporalConv {
  Tensor weight;  // F x k
  Tensor bias;    // F
  Tensor grad_weight, grad_bias;
  std::size_t filters = 0, kernel = 0;

  void init(std::size_t filters_, std::size_t kernel_, Rng& rng);
  Tensor forward(const Tensor& x) const;
  // Accumulates parameter gradients, returns dL/dx.
  Tensor backward(const Tensor& x, const Tensor& gout);
  std::vector<ParamRef> params();
};

// Batch norm over the feature-map axis of N x C x F x T inputs; statistics
// pool over batch, node, and time.
struct BatchNorm {
  Tensor scale, shift;          // F
  Tensor running_mean, running_var;
  Tensor grad_scale, grad_shift;
  double epsilon = 1e-5;
  double momentum = 0.1;
  bool track_running = true;  // freeze flag for fine-tuning experiments

  void init(std::size_t features);
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& x, const Tensor& gout, bool train);
  std::vector<ParamRef> params();
};

// PReLU with a single learnable slope.
struct PRelu {
  Tensor slope;  // scalar
  Tensor grad_slope;

  void init(double initial = 0.25);
  Tensor forward(const Tensor& x) const;
  Tensor backward(const Tensor& x, const Tensor& gout);
  std::vector<ParamRef> params();
};

// Chebyshev spectral graph convolution: sum_k T_k(Ltilde) * X * theta_k
// with T_0 = I, T_1 = Ltilde, T_k = 2 Ltilde T_{k-1} - T_{k-2}.
// X is N x C x Fin, Ltilde is C x C, output N x C x Fout.
struct ChebConv {
  Tensor theta;  // K x Fin x Fout
  Tensor grad_theta;
  std::size_t order = 0, in_features = 0, out_features = 0;

  void init(std::size_t order_, std::size_t in_, std::size_t out_, Rng& rng);
  Tensor forward(const Tensor& x, const Tensor& ltilde) const;
  // dLtilde, when non-null, receives the gradient w.r.t. the rescaled
  // Laplacian (needed by the edge-mask explainer).
  Tensor backward(const Tensor& x, const Tensor& ltilde, const Tensor& gout,
                  Tensor* dltilde = nullptr);
  std::vector<ParamRef> params();
};

struct Linear {
  Tensor weight;  // out x in
  Tensor bias;    // out
  Tensor grad_weight, grad_bias;

  void init(std::size_t in, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) const;  // N x in -> N x out
  Tensor backward(const Tensor& x, const Tensor& gout);
  std::vector<ParamRef> params();
};

// Non-overlapping mean pooling along the last axis; trailing remainder
// truncated (floor rule).
Tensor avg_pool_forward(const Tensor& x, std::size_t window);
Tensor avg_pool_backward(const Tensor& x, const Tensor& gout,
                         std::size_t window);

// Mean over the node axis of N x C x F -> N x F.
Tensor global_avg_pool_forward(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& x, const Tensor& gout);

Tensor softplus_forward(const Tensor& x);
Tensor softplus_backward(const Tensor& x, const Tensor& gout);

Tensor prelu_forward(const Tensor& x, double slope);

// Inverted dropout; mask entries are 0 or 1/(1-p) so eval is a no-op.
Tensor dropout_mask(const std::vector<std::size_t>& shape, double p, Rng& rng);

struct CeResult {
  double loss;
  Tensor dlogits;  // N x 2
  Tensor probs;    // N x 2
};

// Softmax + class-weighted negative log-likelihood, normalized by the sum
// of the per-sample weights.
CeResult weighted_cross_entropy(const Tensor& logits,
                                const std::vector<int>& labels,
                                const std::array<double, 2>& class_weights);

// Target for finite-difference verification: a pure forward, a backward
// that fills the listed gradients, and the parameter list.
struct GradCheckTarget {
  std::function<Tensor(const Tensor&)> forward;
  std::function<Tensor(const Tensor&, const Tensor&)> backward;
  std::vector<ParamRef> params;
};

// Central-difference check of input and parameter gradients against the
// analytic backward pass; returns the worst relative error.
double grad_check(GradCheckTarget target, const Tensor& input, double eps,
                  Rng& rng);

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                    Rng& rng);

}  // namespace ng

#endif
