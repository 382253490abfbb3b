#ifndef NEUROGRAPH_MODEL_HPP
#define NEUROGRAPH_MODEL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurograph/graph.hpp"
#include "neurograph/nn.hpp"

namespace ng {

struct ArchConfig {
  double fs = 256.0;
  double window_seconds = 2.0;
  std::size_t kernel = 128;  // fs/2, rounded to the nearest even integer
  std::size_t temporal_filters = 32;
  std::size_t cheb_order = 3;
  std::size_t cheb_features = 16;
  std::size_t pool_window = 4;
  double dropout = 0.35;
  double edge_dropout = 0.2;

  std::size_t window_samples() const;
  static std::size_t kernel_for_fs(double fs);
  void validate() const;
  bool operator==(const ArchConfig&) const = default;
};

// Cached intermediates of one train-mode forward; consumed by backward().
struct ForwardTrace {
  bool valid = false;
  Tensor input, conv_out, bn_out, act_out, pool_out;
  Tensor dropout_mask;  // empty when dropout p = 0
  Tensor h1;            // node features entering the graph layer
  Tensor ltilde;        // rescaled Laplacian actually used (post edge dropout)
  Tensor cheb_out, softplus_out, gap_out, logits;
  Tensor input_grad;    // filled by backward(); explainer reads it
};

// Temporal conv -> batch norm -> PReLU -> avg pool -> dropout ->
// Chebyshev graph conv -> softplus -> global avg pool -> linear(2).
class GnnClassifier {
 public:
  GnnClassifier(WeightedGraph graph, ArchConfig arch, std::uint64_t init_seed);

  // Deterministic inference path.
  Tensor forward_eval(const Tensor& batch) const;
  // Training path: edge dropout on the graph and feature dropout after the
  // pool, both drawn from rng; batch-norm uses batch statistics.
  Tensor forward_train(const Tensor& batch, Rng& rng);
  // Requires a preceding forward_train; fills every gradient buffer and the
  // trace's input_grad, returns the loss.
  double backward(const std::vector<int>& labels,
                  const std::array<double, 2>& class_weights);

  // Forward on an explicit rescaled Laplacian with optional node scaling of
  // the raw input; shared by training and the mask explainer.
  Tensor forward_with(const Tensor& batch, const Tensor& ltilde,
                      const std::vector<double>* node_scale, bool train_bn,
                      const Tensor* dropout_mask, ForwardTrace* trace) const;

  // Reverse pass from a recorded trace. Fills layer gradient buffers and
  // trace.input_grad; dltilde (when non-null) accumulates the gradient
  // w.r.t. the rescaled Laplacian.
  void backprop(ForwardTrace& trace, const Tensor& dlogits, bool train_bn,
                Tensor* dltilde);

  void set_bn_frozen(bool frozen) { bn_frozen_ = frozen; }
  bool bn_frozen() const { return bn_frozen_; }

  std::vector<ParamRef> params();
  void zero_grads();
  void copy_params_from(const GnnClassifier& src);
  // FNV-1a over all parameter bytes; used by the frozen-model contract.
  std::uint64_t param_checksum() const;

  const WeightedGraph& graph() const { return graph_; }
  const SpectralBundle& spectral() const { return spectral_; }
  const ArchConfig& arch() const { return arch_; }
  ForwardTrace& trace() { return trace_; }
  std::size_t node_count() const { return graph_.node_count(); }
  std::size_t flat_features() const;  // Fin of the graph layer

  // Rescaled Laplacian for an adjacency that may have lost edges; an empty
  // graph maps to the all-zero matrix (isolated-node convention). A positive
  // lambda_max overrides the recomputed eigenvalue (the mask explainer pins
  // it to the unmasked graph's value so mask gradients stay exact).
  Tensor ltilde_for(const Tensor& adjacency, double lambda_max = 0.0) const;

  TemporalConv conv;
  BatchNorm bn;
  PRelu act;
  ChebConv cheb;
  Linear head;

 private:
  WeightedGraph graph_;
  SpectralBundle spectral_;
  ArchConfig arch_;
  ForwardTrace trace_;
  bool bn_frozen_ = false;
};

// Binary model container: magic NGRF, version, text header with the
// architecture and layout, then named tensor records. Bit-exact round-trip.
void save_checkpoint(const GnnClassifier& model, const std::string& path);
GnnClassifier load_checkpoint(const std::string& path);

}  // namespace ng

#endif
