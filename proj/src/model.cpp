#include "neurograph/model.hpp"

#include <cmath>
#include <cstring>

#include "neurograph/error.hpp"

namespace ng {

std::size_t ArchConfig::window_samples() const {
  double t = fs * window_seconds;
  auto n = static_cast<long long>(std::llround(t));
  if (n < 1 || std::abs(t - static_cast<double>(n)) > 1e-9)
    fail_invalid("window_seconds * fs must be a positive integer");
  return static_cast<std::size_t>(n);
}

std::size_t ArchConfig::kernel_for_fs(double fs) {
  auto half = static_cast<long long>(std::llround(fs / 4.0)) * 2;
  return static_cast<std::size_t>(half < 2 ? 2 : half);
}

void ArchConfig::validate() const {
  if (fs <= 0.0) fail_invalid("fs must be positive");
  if (window_seconds <= 0.0) fail_invalid("window_seconds must be positive");
  if (kernel < 1) fail_invalid("kernel must be >= 1");
  if (temporal_filters < 1) fail_invalid("temporal_filters must be >= 1");
  if (cheb_order < 1) fail_invalid("cheb_order must be >= 1");
  if (cheb_features < 1) fail_invalid("cheb_features must be >= 1");
  if (pool_window < 1) fail_invalid("pool_window must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) fail_invalid("dropout must be in [0,1)");
  if (edge_dropout < 0.0 || edge_dropout >= 1.0)
    fail_invalid("edge_dropout must be in [0,1)");
  std::size_t t = window_samples();
  if (t < kernel) fail_invalid("window shorter than conv kernel");
  if ((t - kernel + 1) / pool_window == 0)
    fail_invalid("pool window longer than conv output");
}

GnnClassifier::GnnClassifier(WeightedGraph graph, ArchConfig arch,
                             std::uint64_t init_seed)
    : graph_(std::move(graph)), arch_(arch) {
  arch_.validate();
  graph_.validate();
  spectral_ = spectral_bundle(graph_);
  Rng rng(init_seed);
  conv.init(arch_.temporal_filters, arch_.kernel, rng);
  bn.init(arch_.temporal_filters);
  act.init(0.25);
  cheb.init(arch_.cheb_order, flat_features(), arch_.cheb_features, rng);
  head.init(arch_.cheb_features, 2, rng);
}

std::size_t GnnClassifier::flat_features() const {
  std::size_t t1 = arch_.window_samples() - arch_.kernel + 1;
  return arch_.temporal_filters * (t1 / arch_.pool_window);
}

Tensor GnnClassifier::ltilde_for(const Tensor& adjacency,
                                 double lambda_max) const {
  const std::size_t c = adjacency.dim(0);
  bool any_edge = false;
  for (std::size_t i = 0; i < adjacency.size() && !any_edge; ++i)
    if (adjacency[i] > 0.0) any_edge = true;
  Tensor lt({c, c});
  if (!any_edge) return lt;  // isolated nodes: T_k argument is the 0 matrix

  Tensor lap({c, c});
  for (std::size_t i = 0; i < c; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      double w = adjacency.at2(i, j);
      degree += w;
      lap.at2(i, j) = -w;
    }
    lap.at2(i, i) = degree;
  }
  double lam = lambda_max > 0.0 ? lambda_max : symmetric_lambda_max(lap);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      lt.at2(i, j) = 2.0 * lap.at2(i, j) / lam - (i == j ? 1.0 : 0.0);
  return lt;
}

namespace {
void check_batch(const Tensor& batch, std::size_t c, std::size_t t) {
  if (batch.rank() != 3) fail_invalid("batch must be N x C x T");
  if (batch.dim(1) != c)
    fail_invalid("batch has " + std::to_string(batch.dim(1)) +
                 " channels, graph has " + std::to_string(c));
  if (batch.dim(2) != t)
    fail_invalid("batch window " + std::to_string(batch.dim(2)) +
                 " != configured " + std::to_string(t));
}

Tensor scale_nodes(const Tensor& batch, const std::vector<double>& s) {
  Tensor out = batch;
  const std::size_t n = batch.dim(0), c = batch.dim(1), t = batch.dim(2);
  for (std::size_t in = 0; in < n; ++in)
    for (std::size_t ci = 0; ci < c; ++ci) {
      double* p = out.data() + (in * c + ci) * t;
      for (std::size_t i = 0; i < t; ++i) p[i] *= s[ci];
    }
  return out;
}

Tensor reshape(Tensor t, std::vector<std::size_t> shape) {
  Tensor out(std::move(shape));
  if (out.size() != t.size()) fail_invalid("reshape size mismatch");
  out.buffer() = std::move(t.buffer());
  return out;
}
}  // namespace

Tensor GnnClassifier::forward_eval(const Tensor& batch) const {
  check_batch(batch, node_count(), arch_.window_samples());
  const std::size_t n = batch.dim(0), c = batch.dim(1);
  Tensor h = conv.forward(batch);
  h = const_cast<BatchNorm&>(bn).forward(h, /*train=*/false);
  h = act.forward(h);
  h = avg_pool_forward(h, arch_.pool_window);
  h = reshape(std::move(h), {n, c, flat_features()});
  h = cheb.forward(h, spectral_.rescaled);
  h = softplus_forward(h);
  h = global_avg_pool_forward(h);
  Tensor logits = head.forward(h);
  if (!logits.all_finite()) fail_numeric("non-finite logits in eval forward");
  return logits;
}

Tensor GnnClassifier::forward_with(const Tensor& batch, const Tensor& ltilde,
                                   const std::vector<double>* node_scale,
                                   bool train_bn, const Tensor* dropout_mask,
                                   ForwardTrace* trace) const {
  check_batch(batch, node_count(), arch_.window_samples());
  const std::size_t n = batch.dim(0), c = batch.dim(1);
  auto& self = const_cast<GnnClassifier&>(*this);

  Tensor x = node_scale ? scale_nodes(batch, *node_scale) : batch;
  Tensor conv_out = conv.forward(x);
  Tensor bn_out = self.bn.forward(conv_out, train_bn);
  Tensor act_out = act.forward(bn_out);
  Tensor pool_out = avg_pool_forward(act_out, arch_.pool_window);
  Tensor dropped = pool_out;
  if (dropout_mask) {
    for (std::size_t i = 0; i < dropped.size(); ++i)
      dropped[i] *= (*dropout_mask)[i];
  }
  Tensor h1 = reshape(std::move(dropped), {n, c, flat_features()});
  Tensor cheb_out = cheb.forward(h1, ltilde);
  Tensor sp_out = softplus_forward(cheb_out);
  Tensor gap_out = global_avg_pool_forward(sp_out);
  Tensor logits = head.forward(gap_out);
  if (!logits.all_finite()) fail_numeric("non-finite logits in forward");

  if (trace) {
    trace->valid = true;
    trace->input = std::move(x);
    trace->conv_out = std::move(conv_out);
    trace->bn_out = std::move(bn_out);
    trace->act_out = std::move(act_out);
    trace->pool_out = std::move(pool_out);
    trace->dropout_mask = dropout_mask ? *dropout_mask : Tensor();
    trace->h1 = std::move(h1);
    trace->ltilde = ltilde;
    trace->cheb_out = std::move(cheb_out);
    trace->softplus_out = std::move(sp_out);
    trace->gap_out = std::move(gap_out);
    trace->logits = logits;
  }
  return logits;
}

Tensor GnnClassifier::forward_train(const Tensor& batch, Rng& rng) {
  WeightedGraph g = edge_dropout(graph_, arch_.edge_dropout, rng);
  Tensor ltilde = ltilde_for(g.adjacency);
  const Tensor* maskp = nullptr;
  Tensor mask;
  if (arch_.dropout > 0.0) {
    std::size_t t1 = arch_.window_samples() - arch_.kernel + 1;
    mask = dropout_mask({batch.dim(0), node_count(), arch_.temporal_filters,
                         t1 / arch_.pool_window},
                        arch_.dropout, rng);
    maskp = &mask;
  }
  return forward_with(batch, ltilde, nullptr, /*train_bn=*/!bn_frozen_, maskp,
                      &trace_);
}

void GnnClassifier::backprop(ForwardTrace& tr, const Tensor& dlogits,
                             bool train_bn, Tensor* dltilde) {
  if (!tr.valid) fail_invalid("backward called without a recorded forward");
  const std::size_t n = tr.input.dim(0), c = tr.input.dim(1);
  Tensor d = head.backward(tr.gap_out, dlogits);
  d = global_avg_pool_backward(tr.softplus_out, d);
  d = softplus_backward(tr.cheb_out, d);
  d = cheb.backward(tr.h1, tr.ltilde, d, dltilde);
  std::size_t t1 = arch_.window_samples() - arch_.kernel + 1;
  d = reshape(std::move(d),
              {n, c, arch_.temporal_filters, t1 / arch_.pool_window});
  if (tr.dropout_mask.size() == d.size())
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= tr.dropout_mask[i];
  d = avg_pool_backward(tr.act_out, d, arch_.pool_window);
  d = act.backward(tr.bn_out, d);
  d = bn.backward(tr.conv_out, d, train_bn);
  tr.input_grad = conv.backward(tr.input, d);
}

double GnnClassifier::backward(const std::vector<int>& labels,
                               const std::array<double, 2>& class_weights) {
  if (!trace_.valid) fail_invalid("backward requires a train-mode forward");
  CeResult ce = weighted_cross_entropy(trace_.logits, labels, class_weights);
  if (!std::isfinite(ce.loss)) fail_numeric("non-finite training loss");
  backprop(trace_, ce.dlogits, /*train_bn=*/!bn_frozen_, nullptr);
  return ce.loss;
}

std::vector<ParamRef> GnnClassifier::params() {
  std::vector<ParamRef> all;
  auto append = [&all](std::vector<ParamRef> v) {
    for (auto& p : v) all.push_back(p);
  };
  append(conv.params());
  append(bn.params());
  append(act.params());
  append(cheb.params());
  append(head.params());
  return all;
}

void GnnClassifier::zero_grads() {
  for (auto& p : params()) p.grad->zero();
}

void GnnClassifier::copy_params_from(const GnnClassifier& src) {
  auto dst_params = params();
  auto src_params = const_cast<GnnClassifier&>(src).params();
  if (dst_params.size() != src_params.size())
    fail_invalid("parameter sets differ");
  for (std::size_t i = 0; i < dst_params.size(); ++i) {
    if (!dst_params[i].value->same_shape(*src_params[i].value))
      fail_invalid("parameter shape mismatch at " + dst_params[i].name);
    *dst_params[i].value = *src_params[i].value;
  }
  bn.running_mean = src.bn.running_mean;
  bn.running_var = src.bn.running_var;
}

std::uint64_t GnnClassifier::param_checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_tensor = [&h](const Tensor& t) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t.data());
    for (std::size_t i = 0; i < t.size() * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  auto& self = const_cast<GnnClassifier&>(*this);
  for (auto& p : self.params()) mix_tensor(*p.value);
  mix_tensor(bn.running_mean);
  mix_tensor(bn.running_var);
  return h;
}

}  // namespace ng
