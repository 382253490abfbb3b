#include "neurograph/nn.hpp"

#include <algorithm>
#include <cmath>

#include "neurograph/error.hpp"

namespace ng {

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                    Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------
// TemporalConv

void TemporalConv::init(std::size_t filters_, std::size_t kernel_, Rng& rng) {
  if (filters_ == 0 || kernel_ == 0)
    fail_invalid("temporal conv needs filters >= 1 and kernel >= 1");
  filters = filters_;
  kernel = kernel_;
  weight = Tensor({filters, kernel});
  bias = Tensor({filters});
  glorot_uniform(weight, kernel, filters * kernel, rng);
  grad_weight = Tensor::zeros_like(weight);
  grad_bias = Tensor::zeros_like(bias);
}

Tensor TemporalConv::forward(const Tensor& x) const {
  if (x.rank() != 3) fail_invalid("temporal conv expects N x C x T input");
  const std::size_t n = x.dim(0), c = x.dim(1), t = x.dim(2);
  if (t < kernel)
    fail_invalid("window length " + std::to_string(t) +
                 " shorter than kernel " + std::to_string(kernel));
  const std::size_t t1 = t - kernel + 1;
  Tensor y({n, c, filters, t1});
  for (std::size_t in = 0; in < n; ++in) {
    for (std::size_t ic = 0; ic < c; ++ic) {
      const double* sig = x.data() + (in * c + ic) * t;
      for (std::size_t f = 0; f < filters; ++f) {
        const double* w = weight.data() + f * kernel;
        const double b = bias[f];
        double* out = y.data() + ((in * c + ic) * filters + f) * t1;
        for (std::size_t o = 0; o < t1; ++o) {
          double acc = b;
          const double* s = sig + o;
          for (std::size_t kk = 0; kk < kernel; ++kk) acc += w[kk] * s[kk];
          out[o] = acc;
        }
      }
    }
  }
  return y;
}

Tensor TemporalConv::backward(const Tensor& x, const Tensor& gout) {
  const std::size_t n = x.dim(0), c = x.dim(1), t = x.dim(2);
  const std::size_t t1 = t - kernel + 1;
  Tensor dx({n, c, t});
  for (std::size_t in = 0; in < n; ++in) {
    for (std::size_t ic = 0; ic < c; ++ic) {
      const double* sig = x.data() + (in * c + ic) * t;
      double* dsig = dx.data() + (in * c + ic) * t;
      for (std::size_t f = 0; f < filters; ++f) {
        const double* w = weight.data() + f * kernel;
        double* gw = grad_weight.data() + f * kernel;
        const double* g = gout.data() + ((in * c + ic) * filters + f) * t1;
        double gb = 0.0;
        for (std::size_t o = 0; o < t1; ++o) {
          const double gv = g[o];
          gb += gv;
          const double* s = sig + o;
          double* d = dsig + o;
          for (std::size_t kk = 0; kk < kernel; ++kk) {
            gw[kk] += gv * s[kk];
            d[kk] += gv * w[kk];
          }
        }
        grad_bias[f] += gb;
      }
    }
  }
  return dx;
}

std::vector<ParamRef> TemporalConv::params() {
  return {{"temporal_conv.weight", &weight, &grad_weight},
          {"temporal_conv.bias", &bias, &grad_bias}};
}

// ---------------------------------------------------------------------------
// BatchNorm

void BatchNorm::init(std::size_t features) {
  scale = Tensor({features});
  scale.fill(1.0);
  shift = Tensor({features});
  running_mean = Tensor({features});
  running_var = Tensor({features});
  running_var.fill(1.0);
  grad_scale = Tensor::zeros_like(scale);
  grad_shift = Tensor::zeros_like(shift);
}

namespace {
struct BnDims {
  std::size_t groups;  // N * C
  std::size_t f;
  std::size_t t;
};
BnDims bn_dims(const Tensor& x, std::size_t features) {
  if (x.rank() != 4) fail_invalid("batch norm expects N x C x F x T input");
  if (x.dim(2) != features)
    fail_invalid("batch norm feature axis mismatch: " + x.shape_str());
  return {x.dim(0) * x.dim(1), x.dim(2), x.dim(3)};
}
}  // namespace

Tensor BatchNorm::forward(const Tensor& x, bool train) {
  auto [groups, f, t] = bn_dims(x, scale.size());
  Tensor y = Tensor::zeros_like(x);
  if (train && x.dim(0) < 2)
    fail_invalid("train-mode batch norm needs batch size >= 2");
  const double m = static_cast<double>(groups * t);
  for (std::size_t fi = 0; fi < f; ++fi) {
    double mean, var;
    if (train) {
      double s = 0.0;
      for (std::size_t g = 0; g < groups; ++g) {
        const double* p = x.data() + (g * f + fi) * t;
        for (std::size_t i = 0; i < t; ++i) s += p[i];
      }
      mean = s / m;
      double sq = 0.0;
      for (std::size_t g = 0; g < groups; ++g) {
        const double* p = x.data() + (g * f + fi) * t;
        for (std::size_t i = 0; i < t; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      var = sq / m;
      if (track_running) {
        double unbiased = m > 1.0 ? sq / (m - 1.0) : var;
        running_mean[fi] = (1.0 - momentum) * running_mean[fi] + momentum * mean;
        running_var[fi] = (1.0 - momentum) * running_var[fi] + momentum * unbiased;
      }
    } else {
      mean = running_mean[fi];
      var = running_var[fi];
    }
    const double inv = 1.0 / std::sqrt(var + epsilon);
    const double a = scale[fi] * inv;
    const double b = shift[fi] - a * mean;
    for (std::size_t g = 0; g < groups; ++g) {
      const double* p = x.data() + (g * f + fi) * t;
      double* q = y.data() + (g * f + fi) * t;
      for (std::size_t i = 0; i < t; ++i) q[i] = a * p[i] + b;
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& x, const Tensor& gout, bool train) {
  auto [groups, f, t] = bn_dims(x, scale.size());
  Tensor dx = Tensor::zeros_like(x);
  const double m = static_cast<double>(groups * t);
  for (std::size_t fi = 0; fi < f; ++fi) {
    double mean, var;
    if (train) {
      double s = 0.0;
      for (std::size_t g = 0; g < groups; ++g) {
        const double* p = x.data() + (g * f + fi) * t;
        for (std::size_t i = 0; i < t; ++i) s += p[i];
      }
      mean = s / m;
      double sq = 0.0;
      for (std::size_t g = 0; g < groups; ++g) {
        const double* p = x.data() + (g * f + fi) * t;
        for (std::size_t i = 0; i < t; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      var = sq / m;
    } else {
      mean = running_mean[fi];
      var = running_var[fi];
    }
    const double inv = 1.0 / std::sqrt(var + epsilon);
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      const double* p = x.data() + (g * f + fi) * t;
      const double* gq = gout.data() + (g * f + fi) * t;
      for (std::size_t i = 0; i < t; ++i) {
        sum_g += gq[i];
        sum_gx += gq[i] * (p[i] - mean) * inv;
      }
    }
    grad_shift[fi] += sum_g;
    grad_scale[fi] += sum_gx;
    const double gamma_inv = scale[fi] * inv;
    if (train) {
      const double mg = sum_g / m, mgx = sum_gx / m;
      for (std::size_t g = 0; g < groups; ++g) {
        const double* p = x.data() + (g * f + fi) * t;
        const double* gq = gout.data() + (g * f + fi) * t;
        double* d = dx.data() + (g * f + fi) * t;
        for (std::size_t i = 0; i < t; ++i) {
          double xhat = (p[i] - mean) * inv;
          d[i] = gamma_inv * (gq[i] - mg - xhat * mgx);
        }
      }
    } else {
      for (std::size_t g = 0; g < groups; ++g) {
        const double* gq = gout.data() + (g * f + fi) * t;
        double* d = dx.data() + (g * f + fi) * t;
        for (std::size_t i = 0; i < t; ++i) d[i] = gamma_inv * gq[i];
      }
    }
  }
  return dx;
}

std::vector<ParamRef> BatchNorm::params() {
  return {{"batchnorm.scale", &scale, &grad_scale},
          {"batchnorm.shift", &shift, &grad_shift}};
}

// ---------------------------------------------------------------------------
// PReLU

void PRelu::init(double initial) {
  slope = Tensor({std::size_t{1}});
  slope[0] = initial;
  grad_slope = Tensor::zeros_like(slope);
}

Tensor PRelu::forward(const Tensor& x) const {
  return prelu_forward(x, slope[0]);
}

Tensor prelu_forward(const Tensor& x, double slope) {
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] < 0.0) y[i] *= slope;
  return y;
}

Tensor PRelu::backward(const Tensor& x, const Tensor& gout) {
  Tensor dx = Tensor::zeros_like(x);
  const double a = slope[0];
  double ga = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= 0.0) {
      dx[i] = gout[i];
    } else {
      dx[i] = a * gout[i];
      ga += x[i] * gout[i];
    }
  }
  grad_slope[0] += ga;
  return dx;
}

std::vector<ParamRef> PRelu::params() {
  return {{"prelu.slope", &slope, &grad_slope}};
}

// ---------------------------------------------------------------------------
// ChebConv

void ChebConv::init(std::size_t order_, std::size_t in_, std::size_t out_,
                    Rng& rng) {
  if (order_ < 1) fail_invalid("Chebyshev order K must be >= 1");
  order = order_;
  in_features = in_;
  out_features = out_;
  theta = Tensor({order, in_features, out_features});
  for (std::size_t k = 0; k < order; ++k) {
    Tensor slice({in_features, out_features});
    glorot_uniform(slice, in_features, out_features, rng);
    std::copy(slice.data(), slice.data() + slice.size(),
              theta.data() + k * in_features * out_features);
  }
  grad_theta = Tensor::zeros_like(theta);
}

namespace {
// z_k sequence for one sample: z0 = h, z1 = L h, z_k = 2 L z_{k-1} - z_{k-2}.
void cheb_basis(const Tensor& ltilde, const double* h, std::size_t c,
                std::size_t fin, std::size_t order,
                std::vector<std::vector<double>>& z) {
  z.assign(order, std::vector<double>(c * fin));
  std::copy(h, h + c * fin, z[0].data());
  if (order > 1) matmul(ltilde.data(), z[0].data(), z[1].data(), c, c, fin);
  for (std::size_t k = 2; k < order; ++k) {
    matmul(ltilde.data(), z[k - 1].data(), z[k].data(), c, c, fin);
    for (std::size_t i = 0; i < c * fin; ++i)
      z[k][i] = 2.0 * z[k][i] - z[k - 2][i];
  }
}
}  // namespace

Tensor ChebConv::forward(const Tensor& x, const Tensor& ltilde) const {
  if (x.rank() != 3) fail_invalid("cheb conv expects N x C x Fin input");
  const std::size_t n = x.dim(0), c = x.dim(1);
  if (x.dim(2) != in_features)
    fail_invalid("cheb conv input features " + std::to_string(x.dim(2)) +
                 " != configured " + std::to_string(in_features));
  if (ltilde.rank() != 2 || ltilde.dim(0) != c || ltilde.dim(1) != c)
    fail_invalid("rescaled Laplacian shape " + ltilde.shape_str() +
                 " does not match node count " + std::to_string(c));
  Tensor y({n, c, out_features});
  std::vector<std::vector<double>> z;
  std::vector<double> tmp(c * out_features);
  for (std::size_t in = 0; in < n; ++in) {
    cheb_basis(ltilde, x.data() + in * c * in_features, c, in_features, order,
               z);
    double* out = y.data() + in * c * out_features;
    for (std::size_t k = 0; k < order; ++k) {
      matmul(z[k].data(), theta.data() + k * in_features * out_features,
             tmp.data(), c, in_features, out_features);
      for (std::size_t i = 0; i < c * out_features; ++i) out[i] += tmp[i];
    }
  }
  return y;
}

Tensor ChebConv::backward(const Tensor& x, const Tensor& ltilde,
                          const Tensor& gout, Tensor* dltilde) {
  const std::size_t n = x.dim(0), c = x.dim(1);
  Tensor dx({n, c, in_features});
  std::vector<std::vector<double>> z;
  // u_k = dS/dz_k, computed by the reverse recurrence
  // u_k = g theta_k^T + c_{k+1} L u_{k+1} - u_{k+2}, c_1 = 1, c_k = 2 (k>=2).
  std::vector<std::vector<double>> u(order, std::vector<double>(c * in_features));
  std::vector<double> lu(c * in_features);
  for (std::size_t in = 0; in < n; ++in) {
    const double* h = x.data() + in * c * in_features;
    const double* g = gout.data() + in * c * out_features;
    cheb_basis(ltilde, h, c, in_features, order, z);
    for (std::size_t k = 0; k < order; ++k) {
      // dTheta_k += z_k^T g
      double* gt = grad_theta.data() + k * in_features * out_features;
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double* zrow = z[k].data() + ci * in_features;
        const double* grow = g + ci * out_features;
        for (std::size_t a = 0; a < in_features; ++a) {
          double zv = zrow[a];
          double* trow = gt + a * out_features;
          for (std::size_t b = 0; b < out_features; ++b)
            trow[b] += zv * grow[b];
        }
      }
    }
    for (std::size_t kk = order; kk-- > 0;) {
      // direct term g theta_k^T
      matmul_a_bt(g, theta.data() + kk * in_features * out_features,
                  u[kk].data(), c, out_features, in_features);
      if (kk + 1 < order) {
        const double ck = (kk + 1 >= 2) ? 2.0 : 1.0;
        matmul(ltilde.data(), u[kk + 1].data(), lu.data(), c, c, in_features);
        for (std::size_t i = 0; i < c * in_features; ++i)
          u[kk][i] += ck * lu[i];
      }
      if (kk + 2 < order)
        for (std::size_t i = 0; i < c * in_features; ++i)
          u[kk][i] -= u[kk + 2][i];
    }
    std::copy(u[0].begin(), u[0].end(), dx.data() + in * c * in_features);
    if (dltilde) {
      // dL += sum_m c_m u_m z_{m-1}^T
      for (std::size_t mth = 1; mth < order; ++mth) {
        const double cm = (mth >= 2) ? 2.0 : 1.0;
        for (std::size_t i = 0; i < c; ++i) {
          const double* urow = u[mth].data() + i * in_features;
          for (std::size_t j = 0; j < c; ++j) {
            const double* zrow = z[mth - 1].data() + j * in_features;
            double acc = 0.0;
            for (std::size_t a = 0; a < in_features; ++a)
              acc += urow[a] * zrow[a];
            dltilde->at2(i, j) += cm * acc;
          }
        }
      }
    }
  }
  return dx;
}

std::vector<ParamRef> ChebConv::params() {
  return {{"cheb_conv.theta", &theta, &grad_theta}};
}

// ---------------------------------------------------------------------------
// Linear

void Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  weight = Tensor({out, in});
  bias = Tensor({out});
  glorot_uniform(weight, in, out, rng);
  grad_weight = Tensor::zeros_like(weight);
  grad_bias = Tensor::zeros_like(bias);
}

Tensor Linear::forward(const Tensor& x) const {
  const std::size_t n = x.dim(0), in = weight.dim(1), out = weight.dim(0);
  if (x.rank() != 2 || x.dim(1) != in)
    fail_invalid("linear layer input shape " + x.shape_str());
  Tensor y({n, out});
  matmul_a_bt(x.data(), weight.data(), y.data(), n, in, out);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out; ++o) y.at2(i, o) += bias[o];
  return y;
}

Tensor Linear::backward(const Tensor& x, const Tensor& gout) {
  const std::size_t n = x.dim(0), in = weight.dim(1), out = weight.dim(0);
  Tensor dw({out, in});
  matmul_at_b(gout.data(), x.data(), dw.data(), out, n, in);
  for (std::size_t i = 0; i < dw.size(); ++i) grad_weight[i] += dw[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out; ++o) grad_bias[o] += gout.at2(i, o);
  Tensor dx({n, in});
  matmul(gout.data(), weight.data(), dx.data(), n, out, in);
  return dx;
}

std::vector<ParamRef> Linear::params() {
  return {{"linear.weight", &weight, &grad_weight},
          {"linear.bias", &bias, &grad_bias}};
}

// ---------------------------------------------------------------------------
// Pooling / activations / dropout

Tensor avg_pool_forward(const Tensor& x, std::size_t window) {
  if (window == 0) fail_invalid("pool window must be >= 1");
  const std::size_t t = x.dim(x.rank() - 1);
  const std::size_t t2 = t / window;
  if (t2 == 0) fail_invalid("pool window longer than axis");
  auto shape = x.shape();
  shape.back() = t2;
  Tensor y(shape);
  const std::size_t rows = x.size() / t;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* p = x.data() + r * t;
    double* q = y.data() + r * t2;
    for (std::size_t o = 0; o < t2; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < window; ++i) acc += p[o * window + i];
      q[o] = acc / static_cast<double>(window);
    }
  }
  return y;
}

Tensor avg_pool_backward(const Tensor& x, const Tensor& gout,
                         std::size_t window) {
  const std::size_t t = x.dim(x.rank() - 1);
  const std::size_t t2 = t / window;
  Tensor dx = Tensor::zeros_like(x);
  const std::size_t rows = x.size() / t;
  const double inv = 1.0 / static_cast<double>(window);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = gout.data() + r * t2;
    double* d = dx.data() + r * t;
    for (std::size_t o = 0; o < t2; ++o)
      for (std::size_t i = 0; i < window; ++i) d[o * window + i] = g[o] * inv;
  }
  return dx;
}

Tensor global_avg_pool_forward(const Tensor& x) {
  if (x.rank() != 3) fail_invalid("global pool expects N x C x F input");
  const std::size_t n = x.dim(0), c = x.dim(1), f = x.dim(2);
  Tensor y({n, f});
  for (std::size_t in = 0; in < n; ++in)
    for (std::size_t ci = 0; ci < c; ++ci) {
      const double* p = x.data() + (in * c + ci) * f;
      for (std::size_t fi = 0; fi < f; ++fi) y.at2(in, fi) += p[fi];
    }
  const double inv = 1.0 / static_cast<double>(c);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= inv;
  return y;
}

Tensor global_avg_pool_backward(const Tensor& x, const Tensor& gout) {
  const std::size_t n = x.dim(0), c = x.dim(1), f = x.dim(2);
  Tensor dx({n, c, f});
  const double inv = 1.0 / static_cast<double>(c);
  for (std::size_t in = 0; in < n; ++in)
    for (std::size_t ci = 0; ci < c; ++ci) {
      double* d = dx.data() + (in * c + ci) * f;
      for (std::size_t fi = 0; fi < f; ++fi) d[fi] = gout.at2(in, fi) * inv;
    }
  return dx;
}

Tensor softplus_forward(const Tensor& x) {
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = y[i];
    // log(1 + e^v) without overflow on either tail
    y[i] = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
  }
  return y;
}

Tensor softplus_backward(const Tensor& x, const Tensor& gout) {
  Tensor dx = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x[i];
    double sig = v > 0.0 ? 1.0 / (1.0 + std::exp(-v))
                         : std::exp(v) / (1.0 + std::exp(v));
    dx[i] = gout[i] * sig;
  }
  return dx;
}

Tensor dropout_mask(const std::vector<std::size_t>& shape, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) fail_invalid("dropout p must be in [0, 1)");
  Tensor mask(shape);
  const double keep = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = rng.uniform01() < p ? 0.0 : keep;
  return mask;
}

// ---------------------------------------------------------------------------
// Loss

CeResult weighted_cross_entropy(const Tensor& logits,
                                const std::vector<int>& labels,
                                const std::array<double, 2>& class_weights) {
  if (logits.rank() != 2 || logits.dim(1) != 2)
    fail_invalid("cross entropy expects N x 2 logits");
  const std::size_t n = logits.dim(0);
  if (n == 0) fail_invalid("cross entropy on an empty batch");
  if (labels.size() != n) fail_invalid("labels/logits size mismatch");
  if (class_weights[0] < 0.0 || class_weights[1] < 0.0)
    fail_invalid("class weights must be nonnegative");

  CeResult r;
  r.probs = Tensor({n, 2});
  r.dlogits = Tensor({n, 2});
  double weight_sum = 0.0, loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int y = labels[i];
    if (y != 0 && y != 1) fail_invalid("label must be 0 or 1");
    double a = logits.at2(i, 0), b = logits.at2(i, 1);
    double mx = std::max(a, b);
    double ea = std::exp(a - mx), eb = std::exp(b - mx);
    double z = ea + eb;
    r.probs.at2(i, 0) = ea / z;
    r.probs.at2(i, 1) = eb / z;
    double w = class_weights[static_cast<std::size_t>(y)];
    weight_sum += w;
    double logp = (y == 0 ? a : b) - mx - std::log(z);
    loss_sum += -w * logp;
  }
  if (weight_sum == 0.0) {
    r.loss = 0.0;  // every sample weighted out
    return r;
  }
  r.loss = loss_sum / weight_sum;
  for (std::size_t i = 0; i < n; ++i) {
    int y = labels[i];
    double w = class_weights[static_cast<std::size_t>(y)] / weight_sum;
    r.dlogits.at2(i, 0) = w * (r.probs.at2(i, 0) - (y == 0 ? 1.0 : 0.0));
    r.dlogits.at2(i, 1) = w * (r.probs.at2(i, 1) - (y == 1 ? 1.0 : 0.0));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Gradient checking

namespace {
double rel_error(double a, double b) {
  double diff = std::abs(a - b);
  if (diff < 1e-7) return 0.0;  // both effectively zero
  return diff / std::max(std::abs(a), std::abs(b));
}
}  // namespace

double grad_check(GradCheckTarget target, const Tensor& input, double eps,
                  Rng& rng) {
  Tensor out = target.forward(input);
  Tensor cotangent = Tensor::zeros_like(out);
  for (std::size_t i = 0; i < cotangent.size(); ++i)
    cotangent[i] = rng.uniform(-1.0, 1.0);

  auto objective = [&](const Tensor& x) {
    Tensor y = target.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * cotangent[i];
    return s;
  };

  for (auto& p : target.params) p.grad->zero();
  Tensor dx = target.backward(input, cotangent);

  double worst = 0.0;
  Tensor probe = input;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    double keep = probe[i];
    probe[i] = keep + eps;
    double fp = objective(probe);
    probe[i] = keep - eps;
    double fm = objective(probe);
    probe[i] = keep;
    worst = std::max(worst, rel_error(dx[i], (fp - fm) / (2.0 * eps)));
  }
  for (auto& p : target.params) {
    Tensor& v = *p.value;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double keep = v[i];
      v[i] = keep + eps;
      double fp = objective(input);
      v[i] = keep - eps;
      double fm = objective(input);
      v[i] = keep;
      worst = std::max(worst, rel_error((*p.grad)[i], (fp - fm) / (2.0 * eps)));
    }
  }
  return worst;
}

}  // namespace ng
