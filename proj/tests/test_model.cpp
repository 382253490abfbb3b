#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "neurograph/data.hpp"
#include "neurograph/error.hpp"
#include "neurograph/model.hpp"
#include "neurograph/trainer.hpp"

using namespace ng;

namespace {

ArchConfig tiny_arch() {
  ArchConfig a;
  a.fs = 8.0;
  a.window_seconds = 1.5;  // T = 12
  a.kernel = 4;
  a.temporal_filters = 2;
  a.cheb_order = 2;
  a.cheb_features = 3;
  a.pool_window = 2;
  a.dropout = 0.0;
  a.edge_dropout = 0.0;
  return a;
}

ChannelLayout square_layout() {
  ChannelLayout layout;
  layout.head_radius = 2.0;  // keeps the sqrt(2) side pairs within reach
  layout.channels = {{"a", {1.0, 0.0, 0.0}},
                     {"b", {0.0, 1.0, 0.0}},
                     {"c", {-1.0, 0.0, 0.0}},
                     {"d", {0.0, -1.0, 0.0}}};
  return layout;
}

Tensor random_batch(std::size_t n, std::size_t c, std::size_t t, Rng& rng) {
  Tensor x({n, c, t});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x;
}

double sigmoid_like_softplus(double v) {
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

// straight-line eval-mode reference: every stage written out longhand
Tensor reference_forward(GnnClassifier& model, const Tensor& batch) {
  const ArchConfig& a = model.arch();
  const std::size_t n = batch.dim(0), c = batch.dim(1), t = batch.dim(2);
  const std::size_t f = a.temporal_filters, k = a.kernel;
  const std::size_t t1 = t - k + 1, t2 = t1 / a.pool_window;
  const std::size_t fin = f * t2, fout = a.cheb_features;

  // conv + bn(eval) + prelu + pool + flatten
  Tensor h1({n, c, fin});
  for (std::size_t in = 0; in < n; ++in)
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t fi = 0; fi < f; ++fi) {
        std::vector<double> row(t1);
        for (std::size_t o = 0; o < t1; ++o) {
          double acc = model.conv.bias[fi];
          for (std::size_t kk = 0; kk < k; ++kk)
            acc += model.conv.weight.at2(fi, kk) * batch.at3(in, ci, o + kk);
          double bn = (acc - model.bn.running_mean[fi]) /
                          std::sqrt(model.bn.running_var[fi] + model.bn.epsilon) *
                          model.bn.scale[fi] +
                      model.bn.shift[fi];
          row[o] = bn >= 0.0 ? bn : model.act.slope[0] * bn;
        }
        for (std::size_t o = 0; o < t2; ++o) {
          double acc = 0.0;
          for (std::size_t w = 0; w < a.pool_window; ++w)
            acc += row[o * a.pool_window + w];
          h1.at3(in, ci, fi * t2 + o) = acc / static_cast<double>(a.pool_window);
        }
      }

  // chebyshev polynomial stack on the rescaled Laplacian
  const Tensor& lt = model.spectral().rescaled;
  std::vector<Tensor> tk(a.cheb_order, Tensor({c, c}));
  for (std::size_t i = 0; i < c; ++i) tk[0].at2(i, i) = 1.0;
  if (a.cheb_order > 1) tk[1] = lt;
  for (std::size_t kk = 2; kk < a.cheb_order; ++kk)
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < c; ++m)
          acc += lt.at2(i, m) * tk[kk - 1].at2(m, j);
        tk[kk].at2(i, j) = 2.0 * acc - tk[kk - 2].at2(i, j);
      }

  Tensor logits({n, 2});
  for (std::size_t in = 0; in < n; ++in) {
    Tensor h2({c, fout});
    for (std::size_t kk = 0; kk < a.cheb_order; ++kk)
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t o = 0; o < fout; ++o) {
          double acc = 0.0;
          for (std::size_t m = 0; m < c; ++m)
            for (std::size_t q = 0; q < fin; ++q)
              acc += tk[kk].at2(i, m) * h1.at3(in, m, q) *
                     model.cheb.theta[(kk * fin + q) * fout + o];
          h2.at2(i, o) += acc;
        }
    std::vector<double> pooled(fout, 0.0);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t o = 0; o < fout; ++o)
        pooled[o] += sigmoid_like_softplus(h2.at2(i, o));
    for (auto& v : pooled) v /= static_cast<double>(c);
    for (std::size_t o = 0; o < 2; ++o) {
      double acc = model.head.bias[o];
      for (std::size_t q = 0; q < fout; ++q)
        acc += model.head.weight.at2(o, q) * pooled[q];
      logits.at2(in, o) = acc;
    }
  }
  return logits;
}

}  // namespace

TEST_CASE("model: paper-sized batch propagates to finite 4x2 logits") {
  ArchConfig arch;  // defaults: fs 256, 2 s window, kernel 128
  auto graph = build_adjacency(default_layout12(), 0.75);
  GnnClassifier model(graph, arch, 42);
  Rng rng(1);
  Tensor batch = random_batch(4, 12, 512, rng);
  Tensor logits = model.forward_eval(batch);
  REQUIRE(logits.shape() == std::vector<std::size_t>{4, 2});
  CHECK(logits.all_finite());
}

TEST_CASE("model: eval forward is bit-deterministic") {
  auto graph = build_adjacency(square_layout(), 1.0);
  GnnClassifier model(graph, tiny_arch(), 7);
  Rng rng(2);
  Tensor batch = random_batch(3, 4, 12, rng);
  Tensor a = model.forward_eval(batch);
  Tensor b = model.forward_eval(batch);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("model: channel-count mismatch rejected") {
  auto graph = build_adjacency(square_layout(), 1.0);
  GnnClassifier model(graph, tiny_arch(), 7);
  Tensor batch({2, 5, 12});
  CHECK_THROWS_AS(model.forward_eval(batch), Error);
}

TEST_CASE("model: matches the straight-line reference implementation") {
  auto graph = build_adjacency(square_layout(), 1.0);
  GnnClassifier model(graph, tiny_arch(), 99);
  // non-trivial normalization statistics
  Rng stat(3);
  for (std::size_t i = 0; i < model.bn.running_mean.size(); ++i) {
    model.bn.running_mean[i] = stat.uniform(-0.5, 0.5);
    model.bn.running_var[i] = stat.uniform(0.5, 2.0);
    model.bn.scale[i] = stat.uniform(0.5, 1.5);
    model.bn.shift[i] = stat.uniform(-0.5, 0.5);
  }
  Rng rng(4);
  Tensor batch = random_batch(3, 4, 12, rng);
  Tensor got = model.forward_eval(batch);
  Tensor want = reference_forward(model, batch);
  for (std::size_t i = 0; i < got.size(); ++i)
    REQUIRE(std::abs(got[i] - want[i]) < 1e-10);
}

TEST_CASE("model: full-model gradients match finite differences") {
  auto graph = build_adjacency(square_layout(), 1.0);
  GnnClassifier model(graph, tiny_arch(), 5);
  model.bn.track_running = false;
  Rng rng(6);
  Tensor batch = random_batch(3, 4, 12, rng);
  std::vector<int> labels = {0, 1, 1};
  std::array<double, 2> weights{1.0, 1.3};

  auto loss_of = [&](const Tensor& x) {
    ForwardTrace tr;
    Tensor logits = model.forward_with(x, model.spectral().rescaled, nullptr,
                                       true, nullptr, &tr);
    return weighted_cross_entropy(logits, labels, weights).loss;
  };

  ForwardTrace tr;
  model.forward_with(batch, model.spectral().rescaled, nullptr, true, nullptr,
                     &tr);
  model.zero_grads();
  CeResult ce = weighted_cross_entropy(tr.logits, labels, weights);
  model.backprop(tr, ce.dlogits, true, nullptr);

  const double eps = 1e-5;
  double worst = 0.0;
  for (auto& p : model.params()) {
    Tensor& v = *p.value;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double keep = v[i];
      v[i] = keep + eps;
      double fp = loss_of(batch);
      v[i] = keep - eps;
      double fm = loss_of(batch);
      v[i] = keep;
      double numeric = (fp - fm) / (2.0 * eps);
      double analytic = (*p.grad)[i];
      double diff = std::abs(numeric - analytic);
      if (diff >= 1e-7)
        worst = std::max(worst,
                         diff / std::max(std::abs(numeric), std::abs(analytic)));
    }
  }
  // input gradient too
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double keep = batch[i];
    batch[i] = keep + eps;
    double fp = loss_of(batch);
    batch[i] = keep - eps;
    double fm = loss_of(batch);
    batch[i] = keep;
    double numeric = (fp - fm) / (2.0 * eps);
    double analytic = tr.input_grad[i];
    double diff = std::abs(numeric - analytic);
    if (diff >= 1e-7)
      worst = std::max(worst,
                       diff / std::max(std::abs(numeric), std::abs(analytic)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("model: zero class weight annihilates loss and gradients") {
  auto graph = build_adjacency(square_layout(), 1.0);
  GnnClassifier model(graph, tiny_arch(), 8);
  Rng rng(9);
  Tensor batch = random_batch(2, 4, 12, rng);
  model.forward_train(batch, rng);
  model.zero_grads();
  double loss = model.backward({1, 1}, {1.0, 0.0});
  CHECK(loss == 0.0);
  for (auto& p : model.params())
    for (std::size_t i = 0; i < p.grad->size(); ++i)
      REQUIRE((*p.grad)[i] == 0.0);
}

TEST_CASE("model: duplicated sample doubles its gradient contribution") {
  auto graph = build_adjacency(square_layout(), 1.0);
  GnnClassifier model(graph, tiny_arch(), 10);
  model.set_bn_frozen(true);  // per-sample independence needs fixed statistics
  Rng rng(11);
  Tensor a = random_batch(1, 4, 12, rng);
  Tensor b = random_batch(1, 4, 12, rng);
  Tensor ab({2, 4, 12});
  std::copy(a.data(), a.data() + a.size(), ab.data());
  std::copy(b.data(), b.data() + b.size(), ab.data() + a.size());
  Tensor aab({3, 4, 12});
  std::copy(a.data(), a.data() + a.size(), aab.data());
  std::copy(a.data(), a.data() + a.size(), aab.data() + a.size());
  std::copy(b.data(), b.data() + b.size(), aab.data() + 2 * a.size());

  auto grads_scaled = [&](const Tensor& batch, std::vector<int> labels,
                          double scale) {
    Rng r(0);
    model.forward_train(batch, r);
    model.zero_grads();
    model.backward(labels, {1.0, 1.0});
    std::vector<double> flat;
    for (auto& p : model.params())
      for (std::size_t i = 0; i < p.grad->size(); ++i)
        flat.push_back((*p.grad)[i] * scale);
    return flat;
  };

  auto g2 = grads_scaled(ab, {0, 1}, 2.0);
  auto g3 = grads_scaled(aab, {0, 0, 1}, 3.0);
  // batch-mean numerators: 3*g({a,a,b}) - 2*g({a,b}) = g({a}), so the
  // duplicate adds exactly one more copy of a's per-sample gradient
  Tensor aa({2, 4, 12});
  std::copy(a.data(), a.data() + a.size(), aa.data());
  std::copy(a.data(), a.data() + a.size(), aa.data() + a.size());
  auto ga = grads_scaled(aa, {0, 0}, 1.0);  // = g({a}) per sample mean * 1
  for (std::size_t i = 0; i < g2.size(); ++i)
    REQUIRE(g3[i] - g2[i] == doctest::Approx(ga[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("model: graph-consistent channel relabeling leaves logits fixed") {
  auto layout = default_layout12();
  auto graph = build_adjacency(layout, 0.75);
  ArchConfig arch = tiny_arch();
  GnnClassifier model(graph, arch, 12);

  std::vector<std::size_t> perm = {5, 2, 9, 0, 11, 7, 1, 3, 10, 6, 4, 8};
  ChannelLayout permuted;
  permuted.head_radius = layout.head_radius;
  for (std::size_t i : perm) permuted.channels.push_back(layout.channels[i]);
  auto graph2 = build_adjacency(permuted, 0.75);
  GnnClassifier model2(graph2, arch, 12);  // same seed: identical weights

  Rng rng(13);
  Tensor batch = random_batch(3, 12, 12, rng);
  Tensor batch_perm({3, 12, 12});
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t c = 0; c < 12; ++c)
      for (std::size_t t = 0; t < 12; ++t)
        batch_perm.at3(n, c, t) = batch.at3(n, perm[c], t);

  Tensor l1 = model.forward_eval(batch);
  Tensor l2 = model2.forward_eval(batch_perm);
  for (std::size_t i = 0; i < l1.size(); ++i)
    REQUIRE(std::abs(l1[i] - l2[i]) < 1e-9);
}

TEST_CASE("model: zero dropout train forward equals eval forward") {
  auto graph = build_adjacency(square_layout(), 1.0);
  ArchConfig arch = tiny_arch();  // both dropout rates zero
  GnnClassifier model(graph, arch, 14);
  model.set_bn_frozen(true);  // train path then shares the eval statistics
  Rng rng(15);
  Tensor batch = random_batch(4, 4, 12, rng);
  Tensor train_logits = model.forward_train(batch, rng);
  Tensor eval_logits = model.forward_eval(batch);
  for (std::size_t i = 0; i < train_logits.size(); ++i)
    REQUIRE(train_logits[i] == eval_logits[i]);
}

TEST_CASE("model: backward before any train-mode forward rejected") {
  auto graph = build_adjacency(square_layout(), 1.0);
  GnnClassifier model(graph, tiny_arch(), 16);
  CHECK_THROWS_AS(model.backward({0}, {1.0, 1.0}), Error);
}

TEST_CASE("model: overfits a small labeled set within 500 steps") {
  // planted per-label offset on two channels; 64 epochs, batch 32
  Rng rng(17);
  auto layout = square_layout();
  EpochDataset ds;
  ds.fs = 8.0;
  ds.layout = layout;
  for (int i = 0; i < 64; ++i) {
    TrialEpoch e;
    e.label = i % 2;
    e.participant = static_cast<std::uint16_t>(i % 4);
    e.group = Group::FirstLeft;
    e.trial_index = static_cast<std::uint16_t>(1 + i / 4);
    e.angular_error_deg = e.label ? 1.0 : 8.0;
    e.signal = Tensor({std::size_t{4}, std::size_t{12}});
    for (std::size_t s = 0; s < e.signal.size(); ++s)
      e.signal[s] = rng.normal(0.0, 0.3);
    if (e.label == 1)
      for (std::size_t t = 0; t < 12; ++t) {
        e.signal.at2(0, t) += 1.0;
        e.signal.at2(1, t) -= 1.0;
      }
    ds.epochs.push_back(std::move(e));
  }
  auto graph = build_adjacency(layout, 1.0);
  GnnClassifier model(graph, tiny_arch(), 18);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.learning_rate = 5e-3;
  cfg.weight_decay = 0.0;
  cfg.epochs = 250;  // 2 steps per epoch = 500 Adam steps
  cfg.seed = 19;
  cfg.checkpoint_epochs = {};
  std::vector<std::size_t> idx(ds.epochs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  train_model(model, ds, idx, cfg);
  Metrics m = evaluate(model, ds);
  CHECK(m.accuracy >= 0.95);
}

TEST_CASE("model: checkpoint round-trip is bit-exact") {
  auto graph = build_adjacency(default_layout12(), 0.75);
  GnnClassifier model(graph, tiny_arch(), 20);
  Rng rng(21);
  // perturb state so the file is not all-initial
  for (auto& p : model.params())
    for (std::size_t i = 0; i < p.value->size(); ++i)
      (*p.value)[i] += rng.uniform(-0.1, 0.1);

  std::string p1 = "/tmp/ng_test_ckpt1.ngrf";
  std::string p2 = "/tmp/ng_test_ckpt2.ngrf";
  save_checkpoint(model, p1);
  GnnClassifier loaded = load_checkpoint(p1);
  save_checkpoint(loaded, p2);

  auto slurp = [](const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  CHECK(slurp(p1) == slurp(p2));
  CHECK(model.param_checksum() == loaded.param_checksum());

  Rng brng(22);
  Tensor batch = random_batch(2, 12, 12, brng);
  Tensor a = model.forward_eval(batch);
  Tensor b = loaded.forward_eval(batch);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}
