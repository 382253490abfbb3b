#include "neurograph/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "neurograph/error.hpp"
#include "neurograph/graph.hpp"

namespace ng {

void TrainConfig::validate() const {
  if (batch_size < 2) fail_invalid("batch_size must be >= 2");
  if (learning_rate <= 0.0) fail_invalid("learning_rate must be positive");
  if (weight_decay < 0.0) fail_invalid("weight_decay must be >= 0");
  if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 ||
      adam_beta2 >= 1.0)
    fail_invalid("adam betas must be in (0, 1)");
  if (adam_eps <= 0.0) fail_invalid("adam_eps must be positive");
}

Metrics metrics_from_confusion(
    const std::array<std::array<std::size_t, 2>, 2>& confusion) {
  Metrics m;
  m.confusion = confusion;
  const double tn = static_cast<double>(confusion[0][0]);
  const double fp = static_cast<double>(confusion[0][1]);
  const double fn = static_cast<double>(confusion[1][0]);
  const double tp = static_cast<double>(confusion[1][1]);
  const double total = tn + fp + fn + tp;
  if (total == 0.0) fail_invalid("metrics on an empty evaluation set");
  m.accuracy = (tp + tn) / total;
  if (tp + fp > 0.0)
    m.precision = tp / (tp + fp);
  else
    m.degenerate = true;
  if (tp + fn > 0.0)
    m.recall = tp / (tp + fn);
  else
    m.degenerate = true;
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else
    m.degenerate = true;
  return m;
}

// ---------------------------------------------------------------------------
// Folds

void FoldPlan::validate(const EpochDataset& ds) const {
  const std::size_t n = ds.epochs.size();
  std::vector<char> seen(n, 0);
  std::size_t total = 0, min_size = n, max_size = 0;
  for (const auto& fold : folds) {
    min_size = std::min(min_size, fold.size());
    max_size = std::max(max_size, fold.size());
    for (std::size_t idx : fold) {
      if (idx >= n) fail_invalid("fold index out of range");
      if (seen[idx]) fail_invalid("fold plan repeats an epoch");
      seen[idx] = 1;
      ++total;
    }
  }
  if (total != n) fail_invalid("fold plan does not cover the dataset");
  if (max_size > min_size + 1) fail_invalid("fold sizes differ by more than 1");

  std::size_t n1 = 0;
  for (const auto& e : ds.epochs) n1 += e.label == 1 ? 1 : 0;
  for (const auto& fold : folds) {
    std::size_t f1 = 0;
    for (std::size_t idx : fold) f1 += ds.epochs[idx].label == 1 ? 1 : 0;
    double share = static_cast<double>(n1) *
                   static_cast<double>(fold.size()) / static_cast<double>(n);
    if (std::abs(static_cast<double>(f1) - share) > 1.0 + 1e-9)
      fail_invalid("fold class count off by more than one sample");
  }

  std::map<std::uint16_t, std::vector<std::size_t>> per_participant;
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (std::size_t idx : folds[f]) {
      auto& counts = per_participant[ds.epochs[idx].participant];
      counts.resize(folds.size(), 0);
      ++counts[f];
    }
  // spread 1 is optimal; the class-balance constraint may cost one more
  for (auto& [participant, counts] : per_participant) {
    counts.resize(folds.size(), 0);
    auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    if (*hi - *lo > 2)
      fail_invalid("participant " + std::to_string(participant) +
                   " unevenly spread across folds");
  }
}

FoldPlan make_folds(const EpochDataset& ds, std::size_t k,
                    std::uint64_t seed) {
  ds.validate();
  const std::size_t n = ds.epochs.size();
  if (k < 2) fail_invalid("fold count must be >= 2");
  if (k > n)
    fail_invalid("fold count " + std::to_string(k) + " exceeds epoch count " +
                 std::to_string(n));

  Rng rng(Rng::mix(seed ^ 0x666f6c6473ULL));  // "folds"
  std::map<std::uint16_t, std::array<std::vector<std::size_t>, 2>> cells;
  for (std::size_t i = 0; i < n; ++i)
    cells[ds.epochs[i].participant][ds.epochs[i].label == 1 ? 1 : 0]
        .push_back(i);

  std::vector<std::uint16_t> order;
  for (auto& [p, _] : cells) order.push_back(p);
  rng.shuffle(order);

  std::size_t n1 = 0;
  for (const auto& e : ds.epochs) n1 += e.label == 1 ? 1 : 0;
  const double target1 = static_cast<double>(n1) / static_cast<double>(k);
  const double target0 =
      static_cast<double>(n - n1) / static_cast<double>(k);

  FoldPlan plan;
  plan.folds.assign(k, {});
  std::vector<std::array<double, 2>> label_count(k, {0.0, 0.0});
  std::size_t cursor = 0;
  for (std::uint16_t p : order) {
    auto& cell = cells[p];
    rng.shuffle(cell[0]);
    rng.shuffle(cell[1]);
    std::size_t rem0 = cell[0].size(), rem1 = cell[1].size();
    while (rem0 + rem1 > 0) {
      const std::size_t f = cursor % k;
      ++cursor;
      int pick;
      if (rem0 == 0) {
        pick = 1;
      } else if (rem1 == 0) {
        pick = 0;
      } else {
        const double deficit0 = target0 - label_count[f][0];
        const double deficit1 = target1 - label_count[f][1];
        pick = deficit1 >= deficit0 ? 1 : 0;  // success wins exact ties
      }
      std::size_t idx = pick == 1 ? cell[1][cell[1].size() - rem1--]
                                  : cell[0][cell[0].size() - rem0--];
      plan.folds[f].push_back(idx);
      label_count[f][pick] += 1.0;
    }
  }

  // Single-label participants can force picks that push a fold more than one
  // sample off its class share. Repair by swapping a label-1 epoch from the
  // most-over fold with a label-0 epoch from the most-under fold: sizes are
  // untouched, and same-participant pairs are preferred so spreads stay
  // tight.
  auto label_of = [&](std::size_t idx) {
    return ds.epochs[idx].label == 1 ? 1 : 0;
  };
  const double dn = static_cast<double>(n);
  for (std::size_t iter = 0; iter < n; ++iter) {
    double max_dev = -1e18, min_dev = 1e18;
    std::size_t fmax = 0, fmin = 0;
    for (std::size_t f = 0; f < k; ++f) {
      double c1 = 0.0;
      for (std::size_t idx : plan.folds[f]) c1 += label_of(idx);
      double dev = c1 - static_cast<double>(n1) *
                            static_cast<double>(plan.folds[f].size()) / dn;
      if (dev > max_dev) {
        max_dev = dev;
        fmax = f;
      }
      if (dev < min_dev) {
        min_dev = dev;
        fmin = f;
      }
    }
    if (max_dev <= 1.0 + 1e-9 && min_dev >= -1.0 - 1e-9) break;
    std::ptrdiff_t a = -1, b = -1;
    for (std::size_t pos = 0; pos < plan.folds[fmax].size() && a < 0; ++pos) {
      std::size_t idx = plan.folds[fmax][pos];
      if (label_of(idx) != 1) continue;
      for (std::size_t qos = 0; qos < plan.folds[fmin].size(); ++qos) {
        std::size_t jdx = plan.folds[fmin][qos];
        if (label_of(jdx) != 0) continue;
        if (ds.epochs[jdx].participant != ds.epochs[idx].participant) continue;
        a = static_cast<std::ptrdiff_t>(pos);
        b = static_cast<std::ptrdiff_t>(qos);
        break;
      }
    }
    if (a < 0) {
      for (std::size_t pos = 0; pos < plan.folds[fmax].size() && a < 0; ++pos)
        if (label_of(plan.folds[fmax][pos]) == 1)
          a = static_cast<std::ptrdiff_t>(pos);
      for (std::size_t qos = 0; qos < plan.folds[fmin].size() && b < 0; ++qos)
        if (label_of(plan.folds[fmin][qos]) == 0)
          b = static_cast<std::ptrdiff_t>(qos);
    }
    if (a < 0 || b < 0) break;
    std::swap(plan.folds[fmax][static_cast<std::size_t>(a)],
              plan.folds[fmin][static_cast<std::size_t>(b)]);
  }
  return plan;
}

std::array<double, 2> inverse_frequency_weights(
    const EpochDataset& ds, const std::vector<std::size_t>& indices) {
  std::array<std::size_t, 2> counts{0, 0};
  for (std::size_t i : indices)
    ++counts[ds.epochs.at(i).label == 1 ? 1 : 0];
  if (counts[0] == 0 || counts[1] == 0)
    fail_invalid("class weights need both classes present in training data");
  const double n = static_cast<double>(indices.size());
  return {n / (2.0 * static_cast<double>(counts[0])),
          n / (2.0 * static_cast<double>(counts[1]))};
}

// ---------------------------------------------------------------------------
// Adam

AdamOptimizer::AdamOptimizer(std::vector<ParamRef> params,
                             const TrainConfig& cfg)
    : params_(std::move(params)),
      lr_(cfg.learning_rate),
      b1_(cfg.adam_beta1),
      b2_(cfg.adam_beta2),
      eps_(cfg.adam_eps),
      wd_(cfg.weight_decay) {
  cfg.validate();
  for (auto& p : params_) {
    m_.push_back(Tensor::zeros_like(*p.value));
    v_.push_back(Tensor::zeros_like(*p.value));
  }
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& theta = *params_[pi].value;
    const Tensor& grad = *params_[pi].grad;
    Tensor& m = m_[pi];
    Tensor& v = v_[pi];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      double g = grad[i];
      if (!std::isfinite(g))
        fail_numeric("non-finite gradient in " + params_[pi].name);
      g += wd_ * theta[i];
      m[i] = b1_ * m[i] + (1.0 - b1_) * g;
      v[i] = b2_ * v[i] + (1.0 - b2_) * g * g;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      theta[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

// ---------------------------------------------------------------------------
// Training loop

namespace {
Tensor gather_batch(const EpochDataset& ds,
                    const std::vector<std::size_t>& indices, std::size_t from,
                    std::size_t count, std::vector<int>& labels) {
  const std::size_t c = ds.channel_count(), t = ds.window_samples();
  Tensor batch({count, c, t});
  labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = ds.epochs[indices[from + i]];
    std::copy(e.signal.data(), e.signal.data() + c * t,
              batch.data() + i * c * t);
    labels[i] = e.label;
  }
  return batch;
}
}  // namespace

std::vector<EpochStat> train_model(GnnClassifier& model,
                                   const EpochDataset& ds,
                                   const std::vector<std::size_t>& train_idx,
                                   const TrainConfig& cfg,
                                   const TrainHooks* hooks) {
  cfg.validate();
  if (train_idx.empty()) fail_invalid("empty training set");
  model.set_bn_frozen(cfg.freeze_batchnorm);
  const auto class_weights = inverse_frequency_weights(ds, train_idx);
  AdamOptimizer adam(model.params(), cfg);
  Rng rng(Rng::mix(cfg.seed ^ 0x747261696eULL));  // "train"

  std::vector<EpochStat> history;
  std::vector<std::size_t> shuffled = train_idx;
  std::vector<int> labels;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(shuffled);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t pos = 0;
    while (pos < shuffled.size()) {
      std::size_t count = std::min(cfg.batch_size, shuffled.size() - pos);
      // a trailing singleton would break train-mode batch norm; merge it
      if (shuffled.size() - pos - count == 1) ++count;
      if (count == 1)
        fail_invalid("training needs at least 2 epochs per batch");
      if (hooks && hooks->on_access)
        for (std::size_t i = 0; i < count; ++i)
          hooks->on_access(shuffled[pos + i], true);
      Tensor batch = gather_batch(ds, shuffled, pos, count, labels);
      model.forward_train(batch, rng);
      model.zero_grads();
      double loss = model.backward(labels, class_weights);
      adam.step();
      loss_sum += loss * static_cast<double>(count);
      const Tensor& logits = model.trace().logits;
      for (std::size_t i = 0; i < count; ++i) {
        int pred = logits.at2(i, 1) > logits.at2(i, 0) ? 1 : 0;
        correct += pred == labels[i] ? 1 : 0;
      }
      pos += count;
    }
    EpochStat stat;
    stat.epoch = epoch;
    stat.loss = loss_sum / static_cast<double>(shuffled.size());
    stat.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(shuffled.size());
    if (!std::isfinite(stat.loss)) fail_numeric("non-finite epoch loss");
    history.push_back(stat);
    if (hooks && hooks->on_checkpoint &&
        std::find(cfg.checkpoint_epochs.begin(), cfg.checkpoint_epochs.end(),
                  epoch) != cfg.checkpoint_epochs.end())
      hooks->on_checkpoint(epoch, model);
  }
  return history;
}

Metrics evaluate(const GnnClassifier& model, const EpochDataset& ds,
                 const std::vector<std::size_t>& indices,
                 const TrainHooks* hooks) {
  if (indices.empty()) fail_invalid("evaluate on an empty dataset");
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::vector<int> labels;
  const std::size_t chunk = 64;
  std::size_t pos = 0;
  while (pos < indices.size()) {
    std::size_t count = std::min(chunk, indices.size() - pos);
    if (hooks && hooks->on_access)
      for (std::size_t i = 0; i < count; ++i)
        hooks->on_access(indices[pos + i], false);
    Tensor batch = gather_batch(ds, indices, pos, count, labels);
    Tensor logits = model.forward_eval(batch);
    for (std::size_t i = 0; i < count; ++i) {
      int pred = logits.at2(i, 1) > logits.at2(i, 0) ? 1 : 0;
      ++confusion[static_cast<std::size_t>(labels[i])]
                 [static_cast<std::size_t>(pred)];
    }
    pos += count;
  }
  return metrics_from_confusion(confusion);
}

Metrics evaluate(const GnnClassifier& model, const EpochDataset& ds) {
  std::vector<std::size_t> all(ds.epochs.size());
  std::iota(all.begin(), all.end(), 0);
  return evaluate(model, ds, all);
}

// ---------------------------------------------------------------------------
// Cross-validation

namespace {
Metrics fold_mean(const std::vector<FoldResult>& folds) {
  Metrics m;
  for (const auto& f : folds) {
    m.accuracy += f.metrics.accuracy;
    m.precision += f.metrics.precision;
    m.recall += f.metrics.recall;
    m.f1 += f.metrics.f1;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.confusion[i][j] += f.metrics.confusion[i][j];
    m.degenerate = m.degenerate || f.metrics.degenerate;
  }
  const double k = static_cast<double>(folds.size());
  m.accuracy /= k;
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

Metrics fold_stdev(const std::vector<FoldResult>& folds, const Metrics& mean) {
  Metrics s;
  for (const auto& f : folds) {
    auto acc = [](double& dst, double v, double mu) { dst += (v - mu) * (v - mu); };
    acc(s.accuracy, f.metrics.accuracy, mean.accuracy);
    acc(s.precision, f.metrics.precision, mean.precision);
    acc(s.recall, f.metrics.recall, mean.recall);
    acc(s.f1, f.metrics.f1, mean.f1);
  }
  const double k = static_cast<double>(folds.size());
  s.accuracy = std::sqrt(s.accuracy / k);
  s.precision = std::sqrt(s.precision / k);
  s.recall = std::sqrt(s.recall / k);
  s.f1 = std::sqrt(s.f1 / k);
  return s;
}
}  // namespace

CvResult cross_validate(const EpochDataset& ds, const ArchConfig& arch,
                        double radius_fraction, const TrainConfig& cfg,
                        std::size_t k, const GnnClassifier* init,
                        std::size_t jobs, const TrainHooks* hooks) {
  ds.validate();
  cfg.validate();
  CvResult result;
  result.plan = make_folds(ds, k, cfg.seed);
  result.folds.resize(k);

  WeightedGraph graph = build_adjacency(ds.layout, radius_fraction);
  Rng root(cfg.seed);

  // Every fold starts from one seed-derived initialization (the same
  // derivation pretraining uses, so a zero-epoch pretrain checkpoint is a
  // no-op init) or from the provided pretrained parameters.
  std::optional<GnnClassifier> fresh;
  if (!init) {
    fresh.emplace(graph, arch, root.derive(0x9e7).seed());
    init = &*fresh;
  }

  auto run_fold = [&](std::size_t f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t other = 0; other < k; ++other)
      if (other != f)
        train_idx.insert(train_idx.end(), result.plan.folds[other].begin(),
                         result.plan.folds[other].end());
    std::sort(train_idx.begin(), train_idx.end());

    GnnClassifier model(graph, arch, 0);
    model.copy_params_from(*init);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = root.derive(0x200 + f).seed();
    TrainHooks fold_hooks;
    if (hooks) {
      fold_hooks = *hooks;
      if (hooks->on_fold_checkpoint)
        fold_hooks.on_checkpoint = [hooks, f](std::size_t epoch,
                                              const GnnClassifier& m) {
          hooks->on_fold_checkpoint(f, epoch, m);
        };
    }
    result.folds[f].history =
        train_model(model, ds, train_idx, fold_cfg, hooks ? &fold_hooks : nullptr);
    result.folds[f].metrics =
        evaluate(model, ds, result.plan.folds[f], hooks ? &fold_hooks : nullptr);
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, k));
  if (jobs == 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mu;
    std::exception_ptr first_error;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t f;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= k || first_error) return;
            f = next++;
          }
          try {
            run_fold(f);
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  result.mean = fold_mean(result.folds);
  result.stdev = fold_stdev(result.folds, result.mean);
  return result;
}

// ---------------------------------------------------------------------------
// Pretraining

PretrainResult pretrain(const EpochDataset& ds, Group target,
                        PretrainScheme scheme, const ArchConfig& arch,
                        double radius_fraction, const TrainConfig& cfg,
                        const TrainHooks* hooks) {
  ds.validate();
  auto sources = pretrain_sources(target, scheme);
  std::vector<std::size_t> src_idx;
  std::vector<char> src_participants(65536, 0);
  for (std::size_t i = 0; i < ds.epochs.size(); ++i) {
    const auto& e = ds.epochs[i];
    if (e.group == sources[0] || e.group == sources[1]) {
      src_idx.push_back(i);
      src_participants[e.participant] = 1;
    }
  }
  if (src_idx.empty())
    fail_invalid(std::string("no epochs in pretraining source groups ") +
                 group_name(sources[0]) + " and " + group_name(sources[1]));
  for (const auto& e : ds.epochs)
    if (e.group == target && src_participants[e.participant])
      fail_invalid("participant " + std::to_string(e.participant) +
                   " appears in both the target group and a source group");

  WeightedGraph graph = build_adjacency(ds.layout, radius_fraction);
  Rng root(cfg.seed);
  GnnClassifier model(graph, arch, root.derive(0x9e7).seed());
  PretrainResult result{std::move(model), {}};
  if (cfg.epochs == 0) return result;
  result.history = train_model(result.model, ds, src_idx, cfg, hooks);
  return result;
}

}  // namespace ng
