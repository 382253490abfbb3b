#ifndef NEUROGRAPH_TRAINER_HPP
#define NEUROGRAPH_TRAINER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "neurograph/data.hpp"
#include "neurograph/model.hpp"

namespace ng {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-4;
  std::size_t epochs = 150;  // fine-tune default; pretraining runs use 200
  double weight_decay = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool freeze_batchnorm = false;
  std::vector<std::size_t> checkpoint_epochs = {10, 20, 50, 150};

  void validate() const;
};

struct Metrics {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  // confusion[true][pred], class 0 = failure, 1 = success (positive)
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  bool degenerate = false;  // some ratio had a zero denominator
};

Metrics metrics_from_confusion(
    const std::array<std::array<std::size_t, 2>, 2>& confusion);

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;

  // Partition, fold sizes within 1, per-fold class count within one sample
  // of the proportional share, per-participant spread within 1.
  void validate(const EpochDataset& ds) const;
};

// Participant-stratified, class-balanced folds. Each participant's epochs
// are dealt to consecutive folds from a single rotating cursor (optimal
// per-participant spread, sizes within 1) while a per-position greedy picks
// which label to emit against the global per-fold label targets.
FoldPlan make_folds(const EpochDataset& ds, std::size_t k, std::uint64_t seed);

// N / (2 * count_c) over the given epochs.
std::array<double, 2> inverse_frequency_weights(
    const EpochDataset& ds, const std::vector<std::size_t>& indices);

class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<ParamRef> params, const TrainConfig& cfg);
  // Adds weight_decay * theta to the gradient, then the bias-corrected
  // moment update. Throws naming the tensor on a non-finite gradient.
  void step();

 private:
  std::vector<ParamRef> params_;
  std::vector<Tensor> m_, v_;
  double lr_, b1_, b2_, eps_, wd_;
  std::size_t t_ = 0;
};

struct EpochStat {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainHooks {
  // (dataset index, training phase) for every epoch access; leakage tests
  // assert held-out indices never appear with training=true.
  std::function<void(std::size_t, bool)> on_access;
  // called after each epoch listed in checkpoint_epochs
  std::function<void(std::size_t, const GnnClassifier&)> on_checkpoint;
  // cross_validate forwards checkpoints here with the fold index
  std::function<void(std::size_t, std::size_t, const GnnClassifier&)>
      on_fold_checkpoint;
};

// Minibatch Adam over the listed epochs; class weights from those epochs
// only. Returns per-epoch history.
std::vector<EpochStat> train_model(GnnClassifier& model,
                                   const EpochDataset& ds,
                                   const std::vector<std::size_t>& train_idx,
                                   const TrainConfig& cfg,
                                   const TrainHooks* hooks = nullptr);

Metrics evaluate(const GnnClassifier& model, const EpochDataset& ds,
                 const std::vector<std::size_t>& indices,
                 const TrainHooks* hooks = nullptr);
Metrics evaluate(const GnnClassifier& model, const EpochDataset& ds);

struct FoldResult {
  Metrics metrics;
  std::vector<EpochStat> history;
};

struct CvResult {
  FoldPlan plan;
  std::vector<FoldResult> folds;
  Metrics mean;   // scalar metrics averaged, confusion summed
  Metrics stdev;  // population stdev of the scalar metrics
};

// Fresh model per fold (or a copy of init when given), trained on the other
// k-1 folds, evaluated on the held-out fold. Fold seeds derive from
// cfg.seed and the fold index; folds may run on `jobs` threads.
CvResult cross_validate(const EpochDataset& ds, const ArchConfig& arch,
                        double radius_fraction, const TrainConfig& cfg,
                        std::size_t k, const GnnClassifier* init = nullptr,
                        std::size_t jobs = 1,
                        const TrainHooks* hooks = nullptr);

struct PretrainResult {
  GnnClassifier model;
  std::vector<EpochStat> history;
};

// Trains a fresh model on the two groups opposite to `target` under the
// given scheme. Rejects an empty source and participant overlap between
// source and target.
PretrainResult pretrain(const EpochDataset& ds, Group target,
                        PretrainScheme scheme, const ArchConfig& arch,
                        double radius_fraction, const TrainConfig& cfg,
                        const TrainHooks* hooks = nullptr);

}  // namespace ng

#endif
