#ifndef NEUROGRAPH_DATA_HPP
#define NEUROGRAPH_DATA_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "neurograph/layout.hpp"
#include "neurograph/rng.hpp"
#include "neurograph/tensor.hpp"

namespace ng {

enum class Group : std::uint8_t {
  FirstLeft = 0,
  FirstRight = 1,
  SecondLeft = 2,
  SecondRight = 3,
};

const char* group_name(Group g);
Group parse_group(const std::string& name);  // case-insensitive

// Pretraining source selection: the two groups on the opposite pocket side,
// or the two groups from the opposite round.
enum class PretrainScheme { round, pocket };
PretrainScheme parse_scheme(const std::string& name);
const char* scheme_name(PretrainScheme s);
std::array<Group, 2> pretrain_sources(Group target, PretrainScheme scheme);

struct TrialEpoch {
  Tensor signal;  // C x T
  int label = 0;  // previous-trial outcome: 1 = success, 0 = failure
  std::uint16_t participant = 0;
  Group group = Group::FirstLeft;
  double angular_error_deg = 0.0;  // previous trial, signed, 0 = perfect
  std::uint16_t block_index = 0;
  std::uint16_t trial_index = 0;  // within-block ordinal; 0 marks block-first
};

struct EpochDataset {
  std::vector<TrialEpoch> epochs;
  double fs = 256.0;
  ChannelLayout layout;

  std::size_t channel_count() const { return layout.count(); }
  std::size_t window_samples() const;
  void validate() const;  // shared C, T, finite signals, sane labels
};

// Narrowband component mixed into a label/group combination.
struct SignatureSpec {
  std::vector<double> channel_weights;  // length C, nonnegative, not all zero
  double band_center_hz = 10.0;
  double band_width_hz = 2.0;
  double amplitude = 0.0;  // RMS of the planted oscillation
};

struct SyntheticSpec {
  std::size_t n_participants = 10;  // per group
  std::size_t trials_per_participant = 24;
  double fs = 256.0;
  double window_seconds = 2.0;
  ChannelLayout layout;  // default_layout12() when left empty
  // signature[group][label]
  std::array<std::array<SignatureSpec, 2>, 4> signature;
  double noise_exponent = 1.0;  // 1/f^beta shaping of the unit-variance bed
  double noise_floor = 0.5;     // extra white-noise stdev
  double funnel_halfwidth_deg = 3.0;
  std::uint64_t seed = 0;
  std::vector<Group> groups = {Group::FirstLeft, Group::FirstRight,
                               Group::SecondLeft, Group::SecondRight};

  void validate() const;
};

// Default desk-scale spec: every group shares the signature band, each has
// its own 4-channel set (overlapping ring), success plants the oscillation
// and failure does not. Amplitude tuned for a learnable-but-noisy task.
SyntheticSpec default_synthetic_spec();
// The 4 signature channels of a group under the default spec.
std::array<std::size_t, 4> default_signature_channels(Group g);

// 1/f-shaped noise plus planted signatures; deterministic per seed, exactly
// balanced labels per participant when trials_per_participant is even.
EpochDataset generate_synthetic(const SyntheticSpec& spec);

// The funnel + margin exclusion, block-first removal, and majority-class
// pruning, pooled per group (or per participant when per_participant).
EpochDataset balance_dataset(const EpochDataset& ds,
                             double funnel_halfwidth_deg,
                             double margin_deg = 2.0,
                             bool per_participant = false);

// NGEP binary container; save/load round-trips bit-exactly.
void save_epochs(const EpochDataset& ds, const std::string& path);
EpochDataset load_epochs(const std::string& path);

// CSV interoperability import: one row per time sample, wide channel
// columns, preceded by an epoch/metadata prefix (see README).
EpochDataset load_epochs_csv(const std::string& path,
                             const ChannelLayout& layout, double fs);

// Epoch indices belonging to one group / set of groups.
std::vector<std::size_t> indices_of_group(const EpochDataset& ds, Group g);
EpochDataset subset(const EpochDataset& ds,
                    const std::vector<std::size_t>& indices);

}  // namespace ng

#endif
