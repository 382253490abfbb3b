#include "neurograph/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "neurograph/binio.hpp"
#include "neurograph/error.hpp"

namespace ng {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

const char* group_name(Group g) {
  switch (g) {
    case Group::FirstLeft: return "FirstLeft";
    case Group::FirstRight: return "FirstRight";
    case Group::SecondLeft: return "SecondLeft";
    case Group::SecondRight: return "SecondRight";
  }
  return "?";
}

Group parse_group(const std::string& name) {
  std::string n = lower(name);
  if (n == "firstleft" || n == "first_left") return Group::FirstLeft;
  if (n == "firstright" || n == "first_right") return Group::FirstRight;
  if (n == "secondleft" || n == "second_left") return Group::SecondLeft;
  if (n == "secondright" || n == "second_right") return Group::SecondRight;
  fail_invalid("unknown group: " + name);
}

PretrainScheme parse_scheme(const std::string& name) {
  std::string n = lower(name);
  if (n == "round") return PretrainScheme::round;
  if (n == "pocket") return PretrainScheme::pocket;
  fail_invalid("unknown pretraining scheme: " + name +
               " (expected round or pocket)");
}

const char* scheme_name(PretrainScheme s) {
  return s == PretrainScheme::round ? "round" : "pocket";
}

std::array<Group, 2> pretrain_sources(Group target, PretrainScheme scheme) {
  const bool first = target == Group::FirstLeft || target == Group::FirstRight;
  const bool left = target == Group::FirstLeft || target == Group::SecondLeft;
  if (scheme == PretrainScheme::round) {
    // opposite round, both pockets
    return first ? std::array{Group::SecondLeft, Group::SecondRight}
                 : std::array{Group::FirstLeft, Group::FirstRight};
  }
  // opposite pocket, both rounds
  return left ? std::array{Group::FirstRight, Group::SecondRight}
              : std::array{Group::FirstLeft, Group::SecondLeft};
}

std::size_t EpochDataset::window_samples() const {
  if (epochs.empty()) return 0;
  return epochs.front().signal.dim(1);
}

void EpochDataset::validate() const {
  layout.validate();
  if (fs <= 0.0) fail_invalid("dataset fs must be positive");
  const std::size_t c = layout.count();
  std::size_t t = 0;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& e = epochs[i];
    if (e.signal.rank() != 2 || e.signal.dim(0) != c)
      fail_invalid("epoch " + std::to_string(i) + " has wrong channel count");
    if (i == 0)
      t = e.signal.dim(1);
    else if (e.signal.dim(1) != t)
      fail_invalid("epoch " + std::to_string(i) + " window length " +
                   std::to_string(e.signal.dim(1)) +
                   " differs from first epoch length " + std::to_string(t));
    if (e.label != 0 && e.label != 1)
      fail_invalid("epoch " + std::to_string(i) + " label must be 0 or 1");
    if (!e.signal.all_finite())
      fail_invalid("epoch " + std::to_string(i) + " has non-finite samples");
  }
}

// ---------------------------------------------------------------------------
// Synthetic generator

void SyntheticSpec::validate() const {
  if (n_participants < 1) fail_invalid("n_participants must be >= 1");
  if (trials_per_participant < 1)
    fail_invalid("trials_per_participant must be >= 1");
  if (fs <= 0.0) fail_invalid("fs must be positive");
  if (window_seconds <= 0.0) fail_invalid("window_seconds must be positive");
  if (noise_floor < 0.0) fail_invalid("noise_floor must be >= 0");
  if (funnel_halfwidth_deg <= 0.0)
    fail_invalid("funnel_halfwidth_deg must be positive");
  if (groups.empty()) fail_invalid("at least one group required");
  layout.validate();
  const std::size_t c = layout.count();
  for (const auto& per_group : signature) {
    for (const auto& sig : per_group) {
      if (sig.channel_weights.size() != c)
        fail_invalid("signature channel weights must have one entry per channel");
      double total = 0.0;
      for (double w : sig.channel_weights) {
        if (w < 0.0) fail_invalid("signature channel weights must be >= 0");
        total += w;
      }
      if (total == 0.0) fail_invalid("signature channel weights all zero");
      if (sig.amplitude < 0.0) fail_invalid("signature amplitude must be >= 0");
      if (sig.band_width_hz < 0.0) fail_invalid("band width must be >= 0");
      if (sig.band_center_hz <= 0.0) fail_invalid("band center must be > 0");
    }
  }
}

std::array<std::size_t, 4> default_signature_channels(Group g) {
  switch (g) {
    case Group::FirstLeft: return {0, 1, 2, 3};
    case Group::FirstRight: return {3, 4, 5, 6};
    case Group::SecondLeft: return {6, 7, 8, 9};
    case Group::SecondRight: return {9, 10, 11, 0};
  }
  return {0, 1, 2, 3};
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.layout = default_layout12();
  const std::size_t c = spec.layout.count();
  for (int gi = 0; gi < 4; ++gi) {
    auto chans = default_signature_channels(static_cast<Group>(gi));
    for (int label = 0; label < 2; ++label) {
      SignatureSpec sig;
      sig.channel_weights.assign(c, 0.0);
      for (std::size_t ch : chans) sig.channel_weights[ch] = 1.0;
      sig.band_center_hz = 10.0;
      sig.band_width_hz = 2.0;
      // success plants the oscillation, failure leaves bare noise
      sig.amplitude = label == 1 ? 1.0 : 0.0;
      spec.signature[gi][label] = std::move(sig);
    }
  }
  return spec;
}

namespace {

// Unit-variance 1/f^beta-shaped noise from a stack of octave-spaced AR(1)
// processes, each started from its stationary distribution.
class PinkNoise {
 public:
  PinkNoise(double fs, double beta, std::size_t t) {
    std::size_t bands = 1;
    while ((fs / std::pow(2.0, bands + 1)) * static_cast<double>(t) / fs > 0.5 &&
           bands < 12)
      ++bands;
    poles_.resize(bands);
    gains_.resize(bands);
    double g2 = 0.0;
    for (std::size_t i = 0; i < bands; ++i) {
      double f = fs / std::pow(2.0, static_cast<double>(i) + 1.0);
      poles_[i] = std::exp(-2.0 * kPi * f / fs);
      gains_[i] = std::pow(f, (1.0 - beta) / 2.0);
      g2 += gains_[i] * gains_[i];
    }
    double norm = 1.0 / std::sqrt(g2);
    for (auto& g : gains_) g *= norm;
  }

  void fill(double* out, std::size_t t, Rng& rng) {
    state_.assign(poles_.size(), 0.0);
    for (std::size_t i = 0; i < poles_.size(); ++i) state_[i] = rng.normal();
    for (std::size_t s = 0; s < t; ++s) {
      double v = 0.0;
      for (std::size_t i = 0; i < poles_.size(); ++i) {
        double a = poles_[i];
        state_[i] = a * state_[i] + std::sqrt(1.0 - a * a) * rng.normal();
        v += gains_[i] * state_[i];
      }
      out[s] = v;
    }
  }

 private:
  std::vector<double> poles_, gains_;
  std::vector<double> state_;
};

}  // namespace

EpochDataset generate_synthetic(const SyntheticSpec& spec_in) {
  SyntheticSpec spec = spec_in;
  if (spec.layout.channels.empty()) spec.layout = default_layout12();
  if (spec.signature[0][0].channel_weights.empty()) {
    auto def = default_synthetic_spec();
    spec.signature = def.signature;
  }
  spec.validate();

  const std::size_t c = spec.layout.count();
  const double tf = spec.fs * spec.window_seconds;
  auto t = static_cast<std::size_t>(std::llround(tf));
  if (std::abs(tf - static_cast<double>(t)) > 1e-9 || t < 2)
    fail_invalid("window_seconds * fs must be an integer >= 2");

  EpochDataset ds;
  ds.fs = spec.fs;
  ds.layout = spec.layout;
  Rng master(spec.seed);
  PinkNoise pink(spec.fs, spec.noise_exponent, t);
  std::vector<double> wave(t);

  for (Group g : spec.groups) {
    auto gi = static_cast<std::size_t>(g);
    for (std::size_t p = 0; p < spec.n_participants; ++p) {
      Rng rng = master.derive(gi * 7919 + p + 1);
      const auto participant =
          static_cast<std::uint16_t>(gi * spec.n_participants + p);

      std::vector<int> labels(spec.trials_per_participant);
      for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = i < (labels.size() + 1) / 2 ? 1 : 0;
      rng.shuffle(labels);

      for (std::size_t trial = 0; trial < spec.trials_per_participant; ++trial) {
        TrialEpoch e;
        e.group = g;
        e.participant = participant;
        e.block_index = 0;
        e.trial_index = static_cast<std::uint16_t>(trial);
        e.label = labels[trial];
        const SignatureSpec& sig = spec.signature[gi][e.label];

        if (e.label == 1) {
          e.angular_error_deg =
              rng.uniform(-spec.funnel_halfwidth_deg, spec.funnel_halfwidth_deg);
        } else {
          double mag = spec.funnel_halfwidth_deg + 2.0 + rng.uniform(0.0, 10.0);
          e.angular_error_deg = rng.bernoulli(0.5) ? mag : -mag;
        }

        e.signal = Tensor({c, t});
        if (sig.amplitude > 0.0) {
          double f = rng.uniform(sig.band_center_hz - sig.band_width_hz / 2.0,
                                 sig.band_center_hz + sig.band_width_hz / 2.0);
          double phase = rng.uniform(0.0, 2.0 * kPi);
          double a = sig.amplitude * std::sqrt(2.0);
          for (std::size_t s = 0; s < t; ++s)
            wave[s] =
                a * std::sin(2.0 * kPi * f * static_cast<double>(s) / spec.fs +
                             phase);
        } else {
          std::fill(wave.begin(), wave.end(), 0.0);
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
          double* row = e.signal.data() + ch * t;
          pink.fill(row, t, rng);
          double w = sig.channel_weights[ch];
          if (spec.noise_floor > 0.0)
            for (std::size_t s = 0; s < t; ++s)
              row[s] += spec.noise_floor * rng.normal();
          if (w > 0.0 && sig.amplitude > 0.0)
            for (std::size_t s = 0; s < t; ++s) row[s] += w * wave[s];
        }
        ds.epochs.push_back(std::move(e));
      }
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Balancing

EpochDataset balance_dataset(const EpochDataset& ds,
                             double funnel_halfwidth_deg, double margin_deg,
                             bool per_participant) {
  ds.validate();
  if (funnel_halfwidth_deg <= 0.0)
    fail_invalid("funnel_halfwidth_deg must be positive");
  if (margin_deg < 0.0) fail_invalid("margin_deg must be >= 0");

  std::size_t inconsistent = 0;
  for (const auto& e : ds.epochs) {
    bool in_funnel = std::abs(e.angular_error_deg) <= funnel_halfwidth_deg;
    if ((e.label == 1) != in_funnel) ++inconsistent;
  }
  if (inconsistent > 0)
    fail_invalid(std::to_string(inconsistent) +
                 " epochs have labels inconsistent with the funnel half-width " +
                 std::to_string(funnel_halfwidth_deg));

  // exclusion band and block-first removal
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < ds.epochs.size(); ++i) {
    const auto& e = ds.epochs[i];
    if (e.label == 0 &&
        std::abs(e.angular_error_deg) < funnel_halfwidth_deg + margin_deg)
      continue;
    if (e.trial_index == 0) continue;
    kept.push_back(i);
  }

  // majority-class pruning per pool
  using PoolKey = std::pair<int, int>;  // (group, participant or -1)
  std::map<PoolKey, std::vector<std::size_t>> pools;
  for (std::size_t idx : kept) {
    const auto& e = ds.epochs[idx];
    PoolKey key{static_cast<int>(e.group),
                per_participant ? static_cast<int>(e.participant) : -1};
    pools[key].push_back(idx);
  }

  std::vector<char> drop(ds.epochs.size(), 0);
  for (auto& [key, members] : pools) {
    std::vector<std::size_t> succ, fail;
    for (std::size_t idx : members)
      (ds.epochs[idx].label == 1 ? succ : fail).push_back(idx);
    if (succ.empty() || fail.empty()) {
      std::ostringstream msg;
      msg << "empty class after filtering in group "
          << group_name(static_cast<Group>(key.first));
      if (key.second >= 0) msg << " participant " << key.second;
      msg << " (successes: " << succ.size() << ", failures: " << fail.size()
          << ")";
      fail_invalid(msg.str());
    }
    auto prune = [&](std::vector<std::size_t>& majority, std::size_t excess,
                     bool failures) {
      // failures nearest the funnel go first; successes farthest from the
      // funnel centre go first; ties resolved toward larger trial_index
      std::stable_sort(
          majority.begin(), majority.end(),
          [&](std::size_t a, std::size_t b) {
            const auto& ea = ds.epochs[a];
            const auto& eb = ds.epochs[b];
            double ka = std::abs(ea.angular_error_deg);
            double kb = std::abs(eb.angular_error_deg);
            if (ka != kb) return failures ? ka < kb : ka > kb;
            if (ea.trial_index != eb.trial_index)
              return ea.trial_index > eb.trial_index;
            if (ea.participant != eb.participant)
              return ea.participant < eb.participant;
            return ea.block_index < eb.block_index;
          });
      for (std::size_t i = 0; i < excess; ++i) drop[majority[i]] = 1;
    };
    if (fail.size() > succ.size())
      prune(fail, fail.size() - succ.size(), true);
    else if (succ.size() > fail.size())
      prune(succ, succ.size() - fail.size(), false);
  }

  EpochDataset out;
  out.fs = ds.fs;
  out.layout = ds.layout;
  for (std::size_t idx : kept)
    if (!drop[idx]) out.epochs.push_back(ds.epochs[idx]);
  return out;
}

// ---------------------------------------------------------------------------
// NGEP container

namespace {
constexpr char kEpochMagic[4] = {'N', 'G', 'E', 'P'};
constexpr std::uint32_t kEpochVersion = 1;
}  // namespace

void save_epochs(const EpochDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) fail_io("cannot write epoch file: " + path);
  os.write(kEpochMagic, 4);
  binio::put_u32(os, kEpochVersion);
  binio::put_f64(os, ds.fs);
  const std::size_t c = ds.channel_count();
  const std::size_t t = ds.window_samples();
  binio::put_u32(os, static_cast<std::uint32_t>(c));
  binio::put_u32(os, static_cast<std::uint32_t>(t));
  for (const auto& ch : ds.layout.channels) {
    binio::put_u16(os, static_cast<std::uint16_t>(ch.name.size()));
    os.write(ch.name.data(), static_cast<std::streamsize>(ch.name.size()));
    for (double v : ch.pos) binio::put_f64(os, v);
  }
  binio::put_f64(os, ds.layout.head_radius);
  binio::put_u32(os, static_cast<std::uint32_t>(ds.epochs.size()));
  for (const auto& e : ds.epochs) {
    binio::put_u8(os, static_cast<std::uint8_t>(e.group));
    binio::put_u8(os, static_cast<std::uint8_t>(e.label));
    binio::put_u16(os, e.participant);
    binio::put_u16(os, e.block_index);
    binio::put_u16(os, e.trial_index);
    binio::put_f64(os, e.angular_error_deg);
    binio::put_f64_array(os, e.signal.data(), e.signal.size());
  }
  if (!os) fail_io("write failed: " + path);
}

EpochDataset load_epochs(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail_io("cannot open epoch file: " + path);
  binio::expect_magic(is, kEpochMagic, path);
  std::uint32_t version = binio::get_u32(is, "version");
  if (version != kEpochVersion)
    fail_io(path + ": unsupported epoch file version " +
            std::to_string(version) + " (expected " +
            std::to_string(kEpochVersion) + ")");
  EpochDataset ds;
  ds.fs = binio::get_f64(is, "fs");
  std::uint32_t c = binio::get_u32(is, "channel count");
  std::uint32_t t = binio::get_u32(is, "window length");
  if (c < 2) fail_io(path + ": channel count must be >= 2");
  for (std::uint32_t i = 0; i < c; ++i) {
    std::uint16_t len = binio::get_u16(is, "channel name length");
    Channel ch;
    ch.name.resize(len);
    if (!is.read(ch.name.data(), len)) binio::truncated("channel name");
    for (auto& v : ch.pos) v = binio::get_f64(is, "channel position");
    ds.layout.channels.push_back(std::move(ch));
  }
  ds.layout.head_radius = binio::get_f64(is, "head radius");
  std::uint32_t n = binio::get_u32(is, "epoch count");
  ds.epochs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    try {
      TrialEpoch e;
      std::uint8_t gcode = binio::get_u8(is, "group");
      if (gcode > 3)
        fail_io(path + ": epoch " + std::to_string(i) + " has bad group code " +
                std::to_string(gcode));
      e.group = static_cast<Group>(gcode);
      e.label = binio::get_u8(is, "label");
      e.participant = binio::get_u16(is, "participant");
      e.block_index = binio::get_u16(is, "block");
      e.trial_index = binio::get_u16(is, "trial");
      e.angular_error_deg = binio::get_f64(is, "angular error");
      e.signal = Tensor({c, t});
      binio::get_f64_array(is, e.signal.data(), e.signal.size(), "samples");
      ds.epochs.push_back(std::move(e));
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::io &&
          std::string(err.what()).find("truncated") != std::string::npos)
        fail_io(path + ": truncated record at epoch " + std::to_string(i));
      throw;
    }
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// CSV import

EpochDataset load_epochs_csv(const std::string& path,
                             const ChannelLayout& layout, double fs) {
  layout.validate();
  std::ifstream is(path);
  if (!is) fail_io("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(is, line)) fail_io(path + ": empty csv file");

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream ss(s);
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
  };
  auto header = split(line);
  const std::vector<std::string> meta = {"epoch",  "participant",   "group",
                                         "label",  "block",         "trial",
                                         "angular_error"};
  if (header.size() != meta.size() + layout.count())
    fail_io(path + ": csv header has " + std::to_string(header.size()) +
            " columns, expected " +
            std::to_string(meta.size() + layout.count()));
  for (std::size_t i = 0; i < meta.size(); ++i)
    if (lower(header[i]) != meta[i])
      fail_io(path + ": csv column " + std::to_string(i + 1) + " must be " +
              meta[i]);
  for (std::size_t i = 0; i < layout.count(); ++i)
    if (lower(header[meta.size() + i]) != lower(layout.channels[i].name))
      fail_io(path + ": csv channel column " + header[meta.size() + i] +
              " does not match layout channel " + layout.channels[i].name);

  struct Pending {
    TrialEpoch meta;
    std::vector<std::vector<double>> rows;
  };
  std::vector<Pending> pending;
  long current_id = -1;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      fail_io(path + ": line " + std::to_string(lineno) + " has " +
              std::to_string(cells.size()) + " cells");
    long id = std::stol(cells[0]);
    if (id != current_id) {
      Pending p;
      p.meta.participant = static_cast<std::uint16_t>(std::stoul(cells[1]));
      p.meta.group = parse_group(cells[2]);
      p.meta.label = std::stoi(cells[3]);
      p.meta.block_index = static_cast<std::uint16_t>(std::stoul(cells[4]));
      p.meta.trial_index = static_cast<std::uint16_t>(std::stoul(cells[5]));
      p.meta.angular_error_deg = std::stod(cells[6]);
      pending.push_back(std::move(p));
      current_id = id;
    }
    std::vector<double> samples(layout.count());
    for (std::size_t ci = 0; ci < layout.count(); ++ci)
      samples[ci] = std::stod(cells[7 + ci]);
    pending.back().rows.push_back(std::move(samples));
  }
  if (pending.empty()) fail_io(path + ": csv contains no epochs");

  const std::size_t t = pending.front().rows.size();
  EpochDataset ds;
  ds.fs = fs;
  ds.layout = layout;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto& p = pending[i];
    if (p.rows.size() != t)
      fail_io(path + ": epoch " + std::to_string(i) + " has " +
              std::to_string(p.rows.size()) + " samples, first epoch has " +
              std::to_string(t));
    TrialEpoch e = std::move(p.meta);
    e.signal = Tensor({layout.count(), t});
    for (std::size_t s = 0; s < t; ++s)
      for (std::size_t ci = 0; ci < layout.count(); ++ci)
        e.signal.at2(ci, s) = p.rows[s][ci];
    ds.epochs.push_back(std::move(e));
  }
  ds.validate();
  return ds;
}

std::vector<std::size_t> indices_of_group(const EpochDataset& ds, Group g) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.epochs.size(); ++i)
    if (ds.epochs[i].group == g) out.push_back(i);
  return out;
}

EpochDataset subset(const EpochDataset& ds,
                    const std::vector<std::size_t>& indices) {
  EpochDataset out;
  out.fs = ds.fs;
  out.layout = ds.layout;
  out.epochs.reserve(indices.size());
  for (std::size_t i : indices) out.epochs.push_back(ds.epochs.at(i));
  return out;
}

}  // namespace ng
