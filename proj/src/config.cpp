#include "neurograph/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "neurograph/error.hpp"

namespace ng {

namespace {

enum class ValueType { u64, szt, f64, boolean, text, size_list, text_list };

struct KeyDef {
  std::string key;
  ValueType type;
  std::string default_value;
};

// Fixed schema; dump() emits keys in this order.
const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> defs = [] {
    std::vector<KeyDef> d = {
        {"seed", ValueType::u64, "0"},
        {"graph.radius_fraction", ValueType::f64, "0.75"},
        {"arch.fs", ValueType::f64, "256"},
        {"arch.window_seconds", ValueType::f64, "2"},
        {"arch.kernel", ValueType::szt, "0"},  // 0: derive fs/2
        {"arch.temporal_filters", ValueType::szt, "32"},
        {"arch.cheb_order", ValueType::szt, "3"},
        {"arch.cheb_features", ValueType::szt, "16"},
        {"arch.pool_window", ValueType::szt, "4"},
        {"arch.dropout", ValueType::f64, "0.35"},
        {"arch.edge_dropout", ValueType::f64, "0.2"},
        {"train.batch_size", ValueType::szt, "32"},
        {"train.learning_rate", ValueType::f64, "0.0001"},
        {"train.epochs", ValueType::szt, "150"},
        {"train.weight_decay", ValueType::f64, "0.0001"},
        {"train.adam_beta1", ValueType::f64, "0.9"},
        {"train.adam_beta2", ValueType::f64, "0.999"},
        {"train.adam_eps", ValueType::f64, "1e-08"},
        {"train.freeze_batchnorm", ValueType::boolean, "false"},
        {"train.checkpoint_epochs", ValueType::size_list, "10,20,50,150"},
        {"train.folds", ValueType::szt, "10"},
        {"train.jobs", ValueType::szt, "1"},
        {"pretrain.epochs", ValueType::szt, "200"},
        {"balance.funnel_halfwidth_deg", ValueType::f64, "3"},
        {"balance.margin_deg", ValueType::f64, "2"},
        {"balance.per_participant", ValueType::boolean, "false"},
        {"synth.n_participants", ValueType::szt, "10"},
        {"synth.trials_per_participant", ValueType::szt, "24"},
        {"synth.fs", ValueType::f64, "256"},
        {"synth.window_seconds", ValueType::f64, "2"},
        {"synth.noise_exponent", ValueType::f64, "1"},
        {"synth.noise_floor", ValueType::f64, "0.5"},
        {"synth.funnel_halfwidth_deg", ValueType::f64, "3"},
        {"synth.layout", ValueType::text, "default12"},
        {"synth.groups", ValueType::text_list,
         "FirstLeft,FirstRight,SecondLeft,SecondRight"},
        {"explain.learning_rate", ValueType::f64, "0.01"},
        {"explain.epochs", ValueType::szt, "100"},
        {"explain.coeff_ces", ValueType::f64, "1"},
        {"explain.coeff_nms", ValueType::f64, "1"},
        {"explain.coeff_ems", ValueType::f64, "1"},
        {"explain.coeff_nme", ValueType::f64, "1"},
        {"explain.coeff_eme", ValueType::f64, "1"},
        {"explain.target_true_labels", ValueType::boolean, "false"},
        {"explain.mask_init_stdev", ValueType::f64, "0.1"},
        {"sgw.projections", ValueType::szt, "500"},
        {"sgw.scale_azimuth", ValueType::f64, "1"},
        {"sgw.scale_radial", ValueType::f64, "1"},
        {"sgw.scale_score", ValueType::f64, "1"},
    };
    // per group+label signature: channels with weight 1, band, amplitude
    const char* groups[4] = {"FirstLeft", "FirstRight", "SecondLeft",
                             "SecondRight"};
    const char* labels[2] = {"failure", "success"};
    const char* group_channels[4] = {"0,1,2,3", "3,4,5,6", "6,7,8,9",
                                     "9,10,11,0"};
    for (int g = 0; g < 4; ++g) {
      for (int l = 0; l < 2; ++l) {
        std::string base = std::string("synth.sig.") + groups[g] + "." +
                           labels[l] + ".";
        d.push_back({base + "channels", ValueType::size_list,
                     group_channels[g]});
        d.push_back({base + "band_center_hz", ValueType::f64, "10"});
        d.push_back({base + "band_width_hz", ValueType::f64, "2"});
        d.push_back({base + "amplitude", ValueType::f64, l == 1 ? "1" : "0"});
      }
    }
    return d;
  }();
  return defs;
}

const KeyDef& find_key(const std::string& key) {
  for (const auto& def : schema())
    if (key == def.key) return def;
  fail_invalid("unknown config key: " + key);
}

std::string fmt_f64(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_f64(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    fail_invalid("config " + key + ": bad number: " + s);
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail_invalid("config " + key + ": bad unsigned integer: " + s);
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

std::string canonicalize(const KeyDef& def, const std::string& raw) {
  const std::string key = def.key;
  switch (def.type) {
    case ValueType::u64:
      return std::to_string(parse_u64(raw, key));
    case ValueType::szt:
      return std::to_string(parse_u64(raw, key));
    case ValueType::f64:
      return fmt_f64(parse_f64(raw, key));
    case ValueType::boolean: {
      if (raw == "true" || raw == "1" || raw == "yes") return "true";
      if (raw == "false" || raw == "0" || raw == "no") return "false";
      fail_invalid("config " + key + ": bad boolean: " + raw);
    }
    case ValueType::text:
      return raw;
    case ValueType::size_list: {
      auto items = split_list(raw);
      std::string out;
      for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? "," : "") + std::to_string(parse_u64(items[i], key));
      return out;
    }
    case ValueType::text_list: {
      auto items = split_list(raw);
      std::string out;
      for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? "," : "") + items[i];
      return out;
    }
  }
  fail_invalid("config " + key + ": unhandled type");
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& def : schema())
    values_[def.key] = canonicalize(def, def.default_value);
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // strip trailing CR and surrounding whitespace
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    std::size_t start = line.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    auto eq = line.find('=', start);
    if (eq == std::string::npos)
      fail_invalid("config line " + std::to_string(lineno) +
                   ": expected key=value, got: " + line);
    cfg.set(line.substr(start, eq - start), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail_io("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeyDef& def = find_key(key);
  values_[key] = canonicalize(def, value);
}

void RunConfig::set_pair(const std::string& pair) {
  auto eq = pair.find('=');
  if (eq == std::string::npos)
    fail_invalid("expected key=value, got: " + pair);
  set(pair.substr(0, eq), pair.substr(eq + 1));
}

const std::string& RunConfig::get(const std::string& key) const {
  find_key(key);
  return values_.at(key);
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& def : schema()) {
    out += def.key;
    out += "=";
    out += values_.at(def.key);
    out += "\n";
  }
  return out;
}

std::uint64_t RunConfig::seed() const { return parse_u64(get("seed"), "seed"); }
double RunConfig::radius_fraction() const {
  return parse_f64(get("graph.radius_fraction"), "graph.radius_fraction");
}
std::size_t RunConfig::folds() const {
  return parse_u64(get("train.folds"), "train.folds");
}
std::size_t RunConfig::jobs() const {
  return parse_u64(get("train.jobs"), "train.jobs");
}
std::size_t RunConfig::pretrain_epochs() const {
  return parse_u64(get("pretrain.epochs"), "pretrain.epochs");
}
double RunConfig::balance_funnel_halfwidth() const {
  return parse_f64(get("balance.funnel_halfwidth_deg"),
                   "balance.funnel_halfwidth_deg");
}
double RunConfig::balance_margin() const {
  return parse_f64(get("balance.margin_deg"), "balance.margin_deg");
}
bool RunConfig::balance_per_participant() const {
  return get("balance.per_participant") == "true";
}

ArchConfig RunConfig::arch_config() const {
  ArchConfig a;
  a.fs = parse_f64(get("arch.fs"), "arch.fs");
  a.window_seconds = parse_f64(get("arch.window_seconds"), "arch.window_seconds");
  a.kernel = parse_u64(get("arch.kernel"), "arch.kernel");
  if (a.kernel == 0) a.kernel = ArchConfig::kernel_for_fs(a.fs);
  a.temporal_filters =
      parse_u64(get("arch.temporal_filters"), "arch.temporal_filters");
  a.cheb_order = parse_u64(get("arch.cheb_order"), "arch.cheb_order");
  a.cheb_features = parse_u64(get("arch.cheb_features"), "arch.cheb_features");
  a.pool_window = parse_u64(get("arch.pool_window"), "arch.pool_window");
  a.dropout = parse_f64(get("arch.dropout"), "arch.dropout");
  a.edge_dropout = parse_f64(get("arch.edge_dropout"), "arch.edge_dropout");
  return a;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.batch_size = parse_u64(get("train.batch_size"), "train.batch_size");
  t.learning_rate =
      parse_f64(get("train.learning_rate"), "train.learning_rate");
  t.epochs = parse_u64(get("train.epochs"), "train.epochs");
  t.weight_decay = parse_f64(get("train.weight_decay"), "train.weight_decay");
  t.adam_beta1 = parse_f64(get("train.adam_beta1"), "train.adam_beta1");
  t.adam_beta2 = parse_f64(get("train.adam_beta2"), "train.adam_beta2");
  t.adam_eps = parse_f64(get("train.adam_eps"), "train.adam_eps");
  t.seed = seed();
  t.freeze_batchnorm = get("train.freeze_batchnorm") == "true";
  t.checkpoint_epochs.clear();
  for (const auto& item : split_list(get("train.checkpoint_epochs")))
    t.checkpoint_epochs.push_back(parse_u64(item, "train.checkpoint_epochs"));
  return t;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec s;
  s.n_participants =
      parse_u64(get("synth.n_participants"), "synth.n_participants");
  s.trials_per_participant = parse_u64(get("synth.trials_per_participant"),
                                       "synth.trials_per_participant");
  s.fs = parse_f64(get("synth.fs"), "synth.fs");
  s.window_seconds =
      parse_f64(get("synth.window_seconds"), "synth.window_seconds");
  s.noise_exponent =
      parse_f64(get("synth.noise_exponent"), "synth.noise_exponent");
  s.noise_floor = parse_f64(get("synth.noise_floor"), "synth.noise_floor");
  s.funnel_halfwidth_deg = parse_f64(get("synth.funnel_halfwidth_deg"),
                                     "synth.funnel_halfwidth_deg");
  s.seed = seed();

  const std::string layout_ref = get("synth.layout");
  if (layout_ref == "default12")
    s.layout = default_layout12();
  else
    s.layout = load_layout(layout_ref);

  s.groups.clear();
  for (const auto& g : split_list(get("synth.groups")))
    s.groups.push_back(parse_group(g));
  if (s.groups.empty()) fail_invalid("synth.groups must not be empty");

  const char* label_names[2] = {"failure", "success"};
  for (int g = 0; g < 4; ++g) {
    for (int l = 0; l < 2; ++l) {
      std::string base = std::string("synth.sig.") +
                         group_name(static_cast<Group>(g)) + "." +
                         label_names[l] + ".";
      SignatureSpec sig;
      sig.channel_weights.assign(s.layout.count(), 0.0);
      for (const auto& item : split_list(get(base + "channels"))) {
        std::size_t ch = parse_u64(item, base + "channels");
        if (ch >= s.layout.count())
          fail_invalid(base + "channels: index " + item + " out of range");
        sig.channel_weights[ch] = 1.0;
      }
      sig.band_center_hz =
          parse_f64(get(base + "band_center_hz"), base + "band_center_hz");
      sig.band_width_hz =
          parse_f64(get(base + "band_width_hz"), base + "band_width_hz");
      sig.amplitude = parse_f64(get(base + "amplitude"), base + "amplitude");
      s.signature[g][l] = std::move(sig);
    }
  }
  return s;
}

ExplainConfig RunConfig::explain_config() const {
  ExplainConfig e;
  e.learning_rate =
      parse_f64(get("explain.learning_rate"), "explain.learning_rate");
  e.epochs = parse_u64(get("explain.epochs"), "explain.epochs");
  e.coeff_ces = parse_f64(get("explain.coeff_ces"), "explain.coeff_ces");
  e.coeff_nms = parse_f64(get("explain.coeff_nms"), "explain.coeff_nms");
  e.coeff_ems = parse_f64(get("explain.coeff_ems"), "explain.coeff_ems");
  e.coeff_nme = parse_f64(get("explain.coeff_nme"), "explain.coeff_nme");
  e.coeff_eme = parse_f64(get("explain.coeff_eme"), "explain.coeff_eme");
  e.target_true_labels = get("explain.target_true_labels") == "true";
  e.mask_init_stdev =
      parse_f64(get("explain.mask_init_stdev"), "explain.mask_init_stdev");
  e.seed = seed();
  return e;
}

std::size_t RunConfig::sgw_projections() const {
  return parse_u64(get("sgw.projections"), "sgw.projections");
}

std::array<double, 3> RunConfig::sgw_axis_scale() const {
  return {parse_f64(get("sgw.scale_azimuth"), "sgw.scale_azimuth"),
          parse_f64(get("sgw.scale_radial"), "sgw.scale_radial"),
          parse_f64(get("sgw.scale_score"), "sgw.scale_score")};
}

}  // namespace ng
