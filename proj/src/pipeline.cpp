#include "neurograph/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "neurograph/error.hpp"
#include "neurograph/stats.hpp"

namespace fs = std::filesystem;

namespace ng {

namespace {
std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

void ensure_out_dir(const std::string& out_dir, bool force) {
  fs::path dir(out_dir);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      fail_invalid(out_dir + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force)
      fail_invalid("output directory " + out_dir +
                   " is not empty; pass --force to overwrite");
  } else {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail_io("cannot create output directory " + out_dir);
  }
}

std::string fold_dir_name(std::size_t f) {
  std::ostringstream os;
  os << "fold" << (f < 10 ? "0" : "") << f;
  return os.str();
}
}  // namespace

ArchConfig resolved_arch(const RunConfig& cfg, const EpochDataset& ds) {
  ds.validate();
  if (ds.epochs.empty()) fail_invalid("dataset has no epochs");
  ArchConfig arch = cfg.arch_config();
  arch.fs = ds.fs;
  arch.window_seconds =
      static_cast<double>(ds.window_samples()) / ds.fs;
  std::size_t raw_kernel = 0;
  {
    const std::string& k = cfg.get("arch.kernel");
    auto [p, ec] = std::from_chars(k.data(), k.data() + k.size(), raw_kernel);
    (void)p;
    (void)ec;
  }
  arch.kernel =
      raw_kernel == 0 ? ArchConfig::kernel_for_fs(ds.fs) : raw_kernel;
  arch.validate();
  return arch;
}

void write_history_csv(const std::vector<EpochStat>& history,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) fail_io("cannot write history csv: " + path);
  os << "epoch,loss,train_acc\n";
  for (const auto& h : history)
    os << h.epoch << "," << fmt(h.loss) << "," << fmt(h.train_accuracy)
       << "\n";
  if (!os) fail_io("write failed: " + path);
}

void write_metrics_csv(const CvResult& cv, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail_io("cannot write metrics csv: " + path);
  os << "fold,accuracy,precision,recall,f1\n";
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    const Metrics& m = cv.folds[f].metrics;
    os << f << "," << fmt(m.accuracy) << "," << fmt(m.precision) << ","
       << fmt(m.recall) << "," << fmt(m.f1) << "\n";
  }
  os << "mean," << fmt(cv.mean.accuracy) << "," << fmt(cv.mean.precision)
     << "," << fmt(cv.mean.recall) << "," << fmt(cv.mean.f1) << "\n";
  os << "stdev," << fmt(cv.stdev.accuracy) << "," << fmt(cv.stdev.precision)
     << "," << fmt(cv.stdev.recall) << "," << fmt(cv.stdev.f1) << "\n";
  if (!os) fail_io("write failed: " + path);
}

Metrics run_crossval(const EpochDataset& ds, const RunConfig& cfg,
                     const CrossvalOptions& opt, const std::string& out_dir) {
  ensure_out_dir(out_dir, opt.force);
  ArchConfig arch = resolved_arch(cfg, ds);
  TrainConfig train_cfg = cfg.train_config();

  GnnClassifier* init = nullptr;
  std::optional<GnnClassifier> pretrained;
  if (!opt.pretrain_checkpoint.empty()) {
    pretrained.emplace(load_checkpoint(opt.pretrain_checkpoint));
    init = &*pretrained;
  }

  for (std::size_t f = 0; f < cfg.folds(); ++f)
    fs::create_directories(fs::path(out_dir) / fold_dir_name(f));

  TrainHooks hooks;
  hooks.on_fold_checkpoint = [&](std::size_t fold, std::size_t epoch,
                                 const GnnClassifier& model) {
    std::ostringstream name;
    name << "ckpt_epoch" << epoch << ".ngrf";
    save_checkpoint(model,
                    (fs::path(out_dir) / fold_dir_name(fold) / name.str())
                        .string());
  };

  CvResult cv = cross_validate(ds, arch, cfg.radius_fraction(), train_cfg,
                               cfg.folds(), init, opt.jobs, &hooks);

  write_metrics_csv(cv, (fs::path(out_dir) / "metrics.csv").string());
  for (std::size_t f = 0; f < cv.folds.size(); ++f)
    write_history_csv(
        cv.folds[f].history,
        (fs::path(out_dir) / fold_dir_name(f) / "history.csv").string());
  return cv.mean;
}

void run_pretrain(const EpochDataset& ds, const RunConfig& cfg, Group exclude,
                  PretrainScheme scheme, const std::string& out_path) {
  ArchConfig arch = resolved_arch(cfg, ds);
  TrainConfig train_cfg = cfg.train_config();
  train_cfg.epochs = cfg.pretrain_epochs();
  PretrainResult result =
      pretrain(ds, exclude, scheme, arch, cfg.radius_fraction(), train_cfg);
  save_checkpoint(result.model, out_path);
  write_history_csv(result.history, out_path + ".history.csv");
}

void run_explain(const std::string& model_path, const EpochDataset& ds,
                 const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  GnnClassifier model = load_checkpoint(model_path);
  if (model.node_count() != ds.channel_count())
    fail_invalid("model and dataset channel counts differ");
  ExplainConfig ecfg = cfg.explain_config();
  ExplainResult res = optimize_masks(model, ds, ecfg);
  ContributionMap map = contribution_map(res.masks, model.graph().layout);

  std::string stem = fs::path(model_path).stem().string();
  save_map_csv(map, (fs::path(out_dir) / (stem + ".map.csv")).string());
  save_topomap_svg(map, (fs::path(out_dir) / (stem + ".map.svg")).string());

  std::ofstream os((fs::path(out_dir) / (stem + ".loss.csv")).string());
  if (!os) fail_io("cannot write explain loss csv");
  os << "epoch,total,ces,nms,ems,nme,eme\n";
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    const auto& h = res.history[i];
    os << i + 1 << "," << fmt(h.total) << "," << fmt(h.ces) << ","
       << fmt(h.nms) << "," << fmt(h.ems) << "," << fmt(h.nme) << ","
       << fmt(h.eme) << "\n";
  }
}

// ---------------------------------------------------------------------------
// compare-maps

namespace {
struct MapId {
  Group group;
  PretrainScheme scheme;
  bool final_stage = false;
  bool ok = false;
};

MapId parse_map_stem(const std::string& stem) {
  MapId id;
  auto p1 = stem.find('_');
  auto p2 = stem.rfind('_');
  if (p1 == std::string::npos || p2 == p1) return id;
  try {
    id.group = parse_group(stem.substr(0, p1));
    id.scheme = parse_scheme(stem.substr(p1 + 1, p2 - p1 - 1));
  } catch (const Error&) {
    return id;
  }
  std::string stage = stem.substr(p2 + 1);
  if (stage == "final")
    id.final_stage = true;
  else if (stage == "init")
    id.final_stage = false;
  else
    return id;
  id.ok = true;
  return id;
}
}  // namespace

void run_compare_maps(const std::vector<std::string>& map_paths,
                      const RunConfig& cfg, const std::string& out_dir) {
  if (map_paths.size() < 2)
    fail_invalid("compare-maps needs at least two map files");
  fs::create_directories(out_dir);

  std::vector<ContributionMap> maps;
  std::vector<std::string> labels;
  for (const auto& p : map_paths) {
    maps.push_back(load_map_csv(p));
    labels.push_back(fs::path(p).stem().string());
  }

  DistanceMatrix dm = distance_matrix(maps, labels, cfg.sgw_projections(),
                                      cfg.seed(), cfg.sgw_axis_scale());
  save_distance_matrix_csv(
      dm, (fs::path(out_dir) / "distance_matrix.csv").string());

  // Fig-style groupings need the <Group>_<scheme>_<stage> naming for every
  // map and exactly one map per identity.
  std::map<std::string, std::size_t> by_id;
  bool parseable = true;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    MapId id = parse_map_stem(labels[i]);
    if (!id.ok) {
      parseable = false;
      break;
    }
    std::string key = std::string(group_name(id.group)) + "_" +
                      scheme_name(id.scheme) + "_" +
                      (id.final_stage ? "final" : "init");
    if (!by_id.emplace(key, i).second) {
      parseable = false;
      break;
    }
  }
  if (!parseable || by_id.size() != 16) return;

  auto idx = [&](Group g, PretrainScheme s, bool final_stage) {
    std::string key = std::string(group_name(g)) + "_" + scheme_name(s) + "_" +
                      (final_stage ? "final" : "init");
    return by_id.at(key);
  };
  auto dist = [&](std::size_t a, std::size_t b) { return dm.values.at2(a, b); };

  const std::array<Group, 4> all_groups = {Group::FirstLeft, Group::FirstRight,
                                           Group::SecondLeft,
                                           Group::SecondRight};
  const std::array<PretrainScheme, 2> schemes = {PretrainScheme::round,
                                                 PretrainScheme::pocket};

  struct Entry {
    std::string comparison, a, b;
    double d;
  };
  std::vector<Entry> box;
  auto add = [&](const std::string& tag, std::size_t a, std::size_t b) {
    box.push_back({tag, dm.labels[a], dm.labels[b], dist(a, b)});
  };

  // I: the two distinct pretraining maps of the same scheme. Groups sharing
  // a source pair start from the same map, so one representative per side.
  for (auto s : schemes) {
    if (s == PretrainScheme::round)
      add("I", idx(Group::FirstLeft, s, false), idx(Group::SecondLeft, s, false));
    else
      add("I", idx(Group::FirstLeft, s, false), idx(Group::FirstRight, s, false));
  }
  // II/III: final vs own pretraining map
  for (Group g : all_groups)
    add("II", idx(g, PretrainScheme::round, true),
        idx(g, PretrainScheme::round, false));
  for (Group g : all_groups)
    add("III", idx(g, PretrainScheme::pocket, true),
        idx(g, PretrainScheme::pocket, false));
  // IV: final maps of the same group under the two pretrainings
  for (Group g : all_groups)
    add("IV", idx(g, PretrainScheme::round, true),
        idx(g, PretrainScheme::pocket, true));
  // V: final maps of group pairs that started from the same pretraining map
  add("V", idx(Group::FirstLeft, PretrainScheme::round, true),
      idx(Group::FirstRight, PretrainScheme::round, true));
  add("V", idx(Group::SecondLeft, PretrainScheme::round, true),
      idx(Group::SecondRight, PretrainScheme::round, true));
  add("V", idx(Group::FirstLeft, PretrainScheme::pocket, true),
      idx(Group::SecondLeft, PretrainScheme::pocket, true));
  add("V", idx(Group::FirstRight, PretrainScheme::pocket, true),
      idx(Group::SecondRight, PretrainScheme::pocket, true));

  {
    std::ofstream os((fs::path(out_dir) / "boxplot_groups.csv").string());
    if (!os) fail_io("cannot write boxplot csv");
    os << "comparison,map_a,map_b,distance\n";
    for (const auto& e : box)
      os << e.comparison << "," << e.a << "," << e.b << "," << fmt(e.d)
         << "\n";
  }

  auto values_of = [&](const std::string& tag) {
    std::vector<double> v;
    for (const auto& e : box)
      if (e.comparison == tag) v.push_back(e.d);
    return v;
  };
  auto vI = values_of("I"), vII = values_of("II"), vIII = values_of("III"),
       vIV = values_of("IV"), vV = values_of("V");

  std::ofstream os((fs::path(out_dir) / "tests.csv").string());
  if (!os) fail_io("cannot write tests csv");
  os << "comparison,statistic,p,method,flags\n";
  auto put = [&](const std::string& name, const TestResult& r) {
    os << name << "," << fmt(r.statistic) << "," << fmt(r.p_value) << ","
       << r.method << "," << (r.all_zero ? "all_zero" : "") << "\n";
  };
  put("II_vs_III_wilcoxon", wilcoxon_signed_rank(vII, vIII));
  put("IV_vs_V_mannwhitney", mann_whitney_u(vIV, vV));
  put("I_vs_IV_mannwhitney", mann_whitney_u(vI, vIV));
  put("II_vs_IV_mannwhitney", mann_whitney_u(vII, vIV));
  put("III_vs_IV_mannwhitney", mann_whitney_u(vIII, vIV));
}

}  // namespace ng
