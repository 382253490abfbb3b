// ngraph: command-line front end over the neurograph C API.
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neurograph.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(ng_status s) {
  switch (s) {
    case NG_OK: return 0;
    case NG_ERR_NUMERIC: return kExitNumeric;
    default: return kExitUsage;
  }
}

[[noreturn]] void die(ng_status s) {
  std::fprintf(stderr, "ngraph: error: %s\n", ng_last_error());
  std::exit(exit_code_for(s));
}

struct ConfigHandle {
  ng_config* ptr = nullptr;
  ~ConfigHandle() { ng_config_destroy(ptr); }
};

struct DatasetHandle {
  ng_dataset* ptr = nullptr;
  ~DatasetHandle() { ng_dataset_destroy(ptr); }
};

// Shared config options: optional file, repeatable --set overrides, --seed
// shortcut, --dump-config to print the canonical form and stop.
struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string seed;
  bool dump = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--set", sets, "override a config key (key=value)");
    cmd->add_option("--seed", seed, "override the global seed");
    cmd->add_flag("--dump-config", dump,
                  "print the canonical config and exit");
  }

  // Returns the built config, or exits. When --dump-config was given the
  // canonical text is printed and the process exits 0.
  ng_config* build() const {
    ng_config* cfg = config_path.empty() ? ng_config_default()
                                         : ng_config_read(config_path.c_str());
    if (!cfg) die(NG_ERR_IO);
    for (const auto& pair : sets) {
      auto eq = pair.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "ngraph: error: --set expects key=value, got %s\n",
                     pair.c_str());
        ng_config_destroy(cfg);
        std::exit(kExitUsage);
      }
      ng_status s = ng_config_set(cfg, pair.substr(0, eq).c_str(),
                                  pair.substr(eq + 1).c_str());
      if (s != NG_OK) {
        ng_config_destroy(cfg);
        die(s);
      }
    }
    if (!seed.empty()) {
      ng_status s = ng_config_set(cfg, "seed", seed.c_str());
      if (s != NG_OK) {
        ng_config_destroy(cfg);
        die(s);
      }
    }
    if (dump) {
      size_t needed = 0;
      if (ng_config_dump(cfg, nullptr, 0, &needed) != NG_OK) die(NG_ERR_INVALID);
      std::string buf(needed, '\0');
      if (ng_config_dump(cfg, buf.data(), buf.size(), &needed) != NG_OK)
        die(NG_ERR_INVALID);
      std::fputs(buf.c_str(), stdout);
      ng_config_destroy(cfg);
      std::exit(0);
    }
    return cfg;
  }
};

struct DataArgs {
  std::string data_path;
  std::string layout_path;
  double fs = 256.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", data_path, "epoch file (NGEP, or CSV import)")
        ->required();
    cmd->add_option("--layout", layout_path,
                    "channel layout file (required for CSV input)");
    cmd->add_option("--fs", fs, "sampling rate for CSV input (default 256)");
  }

  ng_dataset* load() const {
    bool csv = data_path.size() > 4 &&
               data_path.substr(data_path.size() - 4) == ".csv";
    ng_dataset* ds;
    if (csv) {
      if (layout_path.empty()) {
        std::fprintf(stderr, "ngraph: error: CSV input needs --layout\n");
        std::exit(kExitUsage);
      }
      ds = ng_dataset_read_csv(data_path.c_str(), layout_path.c_str(), fs);
    } else {
      ds = ng_dataset_read(data_path.c_str());
    }
    if (!ds) die(NG_ERR_IO);
    return ds;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"channel-graph classification toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "print help for every command");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "generate a synthetic epoch dataset");
  ConfigArgs gen_cfg;
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec,
                  "synthetic spec file (key=value; same schema as --config)");
  gen->add_option("--out", gen_out, "output epoch file")->required();
  gen_cfg.attach(gen);

  // crossval
  auto* cv = app.add_subcommand("crossval",
                                "participant-stratified cross-validation");
  ConfigArgs cv_cfg;
  DataArgs cv_data;
  std::string cv_pretrain, cv_out;
  bool cv_force = false;
  int cv_jobs = 1;
  cv_data.attach(cv);
  cv->add_option("--pretrain", cv_pretrain, "checkpoint used as fold init");
  cv->add_option("--out", cv_out, "output directory")->required();
  cv->add_flag("--force", cv_force, "overwrite a non-empty output directory");
  cv->add_option("--jobs", cv_jobs, "parallel fold workers (default 1)");
  cv_cfg.attach(cv);

  // pretrain
  auto* pre = app.add_subcommand("pretrain",
                                 "train on the groups opposite a target");
  ConfigArgs pre_cfg;
  DataArgs pre_data;
  std::string pre_exclude, pre_scheme = "round", pre_out;
  pre_data.attach(pre);
  pre->add_option("--exclude-group", pre_exclude,
                  "target group to exclude (FirstLeft, FirstRight, "
                  "SecondLeft, SecondRight)")
      ->required();
  pre->add_option("--scheme", pre_scheme, "round or pocket (default round)");
  pre->add_option("--out", pre_out, "output checkpoint file")->required();
  pre_cfg.attach(pre);

  // explain
  auto* ex = app.add_subcommand("explain",
                                "optimize node/edge masks for checkpoints");
  ConfigArgs ex_cfg;
  DataArgs ex_data;
  std::vector<std::string> ex_models;
  std::string ex_out;
  ex->add_option("--model", ex_models, "model checkpoint(s)")
      ->required()
      ->expected(-1);
  ex_data.attach(ex);
  ex->add_option("--out", ex_out, "output directory")->required();
  ex_cfg.attach(ex);

  // compare-maps
  auto* cmp = app.add_subcommand("compare-maps",
                                 "sliced distances between contribution maps");
  ConfigArgs cmp_cfg;
  std::vector<std::string> cmp_maps;
  std::string cmp_out;
  cmp->add_option("--maps", cmp_maps, "contribution map CSVs")
      ->required()
      ->expected(-1);
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp_cfg.attach(cmp);

  // balance
  auto* bal = app.add_subcommand(
      "balance", "funnel/margin exclusion and class equalization");
  ConfigArgs bal_cfg;
  DataArgs bal_data;
  std::string bal_out;
  bal_data.attach(bal);
  bal->add_option("--out", bal_out, "output epoch file")->required();
  bal_cfg.attach(bal);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (gen->parsed()) {
    ConfigArgs args = gen_cfg;
    if (!gen_spec.empty()) args.config_path = gen_spec;
    ConfigHandle cfg{args.build()};
    DatasetHandle ds{ng_dataset_generate(cfg.ptr)};
    if (!ds.ptr) die(NG_ERR_INVALID);
    ng_status s = ng_dataset_write(ds.ptr, gen_out.c_str());
    if (s != NG_OK) die(s);
    std::printf("wrote %ld epochs to %s\n", ng_dataset_count(ds.ptr),
                gen_out.c_str());
    return 0;
  }

  if (cv->parsed()) {
    ConfigHandle cfg{cv_cfg.build()};
    DatasetHandle ds{cv_data.load()};
    double mean_acc = 0.0;
    ng_status s = ng_run_crossval(
        ds.ptr, cfg.ptr, cv_pretrain.empty() ? nullptr : cv_pretrain.c_str(),
        cv_out.c_str(), cv_force ? 1 : 0, cv_jobs, &mean_acc);
    if (s != NG_OK) die(s);
    std::printf("mean accuracy %.4f; outputs in %s\n", mean_acc,
                cv_out.c_str());
    return 0;
  }

  if (pre->parsed()) {
    ConfigHandle cfg{pre_cfg.build()};
    DatasetHandle ds{pre_data.load()};
    ng_status s = ng_run_pretrain(ds.ptr, cfg.ptr, pre_exclude.c_str(),
                                  pre_scheme.c_str(), pre_out.c_str());
    if (s != NG_OK) die(s);
    std::printf("wrote checkpoint %s\n", pre_out.c_str());
    return 0;
  }

  if (ex->parsed()) {
    ConfigHandle cfg{ex_cfg.build()};
    DatasetHandle ds{ex_data.load()};
    for (const auto& model : ex_models) {
      ng_status s =
          ng_run_explain(model.c_str(), ds.ptr, cfg.ptr, ex_out.c_str());
      if (s != NG_OK) die(s);
    }
    std::printf("explained %zu checkpoint(s) into %s\n", ex_models.size(),
                ex_out.c_str());
    return 0;
  }

  if (cmp->parsed()) {
    ConfigHandle cfg{cmp_cfg.build()};
    std::vector<const char*> paths;
    paths.reserve(cmp_maps.size());
    for (const auto& p : cmp_maps) paths.push_back(p.c_str());
    ng_status s = ng_run_compare_maps(paths.data(), paths.size(), cfg.ptr,
                                      cmp_out.c_str());
    if (s != NG_OK) die(s);
    std::printf("compared %zu maps into %s\n", cmp_maps.size(),
                cmp_out.c_str());
    return 0;
  }

  if (bal->parsed()) {
    ConfigHandle cfg{bal_cfg.build()};
    DatasetHandle ds{bal_data.load()};
    // read the balance parameters back out of the config
    size_t needed = 0;
    ng_config_dump(cfg.ptr, nullptr, 0, &needed);
    std::string text(needed, '\0');
    ng_config_dump(cfg.ptr, text.data(), text.size(), &needed);
    auto value_of = [&text](const std::string& key) {
      auto pos = text.find(key + "=");
      auto end = text.find('\n', pos);
      return text.substr(pos + key.size() + 1, end - pos - key.size() - 1);
    };
    double funnel = std::stod(value_of("balance.funnel_halfwidth_deg"));
    double margin = std::stod(value_of("balance.margin_deg"));
    int per_participant =
        value_of("balance.per_participant") == "true" ? 1 : 0;
    DatasetHandle balanced{
        ng_dataset_balance(ds.ptr, funnel, margin, per_participant)};
    if (!balanced.ptr) die(NG_ERR_INVALID);
    ng_status s = ng_dataset_write(balanced.ptr, bal_out.c_str());
    if (s != NG_OK) die(s);
    std::printf("kept %ld of %ld epochs; wrote %s\n",
                ng_dataset_count(balanced.ptr), ng_dataset_count(ds.ptr),
                bal_out.c_str());
    return 0;
  }

  return kExitUsage;
}
