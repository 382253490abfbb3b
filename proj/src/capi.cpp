#include "neurograph.h"

#include <cstring>
#include <exception>
#include <string>

#include "neurograph/config.hpp"
#include "neurograph/data.hpp"
#include "neurograph/error.hpp"
#include "neurograph/pipeline.hpp"

#define NG_API __attribute__((visibility("default")))

namespace {

thread_local std::string t_last_error = "no error";

ng_status status_of(const ng::Error& e) {
  switch (e.kind()) {
    case ng::ErrorKind::invalid: return NG_ERR_INVALID;
    case ng::ErrorKind::io: return NG_ERR_IO;
    case ng::ErrorKind::numeric: return NG_ERR_NUMERIC;
  }
  return NG_ERR_INVALID;
}

template <typename Fn>
ng_status guarded(Fn&& fn) {
  try {
    fn();
    return NG_OK;
  } catch (const ng::Error& e) {
    t_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return NG_ERR_INVALID;
  } catch (...) {
    t_last_error = "unknown error";
    return NG_ERR_INVALID;
  }
}

template <typename T, typename Fn>
T* guarded_make(Fn&& fn) {
  try {
    return fn();
  } catch (const ng::Error& e) {
    t_last_error = e.what();
    return nullptr;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return nullptr;
  } catch (...) {
    t_last_error = "unknown error";
    return nullptr;
  }
}

bool require(bool cond, const char* msg) {
  if (!cond) t_last_error = msg;
  return cond;
}

}  // namespace

struct ng_config {
  ng::RunConfig cfg;
};

struct ng_dataset {
  ng::EpochDataset ds;
};

extern "C" {

NG_API const char* ng_version(void) { return "1.0.0"; }

NG_API const char* ng_last_error(void) { return t_last_error.c_str(); }

NG_API ng_config* ng_config_default(void) {
  return guarded_make<ng_config>([] { return new ng_config{ng::RunConfig()}; });
}

NG_API ng_config* ng_config_read(const char* path) {
  if (!require(path != nullptr, "path is NULL")) return nullptr;
  return guarded_make<ng_config>(
      [&] { return new ng_config{ng::RunConfig::from_file(path)}; });
}

NG_API ng_status ng_config_set(ng_config* cfg, const char* key,
                               const char* value) {
  if (!require(cfg && key && value, "NULL argument")) return NG_ERR_INVALID;
  return guarded([&] { cfg->cfg.set(key, value); });
}

NG_API ng_status ng_config_dump(const ng_config* cfg, char* buf,
                                size_t buf_len, size_t* needed) {
  if (!require(cfg != nullptr, "cfg is NULL")) return NG_ERR_INVALID;
  return guarded([&] {
    std::string text = cfg->cfg.dump();
    if (needed) *needed = text.size() + 1;
    if (buf && buf_len >= text.size() + 1)
      std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

NG_API void ng_config_destroy(ng_config* cfg) { delete cfg; }

NG_API ng_dataset* ng_dataset_generate(const ng_config* cfg) {
  if (!require(cfg != nullptr, "cfg is NULL")) return nullptr;
  return guarded_make<ng_dataset>([&] {
    return new ng_dataset{ng::generate_synthetic(cfg->cfg.synthetic_spec())};
  });
}

NG_API ng_dataset* ng_dataset_read(const char* path) {
  if (!require(path != nullptr, "path is NULL")) return nullptr;
  return guarded_make<ng_dataset>(
      [&] { return new ng_dataset{ng::load_epochs(path)}; });
}

NG_API ng_dataset* ng_dataset_read_csv(const char* path,
                                       const char* layout_path, double fs) {
  if (!require(path && layout_path, "NULL argument")) return nullptr;
  return guarded_make<ng_dataset>([&] {
    ng::ChannelLayout layout = ng::load_layout(layout_path);
    return new ng_dataset{ng::load_epochs_csv(path, layout, fs)};
  });
}

NG_API ng_status ng_dataset_write(const ng_dataset* ds, const char* path) {
  if (!require(ds && path, "NULL argument")) return NG_ERR_INVALID;
  return guarded([&] { ng::save_epochs(ds->ds, path); });
}

NG_API ng_dataset* ng_dataset_balance(const ng_dataset* ds,
                                      double funnel_halfwidth_deg,
                                      double margin_deg, int per_participant) {
  if (!require(ds != nullptr, "ds is NULL")) return nullptr;
  return guarded_make<ng_dataset>([&] {
    return new ng_dataset{ng::balance_dataset(
        ds->ds, funnel_halfwidth_deg, margin_deg, per_participant != 0)};
  });
}

NG_API long ng_dataset_count(const ng_dataset* ds) {
  if (!require(ds != nullptr, "ds is NULL")) return -1;
  return static_cast<long>(ds->ds.epochs.size());
}

NG_API void ng_dataset_destroy(ng_dataset* ds) { delete ds; }

NG_API ng_status ng_run_crossval(const ng_dataset* ds, const ng_config* cfg,
                                 const char* pretrain_ckpt,
                                 const char* out_dir, int force, int jobs,
                                 double* mean_accuracy) {
  if (!require(ds && cfg && out_dir, "NULL argument")) return NG_ERR_INVALID;
  return guarded([&] {
    ng::CrossvalOptions opt;
    if (pretrain_ckpt) opt.pretrain_checkpoint = pretrain_ckpt;
    opt.force = force != 0;
    opt.jobs = jobs < 1 ? 1 : static_cast<std::size_t>(jobs);
    ng::Metrics mean = ng::run_crossval(ds->ds, cfg->cfg, opt, out_dir);
    if (mean_accuracy) *mean_accuracy = mean.accuracy;
  });
}

NG_API ng_status ng_run_pretrain(const ng_dataset* ds, const ng_config* cfg,
                                 const char* exclude_group, const char* scheme,
                                 const char* out_ckpt) {
  if (!require(ds && cfg && exclude_group && scheme && out_ckpt,
               "NULL argument"))
    return NG_ERR_INVALID;
  return guarded([&] {
    ng::run_pretrain(ds->ds, cfg->cfg, ng::parse_group(exclude_group),
                     ng::parse_scheme(scheme), out_ckpt);
  });
}

NG_API ng_status ng_run_explain(const char* model_ckpt, const ng_dataset* ds,
                                const ng_config* cfg, const char* out_dir) {
  if (!require(model_ckpt && ds && cfg && out_dir, "NULL argument"))
    return NG_ERR_INVALID;
  return guarded(
      [&] { ng::run_explain(model_ckpt, ds->ds, cfg->cfg, out_dir); });
}

NG_API ng_status ng_run_compare_maps(const char* const* map_csv_paths,
                                     size_t n, const ng_config* cfg,
                                     const char* out_dir) {
  if (!require(map_csv_paths && cfg && out_dir, "NULL argument"))
    return NG_ERR_INVALID;
  return guarded([&] {
    std::vector<std::string> paths;
    paths.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      if (!map_csv_paths[i]) ng::fail_invalid("map path is NULL");
      paths.emplace_back(map_csv_paths[i]);
    }
    ng::run_compare_maps(paths, cfg->cfg, out_dir);
  });
}

}  // extern "C"
