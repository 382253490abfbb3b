#ifndef NEUROGRAPH_PIPELINE_HPP
#define NEUROGRAPH_PIPELINE_HPP

#include <string>
#include <vector>

#include "neurograph/config.hpp"
#include "neurograph/data.hpp"
#include "neurograph/explain.hpp"
#include "neurograph/mapgeo.hpp"
#include "neurograph/trainer.hpp"

namespace ng {

// Architecture resolved against the dataset: fs and window come from the
// data; kernel 0 in the config derives fs/2.
ArchConfig resolved_arch(const RunConfig& cfg, const EpochDataset& ds);

void write_history_csv(const std::vector<EpochStat>& history,
                       const std::string& path);
// fold,accuracy,precision,recall,f1 rows plus mean and stdev
void write_metrics_csv(const CvResult& cv, const std::string& path);

struct CrossvalOptions {
  std::string pretrain_checkpoint;  // empty: random init
  bool force = false;               // overwrite a non-empty out dir
  std::size_t jobs = 1;
};

// Writes metrics.csv, per-fold history and checkpoints under out_dir;
// returns the fold-averaged metrics.
Metrics run_crossval(const EpochDataset& ds, const RunConfig& cfg,
                     const CrossvalOptions& opt, const std::string& out_dir);

// Trains on the two groups opposite `exclude` and writes the checkpoint to
// out_path plus training history to out_path + ".history.csv".
void run_pretrain(const EpochDataset& ds, const RunConfig& cfg, Group exclude,
                  PretrainScheme scheme, const std::string& out_path);

// Optimizes masks for one checkpoint over ds; writes <stem>.map.csv,
// <stem>.map.svg and <stem>.loss.csv under out_dir.
void run_explain(const std::string& model_path, const EpochDataset& ds,
                 const RunConfig& cfg, const std::string& out_dir);

// Distance matrix over the given map CSVs (labels = file stems). When every
// stem parses as <Group>_<round|pocket>_<init|final>, also writes the
// boxplot groupings and the nonparametric test table.
void run_compare_maps(const std::vector<std::string>& map_paths,
                      const RunConfig& cfg, const std::string& out_dir);

// Self-contained topographic SVG: inverse-distance-weighted interpolation
// on a 64x64 grid inside the head circle, diverging color ramp.
void save_topomap_svg(const ContributionMap& map, const std::string& path);

}  // namespace ng

#endif
