#ifndef NEUROGRAPH_EXPLAIN_HPP
#define NEUROGRAPH_EXPLAIN_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "neurograph/data.hpp"
#include "neurograph/model.hpp"

namespace ng {

// Learnable sigmoid masks over channels and undirected edges of a frozen
// model's graph.
struct MaskSet {
  Tensor node_logits;  // C
  Tensor edge_logits;  // one per undirected edge, edge_list order
  std::vector<std::pair<std::size_t, std::size_t>> edge_list;

  std::vector<double> node_masks() const;  // sigmoid(node_logits)
  std::vector<double> edge_masks() const;

  static MaskSet init_for(const GnnClassifier& model, std::uint64_t seed,
                          double logit_stdev = 0.1);
};

struct ExplainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 100;
  // loss = ces*L_CES + nms*L_NMS + ems*L_EMS + nme*L_NME + eme*L_EME
  double coeff_ces = 1.0;
  double coeff_nms = 1.0;
  double coeff_ems = 1.0;
  double coeff_nme = 1.0;
  double coeff_eme = 1.0;
  // false: classification target is the frozen model's own unmasked
  // predictions; true: the dataset labels.
  bool target_true_labels = false;
  double mask_init_stdev = 0.1;
  std::uint64_t seed = 0;
};

struct ExplainLossTerms {
  double ces = 0.0;  // cross-entropy of masked logits vs reference labels
  double nms = 0.0;  // node mask size (mean sigmoid)
  double ems = 0.0;  // edge mask size
  double nme = 0.0;  // node mask binary entropy
  double eme = 0.0;  // edge mask binary entropy
  double total = 0.0;
};

// Forward with inputs scaled by node masks and adjacency scaled by edge
// masks; the Laplacian is recomputed from the masked adjacency while
// lambda_max stays pinned to the unmasked graph (masks only shrink weights,
// so the rescaled spectrum stays inside [-1, 1] and the mask gradient needs
// no eigenvalue term).
Tensor masked_forward(const GnnClassifier& model, const MaskSet& masks,
                      const Tensor& batch, ForwardTrace* trace = nullptr);

double binary_entropy(double m);  // clamped to [1e-7, 1 - 1e-7]

ExplainLossTerms explain_loss(const MaskSet& masks,
                              const Tensor& masked_logits,
                              const std::vector<int>& reference_labels,
                              const ExplainConfig& cfg);

struct ExplainResult {
  MaskSet masks;
  std::vector<ExplainLossTerms> history;  // one entry per optimizer epoch
};

// Adam on the mask logits only, jointly over every epoch in ds; model
// weights are never touched (verified by checksum in the tests).
ExplainResult optimize_masks(const GnnClassifier& model,
                             const EpochDataset& ds,
                             const ExplainConfig& cfg);

// Gradient of the total explain loss w.r.t. the mask logits; exposed so the
// finite-difference tests can target it directly.
struct MaskGradients {
  Tensor node_logits;
  Tensor edge_logits;
  ExplainLossTerms terms;
};
MaskGradients explain_gradients(const GnnClassifier& model,
                                const MaskSet& masks, const Tensor& batch,
                                const std::vector<int>& reference_labels,
                                const ExplainConfig& cfg);

// Standardized per-channel importances (z-scored sigmoid node masks).
struct ContributionMap {
  ChannelLayout layout;
  std::vector<double> scores;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<double> edge_scores;  // raw sigmoid edge masks
  bool degenerate = false;          // constant masks; scores all zero
};

ContributionMap contribution_map(const MaskSet& masks,
                                 const ChannelLayout& layout);

// CSV round-trip: `channel,x,y,z,score` rows (edge scores not persisted).
void save_map_csv(const ContributionMap& map, const std::string& path);
ContributionMap load_map_csv(const std::string& path);

}  // namespace ng

#endif
