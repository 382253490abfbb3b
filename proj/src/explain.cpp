#include "neurograph/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "neurograph/error.hpp"
#include "neurograph/trainer.hpp"

namespace ng {

namespace {
double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

void check_masks(const GnnClassifier& model, const MaskSet& masks) {
  if (masks.node_logits.size() != model.node_count())
    fail_invalid("node mask size " + std::to_string(masks.node_logits.size()) +
                 " does not match channel count " +
                 std::to_string(model.node_count()));
  auto edges = model.graph().edges();
  if (masks.edge_list != edges || masks.edge_logits.size() != edges.size())
    fail_invalid("edge mask list does not match the model graph");
}
}  // namespace

std::vector<double> MaskSet::node_masks() const {
  std::vector<double> m(node_logits.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = sigmoid(node_logits[i]);
  return m;
}

std::vector<double> MaskSet::edge_masks() const {
  std::vector<double> m(edge_logits.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = sigmoid(edge_logits[i]);
  return m;
}

MaskSet MaskSet::init_for(const GnnClassifier& model, std::uint64_t seed,
                          double logit_stdev) {
  MaskSet masks;
  masks.edge_list = model.graph().edges();
  masks.node_logits = Tensor({model.node_count()});
  masks.edge_logits = Tensor({masks.edge_list.size()});
  Rng rng(Rng::mix(seed ^ 0x6d61736bULL));  // "mask"
  for (std::size_t i = 0; i < masks.node_logits.size(); ++i)
    masks.node_logits[i] = rng.normal(0.0, logit_stdev);
  for (std::size_t i = 0; i < masks.edge_logits.size(); ++i)
    masks.edge_logits[i] = rng.normal(0.0, logit_stdev);
  return masks;
}

namespace {
Tensor masked_adjacency(const GnnClassifier& model, const MaskSet& masks) {
  Tensor adj = model.graph().adjacency;
  auto em = masks.edge_masks();
  for (std::size_t e = 0; e < masks.edge_list.size(); ++e) {
    auto [i, j] = masks.edge_list[e];
    adj.at2(i, j) *= em[e];
    adj.at2(j, i) *= em[e];
  }
  return adj;
}
}  // namespace

Tensor masked_forward(const GnnClassifier& model, const MaskSet& masks,
                      const Tensor& batch, ForwardTrace* trace) {
  check_masks(model, masks);
  Tensor adj = masked_adjacency(model, masks);
  Tensor ltilde = model.ltilde_for(adj, model.spectral().lambda_max);
  auto node_scale = masks.node_masks();
  return model.forward_with(batch, ltilde, &node_scale, /*train_bn=*/false,
                            nullptr, trace);
}

double binary_entropy(double m) {
  m = std::clamp(m, 1e-7, 1.0 - 1e-7);
  return -m * std::log(m) - (1.0 - m) * std::log(1.0 - m);
}

ExplainLossTerms explain_loss(const MaskSet& masks,
                              const Tensor& masked_logits,
                              const std::vector<int>& reference_labels,
                              const ExplainConfig& cfg) {
  ExplainLossTerms terms;
  CeResult ce =
      weighted_cross_entropy(masked_logits, reference_labels, {1.0, 1.0});
  terms.ces = ce.loss;

  auto nm = masks.node_masks();
  auto em = masks.edge_masks();
  for (double m : nm) {
    terms.nms += m;
    terms.nme += binary_entropy(m);
  }
  terms.nms /= static_cast<double>(nm.size());
  terms.nme /= static_cast<double>(nm.size());
  if (!em.empty()) {
    for (double m : em) {
      terms.ems += m;
      terms.eme += binary_entropy(m);
    }
    terms.ems /= static_cast<double>(em.size());
    terms.eme /= static_cast<double>(em.size());
  }
  terms.total = cfg.coeff_ces * terms.ces + cfg.coeff_nms * terms.nms +
                cfg.coeff_ems * terms.ems + cfg.coeff_nme * terms.nme +
                cfg.coeff_eme * terms.eme;
  return terms;
}

MaskGradients explain_gradients(const GnnClassifier& model,
                                const MaskSet& masks, const Tensor& batch,
                                const std::vector<int>& reference_labels,
                                const ExplainConfig& cfg) {
  check_masks(model, masks);
  const std::size_t c = model.node_count();
  const std::size_t n_edges = masks.edge_list.size();

  MaskGradients g;
  g.node_logits = Tensor({c});
  g.edge_logits = Tensor({n_edges});

  ForwardTrace tr;
  Tensor logits = masked_forward(model, masks, batch, &tr);
  g.terms = explain_loss(masks, logits, reference_labels, cfg);

  CeResult ce = weighted_cross_entropy(logits, reference_labels, {1.0, 1.0});
  Tensor dlogits = ce.dlogits;
  for (std::size_t i = 0; i < dlogits.size(); ++i) dlogits[i] *= cfg.coeff_ces;

  Tensor dltilde({c, c});
  auto& m = const_cast<GnnClassifier&>(model);
  m.zero_grads();
  m.backprop(tr, dlogits, /*train_bn=*/false, &dltilde);

  // node masks: trace input is s_c * x, so ds_c = sum over the channel row
  // of input_grad * original input
  auto nm = masks.node_masks();
  const std::size_t n = batch.dim(0), t = batch.dim(2);
  for (std::size_t ci = 0; ci < c; ++ci) {
    double ds = 0.0;
    for (std::size_t in = 0; in < n; ++in) {
      const double* gx = tr.input_grad.data() + (in * c + ci) * t;
      const double* x = batch.data() + (in * c + ci) * t;
      for (std::size_t s = 0; s < t; ++s) ds += gx[s] * x[s];
    }
    const double mval = nm[ci];
    const double dsig = mval * (1.0 - mval);
    double dz = ds * dsig;
    dz += cfg.coeff_nms * dsig / static_cast<double>(c);
    if (mval > 1e-7 && mval < 1.0 - 1e-7)
      dz += cfg.coeff_nme * (-masks.node_logits[ci]) * dsig /
            static_cast<double>(c);
    g.node_logits[ci] = dz;
  }

  // edge masks: chain through L' = D' - A', Ltilde = 2 L'/lambda - I with
  // lambda pinned; both triangle entries of the edge contribute
  auto em = masks.edge_masks();
  const double lam = model.spectral().lambda_max;
  for (std::size_t e = 0; e < n_edges; ++e) {
    auto [i, j] = masks.edge_list[e];
    const double w = model.graph().adjacency.at2(i, j);
    double dadj = (2.0 / lam) * (dltilde.at2(i, i) - dltilde.at2(i, j)) +
                  (2.0 / lam) * (dltilde.at2(j, j) - dltilde.at2(j, i));
    const double mval = em[e];
    const double dsig = mval * (1.0 - mval);
    double dz = w * dadj * dsig;
    dz += cfg.coeff_ems * dsig / static_cast<double>(n_edges);
    if (mval > 1e-7 && mval < 1.0 - 1e-7)
      dz += cfg.coeff_eme * (-masks.edge_logits[e]) * dsig /
            static_cast<double>(n_edges);
    g.edge_logits[e] = dz;
  }
  return g;
}

ExplainResult optimize_masks(const GnnClassifier& model,
                             const EpochDataset& ds,
                             const ExplainConfig& cfg) {
  ds.validate();
  if (ds.epochs.empty()) fail_invalid("optimize_masks on an empty dataset");
  if (cfg.learning_rate <= 0.0) fail_invalid("mask learning rate must be > 0");

  const std::size_t total = ds.epochs.size();
  const std::size_t c = model.node_count();
  const std::size_t t = ds.window_samples();
  const std::size_t chunk = 256;

  // reference labels: the frozen model's own unmasked predictions unless
  // true labels were requested
  std::vector<int> reference(total);
  {
    std::size_t pos = 0;
    while (pos < total) {
      std::size_t count = std::min(chunk, total - pos);
      Tensor batch({count, c, t});
      for (std::size_t i = 0; i < count; ++i)
        std::copy(ds.epochs[pos + i].signal.data(),
                  ds.epochs[pos + i].signal.data() + c * t,
                  batch.data() + i * c * t);
      if (cfg.target_true_labels) {
        for (std::size_t i = 0; i < count; ++i)
          reference[pos + i] = ds.epochs[pos + i].label;
      } else {
        Tensor logits = model.forward_eval(batch);
        for (std::size_t i = 0; i < count; ++i)
          reference[pos + i] = logits.at2(i, 1) > logits.at2(i, 0) ? 1 : 0;
      }
      pos += count;
    }
  }

  ExplainResult result;
  result.masks = MaskSet::init_for(model, cfg.seed, cfg.mask_init_stdev);

  TrainConfig opt_cfg;
  opt_cfg.learning_rate = cfg.learning_rate;
  opt_cfg.weight_decay = 0.0;
  opt_cfg.epochs = 1;
  Tensor node_grad({result.masks.node_logits.size()});
  Tensor edge_grad({result.masks.edge_logits.size()});
  std::vector<ParamRef> mask_params = {
      {"masks.node_logits", &result.masks.node_logits, &node_grad},
      {"masks.edge_logits", &result.masks.edge_logits, &edge_grad}};
  AdamOptimizer adam(mask_params, opt_cfg);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    node_grad.zero();
    edge_grad.zero();
    ExplainLossTerms terms;
    std::size_t pos = 0;
    while (pos < total) {
      std::size_t count = std::min(chunk, total - pos);
      Tensor batch({count, c, t});
      std::vector<int> ref(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::copy(ds.epochs[pos + i].signal.data(),
                  ds.epochs[pos + i].signal.data() + c * t,
                  batch.data() + i * c * t);
        ref[i] = reference[pos + i];
      }
      MaskGradients g =
          explain_gradients(model, result.masks, batch, ref, cfg);
      const double frac =
          static_cast<double>(count) / static_cast<double>(total);
      for (std::size_t i = 0; i < node_grad.size(); ++i) {
        // classification term averages per chunk; rescale to the full set.
        // size/entropy terms do not depend on the batch; weight by frac so
        // chunks sum to one application.
        node_grad[i] += g.node_logits[i] * frac;
      }
      for (std::size_t i = 0; i < edge_grad.size(); ++i)
        edge_grad[i] += g.edge_logits[i] * frac;
      terms.ces += g.terms.ces * frac;
      terms.nms = g.terms.nms;
      terms.ems = g.terms.ems;
      terms.nme = g.terms.nme;
      terms.eme = g.terms.eme;
      pos += count;
    }
    terms.total = cfg.coeff_ces * terms.ces + cfg.coeff_nms * terms.nms +
                  cfg.coeff_ems * terms.ems + cfg.coeff_nme * terms.nme +
                  cfg.coeff_eme * terms.eme;
    if (!std::isfinite(terms.total)) {
      std::ostringstream msg;
      msg << "mask optimization diverged at epoch " << epoch + 1
          << "; loss history:";
      for (const auto& h : result.history) msg << " " << h.total;
      fail_numeric(msg.str());
    }
    result.history.push_back(terms);
    adam.step();
  }
  return result;
}

ContributionMap contribution_map(const MaskSet& masks,
                                 const ChannelLayout& layout) {
  layout.validate();
  if (masks.node_logits.size() != layout.count())
    fail_invalid("mask/layout channel count mismatch");
  ContributionMap map;
  map.layout = layout;
  map.edges = masks.edge_list;
  map.edge_scores = masks.edge_masks();

  auto nm = masks.node_masks();
  const double c = static_cast<double>(nm.size());
  double mean = 0.0;
  for (double m : nm) mean += m;
  mean /= c;
  double var = 0.0;
  for (double m : nm) var += (m - mean) * (m - mean);
  var /= c;
  double stdev = std::sqrt(var);
  map.scores.assign(nm.size(), 0.0);
  if (stdev < 1e-12) {
    map.degenerate = true;
    warn("contribution map: all masks equal, scores set to zero");
    return map;
  }
  for (std::size_t i = 0; i < nm.size(); ++i)
    map.scores[i] = (nm[i] - mean) / stdev;
  return map;
}

void save_map_csv(const ContributionMap& map, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail_io("cannot write map csv: " + path);
  os << "channel,x,y,z,score\n";
  os.precision(17);
  for (std::size_t i = 0; i < map.layout.count(); ++i) {
    const auto& ch = map.layout.channels[i];
    os << ch.name << "," << ch.pos[0] << "," << ch.pos[1] << "," << ch.pos[2]
       << "," << map.scores[i] << "\n";
  }
  if (!os) fail_io("write failed: " + path);
}

ContributionMap load_map_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail_io("cannot open map csv: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "channel,x,y,z,score")
    fail_io(path + ": expected header channel,x,y,z,score");
  ContributionMap map;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string name, sx, sy, sz, sscore;
    if (!std::getline(ss, name, ',') || !std::getline(ss, sx, ',') ||
        !std::getline(ss, sy, ',') || !std::getline(ss, sz, ',') ||
        !std::getline(ss, sscore))
      fail_io(path + ": bad row at line " + std::to_string(lineno));
    Channel ch;
    ch.name = name;
    ch.pos = {std::stod(sx), std::stod(sy), std::stod(sz)};
    map.layout.channels.push_back(std::move(ch));
    map.scores.push_back(std::stod(sscore));
  }
  map.layout.head_radius = map.layout.max_norm();
  map.layout.validate();
  return map;
}

}  // namespace ng
