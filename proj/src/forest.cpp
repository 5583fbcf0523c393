#include "dhde/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dhde/error.hpp"
#include "dhde/random.hpp"
#include "dhde/stats.hpp"

namespace dhde::forest {
namespace {

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double proxy = 0.0;  // sL^2/nL + sR^2/nR, larger is better
};

// Tie-break: higher proxy, then lower column index, then lower threshold.
bool better(const Split& cand, const Split& best) {
  if (!best.found) return true;
  if (cand.proxy != best.proxy) return cand.proxy > best.proxy;
  if (cand.feature != best.feature) return cand.feature < best.feature;
  return cand.threshold < best.threshold;
}

struct Frame {
  std::size_t begin, end;
  int node;
  std::size_t depth;
};

double r2_score(const Eigen::VectorXd& actual, const Eigen::VectorXd& pred) {
  return stats::r_squared({actual.data(), static_cast<std::size_t>(actual.size())},
                          {pred.data(), static_cast<std::size_t>(pred.size())});
}

}  // namespace

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const Node& nd = nodes_[static_cast<std::size_t>(i)];
    i = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return nodes_[static_cast<std::size_t>(i)].value;
}

Tree Tree::grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                std::size_t max_features, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  Rng rng(seed);

  std::vector<std::size_t> samples(n);
  for (auto& s : samples) s = static_cast<std::size_t>(rng.below(n));

  Tree tree;
  tree.nodes_.push_back({});
  std::vector<Frame> stack{{0, n, 0, 0}};
  std::vector<std::pair<double, std::size_t>> work;  // (value, sample) sorted per feature
  std::vector<std::size_t> features(p);

  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const std::size_t m = f.end - f.begin;
    tree.depth_ = std::max(tree.depth_, f.depth);

    double sum = 0.0, lo = y(static_cast<Eigen::Index>(samples[f.begin])), hi = lo;
    for (std::size_t i = f.begin; i < f.end; ++i) {
      const double v = y(static_cast<Eigen::Index>(samples[i]));
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    tree.nodes_[static_cast<std::size_t>(f.node)].value = sum / static_cast<double>(m);

    const bool depth_capped = params.max_depth && f.depth >= *params.max_depth;
    if (m < params.min_samples_split || m < 2 * params.min_samples_leaf || depth_capped || lo == hi) continue;

    // Features are drawn without replacement until max_features non-constant
    // ones have been evaluated.
    std::iota(features.begin(), features.end(), std::size_t{0});
    Split best;
    std::size_t evaluated = 0;
    for (std::size_t drawn = 0; drawn < p && evaluated < max_features; ++drawn) {
      const std::size_t pick = drawn + static_cast<std::size_t>(rng.below(p - drawn));
      std::swap(features[drawn], features[pick]);
      const std::size_t feat = features[drawn];

      work.clear();
      for (std::size_t i = f.begin; i < f.end; ++i) {
        work.emplace_back(x(static_cast<Eigen::Index>(samples[i]), static_cast<Eigen::Index>(feat)), samples[i]);
      }
      std::sort(work.begin(), work.end());
      if (work.front().first == work.back().first) continue;
      ++evaluated;

      double left = 0.0;
      for (std::size_t i = 1; i < m; ++i) {
        left += y(static_cast<Eigen::Index>(work[i - 1].second));
        if (work[i - 1].first == work[i].first) continue;
        if (i < params.min_samples_leaf || m - i < params.min_samples_leaf) continue;
        const double right = sum - left;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(m - i);
        Split cand{true, static_cast<int>(feat), 0.5 * (work[i - 1].first + work[i].first),
                   left * left / nl + right * right / nr};
        if (cand.threshold >= work[i].first) cand.threshold = work[i - 1].first;
        if (better(cand, best)) best = cand;
      }
    }
    if (!best.found) continue;

    const auto mid = std::stable_partition(
        samples.begin() + static_cast<std::ptrdiff_t>(f.begin), samples.begin() + static_cast<std::ptrdiff_t>(f.end),
        [&](std::size_t s) {
          return x(static_cast<Eigen::Index>(s), best.feature) <= best.threshold;
        });
    const auto split_at = static_cast<std::size_t>(mid - samples.begin());

    const int left_id = static_cast<int>(tree.nodes_.size());
    tree.nodes_.push_back({});
    tree.nodes_.push_back({});
    Node& nd = tree.nodes_[static_cast<std::size_t>(f.node)];
    nd.feature = best.feature;
    nd.threshold = best.threshold;
    nd.left = left_id;
    nd.right = left_id + 1;
    stack.push_back({split_at, f.end, left_id + 1, f.depth + 1});
    stack.push_back({f.begin, split_at, left_id, f.depth + 1});
  }
  return tree;
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x, Exec exec) const {
  if (static_cast<std::size_t>(x.cols()) != names.size()) throw UsageError("forest predict: column count differs");
  // Rows are visited in blocks with the tree loop outside, so each tree stays
  // in cache for the whole block. Every row still sums its trees in order.
  constexpr long kBlock = 128;
  const long n = static_cast<long>(x.rows());
  const long blocks = (n + kBlock - 1) / kBlock;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long b = 0; b < blocks; ++b) {
    const long lo = b * kBlock, hi = std::min(n, lo + kBlock);
    for (const Tree& t : trees) {
      const auto& nodes = t.nodes();
      for (long r = lo; r < hi; ++r) {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
          const Node& nd = nodes[static_cast<std::size_t>(i)];
          i = x(r, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        out(r) += nodes[static_cast<std::size_t>(i)].value;
      }
    }
  }
  return out / static_cast<double>(trees.size());
}

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                       const ForestParams& params, std::uint64_t seed, Exec exec) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (n < 10) throw NumericalError("fit_forest: need at least 10 rows");
  if (names.size() != p || static_cast<std::size_t>(y.size()) != n) throw UsageError("fit_forest: shape mismatch");
  if (params.n_trees == 0) throw UsageError("fit_forest: n_trees must be positive");
  if (params.min_samples_leaf == 0) throw UsageError("fit_forest: min_samples_leaf must be positive");
  if ((y.array() == y(0)).all()) throw NumericalError("fit_forest: constant target");

  ForestModel model;
  model.names = names;
  model.params = params;
  model.seed = seed;
  model.max_features = params.max_features.value_or(std::max<std::size_t>(1, p / 3));
  model.max_features = std::clamp<std::size_t>(model.max_features, 1, p);
  model.trees.resize(params.n_trees);

  const long trees = static_cast<long>(params.n_trees);
  LoopErrors errors;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long i = 0; i < trees; ++i) {
    errors.capture(static_cast<std::size_t>(i), [&] {
      model.trees[static_cast<std::size_t>(i)] =
          Tree::grow(x, y, params, model.max_features, derive_seed(seed, static_cast<std::uint64_t>(i)));
    });
  }
  errors.rethrow();
  return model;
}

std::vector<std::vector<std::size_t>> kfold_splits(std::size_t n, std::size_t k, FoldMode mode, std::uint64_t seed) {
  if (k < 2) throw UsageError("kfold: k must be at least 2");
  if (n < k) throw UsageError("kfold: fewer rows than folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == FoldMode::shuffled) {
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

CvResult kfold_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                  const ForestParams& params, std::size_t k, FoldMode mode, std::uint64_t seed, Exec exec) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k < 2) throw UsageError("kfold_cv: k must be at least 2");
  if (n < 5 * k) throw NumericalError("kfold_cv: need at least 5k rows");
  const auto folds = kfold_splits(n, k, mode, derive_seed(seed, 0xF01D));

  CvResult res;
  res.mode = mode;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<bool> in_test(n, false);
    for (std::size_t i : folds[f]) in_test[i] = true;
    std::vector<Eigen::Index> train_idx, test_idx;
    for (std::size_t i = 0; i < n; ++i) (in_test[i] ? test_idx : train_idx).push_back(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd xtr = x(train_idx, Eigen::all);
    const Eigen::VectorXd ytr = y(train_idx);
    const Eigen::MatrixXd xte = x(test_idx, Eigen::all);
    const Eigen::VectorXd yte = y(test_idx);
    const ForestModel model = fit_forest(xtr, ytr, names, params, derive_seed(seed, f), exec);
    res.fold_r2.push_back(r2_score(yte, model.predict(xte, exec)));
  }
  res.mean = stats::mean(res.fold_r2);
  res.std = stats::sd_pop(res.fold_r2);
  return res;
}

ImportanceReport permutation_importance(const ForestModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        std::size_t repeats, std::uint64_t seed, Exec exec) {
  if (repeats < 1) throw UsageError("permutation_importance: repeats must be at least 1");
  const long p = static_cast<long>(x.cols());
  if (static_cast<std::size_t>(p) != model.names.size()) throw UsageError("permutation_importance: column count differs");
  ImportanceReport rep;
  rep.repeats = repeats;
  rep.baseline_r2 = r2_score(y, model.predict(x, exec));
  rep.features.resize(static_cast<std::size_t>(p));

  LoopErrors errors;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long j = 0; j < p; ++j) {
    errors.capture(static_cast<std::size_t>(j), [&] {
      Eigen::MatrixXd shuffled = x;
      std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
      ImportanceEntry& e = rep.features[static_cast<std::size_t>(j)];
      e.name = model.names[static_cast<std::size_t>(j)];
      for (std::size_t r = 0; r < repeats; ++r) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j), r));
        rng.shuffle(std::span<Eigen::Index>(order));
        shuffled.col(j) = x.col(j)(order);
        e.drops.push_back(rep.baseline_r2 - r2_score(y, model.predict(shuffled, Exec::serial)));
      }
      e.mean = stats::mean(e.drops);
      e.std = stats::sd_pop(e.drops);
    });
  }
  errors.rethrow();

  rep.ranking.resize(static_cast<std::size_t>(p));
  std::iota(rep.ranking.begin(), rep.ranking.end(), std::size_t{0});
  std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return rep.features[a].mean > rep.features[b].mean; });
  for (std::size_t i = 0; i < rep.ranking.size(); ++i) rep.features[rep.ranking[i]].rank = i + 1;
  return rep;
}

}  // namespace dhde::forest
