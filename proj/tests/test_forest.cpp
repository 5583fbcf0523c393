#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dhde/error.hpp"
#include "dhde/forest.hpp"
#include "dhde/random.hpp"
#include "dhde/synth.hpp"

using namespace dhde;
using namespace dhde::forest;

namespace {

ForestParams small(std::size_t trees) {
  ForestParams p;
  p.n_trees = trees;
  return p;
}

double r2(const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
  const double ss_res = (y - f).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

TEST_CASE("same seed gives identical forests and predictions") {
  const auto d = synth::nonlinear_regression(200, 6, 0.5, 3);
  const auto a = fit_forest(d.x, d.y, d.names, small(20), 99, Exec::serial);
  const auto b = fit_forest(d.x, d.y, d.names, small(20), 99, Exec::serial);
  CHECK(a.predict(d.x) == b.predict(d.x));
  const auto c = fit_forest(d.x, d.y, d.names, small(20), 100, Exec::serial);
  CHECK(a.predict(d.x) != c.predict(d.x));
  CHECK(a.max_features == 2);
}

TEST_CASE("forest prediction is the mean of tree predictions") {
  const auto d = synth::nonlinear_regression(120, 5, 0.5, 4);
  const auto f = fit_forest(d.x, d.y, d.names, small(15), 5);
  const Eigen::VectorXd pred = f.predict(d.x);
  for (Eigen::Index i = 0; i < d.x.rows(); i += 7) {
    double s = 0.0;
    for (const auto& t : f.trees) s += t.predict(d.x.row(i));
    CHECK(pred(i) == doctest::Approx(s / 15.0).epsilon(1e-12));
  }
}

TEST_CASE("trees split left on less-or-equal and respect leaf limits") {
  const auto d = synth::nonlinear_regression(150, 4, 0.5, 5);
  ForestParams p;
  p.min_samples_leaf = 5;
  p.max_depth = 4;
  const Tree t = Tree::grow(d.x, d.y, p, 4, 1);
  CHECK(t.depth() <= 4);
  for (const auto& n : t.nodes()) {
    if (n.feature < 0) continue;
    CHECK(n.left > 0);
    CHECK(n.right > 0);
  }
}

TEST_CASE("a step function is memorised exactly") {
  Eigen::MatrixXd x(60, 1);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    x(i, 0) = static_cast<double>(i);
    y(i) = i < 30 ? 1.0 : 5.0;
  }
  const auto f = fit_forest(x, y, {"x"}, small(50), 2);
  Eigen::MatrixXd probe(4, 1);
  probe << 0, 10, 40, 59;
  const Eigen::VectorXd p = f.predict(probe);
  CHECK(p(0) == 1.0);
  CHECK(p(1) == 1.0);
  CHECK(p(2) == 5.0);
  CHECK(p(3) == 5.0);
}

TEST_CASE("fold splits are disjoint and cover every row") {
  for (FoldMode mode : {FoldMode::shuffled, FoldMode::chronological}) {
    const auto folds = kfold_splits(103, 5, mode, 17);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> all;
    std::size_t total = 0;
    for (std::size_t k = 0; k < folds.size(); ++k) {
      CHECK(folds[k].size() == (k < 3 ? 21u : 20u));
      total += folds[k].size();
      all.insert(folds[k].begin(), folds[k].end());
    }
    CHECK(total == 103);
    CHECK(all.size() == 103);
    CHECK(*all.rbegin() == 102);
    if (mode == FoldMode::chronological) {
      for (const auto& f : folds) CHECK(std::is_sorted(f.begin(), f.end()));
      CHECK(folds[0].front() == 0);
      CHECK(folds[1].front() == 21);
    }
  }
  CHECK(kfold_splits(50, 5, FoldMode::shuffled, 1) == kfold_splits(50, 5, FoldMode::shuffled, 1));
  CHECK(kfold_splits(50, 5, FoldMode::shuffled, 1) != kfold_splits(50, 5, FoldMode::shuffled, 2));
  CHECK_THROWS_AS(kfold_splits(4, 5, FoldMode::shuffled, 1), UsageError);
  CHECK_THROWS_AS(kfold_splits(10, 1, FoldMode::shuffled, 1), UsageError);
}

TEST_CASE("cross-validation on structure and on noise") {
  const auto d = synth::nonlinear_regression(400, 6, 0.5, 6);
  const auto cv = kfold_cv(d.x, d.y, d.names, small(60), 5, FoldMode::shuffled, 7);
  CHECK(cv.fold_r2.size() == 5);
  CHECK(cv.mean > 0.8);
  double m = 0.0;
  for (double v : cv.fold_r2) m += v;
  CHECK(cv.mean == doctest::Approx(m / 5.0));

  Rng rng(8);
  Eigen::MatrixXd x(300, 4);
  Eigen::VectorXd y(300);
  for (auto& v : x.reshaped()) v = rng.uniform();
  for (auto& v : y) v = rng.normal();
  const auto noise = kfold_cv(x, y, {"a", "b", "c", "d"}, small(60), 5, FoldMode::shuffled, 9);
  CHECK(noise.mean < 0.05);
}

TEST_CASE("permutation importance ranks the dominant feature first") {
  const auto d = synth::nonlinear_regression(300, 6, 0.5, 10);
  const auto f = fit_forest(d.x, d.y, d.names, small(60), 11);
  const auto imp = permutation_importance(f, d.x, d.y, 5, 12);
  REQUIRE(imp.features.size() == 6);
  CHECK(imp.ranking.front() == d.dominant);
  CHECK(imp.features[d.dominant].rank == 1);
  CHECK(imp.baseline_r2 == doctest::Approx(r2(d.y, f.predict(d.x))));
  for (const auto& e : imp.features) {
    CHECK(e.drops.size() == 5);
    double m = 0.0;
    for (double v : e.drops) m += v;
    CHECK(e.mean == doctest::Approx(m / 5.0));
  }
  for (std::size_t j = 4; j < 6; ++j) CHECK(std::fabs(imp.features[j].mean) < 0.05);
}

TEST_CASE("a duplicated column splits importance without reordering the rest") {
  auto d = synth::nonlinear_regression(300, 5, 0.5, 13);
  Eigen::MatrixXd x(d.x.rows(), 6);
  x << d.x, d.x.col(0);
  auto names = d.names;
  names.push_back("x0_copy");
  const auto f = fit_forest(x, d.y, names, small(60), 14);
  const auto imp = permutation_importance(f, x, d.y, 5, 15);
  CHECK(imp.features[0].mean > imp.features[4].mean);
  CHECK(imp.features[5].mean > imp.features[4].mean);
  CHECK(imp.features[1].mean > imp.features[4].mean);
}

TEST_CASE("serial and parallel paths agree exactly") {
  const auto d = synth::nonlinear_regression(200, 5, 0.5, 16);
  const auto s = fit_forest(d.x, d.y, d.names, small(24), 17, Exec::serial);
  const auto p = fit_forest(d.x, d.y, d.names, small(24), 17, Exec::parallel);
  CHECK(s.predict(d.x, Exec::serial) == p.predict(d.x, Exec::parallel));
  const auto is = permutation_importance(s, d.x, d.y, 3, 18, Exec::serial);
  const auto ip = permutation_importance(p, d.x, d.y, 3, 18, Exec::parallel);
  for (std::size_t j = 0; j < is.features.size(); ++j) CHECK(is.features[j].drops == ip.features[j].drops);
  const auto cs = kfold_cv(d.x, d.y, d.names, small(10), 4, FoldMode::chronological, 19, Exec::serial);
  const auto cp = kfold_cv(d.x, d.y, d.names, small(10), 4, FoldMode::chronological, 19, Exec::parallel);
  CHECK(cs.fold_r2 == cp.fold_r2);
}
