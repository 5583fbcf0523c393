#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhde/parallel.hpp"

namespace dhde::forest {

struct ForestParams {
  std::size_t n_trees = 500;
  std::optional<std::size_t> max_features;  // default max(1, floor(p / 3))
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;     // unlimited by default
};

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

// CART regression tree; samples with x[feature] <= threshold go left.
class Tree {
public:
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const { return depth_; }

  // Grows a tree on a bootstrap sample of size n drawn with `seed`.
  static Tree grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                   std::size_t max_features, std::uint64_t seed);

private:
  std::vector<Node> nodes_;
  std::size_t depth_ = 0;
};

class ForestModel {
public:
  std::vector<std::string> names;
  ForestParams params;
  std::uint64_t seed = 0;
  std::size_t max_features = 1;
  std::vector<Tree> trees;

  // Mean of the per-tree predictions, summed in tree order.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x, Exec exec = Exec::parallel) const;
};

// Tree i is grown from derive_seed(seed, i), so the parallel fit equals the
// serial one exactly.
ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                       const ForestParams& params, std::uint64_t seed, Exec exec = Exec::parallel);

enum class FoldMode { shuffled, chronological };

// Test-index sets of k disjoint folds covering 0..n-1; the first n % k folds
// hold one extra row.
std::vector<std::vector<std::size_t>> kfold_splits(std::size_t n, std::size_t k, FoldMode mode, std::uint64_t seed);

struct CvResult {
  FoldMode mode = FoldMode::shuffled;
  std::vector<double> fold_r2;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation across folds
};

CvResult kfold_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                  const ForestParams& params, std::size_t k, FoldMode mode, std::uint64_t seed,
                  Exec exec = Exec::parallel);

struct ImportanceEntry {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> drops;
  std::size_t rank = 0;
};

struct ImportanceReport {
  double baseline_r2 = 0.0;
  std::size_t repeats = 0;
  std::vector<ImportanceEntry> features;  // column order
  std::vector<std::size_t> ranking;       // column indices by mean drop, descending
};

// Score drop R^2(original) - R^2(column j permuted), permuting within the
// evaluation rows only. Repeat r of column j uses derive_seed(seed, j, r).
ImportanceReport permutation_importance(const ForestModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        std::size_t repeats, std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace dhde::forest
