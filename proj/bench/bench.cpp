// Times each parallel kernel against its serial reference and checks that
// both paths return identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dhde/economics.hpp"
#include "dhde/forest.hpp"
#include "dhde/linmodel.hpp"
#include "dhde/parallel.hpp"
#include "dhde/random.hpp"
#include "dhde/synth.hpp"

using namespace dhde;

namespace {

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

struct Kernel {
  std::string name;
  // Runs the kernel on the given path and returns a fingerprint of its output.
  std::function<std::vector<double>(Exec)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial versus parallel timings of the compute kernels"};
  int reps = 3;
  int threads = 0;
  std::size_t rows = 2000;
  std::size_t trees = 200;
  app.add_option("--reps", reps, "Repetitions per measurement (best is reported)")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP thread count (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--rows", rows, "Rows in the synthetic problems")->check(CLI::Range(100, 1000000));
  app.add_option("--trees", trees, "Trees in the forest kernels")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  set_max_threads(threads);

  const auto reg = synth::nonlinear_regression(rows, 8, 0.5, 1);
  forest::ForestParams fp;
  fp.n_trees = trees;
  const auto model = forest::fit_forest(reg.x, reg.y, reg.names, fp, 2, Exec::serial);

  Rng rng(3);
  Eigen::MatrixXd wide(static_cast<Eigen::Index>(rows), 16);
  for (auto& v : wide.reshaped()) v = rng.normal();
  Eigen::VectorXd e(static_cast<Eigen::Index>(rows));
  for (auto& v : e) v = rng.normal();
  const Eigen::MatrixXd xc = linmodel::with_intercept(wide);
  std::vector<std::string> names;
  for (int j = 0; j < 16; ++j) names.push_back("x" + std::to_string(j));

  std::vector<double> sx(rows), sy(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    sx[i] = rng.normal();
    sy[i] = (i >= 3 ? sx[i - 3] : 0.0) + rng.normal();
  }

  const std::vector<Kernel> kernels{
      {"forest fit",
       [&](Exec x) {
         const auto m = forest::fit_forest(reg.x, reg.y, reg.names, fp, 2, x);
         const Eigen::VectorXd p = m.predict(reg.x, Exec::serial);
         return std::vector<double>(p.data(), p.data() + p.size());
       }},
      {"forest predict",
       [&](Exec x) {
         const Eigen::VectorXd p = model.predict(reg.x, x);
         return std::vector<double>(p.data(), p.data() + p.size());
       }},
      {"permutation importance",
       [&](Exec x) {
         std::vector<double> out;
         for (const auto& f : forest::permutation_importance(model, reg.x, reg.y, 2, 4, x).features) {
           out.insert(out.end(), f.drops.begin(), f.drops.end());
         }
         return out;
       }},
      {"HAC meat (lag 20)",
       [&](Exec x) {
         const Eigen::MatrixXd m = linmodel::hac_meat(xc, e, 20, x);
         return std::vector<double>(m.data(), m.data() + m.size());
       }},
      {"VIF (16 columns)",
       [&](Exec x) {
         std::vector<double> out;
         for (const auto& v : linmodel::vif(wide, names, x)) out.push_back(v.vif);
         return out;
       }},
      {"CCF (max lag 60)",
       [&](Exec x) {
         std::vector<double> out;
         for (const auto& p : economics::ccf(sx, sy, 60, x).points) out.push_back(p.r);
         return out;
       }},
  };

  std::printf("threads %d, rows %zu, trees %zu, best of %d\n\n", max_threads(), rows, trees, reps);
  std::printf("%-24s %12s %12s %9s  %s\n", "kernel", "serial s", "parallel s", "speedup", "identical");
  bool all_same = true;
  for (const auto& k : kernels) {
    std::vector<double> serial, parallel;
    const double ts = best_of(reps, [&] { serial = k.run(Exec::serial); });
    const double tp = best_of(reps, [&] { parallel = k.run(Exec::parallel); });
    const bool same = serial == parallel;
    all_same = all_same && same;
    std::printf("%-24s %12.4f %12.4f %8.2fx  %s\n", k.name.c_str(), ts, tp, ts / tp, same ? "yes" : "NO");
  }
  return all_same ? 0 : 1;
}
