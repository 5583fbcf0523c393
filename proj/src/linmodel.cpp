#include "dhde/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>

#include "dhde/error.hpp"
#include "dhde/stats.hpp"

namespace dhde::linmodel {
namespace {

constexpr double kRankTolerance = 1e-10;

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Names the columns involved in an exact linear dependency.
std::string describe_dependency(const Eigen::MatrixXd& xs, const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                                const std::vector<std::string>& names) {
  const auto rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  Eigen::MatrixXd basis(xs.rows(), rank);
  for (Eigen::Index j = 0; j < rank; ++j) basis.col(j) = xs.col(perm(j));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> sub(basis);

  std::string msg = "rank-deficient design:";
  for (Eigen::Index j = rank; j < xs.cols(); ++j) {
    const Eigen::Index dep = perm(j);
    msg += " '" + names[static_cast<std::size_t>(dep)] + "' is a linear combination of {";
    if (rank > 0) {
      const Eigen::VectorXd c = sub.solve(xs.col(dep));
      bool first = true;
      for (Eigen::Index i = 0; i < rank; ++i) {
        if (std::fabs(c(i)) > 1e-6) {
          msg += (first ? "" : ", ") + names[static_cast<std::size_t>(perm(i))];
          first = false;
        }
      }
    }
    msg += "};";
  }
  msg.pop_back();
  return msg;
}

double r2_of(const features::FeatureMatrix& fm) { return fit_ols(fm).r2; }

}  // namespace

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd xc(x.rows(), x.cols() + 1);
  xc.col(0).setOnes();
  xc.rightCols(x.cols()) = x;
  return xc;
}

Eigen::VectorXd LinearFit::predict(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != k) throw UsageError("predict: column count differs from the fit");
  return with_intercept(x) * coef;
}

std::size_t LinearFit::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw UsageError("no coefficient named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

LinearFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(x.cols());
  if (names.size() != k) throw UsageError("fit_ols: names do not match the column count");
  if (static_cast<std::size_t>(y.size()) != n) throw UsageError("fit_ols: X and y differ in length");
  if (n <= k + 1) {
    throw NumericalError("fit_ols: need n > k + 1 (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  if (!x.allFinite() || !y.allFinite()) throw NumericalError("fit_ols: non-finite values in the data");

  std::vector<std::string> all_names{"const"};
  all_names.insert(all_names.end(), names.begin(), names.end());

  const Eigen::MatrixXd xc = with_intercept(x);
  const Eigen::Index p = xc.cols();
  Eigen::VectorXd scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = xc.col(j).norm();
    scale(j) = norm > 0.0 ? 1.0 / norm : 1.0;
  }
  const Eigen::MatrixXd xs = xc * scale.asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs.rows(), xs.cols());
  qr.setThreshold(kRankTolerance);
  qr.compute(xs);
  if (qr.rank() < p) throw NumericalError(describe_dependency(xs, qr, all_names));

  LinearFit fit;
  fit.names = std::move(all_names);
  fit.n = n;
  fit.k = k;
  fit.coef = scale.asDiagonal() * qr.solve(y);

  // (Xs'Xs)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd inner = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  inner = perm * inner * perm.transpose();
  fit.xtx_inv = scale.asDiagonal() * inner * scale.asDiagonal();

  fit.fitted = xc * fit.coef;
  fit.residuals = y - fit.fitted;
  fit.ssr = fit.residuals.squaredNorm();
  const double ybar = y.mean();
  fit.tss = (y.array() - ybar).square().sum();
  if (fit.tss == 0.0) throw NumericalError("fit_ols: degenerate target (zero variance)");
  fit.r2 = 1.0 - fit.ssr / fit.tss;
  const double df = static_cast<double>(n - k - 1);
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / df;
  fit.sigma2 = fit.ssr / df;

  fit.se = (fit.sigma2 * fit.xtx_inv.diagonal().array()).sqrt();
  fit.t = fit.coef.array() / fit.se.array();
  fit.p.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) fit.p(j) = stats::t_two_sided_p(fit.t(j), df);

  // Residuals at rounding level carry no serial-correlation signal.
  if (fit.ssr > 1e-20 * fit.tss) fit.dw = durbin_watson(fit.residuals);
  return fit;
}

LinearFit fit_ols(const features::FeatureMatrix& fm) { return fit_ols(fm.x, fm.y, fm.names); }

std::vector<StandardizedBeta> standardized_betas(const LinearFit& fit, const Eigen::MatrixXd& x,
                                                 const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(x.cols()) != fit.k) throw UsageError("standardized_betas: X does not match the fit");
  const double sd_y = stats::sd_pop(view(y));
  if (sd_y == 0.0) throw NumericalError("standardized_betas: target has zero variance");
  std::vector<StandardizedBeta> out;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd col = x.col(j);
    const double sd_x = stats::sd_pop(view(col));
    const auto& name = fit.names[static_cast<std::size_t>(j) + 1];
    if (sd_x == 0.0) throw NumericalError("standardized_betas: column '" + name + "' has zero variance");
    out.push_back({name, fit.coef(j + 1) * sd_x / sd_y, 0});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const StandardizedBeta& a, const StandardizedBeta& b) { return std::fabs(a.beta) > std::fabs(b.beta); });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

double cohens_f2(double r2) {
  if (!(r2 >= 0.0) || r2 >= 1.0) throw NumericalError("cohens_f2: R^2 must lie in [0, 1)");
  return r2 / (1.0 - r2);
}

double durbin_watson(std::span<const double> e) {
  if (e.size() < 2) throw NumericalError("durbin_watson: need at least two residuals");
  double num = 0.0, den = e[0] * e[0];
  for (std::size_t t = 1; t < e.size(); ++t) {
    num += (e[t] - e[t - 1]) * (e[t] - e[t - 1]);
    den += e[t] * e[t];
  }
  if (den == 0.0) throw NumericalError("durbin_watson: all residuals are zero");
  return num / den;
}

double durbin_watson(const Eigen::VectorXd& residuals) { return durbin_watson(view(residuals)); }

std::size_t newey_west_auto_lag(std::size_t n) {
  return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

Eigen::MatrixXd hac_meat(const Eigen::MatrixXd& xc, const Eigen::VectorXd& e, std::size_t lag, Exec exec) {
  const auto n = static_cast<std::size_t>(xc.rows());
  if (lag >= n) throw NumericalError("newey_west: lag must be smaller than n");
  const Eigen::MatrixXd z = xc.array().colwise() * e.array();
  std::vector<Eigen::MatrixXd> gamma(lag + 1);
  const long blocks = static_cast<long>(lag + 1);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long l = 0; l < blocks; ++l) {
    const auto m = static_cast<Eigen::Index>(n - static_cast<std::size_t>(l));
    gamma[static_cast<std::size_t>(l)].noalias() = z.bottomRows(m).transpose() * z.topRows(m);
  }
  Eigen::MatrixXd s = gamma[0];
  for (std::size_t l = 1; l <= lag; ++l) {
    const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
    s += w * (gamma[l] + gamma[l].transpose());
  }
  return s;
}

HacResult newey_west(const LinearFit& fit, const Eigen::MatrixXd& x, const NeweyWestOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != fit.n || static_cast<std::size_t>(x.cols()) != fit.k) {
    throw UsageError("newey_west: X does not match the fit");
  }
  HacResult out;
  out.lag = options.lag.value_or(newey_west_auto_lag(fit.n));
  if (out.lag >= fit.n) throw NumericalError("newey_west: lag must be smaller than n");
  out.small_sample = options.small_sample;
  const Eigen::MatrixXd meat = hac_meat(with_intercept(x), fit.residuals, out.lag, options.exec);
  out.cov = fit.xtx_inv * meat * fit.xtx_inv;
  const double df = static_cast<double>(fit.n - fit.k - 1);
  if (options.small_sample) out.cov *= static_cast<double>(fit.n) / df;
  out.se = out.cov.diagonal().array().sqrt();
  out.t = fit.coef.array() / out.se.array();
  out.p.resize(out.t.size());
  for (Eigen::Index j = 0; j < out.t.size(); ++j) out.p(j) = stats::t_two_sided_p(out.t(j), df);
  return out;
}

std::vector<VifEntry> vif(const Eigen::MatrixXd& x, const std::vector<std::string>& names, Exec exec) {
  const auto p = static_cast<long>(x.cols());
  if (p < 2) throw UsageError("vif: need at least two feature columns");
  if (names.size() != static_cast<std::size_t>(p)) throw UsageError("vif: names do not match the column count");
  std::vector<VifEntry> out(static_cast<std::size_t>(p));
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long j = 0; j < p; ++j) {
    Eigen::MatrixXd others(x.rows(), p - 1);
    std::vector<std::string> other_names;
    for (long c = 0, o = 0; c < p; ++c) {
      if (c == j) continue;
      others.col(o++) = x.col(c);
      other_names.push_back(names[static_cast<std::size_t>(c)]);
    }
    double value = std::numeric_limits<double>::infinity();
    try {
      const double r2 = fit_ols(others, x.col(j), other_names).r2;
      if (r2 < 1.0 - 1e-12) value = 1.0 / (1.0 - r2);
    } catch (const NumericalError&) {
      // collinear with the other columns or the intercept
    }
    out[static_cast<std::size_t>(j)] = {names[static_cast<std::size_t>(j)], value};
  }
  return out;
}

LinearFit fit_first_difference(const features::FeatureMatrix& fm) {
  std::vector<std::size_t> pairs;
  for (std::size_t i = 1; i < fm.rows(); ++i) {
    if (fm.dates[i] - fm.dates[i - 1] == std::chrono::days{1}) pairs.push_back(i);
  }
  if (pairs.size() < 3) throw NumericalError("fit_first_difference: fewer than 3 differenced rows");
  Eigen::MatrixXd dx(static_cast<Eigen::Index>(pairs.size()), fm.x.cols());
  Eigen::VectorXd dy(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(pairs[r]);
    dx.row(static_cast<Eigen::Index>(r)) = fm.x.row(i) - fm.x.row(i - 1);
    dy(static_cast<Eigen::Index>(r)) = fm.y(i) - fm.y(i - 1);
  }
  std::vector<std::string> names;
  for (const auto& n : fm.names) names.push_back("d_" + n);
  return fit_ols(dx, dy, names);
}

LinearFit fit_ldv(const features::FeatureMatrix& fm) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    if (fm.prev_count[i]) keep.push_back(static_cast<Eigen::Index>(i));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(keep.size()), fm.x.cols() + 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto i = keep[r];
    const auto row = static_cast<Eigen::Index>(r);
    x(row, 0) = *fm.prev_count[static_cast<std::size_t>(i)];
    x.row(row).tail(fm.x.cols()) = fm.x.row(i);
    y(row) = fm.y(i);
  }
  std::vector<std::string> names{"count_lag1"};
  names.insert(names.end(), fm.names.begin(), fm.names.end());
  return fit_ols(x, y, names);
}

HoldoutReport chronological_holdout(const features::FeatureMatrix& fm, std::size_t train_n) {
  const std::size_t n = fm.rows();
  if (train_n >= n) throw UsageError("chronological_holdout: train_n must be smaller than n");
  const std::size_t test_n = n - train_n;
  if (test_n < 5) throw NumericalError("chronological_holdout: test set has fewer than 5 rows");
  const auto tn = static_cast<Eigen::Index>(train_n);
  const auto sn = static_cast<Eigen::Index>(test_n);
  const LinearFit fit = fit_ols(fm.x.topRows(tn), fm.y.head(tn), fm.names);
  const Eigen::VectorXd pred = fit.predict(fm.x.bottomRows(sn));
  const Eigen::VectorXd actual = fm.y.tail(sn);

  HoldoutReport rep;
  rep.train_n = train_n;
  rep.test_n = test_n;
  const Eigen::VectorXd err = actual - pred;
  rep.mae = err.cwiseAbs().mean();
  rep.rmse = std::sqrt(err.squaredNorm() / static_cast<double>(test_n));
  const double sst = (actual.array() - actual.mean()).square().sum();
  if (sst == 0.0) throw NumericalError("chronological_holdout: constant test target");
  rep.r2 = 1.0 - err.squaredNorm() / sst;
  rep.test_dates.assign(fm.dates.begin() + static_cast<std::ptrdiff_t>(train_n), fm.dates.end());
  rep.actual.assign(actual.data(), actual.data() + actual.size());
  rep.predicted.assign(pred.data(), pred.data() + pred.size());
  return rep;
}

AblationResult weather_ablation(const features::FeatureMatrix& fm, const std::vector<std::string>& weather_cols,
                                const std::vector<unsigned>& months) {
  for (const auto& c : weather_cols) (void)fm.col(c);
  features::FeatureMatrix sub = fm;
  if (!months.empty()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < fm.rows(); ++i) {
      if (std::find(months.begin(), months.end(), month_of(fm.dates[i])) != months.end()) idx.push_back(i);
    }
    if (idx.empty()) throw NumericalError("weather_ablation: seasonal subset is empty");
    sub = fm.select_rows(idx);
  }
  AblationResult res;
  res.n = sub.rows();
  std::vector<std::string> constant;
  for (std::size_t j = 0; j < sub.cols(); ++j) {
    const auto col = sub.x.col(static_cast<Eigen::Index>(j));
    if ((col.array() == col(0)).all()) constant.push_back(sub.names[j]);
  }
  if (!constant.empty()) sub = sub.drop_columns(constant);
  res.dropped_constant = constant;

  std::vector<std::string> drop;
  for (const auto& c : weather_cols) {
    if (sub.has(c)) drop.push_back(c);
  }
  res.r2_full = r2_of(sub);
  res.r2_reduced = r2_of(sub.drop_columns(drop));
  res.delta_r2 = res.r2_full - res.r2_reduced;
  return res;
}

SeasonalSensitivity seasonal_sensitivity(const features::FeatureMatrix& fm, const std::vector<std::string>& weather_cols,
                                         const std::vector<unsigned>& winter, const std::vector<unsigned>& summer) {
  SeasonalSensitivity s;
  s.overall = weather_ablation(fm, weather_cols);
  s.winter = weather_ablation(fm, weather_cols, winter);
  s.summer = weather_ablation(fm, weather_cols, summer);
  s.ratio = s.summer.delta_r2 != 0.0 ? s.winter.delta_r2 / s.summer.delta_r2
                                     : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace dhde::linmodel
