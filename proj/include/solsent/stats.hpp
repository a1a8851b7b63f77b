#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "solsent/error.hpp"

namespace solsent::stats {

// ---------------------------------------------------------------------------
// distributions

/// Two-sided p-value of a t statistic.
inline double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

/// Upper-tail probability of an F statistic.
inline double f_upper_p(double f, double df1, double df2) {
  if (std::isinf(f)) return 0.0;
  if (f <= 0) return 1.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

/// Upper-tail probability of a chi-square statistic.
inline double chi2_upper_p(double x, double df) {
  if (x <= 0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

// ---------------------------------------------------------------------------
// data

/// Named columns of finite reals, n rows by k columns.
class DataMatrix {
 public:
  DataMatrix() = default;

  DataMatrix(std::vector<std::string> names, Eigen::MatrixXd values)
      : names_(std::move(names)), values_(std::move(values)) {
    if (names_.empty()) throw StageError("data matrix needs at least one column");
    if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
      throw StageError("data matrix: " + std::to_string(names_.size()) + " names for " +
                       std::to_string(values_.cols()) + " columns");
    }
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (!values_.col(j).allFinite()) throw StageError("data matrix column '" + names_[j] + "' has a non-finite value");
    }
  }

  static DataMatrix from_columns(std::vector<std::string> names, const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) throw StageError("data matrix needs at least one column");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(cols.front().size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != cols.front().size()) throw StageError("data matrix columns have different lengths");
      for (std::size_t i = 0; i < cols[j].size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    }
    return DataMatrix(std::move(names), std::move(m));
  }

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<std::string>& names() const { return names_; }
  const Eigen::MatrixXd& values() const { return values_; }

  /// Copy without column `j`.
  DataMatrix without(std::size_t j) const {
    std::vector<std::string> n;
    Eigen::MatrixXd v(values_.rows(), values_.cols() - 1);
    Eigen::Index out = 0;
    for (std::size_t c = 0; c < cols(); ++c) {
      if (c == j) continue;
      n.push_back(names_[c]);
      v.col(out++) = values_.col(static_cast<Eigen::Index>(c));
    }
    return DataMatrix(std::move(n), std::move(v));
  }

  DataMatrix select(const std::vector<std::size_t>& which) const {
    std::vector<std::string> n;
    Eigen::MatrixXd v(values_.rows(), static_cast<Eigen::Index>(which.size()));
    for (std::size_t c = 0; c < which.size(); ++c) {
      n.push_back(names_.at(which[c]));
      v.col(static_cast<Eigen::Index>(c)) = values_.col(static_cast<Eigen::Index>(which[c]));
    }
    return DataMatrix(std::move(n), std::move(v));
  }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
};

// ---------------------------------------------------------------------------
// descriptive statistics

struct ColumnSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0;
  double sd = 0;  // n - 1 denominator
  double min = 0;
  double max = 0;
};

struct Description {
  std::vector<ColumnSummary> columns;
  /// Pearson correlations; nullopt where a column has zero variance.
  std::vector<std::vector<std::optional<double>>> correlation;
};

inline Description describe(const DataMatrix& m) {
  const auto n = m.rows();
  if (n < 2) throw StageError("describe needs at least 2 rows");
  const auto& v = m.values();
  const auto k = m.cols();
  Description d;
  std::vector<Eigen::VectorXd> centered(k);
  std::vector<double> ss(k);
  for (std::size_t j = 0; j < k; ++j) {
    auto col = v.col(static_cast<Eigen::Index>(j));
    // Welford running mean/variance
    double mean = 0, m2 = 0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      double delta = col(i) - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (col(i) - mean);
    }
    ColumnSummary s;
    s.name = m.names()[j];
    s.n = n;
    s.mean = mean;
    s.sd = std::sqrt(std::max(0.0, m2) / static_cast<double>(n - 1));
    s.min = col.minCoeff();
    s.max = col.maxCoeff();
    d.columns.push_back(s);
    centered[j] = col.array() - mean;
    ss[j] = centered[j].squaredNorm();
  }
  d.correlation.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      if (ss[a] <= 0 || ss[b] <= 0) continue;
      double r = a == b ? 1.0 : centered[a].dot(centered[b]) / std::sqrt(ss[a] * ss[b]);
      r = std::clamp(r, -1.0, 1.0);
      d.correlation[a][b] = r;
      d.correlation[b][a] = r;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// least squares

enum class RobustFlavor { hc0, hc1 };

struct Coefficient {
  std::string name;
  double estimate = 0;
  double se_classical = 0;
  double se_robust = 0;
  double t = 0;  // estimate / robust SE
  double p = 1;  // two-sided, t distribution with n - k - 1 df
};

struct RegressionResult {
  std::vector<Coefficient> coefficients;  // intercept first
  double r_squared = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t df = 0;
  RobustFlavor flavor = RobustFlavor::hc1;
  std::vector<double> vif;  // per predictor; empty when k < 2
  std::optional<double> mean_vif;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd cov_classical;
  Eigen::MatrixXd cov_robust;

  const Coefficient& coefficient(const std::string& name) const {
    for (const auto& c : coefficients) {
      if (c.name == name) return c;
    }
    throw StageError("no coefficient named '" + name + "'");
  }
};

namespace detail {

struct Factorization {
  Eigen::MatrixXd q;     // n x p, orthonormal columns
  Eigen::MatrixXd rinv;  // p x p, inverse of the upper-triangular factor
};

// Householder QR of the intercept-augmented design. Throws naming the
// first column that lies in the span of the ones before it.
inline Factorization factor(const Eigen::MatrixXd& a, const std::vector<std::string>& names) {
  const Eigen::Index n = a.rows(), p = a.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < p; ++j) {
    double scale = a.col(j).norm();
    if (scale == 0 || std::abs(r(j, j)) <= 1e-10 * scale) {
      std::string name = j == 0 ? "(intercept)" : names[static_cast<std::size_t>(j - 1)];
      throw StageError("design matrix is rank deficient: column '" + name +
                       "' is a linear combination of the intercept and earlier columns");
    }
  }
  Factorization f;
  f.q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  f.rinv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  return f;
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return a;
}

}  // namespace detail

inline std::vector<double> vif_values(const DataMatrix& x);

/// Ordinary least squares with an intercept. Classical covariance is
/// s^2 (X'X)^-1; robust covariance is the HC0 sandwich, scaled by
/// n / (n - k - 1) for HC1.
inline RegressionResult ols(std::span<const double> y, const DataMatrix& x, RobustFlavor flavor = RobustFlavor::hc1,
                            bool with_vif = true) {
  const std::size_t n = x.rows();
  const std::size_t k = x.cols();
  if (y.size() != n) throw StageError("ols: y has " + std::to_string(y.size()) + " rows, X has " + std::to_string(n));
  if (n <= k + 1) {
    throw StageError("ols: need n > k + 1 (n = " + std::to_string(n) + ", k = " + std::to_string(k) + ")");
  }
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));
  if (!yv.allFinite()) throw StageError("ols: y has a non-finite value");

  const Eigen::MatrixXd a = detail::with_intercept(x.values());
  const auto f = detail::factor(a, x.names());
  const Eigen::VectorXd qty = f.q.transpose() * yv;
  const Eigen::VectorXd beta = f.rinv * qty;
  Eigen::VectorXd e = yv - a * beta;

  const std::size_t df = n - k - 1;
  const double ssr = e.squaredNorm();
  const double ybar = yv.mean();
  const double sst = (yv.array() - ybar).square().sum();

  RegressionResult res;
  res.n = n;
  res.k = k;
  res.df = df;
  res.flavor = flavor;
  res.r_squared = sst > 0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;

  const Eigen::MatrixXd xtx_inv = f.rinv * f.rinv.transpose();
  res.cov_classical = (ssr / static_cast<double>(df)) * xtx_inv;

  // (X'X)^-1 X' diag(e^2) X (X'X)^-1 = R^-1 (Q' diag(e^2) Q) R^-T
  const Eigen::MatrixXd qe = f.q.array().colwise() * e.array();
  Eigen::MatrixXd meat = qe.transpose() * qe;
  res.cov_robust = f.rinv * meat * f.rinv.transpose();
  if (flavor == RobustFlavor::hc1) res.cov_robust *= static_cast<double>(n) / static_cast<double>(df);

  for (std::size_t j = 0; j <= k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    Coefficient c;
    c.name = j == 0 ? "(intercept)" : x.names()[j - 1];
    c.estimate = beta(jj);
    c.se_classical = std::sqrt(std::max(0.0, res.cov_classical(jj, jj)));
    c.se_robust = std::sqrt(std::max(0.0, res.cov_robust(jj, jj)));
    if (c.se_robust > 0) {
      c.t = c.estimate / c.se_robust;
      c.p = t_two_sided_p(c.t, static_cast<double>(df));
    } else {
      // exact fit: any nonzero coefficient is infinitely significant
      c.t = c.estimate == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p = c.estimate == 0 ? 1.0 : 0.0;
    }
    res.coefficients.push_back(c);
  }
  res.residuals = std::move(e);

  if (with_vif && k >= 2) {
    res.vif = vif_values(x);
    double s = 0;
    for (double v : res.vif) s += v;
    res.mean_vif = s / static_cast<double>(res.vif.size());
  }
  return res;
}

inline RegressionResult ols(const std::vector<double>& y, const DataMatrix& x, RobustFlavor flavor = RobustFlavor::hc1,
                            bool with_vif = true) {
  return ols(std::span<const double>(y), x, flavor, with_vif);
}

struct VifResult {
  std::vector<std::string> names;
  std::vector<double> vif;
  double mean = 0;
};

/// VIF_j = 1 / (1 - R^2_j), R^2_j from regressing column j on the others
/// plus an intercept.
inline std::vector<double> vif_values(const DataMatrix& x) {
  if (x.cols() < 2) throw StageError("vif needs at least 2 columns");
  // full-rank check names the offending column before any auxiliary fit
  (void)detail::factor(detail::with_intercept(x.values()), x.names());
  std::vector<double> out;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const auto col = x.values().col(static_cast<Eigen::Index>(j));
    std::vector<double> yj(col.data(), col.data() + col.size());
    auto aux = ols(yj, x.without(j), RobustFlavor::hc1, false);
    double tol = 1.0 - aux.r_squared;
    if (tol <= 1e-12) throw StageError("column '" + x.names()[j] + "' is perfectly collinear with the others (infinite VIF)");
    out.push_back(1.0 / tol);
  }
  return out;
}

inline VifResult vif(const DataMatrix& x) {
  VifResult r;
  r.names = x.names();
  r.vif = vif_values(x);
  for (double v : r.vif) r.mean += v;
  r.mean /= static_cast<double>(r.vif.size());
  return r;
}

// ---------------------------------------------------------------------------
// group comparisons

struct Group {
  std::string name;
  std::vector<double> values;
};

struct GroupSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0;
  double variance = 0;  // n - 1 denominator; 0 when n = 1
};

struct PairwiseComparison {
  std::string group_a;
  std::string group_b;
  double mean_difference = 0;  // mean(a) - mean(b)
  double t = 0;
  double df = 0;
  double p_raw = 1;
  double p_bonferroni = 1;
};

struct AnovaResult {
  double f = 0;
  bool f_infinite = false;
  double df_between = 0;
  double df_within = 0;
  double p = 1;
  double ss_between = 0;
  double ss_within = 0;
  std::vector<GroupSummary> groups;
  std::vector<PairwiseComparison> pairwise;
};

namespace detail {

inline GroupSummary summarize(const Group& g) {
  GroupSummary s;
  s.name = g.name;
  s.n = g.values.size();
  double sum = 0;
  for (double v : g.values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0;
  for (double v : g.values) ss += (v - s.mean) * (v - s.mean);
  s.variance = s.n > 1 ? ss / static_cast<double>(s.n - 1) : 0.0;
  return s;
}

}  // namespace detail

/// Bonferroni adjustment over `m` comparisons.
inline double bonferroni(double p_raw, std::size_t m) { return std::min(1.0, static_cast<double>(m) * p_raw); }

/// Pooled-variance two-sample t tests over every pair of groups, with
/// Bonferroni adjustment over all pairs.
inline std::vector<PairwiseComparison> pairwise_t(std::span<const Group> groups) {
  std::vector<GroupSummary> s;
  for (const auto& g : groups) s.push_back(detail::summarize(g));
  const std::size_t m = groups.size() * (groups.size() - 1) / 2;
  std::vector<PairwiseComparison> out;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      PairwiseComparison c;
      c.group_a = s[a].name;
      c.group_b = s[b].name;
      c.mean_difference = s[a].mean - s[b].mean;
      c.df = static_cast<double>(s[a].n + s[b].n) - 2.0;
      if (c.df <= 0) {
        // two singletons: no variance estimate, no evidence either way
        c.t = 0;
        c.p_raw = 1;
      } else {
        double pooled = ((static_cast<double>(s[a].n) - 1) * s[a].variance +
                         (static_cast<double>(s[b].n) - 1) * s[b].variance) / c.df;
        double se = std::sqrt(pooled * (1.0 / static_cast<double>(s[a].n) + 1.0 / static_cast<double>(s[b].n)));
        if (se > 0) {
          c.t = c.mean_difference / se;
          c.p_raw = t_two_sided_p(c.t, c.df);
        } else {
          c.t = c.mean_difference == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.mean_difference);
          c.p_raw = c.mean_difference == 0 ? 1.0 : 0.0;
        }
      }
      c.p_bonferroni = bonferroni(c.p_raw, m);
      out.push_back(c);
    }
  }
  return out;
}

/// One-way ANOVA. When every group is constant (SSW = 0) the F statistic
/// is reported as infinite with p = 0, unless the group means are also
/// equal, in which case F = 0 and p = 1.
inline AnovaResult oneway_anova(std::span<const Group> groups) {
  if (groups.size() < 2) throw StageError("anova needs at least 2 groups");
  std::size_t n = 0;
  double grand = 0;
  for (const auto& g : groups) {
    if (g.values.empty()) throw StageError("anova group '" + g.name + "' is empty");
    n += g.values.size();
    for (double v : g.values) grand += v;
  }
  if (n <= groups.size()) throw StageError("anova needs more observations than groups");
  grand /= static_cast<double>(n);

  AnovaResult r;
  for (const auto& g : groups) {
    auto s = detail::summarize(g);
    r.ss_between += static_cast<double>(s.n) * (s.mean - grand) * (s.mean - grand);
    for (double v : g.values) r.ss_within += (v - s.mean) * (v - s.mean);
    r.groups.push_back(s);
  }
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(n - groups.size());
  if (r.ss_within > 0) {
    r.f = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
    r.p = f_upper_p(r.f, r.df_between, r.df_within);
  } else if (r.ss_between > 0) {
    r.f = std::numeric_limits<double>::infinity();
    r.f_infinite = true;
    r.p = 0;
  } else {
    r.f = 0;
    r.p = 1;
  }
  r.pairwise = pairwise_t(groups);
  return r;
}

struct BartlettResult {
  double statistic = 0;
  double df = 0;
  double p = 1;
};

/// Bartlett's test for equal variances across groups.
inline BartlettResult bartlett(std::span<const Group> groups) {
  if (groups.size() < 2) throw StageError("bartlett needs at least 2 groups");
  double big_n = 0, sum_inv = 0, pooled_num = 0, sum_log = 0;
  for (const auto& g : groups) {
    if (g.values.size() < 2) throw StageError("bartlett: group '" + g.name + "' has fewer than 2 observations");
    auto s = detail::summarize(g);
    if (s.variance <= 0) throw StageError("bartlett: group '" + g.name + "' has zero variance");
    const double dof = static_cast<double>(s.n) - 1.0;
    big_n += static_cast<double>(s.n);
    sum_inv += 1.0 / dof;
    pooled_num += dof * s.variance;
    sum_log += dof * std::log(s.variance);
  }
  const double k = static_cast<double>(groups.size());
  const double nk = big_n - k;
  const double pooled = pooled_num / nk;
  const double numer = nk * std::log(pooled) - sum_log;
  const double denom = 1.0 + (sum_inv - 1.0 / nk) / (3.0 * (k - 1.0));
  BartlettResult r;
  r.statistic = std::max(0.0, numer / denom);
  r.df = k - 1.0;
  r.p = chi2_upper_p(r.statistic, r.df);
  return r;
}

}  // namespace solsent::stats
