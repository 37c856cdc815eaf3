#include "gapprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace gapprobe::metrics {

namespace {

struct Moments {
  double mean;
  double sd;
};

Moments moments(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "t statistics need at least two values");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateSample, "sample variance is zero");
  return {mean, sd};
}

}  // namespace

DeltaScores compute_deltas(const std::map<Condition, double>& region_bits, corpus::ItemKey item) {
  auto get = [&](Condition c) {
    auto it = region_bits.find(c);
    if (it == region_bits.end()) {
      throw Error(ErrorKind::MissingCondition, std::string(corpus::condition_label(c)));
    }
    return it->second;
  };
  DeltaScores d;
  d.item = std::move(item);
  d.delta_plus_filler = get(Condition::PFMG) - get(Condition::PFPG);
  d.delta_minus_filler = get(Condition::MFMG) - get(Condition::MFPG);
  d.did = d.delta_plus_filler - d.delta_minus_filler;
  return d;
}

Interval wilson_ci(std::size_t k, std::size_t n, double level) {
  if (n == 0 || k > n) throw Error(ErrorKind::InvalidArgument, "wilson_ci needs 0 <= k <= n, n >= 1");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must be in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // Exact boundaries; rounding would otherwise leave 1e-17 residue.
  if (k == 0) out.lower = 0.0;
  if (k == n) out.upper = 1.0;
  return out;
}

Accuracies accuracies(std::span<const DeltaScores> deltas) {
  if (deltas.empty()) throw Error(ErrorKind::EmptyInput, "no items");
  Accuracies a;
  const std::size_t n = deltas.size();
  std::size_t plus = 0;
  std::size_t did = 0;
  for (const auto& d : deltas) {
    if (d.delta_plus_filler > 0.0) ++plus;
    if (d.did > 0.0) ++did;
  }
  a.delta_plus = {plus, n, static_cast<double>(plus) / static_cast<double>(n), wilson_ci(plus, n)};
  a.did = {did, n, static_cast<double>(did) / static_cast<double>(n), wilson_ci(did, n)};
  return a;
}

double t_upper_tail(double t, double df) {
  return boost::math::cdf(boost::math::complement(boost::math::students_t(df), t));
}

TTest one_sample_t(std::span<const double> values, double mu0) {
  const auto m = moments(values);
  const double n = static_cast<double>(values.size());
  TTest out;
  out.mean = m.mean;
  out.std_error = m.sd / std::sqrt(n);
  out.t = (m.mean - mu0) / out.std_error;
  out.df = n - 1.0;
  out.p_one_tailed = t_upper_tail(out.t, out.df);
  return out;
}

Interval t_mean_interval(std::span<const double> values, double level) {
  const auto m = moments(values);
  const double n = static_cast<double>(values.size());
  const double crit =
      boost::math::quantile(boost::math::students_t(n - 1.0), 0.5 + level / 2.0);
  const double half = crit * m.sd / std::sqrt(n);
  return {m.mean - half, m.mean + half};
}

ChiSquare chi_square_2x2(double a_succ, double a_fail, double b_succ, double b_fail,
                         Correction correction) {
  const double cells[2][2] = {{a_succ, a_fail}, {b_succ, b_fail}};
  for (const auto& row : cells) {
    for (double c : row) {
      if (c < 0.0 || !std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "counts must be >= 0");
    }
  }
  const double rows[2] = {a_succ + a_fail, b_succ + b_fail};
  const double cols[2] = {a_succ + b_succ, a_fail + b_fail};
  const double total = rows[0] + rows[1];
  if (rows[0] <= 0 || rows[1] <= 0 || cols[0] <= 0 || cols[1] <= 0) {
    throw Error(ErrorKind::ZeroMarginal, "every row and column total must be positive");
  }
  double stat = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / total;
      double dev = std::abs(cells[i][j] - expected);
      if (correction == Correction::Yates) dev = std::max(0.0, dev - 0.5);
      stat += dev * dev / expected;
    }
  }
  ChiSquare out;
  out.statistic = stat;
  out.correction = correction;
  out.p = stat > 0.0
              ? boost::math::cdf(boost::math::complement(boost::math::chi_squared(1.0), stat))
              : 1.0;
  return out;
}

AggregateReport aggregate(std::span<const DeltaScores> deltas, std::string label) {
  AggregateReport r;
  r.label = std::move(label);
  r.n_items = deltas.size();
  if (deltas.empty()) return r;
  const auto acc = accuracies(deltas);
  r.acc_delta_plus = acc.delta_plus;
  r.acc_did = acc.did;

  std::vector<double> plus;
  std::vector<double> did;
  for (const auto& d : deltas) {
    plus.push_back(d.delta_plus_filler);
    did.push_back(d.did);
  }
  const double n = static_cast<double>(deltas.size());
  r.mean_delta_plus = std::accumulate(plus.begin(), plus.end(), 0.0) / n;
  r.mean_did = std::accumulate(did.begin(), did.end(), 0.0) / n;
  auto attempt = [](auto fn) -> decltype(std::optional(fn())) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DegenerateSample || e.kind() == ErrorKind::InvalidArgument) {
        return std::nullopt;
      }
      throw;
    }
  };
  r.t_delta = attempt([&] { return one_sample_t(plus); });
  r.t_did = attempt([&] { return one_sample_t(did); });
  r.mean_delta_plus_ci = attempt([&] { return t_mean_interval(plus); });
  r.mean_did_ci = attempt([&] { return t_mean_interval(did); });
  return r;
}

ComparisonReport compare(const Proportion& a, const Proportion& b, Correction correction,
                         std::string criterion, std::string label_a, std::string label_b) {
  ComparisonReport c;
  c.criterion = std::move(criterion);
  c.label_a = std::move(label_a);
  c.label_b = std::move(label_b);
  c.a_succ = a.successes;
  c.a_fail = a.trials - a.successes;
  c.b_succ = b.successes;
  c.b_fail = b.trials - b.successes;
  c.chi_square = chi_square_2x2(static_cast<double>(c.a_succ), static_cast<double>(c.a_fail),
                                static_cast<double>(c.b_succ), static_cast<double>(c.b_fail),
                                correction);
  return c;
}

}  // namespace gapprobe::metrics
