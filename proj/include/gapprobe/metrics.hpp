#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapprobe/corpus.hpp"

namespace gapprobe::metrics {

using corpus::Condition;

struct DeltaScores {
  corpus::ItemKey item;
  double delta_plus_filler = 0.0;   // bits(PFMG) - bits(PFPG)
  double delta_minus_filler = 0.0;  // bits(MFMG) - bits(MFPG)
  double did = 0.0;                 // delta_plus_filler - delta_minus_filler
};

/// Throws MissingCondition unless all four conditions are present.
DeltaScores compute_deltas(const std::map<Condition, double>& region_bits,
                           corpus::ItemKey item = {});

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct Proportion {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double value = 0.0;
  Interval wilson;  // 95%
};

struct Accuracies {
  Proportion delta_plus;  // Delta(+filler) > 0
  Proportion did;         // DiD > 0
};

/// Strict inequalities: a delta of exactly zero is a failure. Throws
/// EmptyInput.
Accuracies accuracies(std::span<const DeltaScores> deltas);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p_one_tailed = 0.0;  // upper tail, H1: mean > mu0
  double mean = 0.0;
  double std_error = 0.0;
};

/// One-sample t test against mu0 with the upper-tail alternative. Throws
/// InvalidArgument for n < 2 and DegenerateSample for zero variance.
TTest one_sample_t(std::span<const double> values, double mu0 = 0.0);

/// Upper-tail probability of Student's t with df degrees of freedom.
double t_upper_tail(double t, double df);

/// Two-sided t interval for the mean. Throws like one_sample_t.
Interval t_mean_interval(std::span<const double> values, double level = 0.95);

enum class Correction { None, Yates };

struct ChiSquare {
  double statistic = 0.0;
  int df = 1;
  double p = 1.0;
  Correction correction = Correction::None;
};

/// Pearson chi-square on [[a_succ, a_fail], [b_succ, b_fail]]. Yates
/// subtracts 0.5 from each |O - E| (floored at zero). Throws ZeroMarginal.
ChiSquare chi_square_2x2(double a_succ, double a_fail, double b_succ, double b_fail,
                         Correction correction = Correction::None);

/// Wilson score interval. Throws InvalidArgument unless 0 <= k <= n, n >= 1.
Interval wilson_ci(std::size_t k, std::size_t n, double level = 0.95);

struct AggregateReport {
  std::string label;
  std::size_t n_items = 0;
  Proportion acc_delta_plus;
  Proportion acc_did;
  std::optional<TTest> t_delta;  // over Delta(+filler)
  std::optional<TTest> t_did;
  double mean_did = 0.0;
  std::optional<Interval> mean_did_ci;
  double mean_delta_plus = 0.0;
  std::optional<Interval> mean_delta_plus_ci;
};

/// t tests and intervals are left empty when n < 2 or the sample is
/// constant.
AggregateReport aggregate(std::span<const DeltaScores> deltas, std::string label = {});

struct ComparisonReport {
  std::string criterion;  // "delta_plus" or "did"
  std::string label_a;
  std::string label_b;
  std::size_t a_succ = 0;
  std::size_t a_fail = 0;
  std::size_t b_succ = 0;
  std::size_t b_fail = 0;
  ChiSquare chi_square;
};

ComparisonReport compare(const Proportion& a, const Proportion& b, Correction correction,
                         std::string criterion = {}, std::string label_a = {},
                         std::string label_b = {});

}  // namespace gapprobe::metrics
