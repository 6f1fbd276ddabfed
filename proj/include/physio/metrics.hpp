#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "physio/types.hpp"

namespace physio {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  void add(Awareness truth, Awareness predicted) { ++counts[index(truth)][index(predicted)]; }
  std::size_t total() const;
  std::size_t correct() const;
};

using ClassValues = std::array<double, kNumClasses>;

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;  ///< macro
  double recall = 0.0;     ///< macro
  double f1 = 0.0;         ///< macro
  ClassValues class_precision{};
  ClassValues class_recall{};
  ClassValues class_f1{};
};

/// Accuracy plus macro-averaged precision/recall/F1 over all four classes,
/// with 0/0 taken as 0. Throws EmptyEval on an all-zero matrix.
Metrics metrics(const ConfusionMatrix& cm);

/// Mean and sample standard deviation (n - 1). A single value has std 0 and
/// `single` set.
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
  bool single = false;
};

Summary summarize(std::span<const double> values);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;            ///< two-tailed
  bool degenerate = false;   ///< differences had zero variance
};

/// Paired t-test on a[i] - b[i]. All-zero differences give t = 0, p = 1;
/// constant non-zero differences give t = +-inf, p = 0, both flagged
/// degenerate. Throws InsufficientPairs for fewer than 2 pairs or unequal
/// lengths.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_tailed(double t, double df);

}  // namespace physio
