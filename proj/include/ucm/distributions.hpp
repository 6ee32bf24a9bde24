#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ucm {

/// Generator behind every sampling routine. Seeds map to streams through the
/// standard 64-bit Mersenne Twister; the normal and uniform transforms are the
/// library's std:: distributions, so sequences are reproducible per platform.
using Rng = std::mt19937_64;

struct Normal {
  double mean;
  double stddev;
  bool operator==(const Normal&) const = default;
};

struct Uniform {
  double lo;
  double hi;
  bool operator==(const Uniform&) const = default;
};

struct Degenerate {
  double value;
  bool operator==(const Degenerate&) const = default;
};

/// A parametric law that a sensor's samples follow while it sits in one state.
/// Construction validates parameters, so every instance is usable.
class Distribution {
 public:
  using Variant = std::variant<Normal, Uniform, Degenerate>;

  static Distribution normal(double mean, double stddev);
  static Distribution uniform(double lo, double hi);
  static Distribution degenerate(double value);

  const Variant& variant() const { return law_; }
  bool is_degenerate() const { return std::holds_alternative<Degenerate>(law_); }

  /// Text form used by scenario files: `normal(m,s)`, `uniform(lo,hi)`,
  /// `degenerate(v)`. Numbers are written in shortest round-trip form.
  std::string to_string() const;
  /// Inverse of to_string(); throws std::invalid_argument on bad syntax or
  /// parameters.
  static Distribution parse(std::string_view text);

  bool operator==(const Distribution&) const = default;

 private:
  explicit Distribution(Variant law) : law_(law) {}
  Variant law_;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t sample_size = 0;
  bool operator==(const TestResult&) const = default;
};

/// Absolute tolerance of the exact-match test used for degenerate laws.
inline constexpr double kDegenerateTolerance = 1e-9;

/// Default significance level for state matching.
inline constexpr double kDefaultAlpha = 0.01;

double draw(const Distribution& dist, Rng& rng);
std::vector<double> sample(const Distribution& dist, std::uint64_t seed, std::size_t n);

double cdf(const Distribution& dist, double x);

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// One-sample Kolmogorov-Smirnov test of `values` against `dist`. Degenerate
/// laws use an exact-match test instead (p is 1 or 0).
TestResult gof_test(std::span<const double> values, const Distribution& dist);

/// Two-sample Kolmogorov-Smirnov test; symmetric in its arguments.
TestResult two_sample_test(std::span<const double> a, std::span<const double> b);

struct LabeledDistribution {
  std::string label;
  Distribution dist;
  bool operator==(const LabeledDistribution&) const = default;
};

struct StateMatch {
  std::optional<std::string> label;  // nullopt means ANOMALOUS
  std::vector<TestResult> per_state;  // aligned with the state set
  double level = 0.0;                 // Bonferroni-corrected per-state level

  bool anomalous() const { return !label.has_value(); }
  double best_p() const;
};

/// Tests `values` against every state with level alpha / |states| and returns
/// the non-rejected state with the highest p-value (first on ties).
StateMatch match_state(std::span<const double> values,
                       std::span<const LabeledDistribution> states, double alpha);

}  // namespace ucm
