#include "ucm/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "ucm/format.hpp"

namespace ucm {

Distribution Distribution::normal(double mean, double stddev) {
  if (!std::isfinite(mean) || !std::isfinite(stddev) || !(stddev > 0.0)) {
    throw std::invalid_argument("normal: stddev must be positive and finite");
  }
  return Distribution(Normal{mean, stddev});
}

Distribution Distribution::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw std::invalid_argument("uniform: requires finite lo < hi");
  }
  return Distribution(Uniform{lo, hi});
}

Distribution Distribution::degenerate(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("degenerate: value must be finite");
  }
  return Distribution(Degenerate{value});
}

std::string Distribution::to_string() const {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return "normal(" + format_double(d.mean) + "," + format_double(d.stddev) + ")";
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return "uniform(" + format_double(d.lo) + "," + format_double(d.hi) + ")";
        } else {
          return "degenerate(" + format_double(d.value) + ")";
        }
      },
      law_);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Distribution Distribution::parse(std::string_view text) {
  const auto body = trim(text);
  const auto open = body.find('(');
  if (open == std::string_view::npos || body.back() != ')') {
    throw std::invalid_argument("distribution must look like name(args): '" +
                                std::string(body) + "'");
  }
  const auto name = trim(body.substr(0, open));
  auto inner = body.substr(open + 1, body.size() - open - 2);

  std::vector<double> args;
  while (true) {
    const auto comma = inner.find(',');
    const auto token = trim(inner.substr(0, comma));
    const auto value = parse_double(token);
    if (!value) {
      throw std::invalid_argument("bad number '" + std::string(token) + "' in distribution");
    }
    args.push_back(*value);
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }

  const auto expect = [&](std::size_t n) {
    if (args.size() != n) {
      throw std::invalid_argument(std::string(name) + " takes " + std::to_string(n) +
                                  " argument(s)");
    }
  };
  if (name == "normal") {
    expect(2);
    return normal(args[0], args[1]);
  }
  if (name == "uniform") {
    expect(2);
    return uniform(args[0], args[1]);
  }
  if (name == "degenerate") {
    expect(1);
    return degenerate(args[0]);
  }
  throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
}

double draw(const Distribution& dist, Rng& rng) {
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return std::normal_distribution<double>(d.mean, d.stddev)(rng);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return std::uniform_real_distribution<double>(d.lo, d.hi)(rng);
        } else {
          return d.value;
        }
      },
      dist.variant());
}

std::vector<double> sample(const Distribution& dist, std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw(dist, rng));
  return out;
}

double cdf(const Distribution& dist, double x) {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return 0.5 * std::erfc(-(x - d.mean) / (d.stddev * std::sqrt(2.0)));
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (x <= d.lo) return 0.0;
          if (x >= d.hi) return 1.0;
          return (x - d.lo) / (d.hi - d.lo);
        } else {
          return x < d.value ? 0.0 : 1.0;
        }
      },
      dist.variant());
}

double kolmogorov_survival(double lambda) {
  constexpr int kMaxTerms = 100;
  constexpr double kTermFloor = 1e-10;
  if (!(lambda > 0.0)) return 1.0;
  const double a = -2.0 * lambda * lambda;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= kMaxTerms; ++k) {
    const double term = sign * 2.0 * std::exp(a * k * k);
    sum += term;
    if (std::abs(term) < kTermFloor) return std::clamp(sum, 0.0, 1.0);
    sign = -sign;
  }
  // Not converged: lambda is tiny and Q(lambda) is indistinguishable from 1.
  return 1.0;
}

namespace {

void require_nonempty(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty sample");
}

}  // namespace

TestResult gof_test(std::span<const double> values, const Distribution& dist) {
  require_nonempty(values);
  const auto n = values.size();

  if (const auto* point = std::get_if<Degenerate>(&dist.variant())) {
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v - point->value));
    return {worst, worst <= kDegenerateTolerance ? 1.0 : 0.0, n};
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(dist, sorted[i]);
    d = std::max({d, (i + 1) / dn - f, f - i / dn});
  }
  return {d, kolmogorov_survival(std::sqrt(dn) * d), n};
}

TestResult two_sample_test(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a);
  require_nonempty(b);
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  const double effective = nx * ny / (nx + ny);
  return {d, kolmogorov_survival(std::sqrt(effective) * d), x.size() + y.size()};
}

double StateMatch::best_p() const {
  double best = 0.0;
  for (const auto& r : per_state) best = std::max(best, r.p_value);
  return best;
}

StateMatch match_state(std::span<const double> values,
                       std::span<const LabeledDistribution> states, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (states.empty()) throw std::invalid_argument("empty state set");

  StateMatch result;
  result.level = alpha / static_cast<double>(states.size());
  result.per_state.reserve(states.size());
  double best = -1.0;
  for (const auto& state : states) {
    const auto test = gof_test(values, state.dist);
    result.per_state.push_back(test);
    if (test.p_value >= result.level && test.p_value > best) {
      best = test.p_value;
      result.label = state.label;
    }
  }
  return result;
}

}  // namespace ucm
