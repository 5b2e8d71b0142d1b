#include "forge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "forge/errors.hpp"
#include "forge/text.hpp"

namespace forge {

std::vector<std::size_t> pareto_indices(const std::vector<DesignPoint>& designs) {
  if (designs.empty()) throw EmptyInput("pareto_front of an empty design list");
  std::vector<std::size_t> order(designs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (designs[a].latency != designs[b].latency) return designs[a].latency < designs[b].latency;
    return designs[a].aru < designs[b].aru;
  });

  // A point survives when its aru is the minimum of its latency group and
  // strictly below everything seen at smaller latency.
  std::vector<std::size_t> out;
  double best_before = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    const double lat = designs[order[i]].latency;
    const double group_min = designs[order[i]].aru;
    std::size_t j = i;
    for (; j < order.size() && designs[order[j]].latency == lat; ++j) {
      if (designs[order[j]].aru == group_min && group_min < best_before) out.push_back(order[j]);
    }
    best_before = std::min(best_before, group_min);
    i = j;
  }
  return out;
}

ParetoSet pareto_front(const std::vector<DesignPoint>& designs, std::string kernel) {
  ParetoSet set{std::move(kernel), {}};
  for (auto i : pareto_indices(designs)) set.points.push_back(designs[i]);
  return set;
}

double delta(const DesignPoint& gamma, const DesignPoint& omega) {
  if (omega.latency == 0 || omega.aru == 0) throw ZeroDenominator("delta against a point with zero latency or ARU");
  const double dl = (gamma.latency - omega.latency) / omega.latency;
  const double dr = (gamma.aru - omega.aru) / omega.aru;
  return std::max({0.0, dl, dr}) * 100.0;
}

double delta_classic(const DesignPoint& gamma, const DesignPoint& omega) {
  if (gamma.latency == 0 || gamma.aru == 0) throw ZeroDenominator("delta against a point with zero latency or ARU");
  const double dl = (omega.latency - gamma.latency) / gamma.latency;
  const double dr = (omega.aru - gamma.aru) / gamma.aru;
  return std::max({0.0, dl, dr}) * 100.0;
}

namespace {

template <typename Delta>
double adrs_with(const ParetoSet& reference, const ParetoSet& predicted, Delta d) {
  if (reference.points.empty()) throw EmptySet("reference set is empty");
  if (predicted.points.empty()) throw EmptySet("predicted set is empty");
  double sum = 0;
  for (const auto& g : reference.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : predicted.points) best = std::min(best, d(g, w));
    sum += best;
  }
  return sum / static_cast<double>(reference.points.size());
}

}  // namespace

double adrs(const ParetoSet& reference, const ParetoSet& predicted) {
  return adrs_with(reference, predicted, delta);
}

double adrs_classic(const ParetoSet& reference, const ParetoSet& predicted) {
  return adrs_with(reference, predicted, delta_classic);
}

double average_adrs(const std::vector<double>& per_kernel) {
  if (per_kernel.empty()) throw EmptyInput("average_adrs of an empty list");
  return std::accumulate(per_kernel.begin(), per_kernel.end(), 0.0) / static_cast<double>(per_kernel.size());
}

const char* strategy_name(StrategyLabel label) {
  switch (label) {
    case StrategyLabel::HighResourceLowLatency:
      return "low-latency-high-resource";
    case StrategyLabel::Medium:
      return "medium-latency-medium-resource";
    case StrategyLabel::LowResourceHighLatency:
      return "high-latency-low-resource";
  }
  return "none";
}

std::vector<StrategyLabel> tertile_labels(const ParetoSet& front) {
  const auto& pts = front.points;
  const std::size_t n = pts.size();
  if (n == 0) throw EmptyInput("tertile_labels of an empty front");
  std::vector<StrategyLabel> labels(n, StrategyLabel::Medium);
  if (n < 3) return labels;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].aru != pts[b].aru) return pts[a].aru > pts[b].aru;
    if (pts[a].latency != pts[b].latency) return pts[a].latency < pts[b].latency;
    if (pts[a].canonical != pts[b].canonical) return pts[a].canonical < pts[b].canonical;
    return a < b;
  });
  for (std::size_t rank = 0; rank < n; ++rank) {
    StrategyLabel l = StrategyLabel::LowResourceHighLatency;
    if (rank < n / 3) {
      l = StrategyLabel::HighResourceLowLatency;
    } else if (rank < 2 * n / 3) {
      l = StrategyLabel::Medium;
    }
    labels[order[rank]] = l;
  }
  return labels;
}

namespace {

void check_lengths(const std::vector<double>& p, const std::vector<double>& a) {
  if (p.size() != a.size()) {
    throw LengthMismatch(std::to_string(p.size()) + " predictions for " + std::to_string(a.size()) + " actuals");
  }
  if (p.empty()) throw LengthMismatch("no values");
}

}  // namespace

double mape(const std::vector<double>& predicted, const std::vector<double>& actual) {
  check_lengths(predicted, actual);
  double sum = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0) throw ZeroActual("actual value " + std::to_string(i) + " is zero");
    sum += std::abs(predicted[i] - actual[i]) / std::abs(actual[i]);
  }
  return sum / static_cast<double>(actual.size());
}

double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
  check_lengths(predicted, actual);
  double sum = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

std::string metrics_report(const std::vector<KernelAdrs>& rows) {
  std::string out;
  std::vector<double> values;
  for (const auto& r : rows) {
    out += r.kernel + ", " + std::to_string(r.reference_size) + ", " + std::to_string(r.predicted_size) + ", " +
           format_double(r.adrs) + "\n";
    values.push_back(r.adrs);
  }
  if (!values.empty()) out += "average_adrs " + format_double(average_adrs(values)) + "\n";
  return out;
}

}  // namespace forge
