#pragma once

#include <string>
#include <vector>

#include "forge/design_point.hpp"

namespace forge {

struct ParetoSet {
  std::string kernel;
  std::vector<DesignPoint> points;  // ascending latency
};

// Non-dominated subset of designs in (latency, aru); returned indices are
// ordered by latency, then aru, then input position. Throws EmptyInput.
std::vector<std::size_t> pareto_indices(const std::vector<DesignPoint>& designs);
ParetoSet pareto_front(const std::vector<DesignPoint>& designs, std::string kernel = {});

// max{0, (l(g)-l(w))/l(w), (r(g)-r(w))/r(w)} * 100. Throws ZeroDenominator.
double delta(const DesignPoint& gamma, const DesignPoint& omega);
// Same with the roles of the denominators swapped: (l(w)-l(g))/l(g), ...
double delta_classic(const DesignPoint& gamma, const DesignPoint& omega);

// Mean over the reference of the nearest predicted point. Throws EmptySet.
double adrs(const ParetoSet& reference, const ParetoSet& predicted);
double adrs_classic(const ParetoSet& reference, const ParetoSet& predicted);

double average_adrs(const std::vector<double>& per_kernel);

enum class StrategyLabel { HighResourceLowLatency, Medium, LowResourceHighLatency };

// "low-latency-high-resource", "medium-latency-medium-resource",
// "high-latency-low-resource".
const char* strategy_name(StrategyLabel label);

// One label per front point, aligned with front.points. Throws EmptyInput.
std::vector<StrategyLabel> tertile_labels(const ParetoSet& front);

double mape(const std::vector<double>& predicted, const std::vector<double>& actual);
double rmse(const std::vector<double>& predicted, const std::vector<double>& actual);

struct KernelAdrs {
  std::string kernel;
  std::size_t reference_size = 0;
  std::size_t predicted_size = 0;
  double adrs = 0;
};

// `kernel, |G|, |O|, adrs` per line, then `average_adrs <v>`; the summary
// line is omitted for an empty list.
std::string metrics_report(const std::vector<KernelAdrs>& rows);

}  // namespace forge
