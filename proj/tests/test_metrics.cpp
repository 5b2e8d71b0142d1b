#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "forge/errors.hpp"
#include "forge/metrics.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

DesignPoint pt(double latency, double aru, std::size_t id = 0) {
  DesignPoint d;
  d.latency = latency;
  d.aru = aru;
  d.design_id = id;
  return d;
}

ParetoSet set_of(std::vector<std::pair<double, double>> pts) {
  ParetoSet s;
  for (auto [l, r] : pts) s.points.push_back(pt(l, r));
  return s;
}

std::vector<DesignPoint> random_designs(std::mt19937_64& rng, std::size_t n, bool coarse) {
  std::uniform_int_distribution<int> small(1, 12);
  std::uniform_real_distribution<double> lat(1, 1e5), aru(1e-4, 1.0);
  std::vector<DesignPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse grids force latency ties and duplicates.
    if (coarse) {
      out.push_back(pt(small(rng) * 10.0, small(rng) / 20.0, i));
    } else {
      out.push_back(pt(lat(rng), aru(rng), i));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("pareto front examples") {
  CHECK_THROWS_AS(pareto_front({}), EmptyInput);

  auto one = pareto_front({pt(5, 0.5)});
  REQUIRE(one.points.size() == 1);

  auto f = pareto_front({pt(100, 0.5), pt(200, 0.2), pt(150, 0.6), pt(300, 0.1)});
  REQUIRE(f.points.size() == 3);
  CHECK(f.points[0].latency == 100);
  CHECK(f.points[1].latency == 200);
  CHECK(f.points[2].latency == 300);

  auto same = pareto_front({pt(7, 0.3, 0), pt(7, 0.3, 1), pt(7, 0.3, 2)});
  CHECK(same.points.size() == 3);

  // Equal latency: only the lowest aru of the group survives.
  auto tie = pareto_front({pt(7, 0.3), pt(7, 0.2), pt(9, 0.2)});
  REQUIRE(tie.points.size() == 1);
  CHECK(tie.points[0].aru == 0.2);
}

TEST_CASE("pareto front matches pairwise oracle") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(1, 500);
  for (int trial = 0; trial < 100; ++trial) {
    auto designs = random_designs(rng, size(rng), trial % 2 == 0);
    std::vector<std::pair<double, double>> raw;
    for (const auto& d : designs) raw.emplace_back(d.latency, d.aru);
    auto expect = oracle::pareto_indices(raw);
    auto got = pareto_indices(designs);
    auto sorted = got;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == expect);
    for (std::size_t i = 1; i < got.size(); ++i) CHECK(designs[got[i - 1]].latency <= designs[got[i]].latency);

    // Dropping a dominated point changes nothing.
    if (expect.size() < designs.size()) {
      std::size_t victim = 0;
      while (std::binary_search(expect.begin(), expect.end(), victim)) ++victim;
      auto fewer = designs;
      fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(victim));
      auto a = pareto_front(designs), b = pareto_front(fewer);
      REQUIRE(a.points.size() == b.points.size());
      for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].design_id == b.points[i].design_id);
    }
  }
}

TEST_CASE("delta") {
  CHECK(delta(pt(100, 0.1), pt(100, 0.1)) == 0.0);
  CHECK(delta(pt(100, 0.1), pt(80, 0.1)) == doctest::Approx(25.0));
  CHECK(delta(pt(100, 0.1), pt(120, 0.1)) == 0.0);
  CHECK_THROWS_AS(delta(pt(1, 1), pt(0, 1)), ZeroDenominator);
  CHECK_THROWS_AS(delta(pt(1, 1), pt(1, 0)), ZeroDenominator);

  // The classic orientation penalizes the predicted point being worse.
  CHECK(delta_classic(pt(100, 0.1), pt(120, 0.1)) == doctest::Approx(20.0));
  CHECK(delta_classic(pt(100, 0.1), pt(80, 0.1)) == 0.0);
}

TEST_CASE("adrs") {
  CHECK(adrs(set_of({{100, 0.1}}), set_of({{80, 0.1}})) == doctest::Approx(25.0));
  CHECK(adrs(set_of({{100, 0.2}, {200, 0.1}}), set_of({{100, 0.2}})) == doctest::Approx(50.0));

  try {
    adrs(set_of({{1, 1}}), ParetoSet{});
    FAIL("expected EmptySet");
  } catch (const EmptySet& e) {
    CHECK(std::string(e.what()).find("predicted") != std::string::npos);
  }
  try {
    adrs(ParetoSet{}, set_of({{1, 1}}));
    FAIL("expected EmptySet");
  } catch (const EmptySet& e) {
    CHECK(std::string(e.what()).find("reference") != std::string::npos);
  }

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto front = pareto_front(random_designs(rng, 50, false));
    CHECK(adrs(front, front) == 0.0);
    CHECK(adrs_classic(front, front) == 0.0);

    // Growing the predicted set never raises ADRS.
    auto pool = random_designs(rng, 20, false);
    ParetoSet omega;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& p : pool) {
      omega.points.push_back(p);
      double v = adrs(front, omega);
      CHECK(v >= 0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("average adrs") {
  CHECK(average_adrs({0}) == 0);
  CHECK(average_adrs({25, 75}) == 50);
  CHECK(average_adrs(std::vector<double>(9, 3.5)) == doctest::Approx(3.5));
  CHECK_THROWS_AS(average_adrs({}), EmptyInput);
}

TEST_CASE("tertile labels") {
  auto count = [](const std::vector<StrategyLabel>& ls, StrategyLabel l) {
    return std::count(ls.begin(), ls.end(), l);
  };
  auto front_of = [](std::size_t n) {
    ParetoSet s;
    for (std::size_t i = 0; i < n; ++i) s.points.push_back(pt(100.0 * (i + 1), 1.0 / (i + 1), i));
    return s;
  };

  auto six = tertile_labels(front_of(6));
  CHECK(count(six, StrategyLabel::HighResourceLowLatency) == 2);
  CHECK(count(six, StrategyLabel::Medium) == 2);
  CHECK(count(six, StrategyLabel::LowResourceHighLatency) == 2);

  auto seven = tertile_labels(front_of(7));
  CHECK(count(seven, StrategyLabel::HighResourceLowLatency) == 2);
  CHECK(count(seven, StrategyLabel::Medium) == 2);
  CHECK(count(seven, StrategyLabel::LowResourceHighLatency) == 3);
  // Highest ARU sits at the lowest latency.
  CHECK(seven[0] == StrategyLabel::HighResourceLowLatency);
  CHECK(seven[6] == StrategyLabel::LowResourceHighLatency);

  CHECK(tertile_labels(front_of(1)) == std::vector<StrategyLabel>{StrategyLabel::Medium});
  CHECK(tertile_labels(front_of(2)) == std::vector<StrategyLabel>(2, StrategyLabel::Medium));
  CHECK_THROWS_AS(tertile_labels(ParetoSet{}), EmptyInput);

  CHECK(std::string(strategy_name(StrategyLabel::LowResourceHighLatency)) == "high-latency-low-resource");
  CHECK(std::string(strategy_name(StrategyLabel::Medium)) == "medium-latency-medium-resource");
  CHECK(std::string(strategy_name(StrategyLabel::HighResourceLowLatency)) == "low-latency-high-resource");
}

TEST_CASE("tertile labels ignore ARU scale and break ties canonically") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto front = pareto_front(random_designs(rng, 200, trial % 2 == 0));
    auto scaled = front;
    for (auto& p : scaled.points) p.aru *= 7.25;
    CHECK(tertile_labels(front) == tertile_labels(scaled));
  }

  // Identical objectives: canonical order decides who is HIGH.
  ParetoSet s;
  for (std::size_t i = 0; i < 3; ++i) {
    auto p = pt(10, 0.5, i);
    p.canonical = {2 - i};
    s.points.push_back(p);
  }
  auto labels = tertile_labels(s);
  CHECK(labels[2] == StrategyLabel::HighResourceLowLatency);
  CHECK(labels[1] == StrategyLabel::Medium);
  CHECK(labels[0] == StrategyLabel::LowResourceHighLatency);
}

TEST_CASE("mape and rmse") {
  CHECK(mape({1, 2, 3}, {1, 2, 3}) == 0);
  CHECK(rmse({1, 2, 3}, {1, 2, 3}) == 0);
  CHECK(rmse({1, 2}, {1, 4}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(mape({2}, {1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(mape({1}, {1, 2}), LengthMismatch);
  CHECK_THROWS_AS(rmse({}, {}), LengthMismatch);
  CHECK_THROWS_AS(mape({1}, {0}), ZeroActual);
}

TEST_CASE("metrics report") {
  auto text = metrics_report({{"aes", 4, 3, 12.5}, {"gemm", 2, 2, 0}});
  CHECK(text == "aes, 4, 3, 12.5\ngemm, 2, 2, 0\naverage_adrs 6.25\n");
  CHECK(metrics_report({}).empty());
}
