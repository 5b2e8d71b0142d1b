#include <map>
#include <set>

#include "doctest.h"
#include "forge/design_space.hpp"
#include "helpers.hpp"
#include "legal_configs.hpp"
#include "oracles.hpp"
#include "toy_kernels.hpp"

using namespace forge;
using forge::testing::r1_ok;
using forge::testing::single;

namespace {

std::set<std::string> brute_force(const DesignTree& t) {
  std::vector<int> radix;
  for (const auto& o : t.options) radix.push_back(static_cast<int>(o.size()));
  std::set<std::string> out;
  for (const auto& idx : oracle::cartesian(radix)) {
    PragmaConfig c;
    for (std::size_t i = 0; i < idx.size(); ++i) c.settings.push_back(t.options[i][static_cast<std::size_t>(idx[i])]);
    if (r1_ok(t.sites, c)) out.insert(config_text(t.sites, c));
  }
  return out;
}

std::set<std::string> as_set(const DesignTree& t, const std::vector<PragmaConfig>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) out.insert(config_text(t.sites, c));
  return out;
}

}  // namespace

TEST_CASE("generate_factors") {
  CHECK(generate_factors(8) == std::vector<int>{2, 4, 8});
  CHECK(generate_factors(1).empty());
  CHECK(generate_factors(6) == std::vector<int>{2, 4});
  CHECK(generate_factors(2) == std::vector<int>{2});
}

TEST_CASE("option lists follow the visit order") {
  const auto t = build_design_tree(analyze(forge::testing::toy_loop_array()));
  REQUIRE(t.sites.size() == 4);
  CHECK(t.options[0] == std::vector<Setting>{Setting::off(), Setting::on()});
  CHECK(t.options[1] == std::vector<Setting>{Setting::off(), Setting::partition(PartitionType::Cyclic, 2),
                                             Setting::partition(PartitionType::Block, 2),
                                             Setting::partition(PartitionType::Complete, 0)});
  CHECK(t.options[3] == std::vector<Setting>{Setting::off(), Setting::unroll(2), Setting::unroll(4)});

  const auto held = build_design_tree(analyze(forge::testing::toy_loop_array()), {true});
  CHECK(held.options[0] == std::vector<Setting>{Setting::off()});

  const auto unknown =
      build_design_tree(analyze(single("void f(int a[4], int n) { for (int i = 0; i < n; i++) a[0] += i; }")));
  CHECK(unknown.options[3] == std::vector<Setting>{Setting::off()});
  CHECK(unknown.options[2] == std::vector<Setting>{Setting::off(), Setting::on()});
}

TEST_CASE("toy trees have 24 leaves matching the brute-force product") {
  for (const auto& unit : {forge::testing::toy_loop_array(), forge::testing::toy_nested()}) {
    const auto t = build_design_tree(analyze(unit), {true});
    const auto e = enumerate_designs(t, {std::nullopt, false});
    CHECK(e.configs.size() == 24);
    CHECK_FALSE(e.truncated);
    CHECK(as_set(t, e.configs).size() == 24);
    CHECK(as_set(t, e.configs) == brute_force(t));
    CHECK(count_leaves(t) == 24);
    CHECK(e.configs.front() == all_off(t.sites.size()));
  }
}

TEST_CASE("max_designs keeps a depth-first prefix") {
  const auto t = build_design_tree(analyze(forge::testing::toy_loop_array()), {true});
  const auto full = enumerate_designs(t, {std::nullopt, false});
  const auto head = enumerate_designs(t, {10, false});
  CHECK(head.truncated);
  REQUIRE(head.configs.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(head.configs[i] == full.configs[i]);
  CHECK_FALSE(enumerate_designs(t, {24, false}).truncated);
  for (std::size_t i = 1; i < full.configs.size(); ++i) {
    CHECK(canonical_less(t, full.configs[i - 1], full.configs[i]));
  }
}

TEST_CASE("completeness and validity on every toy kernel") {
  int checked = 0;
  for (const auto& k : forge::testing::toy_kernels()) {
    CAPTURE(k.name);
    const auto info = analyze(k.unit);
    const auto t = build_design_tree(info);
    if (count_leaves(t) > 1000) continue;
    ++checked;
    const auto e = enumerate_designs(t, {std::nullopt, false});
    CHECK(e.configs.size() == count_leaves(t));
    CHECK(as_set(t, e.configs) == brute_force(t));
    for (const auto& c : e.configs) {
      CHECK(validate_config(c, info).ok());
      CHECK(is_leaf(t, c));
    }
    CHECK(enumerate_designs(t, {std::nullopt, false}).configs == e.configs);
  }
  CHECK(checked >= 5);
}

TEST_CASE("leaf counting matches enumeration beyond the brute-force range") {
  for (const auto& k : forge::testing::toy_kernels()) {
    CAPTURE(k.name);
    const auto t = build_design_tree(analyze(k.unit));
    const auto n = count_leaves(t);
    if (n > 200000) continue;
    CHECK(enumerate_designs(t, {std::nullopt, false}).configs.size() == n);
  }
}

TEST_CASE("equivalent-factor pruning") {
  const auto info = analyze(single(
      "void f(int a[8], int b[64]) {\n"
      "  for (int i = 0; i < 8; i++) {\n"
      "    a[i] = a[i] * 3;\n"
      "  }\n"
      "  for (int j = 0; j < 64; j++) {\n"
      "    b[j] = b[j] + 1;\n"
      "  }\n"
      "}\n"));
  const auto t = build_design_tree(info, {true});
  REQUIRE(t.bindings.size() == 2);
  const auto total = count_leaves(t);
  CHECK(total > 64);

  EnumerationBudget below{std::nullopt, true, total};
  CHECK_FALSE(pruning_active(t, below));
  CHECK(enumerate_designs(t, below).configs.size() == total);

  EnumerationBudget above{std::nullopt, true, 64};
  const auto e = enumerate_designs(t, above);
  CHECK(e.pruned);

  // Filter oracle over the unpruned product.
  const auto ua = 4u;  // unroll(f/L0) index in site order
  const auto pa = 1u;  // partition(f/a@1)
  std::set<std::string> expected;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& c : enumerate_designs(t, {std::nullopt, false}).configs) {
    bool keep = true;
    for (const auto& b : t.bindings) {
      const auto& u = c.settings[b.unroll_site];
      const auto& p = c.settings[b.partition_site];
      const bool both_off = u.is_off() && p.is_off();
      const bool same = u.kind == Setting::Kind::Unroll && p.kind == Setting::Kind::Partition &&
                        p.type != PartitionType::Complete && p.factor == u.factor;
      keep = keep && (both_off || same);
    }
    if (keep) expected.insert(config_text(t.sites, c));
  }
  CHECK(as_set(t, e.configs) == expected);
  for (const auto& c : e.configs) {
    CHECK(is_leaf(t, c, true));
    pairs.insert({c.settings[ua].text(), c.settings[pa].text()});
  }
  CHECK(pairs == std::set<std::pair<std::string, std::string>>{
                     {"off", "off"}, {"2", "cyclic:2"}, {"2", "block:2"}, {"4", "cyclic:4"}, {"4", "block:4"}});
}

TEST_CASE("parallel enumeration matches the serial order") {
  for (const auto& k : forge::testing::toy_kernels()) {
    CAPTURE(k.name);
    const auto t = build_design_tree(analyze(k.unit));
    for (auto limit : {std::optional<std::size_t>{}, std::optional<std::size_t>{7}, std::optional<std::size_t>{150}}) {
      if (!limit && count_leaves(t) > 50000) continue;
      const EnumerationBudget b{limit, false};
      const auto serial = enumerate_designs(t, b);
      for (unsigned w : {1u, 2u, 4u}) {
        const auto par = enumerate_designs_parallel(t, b, w);
        CHECK(par.configs == serial.configs);
        CHECK(par.truncated == serial.truncated);
      }
    }
  }
}

TEST_CASE("adding a site keeps every earlier leaf") {
  const auto small = build_design_tree(analyze(forge::testing::toy_nested()));
  const auto big = build_design_tree(analyze(single(
      "int nest(int x) {\n"
      "  int acc = 0;\n"
      "  int buf[4];\n"
      "  for (int i = 0; i < 4; i++) {\n"
      "    for (int j = 0; j < 4; j++) {\n"
      "      acc += i * j + x;\n"
      "    }\n"
      "  }\n"
      "  return acc;\n"
      "}\n")));
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < big.sites.size(); ++i) at[big.sites[i].key()] = i;
  std::set<std::string> projected;
  for (const auto& c : enumerate_designs(big, {std::nullopt, false}).configs) {
    PragmaConfig p;
    for (const auto& s : small.sites) p.settings.push_back(c.settings[at.at(s.key())]);
    projected.insert(config_text(small.sites, p));
  }
  for (const auto& c : enumerate_designs(small, {std::nullopt, false}).configs) {
    CHECK(projected.contains(config_text(small.sites, c)));
  }
}

TEST_CASE("uniform sampling covers the legal leaves evenly") {
  const auto t = build_design_tree(analyze(forge::testing::toy_nested()), {true});
  Rng rng(3);
  std::map<std::string, int> hits;
  const int n = 24000;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_uniform(t, rng);
    REQUIRE(is_leaf(t, c));
    ++hits[config_text(t.sites, c)];
  }
  CHECK(hits.size() == 24);
  for (const auto& [k, v] : hits) {
    CAPTURE(k);
    CHECK(v > 850);
    CHECK(v < 1150);
  }
}

TEST_CASE("manifest lines") {
  const auto t = build_design_tree(analyze(forge::testing::toy_loop_array()), {true});
  const auto e = enumerate_designs(t, {2, false});
  CHECK(manifest_text(t, e.configs) ==
        "design_0\tpipeline(toy)=off;partition(toy/a@1)=off;pipeline(toy/L0)=off;unroll(toy/L0)=off\n"
        "design_1\tpipeline(toy)=off;partition(toy/a@1)=off;pipeline(toy/L0)=off;unroll(toy/L0)=2\n");
}
