#include <random>
#include <set>

#include "doctest.h"
#include "forge/errors.hpp"
#include "forge/pragma.hpp"
#include "helpers.hpp"
#include "legal_configs.hpp"
#include "toy_kernels.hpp"

using namespace forge;
using forge::testing::random_legal;
using forge::testing::single;

namespace {

std::size_t site_index(const std::vector<PragmaSite>& sites, const std::string& key) {
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].key() == key) return i;
  }
  FAIL("no site " << key);
  return 0;
}

}  // namespace

TEST_CASE("site enumeration") {
  SUBCASE("one loop, one array, single top") {
    const auto sites = enumerate_sites(analyze(forge::testing::toy_loop_array()));
    REQUIRE(sites.size() == 4);
    std::multiset<SiteKind> kinds;
    for (const auto& s : sites) kinds.insert(s.kind);
    CHECK(kinds == std::multiset<SiteKind>{SiteKind::LoopUnroll, SiteKind::LoopPipeline, SiteKind::ArrayPartition,
                                           SiteKind::FunctionPipeline});
  }
  SUBCASE("no loops, no arrays") {
    const auto sites = enumerate_sites(analyze(single("int f(int x) { return x + 1; }")));
    REQUIRE(sites.size() == 1);
    CHECK(sites[0].kind == SiteKind::FunctionPipeline);
  }
  SUBCASE("2-D array") {
    const auto sites = enumerate_sites(analyze(single("void f(int A[4][8]) { A[0][0] = 1; }")));
    REQUIRE(sites.size() == 3);
    CHECK(sites[1].key() == "partition(f/A@1)");
    CHECK(sites[2].key() == "partition(f/A@2)");
  }
  SUBCASE("order: globals, then functions with inline before pipeline, arrays, loops") {
    const auto info = analyze(forge::testing::toy_kernels()[5].unit);
    std::vector<std::string> keys;
    for (const auto& s : enumerate_sites(info)) keys.push_back(s.key());
    CHECK(keys == std::vector<std::string>{"partition(::lut@1)", "pipeline(squares)", "partition(squares/idx@1)",
                                           "partition(squares/out@1)", "partition(squares/tmp@1)",
                                           "pipeline(squares/L0)", "unroll(squares/L0)", "pipeline(squares/L1)",
                                           "unroll(squares/L1)"});
    const auto helper = enumerate_sites(analyze(forge::testing::toy_kernels()[4].unit));
    CHECK(helper[0].key() == "inline(twice)");
    CHECK(helper[1].key() == "pipeline(twice)");
    CHECK(helper[2].key() == "pipeline(scale)");
  }
}

TEST_CASE("settings and config text") {
  for (const auto& s : {Setting::off(), Setting::on(), Setting::unroll(8), Setting::partition(PartitionType::Cyclic, 2),
                        Setting::partition(PartitionType::Block, 4), Setting::partition(PartitionType::Complete, 0)}) {
    CHECK(parse_setting(s.text()) == s);
  }
  CHECK_FALSE(parse_setting("sideways:2").has_value());
  CHECK_FALSE(parse_setting("").has_value());

  const auto info = analyze(forge::testing::toy_loop_array());
  const auto sites = enumerate_sites(info);
  PragmaConfig c = all_off(sites.size());
  c.settings[site_index(sites, "unroll(toy/L0)")] = Setting::unroll(2);
  c.settings[site_index(sites, "partition(toy/a@1)")] = Setting::partition(PartitionType::Block, 2);
  const auto text = config_text(sites, c);
  CHECK(text == "pipeline(toy)=off;partition(toy/a@1)=block:2;pipeline(toy/L0)=off;unroll(toy/L0)=2");
  CHECK(parse_config_text(text, sites) == c);
  CHECK(parse_config_text("unroll(toy/L0)=2;partition(toy/a@1)=block:2", sites) == c);
  CHECK_THROWS_AS(parse_config_text("unroll(toy/L9)=2", sites), InvalidConfig);
  CHECK_THROWS_AS(parse_config_text("unroll(toy/L0)=2;unroll(toy/L0)=4", sites), InvalidConfig);
  CHECK(c.pragma_count() == 2);
}

TEST_CASE("validate_config") {
  const auto info = analyze(single(
      "void f(int a[8][1]) {\n"
      "  for (int i = 0; i < 8; i++) {\n"
      "    for (int j = 0; j < 8; j++) {\n"
      "      a[j][0] += i;\n"
      "    }\n"
      "  }\n"
      "}\n"));
  const auto sites = enumerate_sites(info);
  const auto off = all_off(sites.size());
  CHECK(validate_config(off, info).ok());

  auto c = off;
  c.settings[site_index(sites, "pipeline(f/L0)")] = Setting::on();
  c.settings[site_index(sites, "unroll(f/L0.0)")] = Setting::unroll(2);
  auto r = validate_config(c, info);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == "R1");
  CHECK(r.violations[0].site == site_index(sites, "unroll(f/L0.0)"));

  // Pipeline and unroll on the same loop is fine.
  c = off;
  c.settings[site_index(sites, "pipeline(f/L0.0)")] = Setting::on();
  c.settings[site_index(sites, "unroll(f/L0.0)")] = Setting::unroll(8);
  CHECK(validate_config(c, info).ok());

  c = off;
  c.settings[site_index(sites, "unroll(f/L0)")] = Setting::unroll(3);
  r = validate_config(c, info);
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations[0].rule == "power-of-two");

  c = off;
  c.settings[site_index(sites, "unroll(f/L0)")] = Setting::unroll(16);
  CHECK(validate_config(c, info).violations.at(0).rule == "bound");

  c = off;
  c.settings[site_index(sites, "partition(f/a@1)")] = Setting::partition(PartitionType::Cyclic, 8);
  CHECK(validate_config(c, info).violations.at(0).rule == "bound");
  c.settings[site_index(sites, "partition(f/a@1)")] = Setting::partition(PartitionType::Complete, 0);
  CHECK(validate_config(c, info).ok());

  c = off;
  c.settings[site_index(sites, "partition(f/a@2)")] = Setting::partition(PartitionType::Complete, 0);
  CHECK(validate_config(c, info).violations.at(0).rule == "extent-1");

  c = off;
  c.settings[site_index(sites, "pipeline(f)")] = Setting::unroll(2);
  CHECK(validate_config(c, info).violations.at(0).rule == "kind");

  CHECK(validate_config(all_off(2), info).violations.at(0).rule == "coverage");
}

TEST_CASE("unroll on an unknown trip count is out of bounds") {
  const auto info = analyze(single("void f(int a[8], int n) { for (int i = 0; i < n; i++) { a[i] = 0; } }"));
  const auto sites = enumerate_sites(info);
  auto c = all_off(sites.size());
  c.settings[site_index(sites, "unroll(f/L0)")] = Setting::unroll(2);
  CHECK(validate_config(c, info).violations.at(0).rule == "bound");
  c = all_off(sites.size());
  c.settings[site_index(sites, "pipeline(f/L0)")] = Setting::on();
  CHECK(validate_config(c, info).ok());
}

TEST_CASE("directive strings") {
  const auto info = analyze(forge::testing::toy_loop_array());
  const auto sites = enumerate_sites(info);
  const auto& part = sites[site_index(sites, "partition(toy/a@1)")];
  CHECK(directive_text(part, Setting::partition(PartitionType::Cyclic, 2), info) ==
        "#pragma HLS array_partition variable=a type=cyclic factor=2 dim=1");
  CHECK(directive_text(part, Setting::partition(PartitionType::Complete, 0), info) ==
        "#pragma HLS array_partition variable=a type=complete dim=1");
  CHECK(directive_text(sites[site_index(sites, "unroll(toy/L0)")], Setting::unroll(4), info) ==
        "#pragma HLS unroll factor=4");
  CHECK(directive_text(sites[site_index(sites, "pipeline(toy/L0)")], Setting::on(), info) == "#pragma HLS pipeline");
}

TEST_CASE("insert_pragmas: all-OFF is the identity") {
  for (const auto& k : forge::testing::toy_kernels()) {
    const auto info = analyze(k.unit);
    CHECK(insert_pragmas(k.unit, info, all_off(enumerate_sites(info).size())) == k.unit);
  }
}

TEST_CASE("insert_pragmas: unroll lands on the loop body's first line") {
  const auto unit = forge::testing::toy_loop_array();
  const auto info = analyze(unit);
  const auto sites = enumerate_sites(info);
  auto c = all_off(sites.size());
  c.settings[site_index(sites, "unroll(toy/L0)")] = Setting::unroll(2);
  const auto out = insert_pragmas(unit, info, c);
  CHECK(out.files[0].content ==
        "void toy(int a[4]) {\n"
        "  for (int i = 0; i < 4; i++) {\n"
        "    #pragma HLS unroll factor=2\n"
        "    a[i] = a[i] + 1;\n"
        "  }\n"
        "}\n");
  const auto back = extract_config(analyze(out));
  CHECK(back == c);
}

TEST_CASE("insert_pragmas: partition after the definition, shared points in kind order") {
  const auto unit = single(
      "void g(int v[2]) { v[0] = 1; }\n"
      "void top(int p[8]) {\n"
      "  int a[8];\n"
      "  for (int i = 0; i < 8; i++) { a[i] = p[i]; }\n"
      "  g(a);\n"
      "}\n");
  const auto info = analyze(unit);
  const auto sites = enumerate_sites(info);
  auto c = all_off(sites.size());
  c.settings[site_index(sites, "inline(g)")] = Setting::on();
  c.settings[site_index(sites, "pipeline(g)")] = Setting::on();
  c.settings[site_index(sites, "partition(g/v@1)")] = Setting::partition(PartitionType::Complete, 0);
  c.settings[site_index(sites, "partition(top/a@1)")] = Setting::partition(PartitionType::Cyclic, 2);
  c.settings[site_index(sites, "partition(top/p@1)")] = Setting::partition(PartitionType::Block, 4);
  c.settings[site_index(sites, "pipeline(top/L0)")] = Setting::on();
  c.settings[site_index(sites, "unroll(top/L0)")] = Setting::unroll(4);
  const auto out = insert_pragmas(unit, info, c);
  CHECK(out.files[0].content ==
        "void g(int v[2]) {\n"
        "  #pragma HLS inline\n"
        "  #pragma HLS pipeline\n"
        "  #pragma HLS array_partition variable=v type=complete dim=1\n"
        "   v[0] = 1; }\n"
        "void top(int p[8]) {\n"
        "  #pragma HLS array_partition variable=p type=block factor=4 dim=1\n"
        "  int a[8];\n"
        "  #pragma HLS array_partition variable=a type=cyclic factor=2 dim=1\n"
        "  for (int i = 0; i < 8; i++) {\n"
        "    #pragma HLS pipeline\n"
        "    #pragma HLS unroll factor=4\n"
        "     a[i] = p[i]; }\n"
        "  g(a);\n"
        "}\n");
  CHECK(count_hls_pragmas(out) == c.pragma_count());
  CHECK(extract_config(analyze(out)) == c);
}

TEST_CASE("insert_pragmas: unbraced bodies are wrapped, inner closes first") {
  const auto unit = forge::testing::toy_kernels()[3].unit;
  const auto info = analyze(unit);
  const auto sites = enumerate_sites(info);
  auto c = all_off(sites.size());
  c.settings[site_index(sites, "unroll(mat/L0)")] = Setting::unroll(2);
  c.settings[site_index(sites, "pipeline(mat/L0.0)")] = Setting::on();
  const auto out = insert_pragmas(unit, info, c);
  CHECK(out.files[0].content ==
        "#define N 4\n"
        "void mat(int m[N][N])\n"
        "{\n"
        "    for (int i = 0; i < N; i++)\n"
        "        {\n"
        "      #pragma HLS unroll factor=2\n"
        "      for (int j = 0; j < N; j++)\n"
        "            {\n"
        "          #pragma HLS pipeline\n"
        "          m[i][j] = i + j;\n"
        "        }\n"
        "    }\n"
        "}\n");
  const auto again = analyze(out);
  forge::testing::check_same_structure(info, again);
  CHECK(extract_config(again) == c);
}

TEST_CASE("insert_pragmas rejects invalid configs") {
  const auto unit = forge::testing::toy_loop_array();
  const auto info = analyze(unit);
  auto c = all_off(enumerate_sites(info).size());
  c.settings.back() = Setting::unroll(8);
  CHECK_THROWS_AS(insert_pragmas(unit, info, c), InvalidConfig);
}

TEST_CASE("extract_config reads hand-written directives") {
  const auto info = analyze(single(
      "void f(int a[8]) {\n"
      "#pragma HLS ARRAY_PARTITION variable=a cyclic factor=4 dim=1\n"
      "  for (int i = 0; i < 8; i++) {\n"
      "#pragma HLS unroll\n"
      "    a[i] = 0;\n"
      "  }\n"
      "}\n"));
  const auto sites = enumerate_sites(info);
  const auto c = extract_config(info);
  CHECK(c.settings[site_index(sites, "partition(f/a@1)")] == Setting::partition(PartitionType::Cyclic, 4));
  CHECK(c.settings[site_index(sites, "unroll(f/L0)")] == Setting::unroll(8));
  CHECK_THROWS_AS(extract_config(analyze(single("void f(int a[8]) {\n#pragma HLS array_partition variable=b\n}\n"))),
                  InvalidConfig);
}

TEST_CASE("random legal configs survive insert, re-analysis and extraction") {
  std::mt19937_64 rng(11);
  for (const auto& k : forge::testing::toy_kernels()) {
    CAPTURE(k.name);
    const auto info = analyze(k.unit);
    const auto sites = enumerate_sites(info);
    for (int trial = 0; trial < 25; ++trial) {
      const auto c = random_legal(sites, info, rng);
      CAPTURE(config_text(sites, c));
      REQUIRE(validate_config(c, info).ok());
      const auto out = insert_pragmas(k.unit, info, c);
      const auto again = analyze(out);
      forge::testing::check_same_structure(info, again);
      const auto back = extract_config(again);
      CHECK(back == c);
      CHECK(validate_config(back, again).ok());
      CHECK(count_hls_pragmas(out) == c.pragma_count());
    }
  }
}
