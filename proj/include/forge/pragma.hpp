#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/kernel_info.hpp"
#include "forge/source.hpp"

namespace forge {

enum class SiteKind { LoopUnroll, LoopPipeline, ArrayPartition, FunctionInline, FunctionPipeline };

struct PragmaSite {
  SiteKind kind = SiteKind::LoopPipeline;
  std::string function;  // owning function, empty for file-scope arrays
  std::string loop;      // loop id for loop sites
  std::string array;     // ArrayInfo::id for partition sites
  int dim = 0;           // 1-based, partition sites only
  SourceLoc insertion_location;

  // Stable textual key: "unroll(fn/L0.1)", "partition(fn/a@2)", "inline(fn)".
  std::string key() const;

  bool operator==(const PragmaSite&) const = default;
};

enum class PartitionType { Cyclic, Block, Complete };

struct Setting {
  enum class Kind { Off, On, Unroll, Partition };

  Kind kind = Kind::Off;
  PartitionType type = PartitionType::Cyclic;
  int factor = 0;  // Unroll factor, or Partition factor (0 for complete)

  static Setting off() { return {}; }
  static Setting on() { return {Kind::On, PartitionType::Cyclic, 0}; }
  static Setting unroll(int f) { return {Kind::Unroll, PartitionType::Cyclic, f}; }
  static Setting partition(PartitionType t, int f) { return {Kind::Partition, t, t == PartitionType::Complete ? 0 : f}; }

  bool is_off() const { return kind == Kind::Off; }

  // "off", "on", "4", "cyclic:2", "block:4", "complete".
  std::string text() const;

  bool operator==(const Setting&) const = default;
};

std::optional<Setting> parse_setting(std::string_view text);
std::string to_string(PartitionType t);

// One setting per site, aligned with enumerate_sites().
struct PragmaConfig {
  std::vector<Setting> settings;

  std::size_t pragma_count() const;

  bool operator==(const PragmaConfig&) const = default;
};

// Global arrays first; then per function in source order: inline (non-top
// only), pipeline, partitions of params and locals by dimension, and loops in
// preorder with pipeline before unroll.
std::vector<PragmaSite> enumerate_sites(const KernelInfo& info);

PragmaConfig all_off(std::size_t site_count);

// "key=value;key=value" over every site in order.
std::string config_text(const std::vector<PragmaSite>& sites, const PragmaConfig& config);

// Inverse of config_text. Throws InvalidConfig.
PragmaConfig parse_config_text(std::string_view text, const std::vector<PragmaSite>& sites);

struct Violation {
  std::size_t site = 0;
  std::string rule;  // "R1", "power-of-two", "bound", "extent-1", "kind", "coverage"
  std::string message;
};

struct ValidityReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

ValidityReport validate_config(const PragmaConfig& config, const KernelInfo& info);
ValidityReport validate_config(const PragmaConfig& config, const KernelInfo& info,
                               const std::vector<PragmaSite>& sites);

// Directive line for a non-OFF setting, without newline.
std::string directive_text(const PragmaSite& site, const Setting& setting, const KernelInfo& info);

// Materializes the config into the unit's text. Throws InvalidConfig when the
// config is not valid for info.
SourceUnit insert_pragmas(const SourceUnit& unit, const KernelInfo& info, const PragmaConfig& config);

// Reads the HLS directives recorded in info back into a config over
// enumerate_sites(info). Throws InvalidConfig on directives outside the
// vocabulary or that name unknown targets.
PragmaConfig extract_config(const KernelInfo& info);

bool is_power_of_two(std::int64_t v);

}  // namespace forge
