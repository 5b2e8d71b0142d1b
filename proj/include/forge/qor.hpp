#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "forge/kernel_info.hpp"
#include "forge/pragma.hpp"
#include "forge/source.hpp"

namespace forge {

struct QoRReport {
  enum class Status { Ok, Failed };

  Status status = Status::Ok;
  std::string reason;  // set when Failed
  std::int64_t best_case_latency = 0;
  std::int64_t worst_case_latency = 0;
  std::int64_t bram_18k = 0;
  std::int64_t lut = 0;
  std::int64_t dsp = 0;
  std::int64_t ff = 0;
  double target_clock_period = 10.0;
  double estimated_clock_period = 0.0;

  bool ok() const { return status == Status::Ok; }
  static QoRReport failed(std::string reason);

  bool operator==(const QoRReport&) const = default;
};

struct PartSpec {
  std::string name;
  std::int64_t bram_18k = 0;
  std::int64_t lut = 0;
  std::int64_t dsp = 0;
  std::int64_t ff = 0;
  double clock_ns = 10.0;

  bool operator==(const PartSpec&) const = default;
};

class PartCatalog {
 public:
  // xcu280-fsvh2892-2L-e and xczu9eg-ffvb1156-2-e.
  static PartCatalog builtin();

  // Line-delimited `part_name bram lut dsp ff clock_ns`; '#' starts a comment.
  static PartCatalog parse(std::string_view text);

  // Throws UnknownPart.
  const PartSpec& find(const std::string& name) const;

  void add(PartSpec part);
  const std::vector<PartSpec>& parts() const { return parts_; }

 private:
  std::vector<PartSpec> parts_;
};

// Mean used/available over the resource classes the part has. Throws
// NoResources when the part has none.
double compute_aru(const QoRReport& report, const PartSpec& part);

// Throws MalformedReport with the byte offset of the failing line.
QoRReport parse_report(std::string_view xml);

// Minimal csynth-style XML carrying the report's fields.
std::string render_report(const QoRReport& report);

// Deterministic stand-in for synthesis; see README for the model.
QoRReport analytic_evaluate(const KernelInfo& info, const PragmaConfig& config, const PartSpec& part);

// Tcl script for the vendor flow: project, sources, top, part, clock.
std::string synthesis_script(const SourceUnit& unit, const KernelInfo& info, const PartSpec& part);

struct AdapterSpec {
  // Run with /bin/sh -c inside the workdir. Placeholders: {workdir},
  // {script}, {top}, {part}, {clock}.
  std::string command;
  std::chrono::seconds timeout{600};
};

// Writes the annotated unit and script to workdir (which must not be shared
// with another running evaluation), runs the adapter and parses the
// csynth.xml it leaves under workdir. Throws BackendUnavailable when the
// adapter fails without producing a report.
QoRReport external_evaluate(const std::filesystem::path& workdir, const SourceUnit& annotated,
                            const KernelInfo& info, const AdapterSpec& adapter, const PartSpec& part);

class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // workdir is unique to this design.
  virtual QoRReport evaluate(const SourceUnit& annotated, const KernelInfo& info, const PragmaConfig& config,
                             const PartSpec& part, const std::filesystem::path& workdir) = 0;
};

class AnalyticEvaluator : public Evaluator {
 public:
  QoRReport evaluate(const SourceUnit& annotated, const KernelInfo& info, const PragmaConfig& config,
                     const PartSpec& part, const std::filesystem::path& workdir) override;
};

class ExternalEvaluator : public Evaluator {
 public:
  explicit ExternalEvaluator(AdapterSpec adapter) : adapter_(std::move(adapter)) {}

  QoRReport evaluate(const SourceUnit& annotated, const KernelInfo& info, const PragmaConfig& config,
                     const PartSpec& part, const std::filesystem::path& workdir) override;

 private:
  AdapterSpec adapter_;
};

}  // namespace forge
