#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forge/bayes.hpp"
#include "forge/dataset.hpp"
#include "forge/design_space.hpp"
#include "forge/qor.hpp"
#include "forge/source.hpp"

namespace forge {

struct KernelSource {
  std::string name;  // subdirectory name, used as algo_name
  std::filesystem::path dir;
  SourceUnit unit;
};

struct Discovery {
  std::vector<KernelSource> kernels;
  std::vector<std::string> warnings;
};

// Immediate subdirectories holding C-like files, in name order. Directories
// of headers without a function definition are skipped with a warning.
// Throws NoKernels.
Discovery discover_kernels(const std::filesystem::path& search_dir);

enum class Mode { Full, Bayes };
enum class Backend { Analytic, External };

struct Job {
  KernelSource kernel;
  std::string source_name;  // dataset level above the kernel, e.g. "MachSuite"
  Mode mode = Mode::Full;
  TreeOptions tree;
  EnumerationBudget enumeration;
  ExplorerBudget explorer;
  Backend backend = Backend::Analytic;
  AdapterSpec adapter;
  PartSpec part;
  std::filesystem::path data_path;
  // Root of an earlier run whose front serves as the ADRS reference.
  std::optional<std::filesystem::path> reference;
  unsigned inner_workers = 1;  // FULL evaluations in flight

  std::string id() const { return source_name + "/" + kernel.name; }
  std::filesystem::path output_dir() const { return data_path / source_name / kernel.name; }
};

struct PipelineResult {
  std::size_t designs = 0;  // records in designs.json
  std::size_t pareto = 0;
  std::size_t failed_evaluations = 0;
  bool truncated = false;  // FULL enumeration hit max_designs
  KernelAdrs adrs;
};

// Writes under job.output_dir(): design_<id>/ per valid design (annotated
// sources and csynth.xml), designs.json (atomically), run.log, metrics.txt
// and, in FULL mode, enumeration.txt. Throws whatever the stages raise.
PipelineResult run_pipeline(const Job& job);

struct ManifestEntry {
  enum class Status { Pending, Done, Failed };

  std::string job;
  Status status = Status::Pending;
  std::size_t designs = 0;
  double seconds = 0;
  std::string reason;  // failure, or a note on a DONE job (truncation)

  bool operator==(const ManifestEntry&) const = default;
};

struct RunManifest {
  std::vector<ManifestEntry> entries;  // job order

  std::size_t failed() const;
  const ManifestEntry* find(const std::string& job) const;

  // `job\tstatus\tdesigns\tseconds\treason` per line.
  std::string text() const;
  static RunManifest parse(std::string_view text);
};

using JobRunner = std::function<PipelineResult(const Job&)>;

struct ScheduleOptions {
  unsigned max_workers = 1;
  // Rewritten atomically after every status change; DONE entries found here
  // at start are skipped. Empty disables persistence.
  std::filesystem::path manifest_path;
  JobRunner runner;  // defaults to run_pipeline
  std::function<void(const ManifestEntry&)> on_finish;
};

// Never throws for a failing job; the failure lands in the manifest. Sets
// each job's inner_workers so no more than max_workers evaluations run.
RunManifest schedule(std::vector<Job> jobs, const ScheduleOptions& options);

// Every designs.json below root, in path order.
std::vector<std::filesystem::path> find_design_files(const std::filesystem::path& root);

}  // namespace forge
