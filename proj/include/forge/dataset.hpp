#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/design_point.hpp"
#include "forge/metrics.hpp"
#include "forge/qor.hpp"
#include "forge/source.hpp"

namespace forge {

// One element of designs.json. Field order follows the on-disk key order.
struct DesignRecord {
  std::string file_path;
  std::string part;
  std::int64_t available_bram_18k = 0;
  std::int64_t available_lut = 0;
  std::int64_t available_dsp = 0;
  std::int64_t available_ff = 0;
  double target_clock_period = 0;
  double estimated_clock_period = 0;
  std::int64_t best_case_latency = 0;
  std::int64_t worst_case_latency = 0;
  std::int64_t bram_18k = 0;
  std::int64_t lut = 0;
  std::int64_t dsp = 0;
  std::int64_t ff = 0;
  std::string design_id;
  std::string algo_name;
  std::string source_name;
  bool is_pareto = false;
  bool is_kernel = false;
  std::int64_t code_length = 0;
  std::int64_t pragma_number = 0;
  std::string top_function_name;
  std::string strategy = "none";
  std::vector<SourceFile> source_code;

  bool operator==(const DesignRecord&) const = default;
};

// On-disk keys in order, spelled as published ("Avialable_*").
const std::vector<std::string>& record_keys();

struct RecordMeta {
  std::string algo_name;
  std::string source_name;
  std::string design_id;
  std::string file_path;  // empty: <source_name>/<algo_name>/design_<design_id>
  std::string top_function_name;
  bool is_pareto = false;
  std::optional<StrategyLabel> label;  // ignored unless is_pareto
};

// Throws IncompleteMeta naming every empty required field, InvalidReport when
// the point's report is not OK.
DesignRecord to_record(const DesignPoint& point, const PartSpec& part, const RecordMeta& meta);

// 4-space indented JSON array plus trailing newline.
std::string emit_records(const std::vector<DesignRecord>& records);

struct LoadOptions {
  // Also accept "Available_*" for the four capacity keys.
  bool normalize_keys = false;
};

struct LoadedRecord {
  DesignRecord record;
  DesignPoint point;  // ARU recomputed from the record's capacity fields
};

// Throws ParseError (byte offset where reading stopped) and SchemaViolation (first missing or extra
// key, or a value of the wrong type).
std::vector<LoadedRecord> parse_records(std::string_view text, const LoadOptions& options = {});
std::vector<LoadedRecord> load_records(const std::filesystem::path& path, const LoadOptions& options = {});

struct FinetunePair {
  std::string instruction;
  std::string input;
  std::string output;

  bool operator==(const FinetunePair&) const = default;
};

const char* instruction_for(StrategyLabel label);
std::optional<StrategyLabel> label_from_strategy(std::string_view strategy);

// File contents in order, each ending in a newline.
std::string concatenate_sources(const std::vector<SourceFile>& files);

// One pair per front member. Throws UnlabeledFront when labels do not cover
// the front.
std::vector<FinetunePair> emit_finetune_pairs(const SourceUnit& kernel, const ParetoSet& front,
                                              const std::vector<StrategyLabel>& labels);

// Groups records by (source_name, algo_name); the is_kernel record is the
// input and Pareto records are the outputs. Throws UnlabeledFront when a
// Pareto record has no strategy and SchemaViolation when a kernel with Pareto
// records has no is_kernel record.
std::vector<FinetunePair> finetune_pairs_from_records(const std::vector<DesignRecord>& records);

// One JSON object per line with keys instruction, input, output.
std::string emit_pairs_jsonl(const std::vector<FinetunePair>& pairs);

struct KernelStats {
  std::string source_name;
  std::string algo_name;
  std::size_t designs = 0;
  std::size_t pareto = 0;
  double mean_pragmas = 0;
  double mean_code_length = 0;
};

struct CorpusStats {
  std::vector<KernelStats> kernels;  // sorted by (source_name, algo_name)
  std::size_t designs = 0;
  std::size_t pareto = 0;
  double mean_pragmas = 0;
  double mean_code_length = 0;
};

// Throws EmptyInput.
CorpusStats corpus_stats(const std::vector<DesignRecord>& records);
std::string format_stats(const CorpusStats& stats);

}  // namespace forge
