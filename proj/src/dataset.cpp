#include "forge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>
#include <map>
#include "json.hpp"
#include <numeric>

#include "forge/errors.hpp"
#include "forge/text.hpp"

namespace forge {

using Json = nlohmann::ordered_json;

const std::vector<std::string>& record_keys() {
  static const std::vector<std::string> keys{
      "File Path",        "Part",        "Avialable_BRAM_18K", "Avialable_LUT",
      "Avialable_DSP",    "Avialable_FF", "TargetClockPeriod", "EstimatedClockPeriod",
      "Best-caseLatency", "Worst-caseLatency", "BRAM_18K",     "LUT",
      "DSP",              "FF",          "design_id",          "algo_name",
      "source_name",      "is_pareto",   "is_kernel",          "code_length",
      "pragma_number",    "top_function_name", "latency-resource-strategy", "source_code"};
  return keys;
}

DesignRecord to_record(const DesignPoint& point, const PartSpec& part, const RecordMeta& meta) {
  std::string missing;
  auto need = [&](const std::string& v, const char* name) {
    if (v.empty()) missing += missing.empty() ? name : std::string(", ") + name;
  };
  need(meta.algo_name, "algo_name");
  need(meta.source_name, "source_name");
  need(meta.design_id, "design_id");
  need(meta.top_function_name, "top_function_name");
  need(part.name, "part");
  if (!missing.empty()) throw IncompleteMeta("missing " + missing);
  if (!point.report.ok()) throw InvalidReport("design " + meta.design_id + " failed: " + point.report.reason);

  const auto& q = point.report;
  DesignRecord r;
  r.file_path = meta.file_path.empty() ? meta.source_name + "/" + meta.algo_name + "/design_" + meta.design_id
                                       : meta.file_path;
  r.part = part.name;
  r.available_bram_18k = part.bram_18k;
  r.available_lut = part.lut;
  r.available_dsp = part.dsp;
  r.available_ff = part.ff;
  r.target_clock_period = q.target_clock_period;
  r.estimated_clock_period = q.estimated_clock_period;
  r.best_case_latency = q.best_case_latency;
  r.worst_case_latency = q.worst_case_latency;
  r.bram_18k = q.bram_18k;
  r.lut = q.lut;
  r.dsp = q.dsp;
  r.ff = q.ff;
  r.design_id = meta.design_id;
  r.algo_name = meta.algo_name;
  r.source_name = meta.source_name;
  r.is_pareto = meta.is_pareto;
  r.is_kernel = point.is_kernel;
  r.source_code = point.source.files;
  for (const auto& f : r.source_code) r.code_length += static_cast<std::int64_t>(f.content.size());
  r.pragma_number = static_cast<std::int64_t>(count_hls_pragmas(point.source));
  r.top_function_name = meta.top_function_name;
  r.strategy = meta.is_pareto && meta.label ? strategy_name(*meta.label) : "none";
  return r;
}

namespace {

Json to_json(const DesignRecord& r) {
  const auto& k = record_keys();
  Json j = Json::object();
  j[k[0]] = r.file_path;
  j[k[1]] = r.part;
  j[k[2]] = r.available_bram_18k;
  j[k[3]] = r.available_lut;
  j[k[4]] = r.available_dsp;
  j[k[5]] = r.available_ff;
  j[k[6]] = r.target_clock_period;
  j[k[7]] = r.estimated_clock_period;
  j[k[8]] = r.best_case_latency;
  j[k[9]] = r.worst_case_latency;
  j[k[10]] = r.bram_18k;
  j[k[11]] = r.lut;
  j[k[12]] = r.dsp;
  j[k[13]] = r.ff;
  j[k[14]] = r.design_id;
  j[k[15]] = r.algo_name;
  j[k[16]] = r.source_name;
  j[k[17]] = r.is_pareto;
  j[k[18]] = r.is_kernel;
  j[k[19]] = r.code_length;
  j[k[20]] = r.pragma_number;
  j[k[21]] = r.top_function_name;
  j[k[22]] = r.strategy;
  Json files = Json::array();
  for (const auto& f : r.source_code) {
    Json o = Json::object();
    o["file_name"] = f.name;
    o["file_content"] = f.content;
    files.push_back(std::move(o));
  }
  j[k[23]] = std::move(files);
  return j;
}

std::string normalized_spelling(const std::string& key) {
  static const std::string bad = "Avialable_", good = "Available_";
  if (key.starts_with(good)) return bad + key.substr(good.size());
  return key;
}

class RecordReader {
 public:
  RecordReader(const Json& j, std::size_t index, const LoadOptions& options) : index_(index) {
    if (!j.is_object()) fail("is not an object");
    for (const auto& [key, value] : j.items()) {
      const std::string k = options.normalize_keys ? normalized_spelling(key) : key;
      if (fields_.count(k)) fail("repeats key '" + k + "'");
      fields_.emplace(k, &value);
    }
    for (const auto& k : record_keys()) {
      if (!fields_.count(k)) fail("missing key '" + k + "'");
    }
    for (const auto& [key, value] : j.items()) {
      const std::string k = options.normalize_keys ? normalized_spelling(key) : key;
      if (std::find(record_keys().begin(), record_keys().end(), k) == record_keys().end()) {
        fail("unexpected key '" + key + "'");
      }
    }
  }

  std::string str(const std::string& k) const {
    const auto& v = at(k);
    if (!v.is_string()) fail("'" + k + "' is not a string");
    return v.get<std::string>();
  }

  std::int64_t integer(const std::string& k) const {
    const auto& v = at(k);
    if (!v.is_number_integer()) fail("'" + k + "' is not an integer");
    return v.get<std::int64_t>();
  }

  double real(const std::string& k) const {
    const auto& v = at(k);
    if (!v.is_number()) fail("'" + k + "' is not a number");
    return v.get<double>();
  }

  bool boolean(const std::string& k) const {
    const auto& v = at(k);
    if (!v.is_boolean()) fail("'" + k + "' is not a boolean");
    return v.get<bool>();
  }

  std::vector<SourceFile> files(const std::string& k) const {
    const auto& v = at(k);
    if (!v.is_array()) fail("'" + k + "' is not an array");
    std::vector<SourceFile> out;
    for (const auto& f : v) {
      if (!f.is_object() || f.size() != 2 || !f.contains("file_name") || !f.contains("file_content") ||
          !f["file_name"].is_string() || !f["file_content"].is_string()) {
        fail("'" + k + "' entries need exactly file_name and file_content strings");
      }
      out.push_back({f["file_name"].get<std::string>(), f["file_content"].get<std::string>()});
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaViolation("record " + std::to_string(index_) + " " + what);
  }

 private:
  const Json& at(const std::string& k) const { return *fields_.at(k); }

  std::size_t index_;
  std::map<std::string, const Json*> fields_;
};

LoadedRecord read_record(const Json& j, std::size_t index, const LoadOptions& options) {
  RecordReader in(j, index, options);
  const auto& k = record_keys();
  LoadedRecord out;
  auto& r = out.record;
  r.file_path = in.str(k[0]);
  r.part = in.str(k[1]);
  r.available_bram_18k = in.integer(k[2]);
  r.available_lut = in.integer(k[3]);
  r.available_dsp = in.integer(k[4]);
  r.available_ff = in.integer(k[5]);
  r.target_clock_period = in.real(k[6]);
  r.estimated_clock_period = in.real(k[7]);
  r.best_case_latency = in.integer(k[8]);
  r.worst_case_latency = in.integer(k[9]);
  r.bram_18k = in.integer(k[10]);
  r.lut = in.integer(k[11]);
  r.dsp = in.integer(k[12]);
  r.ff = in.integer(k[13]);
  r.design_id = in.str(k[14]);
  r.algo_name = in.str(k[15]);
  r.source_name = in.str(k[16]);
  r.is_pareto = in.boolean(k[17]);
  r.is_kernel = in.boolean(k[18]);
  r.code_length = in.integer(k[19]);
  r.pragma_number = in.integer(k[20]);
  r.top_function_name = in.str(k[21]);
  r.strategy = in.str(k[22]);
  r.source_code = in.files(k[23]);

  auto& p = out.point;
  std::size_t id = 0;
  auto [ptr, ec] = std::from_chars(r.design_id.data(), r.design_id.data() + r.design_id.size(), id);
  if (ec == std::errc{} && ptr == r.design_id.data() + r.design_id.size()) p.design_id = id;
  p.report.best_case_latency = r.best_case_latency;
  p.report.worst_case_latency = r.worst_case_latency;
  p.report.bram_18k = r.bram_18k;
  p.report.lut = r.lut;
  p.report.dsp = r.dsp;
  p.report.ff = r.ff;
  p.report.target_clock_period = r.target_clock_period;
  p.report.estimated_clock_period = r.estimated_clock_period;
  p.latency = static_cast<double>(r.worst_case_latency);
  const PartSpec part{r.part, r.available_bram_18k, r.available_lut, r.available_dsp, r.available_ff,
                      r.target_clock_period};
  try {
    p.aru = compute_aru(p.report, part);
  } catch (const NoResources&) {
    in.fail("has no available resources");
  }
  p.source.files = r.source_code;
  p.is_kernel = r.is_kernel;
  return out;
}

}  // namespace

std::string emit_records(const std::vector<DesignRecord>& records) {
  Json arr = Json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr.dump(4, ' ', false, Json::error_handler_t::replace) + "\n";
}

std::vector<LoadedRecord> parse_records(std::string_view text, const LoadOptions& options) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(e.byte > 0 ? e.byte - 1 : 0, "invalid JSON");
  }
  if (!j.is_array()) throw SchemaViolation("top-level value is not an array");
  std::vector<LoadedRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_record(j[i], i, options));
  return out;
}

std::vector<LoadedRecord> load_records(const std::filesystem::path& path, const LoadOptions& options) {
  return parse_records(read_file(path), options);
}

const char* instruction_for(StrategyLabel label) {
  switch (label) {
    case StrategyLabel::LowResourceHighLatency:
      return "optimize for low resource usage and high latency.";
    case StrategyLabel::Medium:
      return "optimize for balanced resource usage and latency.";
    case StrategyLabel::HighResourceLowLatency:
      return "optimize for high resource usage and low latency.";
  }
  return "";
}

std::optional<StrategyLabel> label_from_strategy(std::string_view strategy) {
  for (auto l : {StrategyLabel::HighResourceLowLatency, StrategyLabel::Medium, StrategyLabel::LowResourceHighLatency}) {
    if (strategy == strategy_name(l)) return l;
  }
  return std::nullopt;
}

std::string concatenate_sources(const std::vector<SourceFile>& files) {
  std::string out;
  for (const auto& f : files) {
    out += f.content;
    if (!f.content.empty() && f.content.back() != '\n') out += '\n';
  }
  return out;
}

std::vector<FinetunePair> emit_finetune_pairs(const SourceUnit& kernel, const ParetoSet& front,
                                              const std::vector<StrategyLabel>& labels) {
  if (front.points.empty()) {
    std::cerr << "warning: " << (front.kernel.empty() ? "kernel" : front.kernel)
              << " has an empty Pareto front; no pairs emitted\n";
    return {};
  }
  if (labels.size() != front.points.size()) {
    throw UnlabeledFront(std::to_string(labels.size()) + " labels for " + std::to_string(front.points.size()) +
                         " Pareto points");
  }
  const std::string input = concatenate_sources(kernel.files);
  std::vector<FinetunePair> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back({instruction_for(labels[i]), input, concatenate_sources(front.points[i].source.files)});
  }
  return out;
}

std::vector<FinetunePair> finetune_pairs_from_records(const std::vector<DesignRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<const DesignRecord*>> groups;
  for (const auto& r : records) groups[{r.source_name, r.algo_name}].push_back(&r);
  std::vector<FinetunePair> out;
  for (const auto& [key, members] : groups) {
    const DesignRecord* kernel = nullptr;
    for (auto* r : members) {
      if (r->is_kernel && !kernel) kernel = r;
    }
    for (auto* r : members) {
      if (!r->is_pareto) continue;
      if (!kernel) throw SchemaViolation(key.first + "/" + key.second + " has no is_kernel record");
      auto label = label_from_strategy(r->strategy);
      if (!label) throw UnlabeledFront(r->file_path + " is Pareto but has strategy '" + r->strategy + "'");
      out.push_back({instruction_for(*label), concatenate_sources(kernel->source_code),
                     concatenate_sources(r->source_code)});
    }
  }
  return out;
}

std::string emit_pairs_jsonl(const std::vector<FinetunePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    Json j = Json::object();
    j["instruction"] = p.instruction;
    j["input"] = p.input;
    j["output"] = p.output;
    out += j.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<DesignRecord>& records) {
  if (records.empty()) throw EmptyInput("corpus_stats of no records");
  std::map<std::pair<std::string, std::string>, std::vector<const DesignRecord*>> groups;
  for (const auto& r : records) groups[{r.source_name, r.algo_name}].push_back(&r);

  CorpusStats s;
  double pragmas = 0, length = 0;
  for (const auto& [key, members] : groups) {
    KernelStats k{key.first, key.second, members.size(), 0, 0, 0};
    for (auto* r : members) {
      k.pareto += r->is_pareto ? 1 : 0;
      k.mean_pragmas += static_cast<double>(r->pragma_number);
      k.mean_code_length += static_cast<double>(r->code_length);
    }
    pragmas += k.mean_pragmas;
    length += k.mean_code_length;
    k.mean_pragmas /= static_cast<double>(members.size());
    k.mean_code_length /= static_cast<double>(members.size());
    s.pareto += k.pareto;
    s.kernels.push_back(std::move(k));
  }
  s.designs = records.size();
  s.mean_pragmas = pragmas / static_cast<double>(records.size());
  s.mean_code_length = length / static_cast<double>(records.size());
  return s;
}

std::string format_stats(const CorpusStats& stats) {
  std::string out = "source_name\talgo_name\tdesigns\tpareto\tmean_pragmas\tmean_code_length\n";
  for (const auto& k : stats.kernels) {
    out += k.source_name + "\t" + k.algo_name + "\t" + std::to_string(k.designs) + "\t" + std::to_string(k.pareto) +
           "\t" + format_double(k.mean_pragmas) + "\t" + format_double(k.mean_code_length) + "\n";
  }
  out += "total\t" + std::to_string(stats.kernels.size()) + " kernels\t" + std::to_string(stats.designs) + "\t" +
         std::to_string(stats.pareto) + "\t" + format_double(stats.mean_pragmas) + "\t" +
         format_double(stats.mean_code_length) + "\n";
  return out;
}

}  // namespace forge
