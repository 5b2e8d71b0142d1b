#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forge/dataset.hpp"
#include "forge/design_space.hpp"
#include "forge/errors.hpp"
#include "forge/kernel_info.hpp"
#include "forge/metrics.hpp"
#include "forge/orchestrator.hpp"
#include "forge/pragma.hpp"
#include "forge/text.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

struct Options {
  std::string search_dir;
  std::string data_path;
  unsigned max_workers = 1;
  int bayesian_opt_number = 40;
  std::string mode;
  std::string part;
  std::string part_catalog;
  std::string backend = "analytic";
  std::string adapter;
  std::uint64_t seed = 0;
  std::uint64_t max_designs = 100000;  // 0: unbounded
  int timeout = 600;
  int restarts = 1;
  int init = 20;
  bool prune = false;
  bool hold_function_sites = false;
  std::string source_name;
  std::string reference;
  bool classic = false;
  bool normalize_keys = false;
  std::string output;
  std::string config;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// `key = value` lines become trailing `--key=value` arguments, so they win
// over anything given on the command line.
std::vector<std::string> config_arguments(const std::string& path, const CLI::App& app) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError(path + ":" + std::to_string(n), "expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::string alt = key;
    std::replace(alt.begin(), alt.end(), '_', '-');
    std::string alt2 = key;
    std::replace(alt2.begin(), alt2.end(), '-', '_');
    std::string name;
    for (const auto& k : {key, alt, alt2}) {
      if (app.get_option_no_throw("--" + k)) {
        name = k;
        break;
      }
    }
    if (name.empty() || name == "config") {
      throw CLI::ValidationError(path + ":" + std::to_string(n), "unknown key '" + key + "'");
    }
    out.push_back("--" + name + "=" + value);
  }
  return out;
}

PartSpec resolve_part(const Options& o) {
  if (o.part.empty()) throw UnknownPart("--part is required");
  auto catalog = PartCatalog::builtin();
  if (!o.part_catalog.empty()) {
    for (const auto& p : PartCatalog::parse(read_file(o.part_catalog)).parts()) catalog.add(p);
  }
  return catalog.find(o.part);
}

std::string source_name_of(const Options& o) {
  if (!o.source_name.empty()) return o.source_name;
  auto p = fs::weakly_canonical(fs::path(o.search_dir));
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

Discovery discover(const Options& o) {
  if (o.search_dir.empty()) throw NoKernels("--search_dir is required");
  auto d = discover_kernels(o.search_dir);
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
  return d;
}

TreeOptions tree_options(const Options& o) { return TreeOptions{o.hold_function_sites}; }

int cmd_analyze(const Options& o) {
  auto d = discover(o);
  int failed = 0;
  for (const auto& k : d.kernels) {
    std::cout << "== " << k.name << "\n";
    try {
      const auto info = analyze(k.unit);
      const auto tree = build_design_tree(info, tree_options(o));
      std::cout << describe(info);
      std::cout << "sites " << tree.sites.size() << "\n";
      std::cout << "designs " << count_leaves(tree) << "\n";
    } catch (const LocatedError& e) {
      std::cout << "FAILED " << e.diagnostic() << "\n";
      ++failed;
    } catch (const Error& e) {
      std::cout << "FAILED " << e.describe() << "\n";
      ++failed;
    }
  }
  return failed == 0 ? 0 : 1;
}

// Rows of each DONE kernel's metrics.txt, in job order.
std::vector<KernelAdrs> collect_metrics(const std::vector<Job>& jobs, const RunManifest& m) {
  std::vector<KernelAdrs> rows;
  for (const auto& j : jobs) {
    const auto* e = m.find(j.id());
    const auto path = j.output_dir() / "metrics.txt";
    if (!e || e->status != ManifestEntry::Status::Done || !fs::exists(path)) continue;
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(trim(c));
    if (cols.size() != 4) continue;
    rows.push_back({cols[0], std::stoul(cols[1]), std::stoul(cols[2]), std::stod(cols[3])});
  }
  return rows;
}

int cmd_dse(const Options& o, Mode mode) {
  if (!o.mode.empty() && o.mode != (mode == Mode::Full ? "full" : "bayes")) {
    throw CLI::ValidationError("--mode", "'" + o.mode + "' contradicts the subcommand");
  }
  if (o.data_path.empty()) throw CLI::RequiredError("--data_path");
  const auto part = resolve_part(o);
  auto d = discover(o);

  std::vector<Job> jobs;
  for (const auto& k : d.kernels) {
    Job j;
    j.kernel = k;
    j.source_name = source_name_of(o);
    j.mode = mode;
    j.tree = tree_options(o);
    if (o.max_designs == 0) {
      j.enumeration.max_designs.reset();
    } else {
      j.enumeration.max_designs = o.max_designs;
    }
    j.enumeration.prune_equivalent = o.prune;
    j.explorer = {o.restarts, o.init, o.bayesian_opt_number, o.seed};
    if (o.backend == "external") {
      if (o.adapter.empty()) throw CLI::RequiredError("--adapter");
      j.backend = Backend::External;
      j.adapter = {o.adapter, std::chrono::seconds(o.timeout)};
    }
    j.part = part;
    j.data_path = o.data_path;
    if (!o.reference.empty()) j.reference = fs::path(o.reference);
    jobs.push_back(std::move(j));
  }

  fs::create_directories(o.data_path);
  std::mutex out;
  ScheduleOptions so;
  so.max_workers = o.max_workers;
  so.manifest_path = fs::path(o.data_path) / "manifest.tsv";
  so.on_finish = [&](const ManifestEntry& e) {
    std::lock_guard lock(out);
    if (e.status == ManifestEntry::Status::Done) {
      std::cout << "DONE " << e.job << " " << e.designs << " designs" << (e.reason.empty() ? "" : " (" + e.reason + ")")
                << "\n";
    } else {
      std::cout << "FAILED " << e.job << " " << e.reason << "\n";
    }
  };
  const auto manifest = schedule(jobs, so);
  write_file_atomic(fs::path(o.data_path) / "metrics.txt", metrics_report(collect_metrics(jobs, manifest)));
  std::cout << manifest.entries.size() - manifest.failed() << " done, " << manifest.failed() << " failed\n";
  return manifest.failed() == 0 ? 0 : 1;
}

struct KernelRecords {
  std::string id;  // <source_name>/<algo_name> relative to the data root
  std::vector<LoadedRecord> records;
};

std::vector<KernelRecords> load_tree(const std::string& root, const Options& o) {
  if (root.empty()) throw CLI::RequiredError("--data_path");
  std::vector<KernelRecords> out;
  for (const auto& f : find_design_files(root)) {
    out.push_back({fs::relative(f.parent_path(), root).generic_string(),
                   load_records(f, {.normalize_keys = o.normalize_keys})});
  }
  if (out.empty()) throw EmptyInput("no designs.json under " + root);
  return out;
}

std::vector<DesignPoint> points_of(const KernelRecords& k) {
  std::vector<DesignPoint> pts;
  for (const auto& r : k.records) pts.push_back(r.point);
  return pts;
}

int cmd_pareto(const Options& o) {
  for (const auto& k : load_tree(o.data_path, o)) {
    std::cout << "# " << k.id << "\n";
    if (k.records.empty()) continue;
    const auto front = pareto_front(points_of(k), k.id);
    const auto labels = tertile_labels(front);
    for (std::size_t i = 0; i < front.points.size(); ++i) {
      const auto& p = front.points[i];
      std::cout << "design_" << p.design_id << "\t" << format_double(p.latency) << "\t" << format_double(p.aru)
                << "\t" << strategy_name(labels[i]) << "\n";
    }
  }
  return 0;
}

int cmd_adrs(const Options& o) {
  if (o.reference.empty()) throw CLI::RequiredError("--reference");
  const auto reference = load_tree(o.reference, o);
  const auto predicted = load_tree(o.data_path, o);
  std::map<std::string, const KernelRecords*> by_id;
  for (const auto& k : predicted) by_id[k.id] = &k;

  std::vector<KernelAdrs> rows;
  for (const auto& ref : reference) {
    auto it = by_id.find(ref.id);
    if (it == by_id.end() || it->second->records.empty() || ref.records.empty()) {
      std::cerr << "warning: " << ref.id << " has no predicted designs, skipped\n";
      continue;
    }
    const auto g = pareto_front(points_of(ref), ref.id);
    const auto w = pareto_front(points_of(*it->second), ref.id);
    rows.push_back({ref.id, g.points.size(), w.points.size(), o.classic ? adrs_classic(g, w) : adrs(g, w)});
  }
  std::cout << metrics_report(rows);
  return rows.empty() ? 1 : 0;
}

int cmd_emit_pairs(const Options& o) {
  std::vector<DesignRecord> records;
  for (auto& k : load_tree(o.data_path, o)) {
    for (auto& r : k.records) records.push_back(std::move(r.record));
  }
  const auto pairs = finetune_pairs_from_records(records);
  const fs::path target = o.output.empty() ? fs::path(o.data_path) / "finetune_pairs.jsonl" : fs::path(o.output);
  if (o.output == "-") {
    std::cout << emit_pairs_jsonl(pairs);
  } else {
    write_file_atomic(target, emit_pairs_jsonl(pairs));
    std::cerr << pairs.size() << " pairs written to " << target.string() << "\n";
  }
  return 0;
}

int cmd_stats(const Options& o) {
  std::vector<DesignRecord> records;
  for (auto& k : load_tree(o.data_path, o)) {
    for (auto& r : k.records) records.push_back(std::move(r.record));
  }
  std::cout << format_stats(corpus_stats(records));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HLS design-space exploration and dataset builder"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--search_dir", o.search_dir, "Directory whose subdirectories are kernels");
  app.add_option("--data_path", o.data_path, "Output (or input) dataset root");
  app.add_option("--max_workers", o.max_workers, "Kernels and evaluations in flight")->check(CLI::PositiveNumber);
  app.add_option("--bayesian_opt_number", o.bayesian_opt_number, "Optimization steps per restart")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--mode", o.mode, "full or bayes; must agree with the subcommand")
      ->check(CLI::IsMember({"full", "bayes"}));
  app.add_option("--part", o.part, "Target part name");
  app.add_option("--part-catalog", o.part_catalog, "Extra parts: `name bram lut dsp ff clock_ns` per line");
  app.add_option("--backend", o.backend, "analytic or external")->check(CLI::IsMember({"analytic", "external"}));
  app.add_option("--adapter", o.adapter, "Shell command running synthesis in {workdir}");
  app.add_option("--seed", o.seed, "Seed for Bayesian exploration");
  app.add_option("--max-designs", o.max_designs, "FULL enumeration cap per kernel, 0 for none");
  app.add_option("--timeout", o.timeout, "External adapter timeout in seconds")->check(CLI::PositiveNumber);
  app.add_option("--restarts", o.restarts, "Bayesian restarts")->check(CLI::PositiveNumber);
  app.add_option("--init", o.init, "Random configurations per restart")->check(CLI::PositiveNumber);
  app.add_flag("--prune", o.prune, "Pair unroll and partition factors on large spaces");
  app.add_flag("--hold-function-sites", o.hold_function_sites, "Keep INLINE and function PIPELINE off");
  app.add_option("--source_name", o.source_name, "Dataset level name (default: search_dir name)");
  app.add_option("--reference", o.reference, "Dataset root whose fronts are the ADRS reference");
  app.add_flag("--classic", o.classic, "adrs: use the (w-g)/g orientation");
  app.add_flag("--normalize-keys", o.normalize_keys, "Accept Available_* spellings when loading");
  app.add_option("--output", o.output, "emit-pairs target file, - for stdout");
  app.add_option("--config", o.config, "File of `key = value` lines overriding flags");

  auto* analyze_cmd = app.add_subcommand("analyze", "Print loops, arrays, sites and design counts");
  auto* full_cmd = app.add_subcommand("full-dse", "Enumerate and evaluate every design");
  auto* bayes_cmd = app.add_subcommand("bayes-dse", "Bayesian exploration per kernel");
  auto* pareto_cmd = app.add_subcommand("pareto", "Print the Pareto front of each designs.json");
  auto* adrs_cmd = app.add_subcommand("adrs", "ADRS of --data_path fronts against --reference fronts");
  auto* pairs_cmd = app.add_subcommand("emit-pairs", "Write instruction-tuning pairs as JSONL");
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    const auto original = args;  // parse() consumes its argument
    app.parse(args);
    if (!o.config.empty()) {
      auto extra = config_arguments(o.config, app);
      std::vector<std::string> again(extra.rbegin(), extra.rend());
      again.insert(again.end(), original.begin(), original.end());
      app.clear();
      o.config.clear();
      app.parse(again);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.describe() << "\n";
    return 2;
  }

  try {
    if (analyze_cmd->parsed()) return cmd_analyze(o);
    if (full_cmd->parsed()) return cmd_dse(o, Mode::Full);
    if (bayes_cmd->parsed()) return cmd_dse(o, Mode::Bayes);
    if (pareto_cmd->parsed()) return cmd_pareto(o);
    if (adrs_cmd->parsed()) return cmd_adrs(o);
    if (pairs_cmd->parsed()) return cmd_emit_pairs(o);
    if (stats_cmd->parsed()) return cmd_stats(o);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const LocatedError& e) {
    std::cerr << "error: " << e.diagnostic() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.describe() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
