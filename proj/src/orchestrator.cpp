#include "forge/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "forge/errors.hpp"
#include "forge/kernel_info.hpp"
#include "forge/metrics.hpp"
#include "forge/pragma.hpp"
#include "forge/text.hpp"

namespace forge {

namespace fs = std::filesystem;

Discovery discover_kernels(const fs::path& search_dir) {
  if (!fs::is_directory(search_dir)) throw NoKernels(search_dir.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(search_dir)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());

  Discovery out;
  for (const auto& d : dirs) {
    const bool has_sources = std::any_of(fs::directory_iterator(d), fs::directory_iterator{}, [](const auto& e) {
      return e.is_regular_file() && is_c_like_file(e.path());
    });
    if (!has_sources) continue;
    SourceUnit unit = load_unit_from_dir(d);
    const bool headers_only = std::all_of(unit.files.begin(), unit.files.end(),
                                          [](const SourceFile& f) { return is_header_file(f.name); });
    if (headers_only) {
      bool has_function = true;
      try {
        analyze(unit);
      } catch (const MissingTop&) {
        has_function = false;
      } catch (const Error&) {
        // Left for the pipeline to report.
      }
      if (!has_function) {
        out.warnings.push_back(d.filename().string() + ": only headers without a function definition, skipped");
        continue;
      }
    }
    out.kernels.push_back({d.filename().string(), d, std::move(unit)});
  }
  if (out.kernels.empty()) throw NoKernels("no kernel directories under " + search_dir.string());
  return out;
}

namespace {

std::unique_ptr<Evaluator> make_evaluator(const Job& job) {
  if (job.backend == Backend::External) {
    if (job.adapter.command.empty()) throw BackendUnavailable("external backend without an adapter command");
    return std::make_unique<ExternalEvaluator>(job.adapter);
  }
  return std::make_unique<AnalyticEvaluator>();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Fills latency and aru for an OK report; a report the cost rejects turns
// into a failure.
std::optional<double> settle(DesignPoint& p, const PartSpec& part) {
  if (!p.report.ok()) return std::nullopt;
  try {
    const double c = cost(p.report, part);
    p.latency = static_cast<double>(p.report.worst_case_latency);
    p.aru = compute_aru(p.report, part);
    return c;
  } catch (const InvalidReport& e) {
    p.report = QoRReport::failed(e.what());
    return std::nullopt;
  }
}

void write_design_dir(const fs::path& dir, const DesignPoint& p) {
  write_unit(p.source, dir);
  write_file_atomic(dir / "csynth.xml", render_report(p.report));
}

struct Kernel {
  const Job& job;
  KernelInfo info;
  DesignTree tree;
  fs::path out;
  std::unique_ptr<Evaluator> evaluator;
};

DesignPoint evaluate_config(Kernel& k, const PragmaConfig& config, std::size_t id, const fs::path& workdir) {
  DesignPoint p;
  p.design_id = id;
  p.config = config;
  p.config_text = config_text(k.tree.sites, config);
  p.canonical = option_indices(k.tree, config);
  p.source = insert_pragmas(k.job.kernel.unit, k.info, config);
  p.report = k.evaluator->evaluate(p.source, k.info, config, k.job.part, workdir);
  return p;
}

std::vector<DesignPoint> run_full(Kernel& k, std::string& log, PipelineResult& result) {
  const auto en = enumerate_designs(k.tree, k.job.enumeration);
  result.truncated = en.truncated;
  write_file_atomic(k.out / "enumeration.txt", manifest_text(k.tree, en.configs));

  const std::size_t n = en.configs.size();
  std::vector<std::optional<DesignPoint>> slots(n);
  std::vector<RunLogRecord> records(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        const auto start = std::chrono::steady_clock::now();
        const auto dir = k.out / ("design_" + std::to_string(i));
        DesignPoint p = evaluate_config(k, en.configs[i], i, dir);
        const auto c = settle(p, k.job.part);
        if (c) write_design_dir(dir, p);
        records[i] = {0, static_cast<int>(i), p.config_text, c, seconds_since(start)};
        if (c) slots[i] = std::move(p);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(k.job.inner_workers, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<DesignPoint> designs;
  for (std::size_t i = 0; i < n; ++i) {
    log += records[i].line() + "\n";
    if (slots[i]) {
      designs.push_back(std::move(*slots[i]));
    } else {
      ++result.failed_evaluations;
    }
  }
  return designs;
}

std::vector<DesignPoint> run_bayes(Kernel& k, std::string& log, PipelineResult& result) {
  const auto baseline_config = all_off(k.tree.sites.size());
  const auto start = std::chrono::steady_clock::now();
  DesignPoint baseline = evaluate_config(k, baseline_config, 0, k.out / "design_0");
  const auto c0 = settle(baseline, k.job.part);
  log += RunLogRecord{-1, 0, baseline.config_text, c0, seconds_since(start)}.line() + "\n";

  std::vector<DesignPoint> designs;
  std::set<std::vector<std::size_t>> seen;
  if (c0) {
    write_design_dir(k.out / "design_0", baseline);
    seen.insert(baseline.canonical);
    designs.push_back(std::move(baseline));
  } else {
    ++result.failed_evaluations;
  }

  ExploreContext ctx;
  ctx.unit = &k.job.kernel.unit;
  ctx.info = &k.info;
  ctx.tree = &k.tree;
  ctx.evaluator = k.evaluator.get();
  ctx.part = k.job.part;
  ctx.work_root = k.out / "bayes_work";
  ctx.on_record = [&](const RunLogRecord& r) {
    log += r.line() + "\n";
    if (!r.cost) ++result.failed_evaluations;
  };
  ctx.on_design = [&](const DesignPoint& p) {
    if (!seen.insert(p.canonical).second) return;
    DesignPoint d = p;
    d.design_id = designs.empty() ? 1 : designs.back().design_id + 1;
    write_design_dir(k.out / ("design_" + std::to_string(d.design_id)), d);
    designs.push_back(std::move(d));
  };
  try {
    explore_bayesian(ctx, k.job.explorer);
  } catch (...) {
    write_file_atomic(k.out / "run.log", log);
    throw;
  }
  if (k.job.backend == Backend::Analytic) fs::remove_all(ctx.work_root);
  return designs;
}

KernelAdrs kernel_adrs(const Job& job, const ParetoSet& own) {
  ParetoSet reference = own;
  if (job.reference) {
    const auto path = *job.reference / job.source_name / job.kernel.name / "designs.json";
    if (fs::exists(path)) {
      std::vector<DesignPoint> points;
      for (auto& l : load_records(path)) points.push_back(std::move(l.point));
      if (!points.empty()) reference = pareto_front(points, job.id());
    }
  }
  KernelAdrs row{job.id(), reference.points.size(), own.points.size(), 0};
  try {
    row.adrs = adrs(reference, own);
  } catch (const ZeroDenominator&) {
    row.adrs = std::nan("");
  }
  return row;
}

}  // namespace

PipelineResult run_pipeline(const Job& job) {
  Kernel k{job, analyze(job.kernel.unit), {}, job.output_dir(), make_evaluator(job)};
  k.tree = build_design_tree(k.info, job.tree);
  fs::remove_all(k.out);
  fs::create_directories(k.out);

  PipelineResult result;
  std::string log;
  auto designs = job.mode == Mode::Full ? run_full(k, log, result) : run_bayes(k, log, result);
  write_file_atomic(k.out / "run.log", log);

  const auto baseline_key = option_indices(k.tree, all_off(k.tree.sites.size()));
  auto base = std::find_if(designs.begin(), designs.end(),
                           [&](const DesignPoint& p) { return p.canonical == baseline_key; });
  if (base == designs.end()) throw InvalidReport(job.id() + ": baseline design has no valid report");
  base->is_kernel = true;

  const auto front_idx = pareto_indices(designs);
  ParetoSet front{job.id(), {}};
  for (auto i : front_idx) front.points.push_back(designs[i]);
  const auto labels = tertile_labels(front);

  std::vector<std::optional<StrategyLabel>> label_of(designs.size());
  for (std::size_t f = 0; f < front_idx.size(); ++f) label_of[front_idx[f]] = labels[f];

  std::vector<DesignRecord> records;
  for (std::size_t i = 0; i < designs.size(); ++i) {
    RecordMeta meta{job.kernel.name, job.source_name, std::to_string(designs[i].design_id), "",
                    k.info.top_function, label_of[i].has_value(), label_of[i]};
    records.push_back(to_record(designs[i], job.part, meta));
  }
  write_file_atomic(k.out / "designs.json", emit_records(records));

  result.designs = records.size();
  result.pareto = front.points.size();
  result.adrs = kernel_adrs(job, front);
  write_file_atomic(k.out / "metrics.txt", metrics_report({result.adrs}));
  return result;
}

// ---------------------------------------------------------------------------
// Manifest and scheduling

namespace {

const char* status_name(ManifestEntry::Status s) {
  switch (s) {
    case ManifestEntry::Status::Pending:
      return "PENDING";
    case ManifestEntry::Status::Done:
      return "DONE";
    case ManifestEntry::Status::Failed:
      return "FAILED";
  }
  return "PENDING";
}

std::string one_line(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return s;
}

std::string failure_reason(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const LocatedError& err) {
    return err.describe() + " (" + err.file() + ":" + std::to_string(err.line()) + ":" + std::to_string(err.col()) +
           ")";
  } catch (const Error& err) {
    return err.describe();
  } catch (const std::exception& err) {
    return std::string("InternalError: ") + err.what();
  } catch (...) {
    return "InternalError: unknown exception";
  }
}

}  // namespace

std::size_t RunManifest::failed() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const ManifestEntry& e) {
    return e.status == ManifestEntry::Status::Failed;
  }));
}

const ManifestEntry* RunManifest::find(const std::string& job) const {
  for (const auto& e : entries) {
    if (e.job == job) return &e;
  }
  return nullptr;
}

std::string RunManifest::text() const {
  std::string out;
  for (const auto& e : entries) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", e.seconds);
    out += one_line(e.job) + "\t" + status_name(e.status) + "\t" + std::to_string(e.designs) + "\t" + secs + "\t" +
           one_line(e.reason) + "\n";
  }
  return out;
}

RunManifest RunManifest::parse(std::string_view text) {
  RunManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() < 4) continue;
    ManifestEntry e;
    e.job = cols[0];
    if (cols[1] == "DONE") {
      e.status = ManifestEntry::Status::Done;
    } else if (cols[1] == "FAILED") {
      e.status = ManifestEntry::Status::Failed;
    }
    try {
      e.designs = std::stoul(cols[2]);
      e.seconds = std::stod(cols[3]);
    } catch (const std::exception&) {
      continue;
    }
    if (cols.size() > 4) e.reason = cols[4];
    m.entries.push_back(std::move(e));
  }
  return m;
}

RunManifest schedule(std::vector<Job> jobs, const ScheduleOptions& options) {
  if (options.max_workers == 0) throw std::invalid_argument("max_workers must be at least 1");
  const JobRunner runner = options.runner ? options.runner : JobRunner(run_pipeline);

  RunManifest prior;
  if (!options.manifest_path.empty() && fs::exists(options.manifest_path)) {
    prior = RunManifest::parse(read_file(options.manifest_path));
  }

  RunManifest manifest;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto* old = prior.find(jobs[i].id());
    if (old && old->status == ManifestEntry::Status::Done && fs::exists(jobs[i].output_dir() / "designs.json")) {
      manifest.entries.push_back(*old);
      continue;
    }
    manifest.entries.push_back({jobs[i].id(), ManifestEntry::Status::Pending, 0, 0, ""});
    pending.push_back(i);
  }

  std::mutex mutex;
  auto persist = [&] {
    if (!options.manifest_path.empty()) write_file_atomic(options.manifest_path, manifest.text());
  };
  persist();
  if (pending.empty()) return manifest;

  const unsigned outer = std::min<unsigned>(options.max_workers, static_cast<unsigned>(pending.size()));
  for (auto i : pending) jobs[i].inner_workers = std::max(1u, options.max_workers / outer);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    while (true) {
      const std::size_t n = next++;
      if (n >= pending.size()) return;
      const std::size_t i = pending[n];
      const auto start = std::chrono::steady_clock::now();
      ManifestEntry e{jobs[i].id(), ManifestEntry::Status::Done, 0, 0, ""};
      try {
        const auto r = runner(jobs[i]);
        e.designs = r.designs;
        if (r.truncated) e.reason = "truncated at max_designs";
      } catch (...) {
        e.status = ManifestEntry::Status::Failed;
        e.reason = failure_reason(std::current_exception());
      }
      e.seconds = seconds_since(start);
      std::lock_guard lock(mutex);
      manifest.entries[i] = e;
      persist();
      if (options.on_finish) options.on_finish(e);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < outer; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return manifest;
}

std::vector<fs::path> find_design_files(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == "designs.json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace forge
