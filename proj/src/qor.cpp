#include "forge/qor.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "forge/errors.hpp"

namespace fs = std::filesystem;

namespace forge {

QoRReport QoRReport::failed(std::string reason) {
  QoRReport r;
  r.status = Status::Failed;
  r.reason = std::move(reason);
  return r;
}

// ---------------------------------------------------------------------------
// Parts

PartCatalog PartCatalog::builtin() {
  PartCatalog c;
  c.add({"xcu280-fsvh2892-2L-e", 4032, 1303680, 9024, 2607360, 10.0});
  c.add({"xczu9eg-ffvb1156-2-e", 1824, 274080, 2520, 548160, 10.0});
  return c;
}

PartCatalog PartCatalog::parse(std::string_view text) {
  PartCatalog c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    PartSpec p;
    if (!(fields >> p.name)) continue;
    if (!(fields >> p.bram_18k >> p.lut >> p.dsp >> p.ff >> p.clock_ns)) {
      throw std::invalid_argument("part catalog line " + std::to_string(lineno) + ": expected 6 fields");
    }
    c.add(std::move(p));
  }
  return c;
}

void PartCatalog::add(PartSpec part) {
  for (auto& p : parts_) {
    if (p.name == part.name) {
      p = std::move(part);
      return;
    }
  }
  parts_.push_back(std::move(part));
}

const PartSpec& PartCatalog::find(const std::string& name) const {
  for (const auto& p : parts_) {
    if (p.name == name) return p;
  }
  throw UnknownPart("part '" + name + "' is not in the catalog");
}

double compute_aru(const QoRReport& report, const PartSpec& part) {
  const std::pair<std::int64_t, std::int64_t> pairs[] = {
      {report.bram_18k, part.bram_18k}, {report.ff, part.ff}, {report.lut, part.lut}, {report.dsp, part.dsp}};
  double sum = 0;
  int n = 0;
  for (const auto& [used, avail] : pairs) {
    if (avail == 0) continue;
    sum += static_cast<double>(used) / static_cast<double>(avail);
    ++n;
  }
  if (n == 0) throw NoResources("part '" + part.name + "' has no available resources");
  return sum / n;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

constexpr const char* kLatency = "profile.PerformanceEstimates.SummaryOfOverallLatency.";
constexpr const char* kTiming = "profile.PerformanceEstimates.SummaryOfTimingAnalysis.";
constexpr const char* kArea = "profile.AreaEstimates.Resources.";

template <typename T>
std::optional<T> number_at(const boost::property_tree::ptree& tree, const std::string& path) {
  const auto node = tree.get_optional<std::string>(path);
  if (!node) return std::nullopt;
  std::string s = *node;
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return std::nullopt;
  s = s.substr(b, e - b + 1);
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::size_t line_offset(std::string_view text, unsigned long line) {
  std::size_t off = 0;
  for (unsigned long l = 1; l < line; ++l) {
    const auto nl = text.find('\n', off);
    if (nl == std::string_view::npos) return text.size();
    off = nl + 1;
  }
  return off;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

QoRReport parse_report(std::string_view xml) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw MalformedReport(line_offset(xml, e.line()), e.message());
  }
  if (!tree.get_child_optional("profile")) throw MalformedReport(0, "no <profile> element");

  const auto best = number_at<std::int64_t>(tree, std::string(kLatency) + "Best-caseLatency");
  const auto worst = number_at<std::int64_t>(tree, std::string(kLatency) + "Worst-caseLatency");
  const auto bram = number_at<std::int64_t>(tree, std::string(kArea) + "BRAM_18K");
  const auto lut = number_at<std::int64_t>(tree, std::string(kArea) + "LUT");
  const auto dsp = number_at<std::int64_t>(tree, std::string(kArea) + "DSP");
  const auto ff = number_at<std::int64_t>(tree, std::string(kArea) + "FF");
  const auto target = number_at<double>(tree, std::string(kTiming) + "TargetClockPeriod");
  const auto estimated = number_at<double>(tree, std::string(kTiming) + "EstimatedClockPeriod");

  if (!best || !worst) return QoRReport::failed("no latency");
  if (!bram || !lut || !dsp || !ff) return QoRReport::failed("no resources");
  if (!target || !estimated) return QoRReport::failed("no timing");
  QoRReport r;
  r.best_case_latency = *best;
  r.worst_case_latency = *worst;
  r.bram_18k = *bram;
  r.lut = *lut;
  r.dsp = *dsp;
  r.ff = *ff;
  r.target_clock_period = *target;
  r.estimated_clock_period = *estimated;
  if (r.worst_case_latency < r.best_case_latency || r.best_case_latency < 0) {
    return QoRReport::failed("inconsistent latency");
  }
  if (std::min({r.bram_18k, r.lut, r.dsp, r.ff}) < 0) return QoRReport::failed("negative resource count");
  return r;
}

std::string render_report(const QoRReport& r) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<profile>\n"
    << "  <PerformanceEstimates>\n"
    << "    <SummaryOfTimingAnalysis>\n"
    << "      <unit>ns</unit>\n"
    << "      <TargetClockPeriod>" << format_double(r.target_clock_period) << "</TargetClockPeriod>\n"
    << "      <EstimatedClockPeriod>" << format_double(r.estimated_clock_period) << "</EstimatedClockPeriod>\n"
    << "    </SummaryOfTimingAnalysis>\n"
    << "    <SummaryOfOverallLatency>\n"
    << "      <unit>clock cycles</unit>\n"
    << "      <Best-caseLatency>" << r.best_case_latency << "</Best-caseLatency>\n"
    << "      <Worst-caseLatency>" << r.worst_case_latency << "</Worst-caseLatency>\n"
    << "    </SummaryOfOverallLatency>\n"
    << "  </PerformanceEstimates>\n"
    << "  <AreaEstimates>\n"
    << "    <Resources>\n"
    << "      <BRAM_18K>" << r.bram_18k << "</BRAM_18K>\n"
    << "      <DSP>" << r.dsp << "</DSP>\n"
    << "      <FF>" << r.ff << "</FF>\n"
    << "      <LUT>" << r.lut << "</LUT>\n"
    << "    </Resources>\n"
    << "  </AreaEstimates>\n"
    << "</profile>\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Analytic model

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

class Model {
 public:
  Model(const KernelInfo& info, const PragmaConfig& config) : info_(info) {
    const auto sites = enumerate_sites(info);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const auto& s = sites[i];
      const auto& v = config.settings.at(i);
      if (s.kind == SiteKind::LoopUnroll && v.kind == Setting::Kind::Unroll) {
        unroll_[s.function + "/" + s.loop] = v.factor;
      } else if (s.kind == SiteKind::LoopPipeline && v.kind == Setting::Kind::On) {
        pipelined_[s.function + "/" + s.loop] = true;
      } else if (s.kind == SiteKind::ArrayPartition && v.kind == Setting::Kind::Partition) {
        const auto* a = info.find_array(s.array);
        const auto extent = a->dims.at(static_cast<std::size_t>(s.dim) - 1);
        banks_[s.array] = banks(s.array) * (v.type == PartitionType::Complete ? extent : v.factor);
      }
    }
  }

  std::int64_t banks(const std::string& array) const {
    const auto it = banks_.find(array);
    return it == banks_.end() ? 1 : it->second;
  }

  std::int64_t function_latency(const std::string& name) {
    if (const auto it = fn_latency_.find(name); it != fn_latency_.end()) return it->second;
    const auto* f = info_.find_function(name);
    std::int64_t l = f->stmt_count;
    for (const auto& loop : f->loops) l += loop_latency(loop);
    for (const auto& c : f->calls) l += function_latency(c);
    fn_latency_[name] = l;
    return l;
  }

  std::int64_t loop_latency(const LoopInfo& l) {
    const auto key = l.function + "/" + l.id;
    const std::int64_t tc = l.trip_count.value_or(1);
    const std::int64_t u = unroll(key);
    std::int64_t depth = l.body_stmt_count;
    for (const auto& c : l.children) depth += loop_latency(c);
    for (const auto& c : l.calls) depth += function_latency(c);
    const auto iters = ceil_div(tc, u);
    if (!pipelined_.contains(key)) return iters * depth;
    std::int64_t ii = 1;
    for (const auto& a : l.array_accesses) ii = std::max(ii, ceil_div(a.count * u, 2 * banks(a.array)));
    return depth + (iters - 1) * ii;
  }

  std::int64_t unroll(const std::string& key) const {
    const auto it = unroll_.find(key);
    return it == unroll_.end() ? 1 : it->second;
  }

  void resources(QoRReport& r) const {
    std::int64_t lut = 0;
    std::int64_t dsp = 0;
    for (const auto& f : info_.functions) dsp += f.mult_stmt_count;
    for (const auto* l : info_.all_loops()) {
      const auto u = unroll(l->function + "/" + l->id);
      lut += 10 * l->body_stmt_count * u;
      dsp += l->mult_stmt_count * u;
    }
    r.lut = std::max<std::int64_t>(lut, 10);
    r.ff = r.lut * 4 / 5;
    r.dsp = dsp;
    r.bram_18k = 0;
    for (const auto& a : info_.arrays) {
      const auto blocks = std::max<std::int64_t>(1, ceil_div(a.element_count() * a.element_bits, 18432));
      r.bram_18k += banks(a.id) * blocks;
    }
  }

 private:
  const KernelInfo& info_;
  std::map<std::string, std::int64_t> unroll_;
  std::map<std::string, bool> pipelined_;
  std::map<std::string, std::int64_t> banks_;
  std::map<std::string, std::int64_t> fn_latency_;
};

}  // namespace

QoRReport analytic_evaluate(const KernelInfo& info, const PragmaConfig& config, const PartSpec& part) {
  Model m(info, config);
  QoRReport r;
  r.best_case_latency = r.worst_case_latency = m.function_latency(info.top_function);
  m.resources(r);
  r.target_clock_period = part.clock_ns;
  r.estimated_clock_period = 0.35 * part.clock_ns;
  return r;
}

QoRReport AnalyticEvaluator::evaluate(const SourceUnit&, const KernelInfo& info, const PragmaConfig& config,
                                      const PartSpec& part, const fs::path&) {
  return analytic_evaluate(info, config, part);
}

// ---------------------------------------------------------------------------
// External adapter

std::string synthesis_script(const SourceUnit& unit, const KernelInfo& info, const PartSpec& part) {
  std::ostringstream o;
  o << "open_project -reset proj\n";
  for (const auto& f : unit.files) {
    if (!is_header_file(f.name)) o << "add_files " << f.name << "\n";
  }
  o << "set_top " << info.top_function << "\n"
    << "open_solution -reset solution1\n"
    << "set_part {" << part.name << "}\n"
    << "create_clock -period " << format_double(part.clock_ns) << "\n"
    << "csynth_design\n"
    << "exit\n";
  return o.str();
}

namespace {

std::string substitute(std::string text, const std::map<std::string, std::string>& vars) {
  for (const auto& [k, v] : vars) {
    const auto token = "{" + k + "}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + v.size())) {
      text.replace(pos, token.size(), v);
    }
  }
  return text;
}

std::optional<fs::path> find_report(const fs::path& workdir) {
  if (fs::is_regular_file(workdir / "csynth.xml")) return workdir / "csynth.xml";
  std::vector<fs::path> found;
  for (const auto& e : fs::recursive_directory_iterator(workdir)) {
    if (e.is_regular_file() && e.path().filename() == "csynth.xml") found.push_back(e.path());
  }
  if (found.empty()) return std::nullopt;
  std::sort(found.begin(), found.end());
  return found.front();
}

}  // namespace

QoRReport external_evaluate(const fs::path& workdir, const SourceUnit& annotated, const KernelInfo& info,
                            const AdapterSpec& adapter, const PartSpec& part) {
  if (adapter.command.empty()) throw BackendUnavailable("no adapter command configured");
  fs::create_directories(workdir);
  const auto dir = fs::absolute(workdir);
  if (fs::exists(dir / "csynth.xml")) fs::remove(dir / "csynth.xml");
  write_unit(annotated, dir);
  write_file_atomic(dir / "run_hls.tcl", synthesis_script(annotated, info, part));

  const auto command = substitute(adapter.command, {{"workdir", dir.string()},
                                                    {"script", (dir / "run_hls.tcl").string()},
                                                    {"top", info.top_function},
                                                    {"part", part.name},
                                                    {"clock", format_double(part.clock_ns)}});
  const auto dir_str = dir.string();
  const auto log = (dir / "adapter.log").string();

  const pid_t pid = fork();
  if (pid < 0) throw BackendUnavailable("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    if (chdir(dir_str.c_str()) != 0) _exit(126);
    const int fd = open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      dup2(fd, 1);
      dup2(fd, 2);
      close(fd);
    }
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);

  const auto deadline = std::chrono::steady_clock::now() + adapter.timeout;
  int status = 0;
  while (true) {
    const auto done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) throw BackendUnavailable("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      return QoRReport::failed("timeout");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  // Stray children of the adapter do not outlive it.
  kill(-pid, SIGKILL);

  const bool clean = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  const auto report = find_report(dir);
  if (!report) {
    if (!clean) {
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      throw BackendUnavailable("adapter exited with status " + std::to_string(code) + " and left no report");
    }
    return QoRReport::failed("no report");
  }
  return parse_report(read_file(*report));
}

QoRReport ExternalEvaluator::evaluate(const SourceUnit& annotated, const KernelInfo& info, const PragmaConfig&,
                                      const PartSpec& part, const fs::path& workdir) {
  return external_evaluate(workdir, annotated, info, adapter_, part);
}

}  // namespace forge
