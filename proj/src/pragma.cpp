#include "forge/pragma.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "forge/errors.hpp"

namespace forge {

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

std::string to_string(PartitionType t) {
  switch (t) {
    case PartitionType::Cyclic:
      return "cyclic";
    case PartitionType::Block:
      return "block";
    case PartitionType::Complete:
      return "complete";
  }
  return "complete";
}

std::string PragmaSite::key() const {
  switch (kind) {
    case SiteKind::LoopUnroll:
      return "unroll(" + function + "/" + loop + ")";
    case SiteKind::LoopPipeline:
      return "pipeline(" + function + "/" + loop + ")";
    case SiteKind::ArrayPartition:
      return "partition(" + array + "@" + std::to_string(dim) + ")";
    case SiteKind::FunctionInline:
      return "inline(" + function + ")";
    case SiteKind::FunctionPipeline:
      return "pipeline(" + function + ")";
  }
  return {};
}

std::string Setting::text() const {
  switch (kind) {
    case Kind::Off:
      return "off";
    case Kind::On:
      return "on";
    case Kind::Unroll:
      return std::to_string(factor);
    case Kind::Partition:
      if (type == PartitionType::Complete) return "complete";
      return to_string(type) + ":" + std::to_string(factor);
  }
  return "off";
}

namespace {

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Setting> parse_setting(std::string_view text) {
  if (text == "off") return Setting::off();
  if (text == "on") return Setting::on();
  if (text == "complete") return Setting::partition(PartitionType::Complete, 0);
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    const auto type = text.substr(0, colon);
    const auto f = parse_int(text.substr(colon + 1));
    if (!f) return std::nullopt;
    if (type == "cyclic") return Setting::partition(PartitionType::Cyclic, *f);
    if (type == "block") return Setting::partition(PartitionType::Block, *f);
    return std::nullopt;
  }
  if (const auto f = parse_int(text)) return Setting::unroll(*f);
  return std::nullopt;
}

std::size_t PragmaConfig::pragma_count() const {
  return static_cast<std::size_t>(std::count_if(settings.begin(), settings.end(), [](const Setting& s) {
    return !s.is_off();
  }));
}

PragmaConfig all_off(std::size_t site_count) { return PragmaConfig{std::vector<Setting>(site_count)}; }

// ---------------------------------------------------------------------------
// Sites

namespace {

void loop_sites(const LoopInfo& l, std::vector<PragmaSite>& out) {
  PragmaSite s;
  s.function = l.function;
  s.loop = l.id;
  s.insertion_location = l.body_start_location;
  s.kind = SiteKind::LoopPipeline;
  out.push_back(s);
  s.kind = SiteKind::LoopUnroll;
  out.push_back(s);
  for (const auto& c : l.children) loop_sites(c, out);
}

void array_sites(const ArrayInfo& a, std::vector<PragmaSite>& out) {
  for (std::size_t d = 0; d < a.dims.size(); ++d) {
    PragmaSite s;
    s.kind = SiteKind::ArrayPartition;
    s.function = a.function;
    s.array = a.id;
    s.dim = static_cast<int>(d) + 1;
    s.insertion_location = a.insert_location;
    out.push_back(s);
  }
}

}  // namespace

std::vector<PragmaSite> enumerate_sites(const KernelInfo& info) {
  std::vector<PragmaSite> out;
  for (const auto& a : info.arrays) {
    if (a.origin == ArrayInfo::Origin::Global) array_sites(a, out);
  }
  for (const auto& f : info.functions) {
    PragmaSite s;
    s.function = f.name;
    s.insertion_location = f.body_location;
    if (!f.is_top) {
      s.kind = SiteKind::FunctionInline;
      out.push_back(s);
    }
    s.kind = SiteKind::FunctionPipeline;
    out.push_back(s);
    for (const auto& id : f.arrays) array_sites(*info.find_array(id), out);
    for (const auto& l : f.loops) loop_sites(l, out);
  }
  return out;
}

std::string config_text(const std::vector<PragmaSite>& sites, const PragmaConfig& config) {
  std::string out;
  for (std::size_t i = 0; i < sites.size() && i < config.settings.size(); ++i) {
    if (i) out += ';';
    out += sites[i].key();
    out += '=';
    out += config.settings[i].text();
  }
  return out;
}

PragmaConfig parse_config_text(std::string_view text, const std::vector<PragmaSite>& sites) {
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < sites.size(); ++i) index.emplace(sites[i].key(), i);
  PragmaConfig cfg = all_off(sites.size());
  std::vector<bool> seen(sites.size(), false);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(';', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto item = text.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    const auto eq = item.rfind('=');
    if (eq == std::string_view::npos) throw InvalidConfig("missing '=' in '" + std::string(item) + "'");
    const auto it = index.find(item.substr(0, eq));
    if (it == index.end()) throw InvalidConfig("unknown site '" + std::string(item.substr(0, eq)) + "'");
    const auto setting = parse_setting(item.substr(eq + 1));
    if (!setting) throw InvalidConfig("bad setting '" + std::string(item.substr(eq + 1)) + "'");
    if (seen[it->second]) throw InvalidConfig("site given twice: " + it->first);
    seen[it->second] = true;
    cfg.settings[it->second] = *setting;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Validation

ValidityReport validate_config(const PragmaConfig& config, const KernelInfo& info) {
  return validate_config(config, info, enumerate_sites(info));
}

ValidityReport validate_config(const PragmaConfig& config, const KernelInfo& info,
                               const std::vector<PragmaSite>& sites) {
  ValidityReport r;
  if (config.settings.size() != sites.size()) {
    r.violations.push_back({0, "coverage",
                            "config has " + std::to_string(config.settings.size()) + " settings for " +
                                std::to_string(sites.size()) + " sites"});
    return r;
  }
  const auto add = [&](std::size_t i, const char* rule, std::string msg) {
    r.violations.push_back({i, rule, sites[i].key() + ": " + std::move(msg)});
  };
  // Pipelined loops, keyed "fn/id".
  std::vector<std::string> pipelined;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].kind == SiteKind::LoopPipeline && config.settings[i].kind == Setting::Kind::On) {
      pipelined.push_back(sites[i].function + "/" + sites[i].loop);
    }
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& site = sites[i];
    const auto& s = config.settings[i];
    if (s.is_off()) continue;
    switch (site.kind) {
      case SiteKind::LoopPipeline:
      case SiteKind::FunctionInline:
      case SiteKind::FunctionPipeline:
        if (s.kind != Setting::Kind::On) add(i, "kind", "expects on/off, got " + s.text());
        break;
      case SiteKind::LoopUnroll: {
        if (s.kind != Setting::Kind::Unroll) {
          add(i, "kind", "expects an unroll factor, got " + s.text());
          break;
        }
        const auto* loop = info.find_loop(site.function, site.loop);
        if (!is_power_of_two(s.factor)) add(i, "power-of-two", "factor " + std::to_string(s.factor));
        if (!loop || !loop->trip_count) {
          add(i, "bound", "unroll on a loop without a known trip count");
        } else if (s.factor < 2 || s.factor > *loop->trip_count) {
          add(i, "bound", "factor " + std::to_string(s.factor) + " outside [2, " + std::to_string(*loop->trip_count) + "]");
        }
        const auto self = site.function + "/" + site.loop;
        for (const auto& p : pipelined) {
          if (self.size() > p.size() && self.starts_with(p) && self[p.size()] == '.') {
            add(i, "R1", "unrolled inside pipelined loop " + p);
            break;
          }
        }
        break;
      }
      case SiteKind::ArrayPartition: {
        if (s.kind != Setting::Kind::Partition) {
          add(i, "kind", "expects a partition, got " + s.text());
          break;
        }
        const auto* a = info.find_array(site.array);
        const auto extent = a ? a->dims.at(static_cast<std::size_t>(site.dim) - 1) : 1;
        if (extent <= 1) {
          add(i, "extent-1", "dimension has extent 1");
          break;
        }
        if (s.type == PartitionType::Complete) break;
        if (!is_power_of_two(s.factor)) add(i, "power-of-two", "factor " + std::to_string(s.factor));
        if (s.factor < 2 || s.factor >= extent) {
          add(i, "bound", "factor " + std::to_string(s.factor) + " outside [2, " + std::to_string(extent) + ")");
        }
        break;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rewriting

std::string directive_text(const PragmaSite& site, const Setting& setting, const KernelInfo& info) {
  switch (site.kind) {
    case SiteKind::LoopPipeline:
    case SiteKind::FunctionPipeline:
      return "#pragma HLS pipeline";
    case SiteKind::FunctionInline:
      return "#pragma HLS inline";
    case SiteKind::LoopUnroll:
      return "#pragma HLS unroll factor=" + std::to_string(setting.factor);
    case SiteKind::ArrayPartition: {
      const auto* a = info.find_array(site.array);
      std::string out = "#pragma HLS array_partition variable=" + (a ? a->name : site.array) +
                        " type=" + to_string(setting.type);
      if (setting.type != PartitionType::Complete) out += " factor=" + std::to_string(setting.factor);
      return out + " dim=" + std::to_string(site.dim);
    }
  }
  return {};
}

namespace {

// One piece of text spliced into a file at an original byte offset.
struct Splice {
  std::size_t file = 0;
  std::size_t offset = 0;
  int phase = 0;  // 0 closing brace, 1 directive block, 2 opening brace
  long rank = 0;  // order within a phase
  std::string text;
};

// Insertion anchors within a shared point: functions, then loops, then arrays.
int kind_rank(SiteKind k) {
  switch (k) {
    case SiteKind::FunctionInline:
      return 0;
    case SiteKind::FunctionPipeline:
      return 1;
    case SiteKind::LoopPipeline:
      return 2;
    case SiteKind::LoopUnroll:
      return 3;
    case SiteKind::ArrayPartition:
      return 4;
  }
  return 5;
}

std::string_view line_indent(const std::string& text, std::size_t offset) {
  std::size_t start = offset;
  while (start > 0 && text[start - 1] != '\n') --start;
  std::size_t end = start;
  while (end < text.size() && (text[end] == ' ' || text[end] == '\t')) ++end;
  return std::string_view(text).substr(start, end - start);
}

struct Group {
  std::size_t file = 0;
  std::size_t offset = 0;
  bool body_open = false;  // anchor is one past an opening brace
  std::vector<std::pair<std::pair<int, std::size_t>, std::string>> lines;  // ((kind rank, site), text)
};

}  // namespace

SourceUnit insert_pragmas(const SourceUnit& unit, const KernelInfo& info, const PragmaConfig& config) {
  const auto sites = enumerate_sites(info);
  const auto report = validate_config(config, info, sites);
  if (!report.ok()) throw InvalidConfig(report.violations.front().message);

  std::map<std::pair<std::size_t, std::size_t>, Group> groups;
  std::map<const LoopInfo*, std::vector<std::pair<int, std::string>>> wrapped;
  const auto add = [&](std::size_t file, std::size_t offset, bool body_open, int rank, std::size_t i,
                       std::string text) {
    auto& g = groups[{file, offset}];
    g.file = file;
    g.offset = offset;
    g.body_open = g.body_open || body_open;
    g.lines.push_back({{rank, i}, std::move(text)});
  };

  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& s = config.settings[i];
    if (s.is_off()) continue;
    const auto& site = sites[i];
    auto text = directive_text(site, s, info);
    const int rank = kind_rank(site.kind);
    switch (site.kind) {
      case SiteKind::FunctionInline:
      case SiteKind::FunctionPipeline: {
        const auto* f = info.find_function(site.function);
        add(f->body_location.file, f->body_open_offset, true, rank, i, std::move(text));
        break;
      }
      case SiteKind::LoopPipeline:
      case SiteKind::LoopUnroll: {
        const auto* l = info.find_loop(site.function, site.loop);
        if (l->body_braced) {
          add(l->body_start_location.file, l->body_open_offset, true, rank, i, std::move(text));
        } else {
          wrapped[l].push_back({rank, std::move(text)});
        }
        break;
      }
      case SiteKind::ArrayPartition: {
        const auto* a = info.find_array(site.array);
        add(a->insert_location.file, a->insert_offset, a->origin != ArrayInfo::Origin::Local, rank, i,
            std::move(text));
        break;
      }
    }
  }

  std::vector<Splice> splices;
  for (auto& [key, g] : groups) {
    const auto& content = unit.files.at(g.file).content;
    std::sort(g.lines.begin(), g.lines.end());
    std::string indent(line_indent(content, g.offset > 0 ? g.offset - 1 : 0));
    if (g.body_open) indent += "  ";
    std::string block;
    for (const auto& [k, line] : g.lines) block += indent + line + "\n";

    auto eol = content.find('\n', g.offset);
    const auto rest = std::string_view(content).substr(g.offset, (eol == std::string::npos ? content.size() : eol) - g.offset);
    const auto first = rest.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || rest.substr(first).starts_with("//")) {
      // Directives go on their own lines right after the anchor line.
      if (eol == std::string::npos) {
        splices.push_back({g.file, content.size(), 1, 0, "\n" + block});
      } else {
        splices.push_back({g.file, eol + 1, 1, 0, block});
      }
    } else {
      splices.push_back({g.file, g.offset, 1, 0, "\n" + block + indent});
    }
  }
  for (auto& [l, lines] : wrapped) {
    std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const auto& content = unit.files.at(l->body_start_location.file).content;
    const std::string indent(line_indent(content, l->header_location.offset));
    std::string open = "{\n";
    for (const auto& [r, line] : lines) open += indent + "  " + line + "\n";
    open += indent + "  ";
    // Outer loops open first and close last.
    splices.push_back({l->body_start_location.file, l->body_begin_offset, 2, l->depth, std::move(open)});
    splices.push_back({l->body_start_location.file, l->body_end_offset, 0, -l->depth, "\n" + indent + "}"});
  }

  std::stable_sort(splices.begin(), splices.end(), [](const Splice& a, const Splice& b) {
    return std::tie(a.file, a.offset, a.phase, a.rank) < std::tie(b.file, b.offset, b.phase, b.rank);
  });
  for (std::size_t i = 1; i < splices.size(); ++i) {
    const auto& a = splices[i - 1];
    const auto& b = splices[i];
    if (a.file == b.file && a.offset == b.offset && a.phase == b.phase && a.rank == b.rank && a.phase == 1) {
      throw InsertionConflict("two directive blocks at byte " + std::to_string(a.offset));
    }
  }

  SourceUnit out = unit;
  std::size_t k = 0;
  for (std::size_t f = 0; f < unit.files.size(); ++f) {
    const auto& content = unit.files[f].content;
    std::string text;
    text.reserve(content.size() + 256);
    std::size_t pos = 0;
    for (; k < splices.size() && splices[k].file == f; ++k) {
      text.append(content, pos, splices[k].offset - pos);
      text += splices[k].text;
      pos = splices[k].offset;
    }
    text.append(content, pos, std::string::npos);
    out.files[f].content = std::move(text);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

struct DirectiveWords {
  std::string kind;
  std::map<std::string, std::string> options;
  std::vector<std::string> flags;
};

DirectiveWords split_directive(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  DirectiveWords d;
  in >> word >> word;  // "#pragma", "HLS"
  in >> d.kind;
  std::transform(d.kind.begin(), d.kind.end(), d.kind.begin(), ::tolower);
  const auto lower = [](std::string w) {
    std::transform(w.begin(), w.end(), w.begin(), ::tolower);
    return w;
  };
  while (in >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) {
      d.flags.push_back(lower(word));
      continue;
    }
    const auto key = lower(word.substr(0, eq));
    // Variable names keep their case.
    d.options[key] = key == "variable" ? word.substr(eq + 1) : lower(word.substr(eq + 1));
  }
  return d;
}

bool has_flag(const DirectiveWords& d, const char* flag) {
  return std::find(d.flags.begin(), d.flags.end(), flag) != d.flags.end();
}

int option_int(const DirectiveWords& d, const std::string& key, int fallback, const std::string& text) {
  const auto it = d.options.find(key);
  if (it == d.options.end()) return fallback;
  const auto v = parse_int(it->second);
  if (!v) throw InvalidConfig("bad " + key + " in '" + text + "'");
  return *v;
}

}  // namespace

PragmaConfig extract_config(const KernelInfo& info) {
  const auto sites = enumerate_sites(info);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < sites.size(); ++i) index.emplace(sites[i].key(), i);
  PragmaConfig cfg = all_off(sites.size());
  std::vector<bool> set(sites.size(), false);
  const auto assign = [&](const std::string& key, Setting s, const std::string& text) {
    const auto it = index.find(key);
    if (it == index.end()) throw InvalidConfig("directive '" + text + "' has no matching site " + key);
    if (set[it->second]) throw InvalidConfig("second directive for " + key + ": '" + text + "'");
    set[it->second] = true;
    cfg.settings[it->second] = s;
  };

  for (const auto& f : info.functions) {
    for (const auto& text : f.directives) {
      const auto d = split_directive(text);
      if (has_flag(d, "off")) continue;
      if (d.kind == "inline") assign("inline(" + f.name + ")", Setting::on(), text);
      if (d.kind == "pipeline") assign("pipeline(" + f.name + ")", Setting::on(), text);
    }
  }
  for (const auto* l : info.all_loops()) {
    for (const auto& text : l->directives) {
      const auto d = split_directive(text);
      if (has_flag(d, "off")) continue;
      if (d.kind == "pipeline") {
        assign("pipeline(" + l->function + "/" + l->id + ")", Setting::on(), text);
      } else if (d.kind == "unroll") {
        const int full = l->trip_count ? static_cast<int>(*l->trip_count) : 0;
        const int factor = option_int(d, "factor", full, text);
        if (factor <= 0) throw InvalidConfig("full unroll of a loop without a trip count: '" + text + "'");
        assign("unroll(" + l->function + "/" + l->id + ")", Setting::unroll(factor), text);
      }
    }
  }
  for (const auto& p : info.partition_directives) {
    const auto d = split_directive(p.text);
    const auto var = d.options.find("variable");
    if (var == d.options.end()) throw InvalidConfig("array_partition without variable: '" + p.text + "'");
    const auto* a = info.resolve_array(p.function, var->second);
    if (!a) throw InvalidConfig("array_partition names unknown array '" + var->second + "'");
    std::string type = "complete";
    if (const auto t = d.options.find("type"); t != d.options.end()) type = t->second;
    for (const char* flag : {"cyclic", "block", "complete"}) {
      if (has_flag(d, flag)) type = flag;
    }
    PartitionType pt;
    if (type == "cyclic") {
      pt = PartitionType::Cyclic;
    } else if (type == "block") {
      pt = PartitionType::Block;
    } else if (type == "complete") {
      pt = PartitionType::Complete;
    } else {
      throw InvalidConfig("unknown partition type in '" + p.text + "'");
    }
    const int dim = option_int(d, "dim", 1, p.text);
    const int factor = pt == PartitionType::Complete ? 0 : option_int(d, "factor", 0, p.text);
    if (pt != PartitionType::Complete && factor <= 0) throw InvalidConfig("missing factor in '" + p.text + "'");
    assign("partition(" + a->id + "@" + std::to_string(dim) + ")", Setting::partition(pt, factor), p.text);
  }
  return cfg;
}

}  // namespace forge
