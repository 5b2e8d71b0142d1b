#include "forge/source.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace forge {

const SourceFile* SourceUnit::find(std::string_view name) const {
  for (const auto& f : files) {
    if (f.name == name) return &f;
  }
  // Includes may carry a relative directory; fall back to the base name.
  const auto base = fs::path(std::string(name)).filename().string();
  for (const auto& f : files) {
    if (fs::path(f.name).filename().string() == base) return &f;
  }
  return nullptr;
}

void SourceUnit::check() const {
  if (files.empty()) throw std::invalid_argument("source unit has no files");
  std::set<std::string> seen;
  for (const auto& f : files) {
    if (!seen.insert(f.name).second) throw std::invalid_argument("duplicate file name in unit: " + f.name);
  }
}

bool is_header_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".h" || ext == ".hpp" || ext == ".hh" || ext == ".hxx";
}

bool is_c_like_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".c" || ext == ".cc" || ext == ".cpp" || ext == ".cxx" || is_header_file(p);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, std::string_view content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

SourceUnit load_unit_from_files(const std::vector<fs::path>& files) {
  SourceUnit unit;
  for (const auto& f : files) unit.files.push_back({f.filename().string(), read_file(f)});
  unit.check();
  return unit;
}

SourceUnit load_unit_from_dir(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_c_like_file(e.path())) paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  return load_unit_from_files(paths);
}

void write_unit(const SourceUnit& unit, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& f : unit.files) write_file_atomic(dir / f.name, f.content);
}

std::size_t count_hls_pragmas(std::string_view text) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line.substr(first).starts_with("#pragma HLS")) {
      const auto rest = line.substr(first + 11);
      if (rest.empty() || rest[0] == ' ' || rest[0] == '\t') ++count;
    }
    pos = end + 1;
  }
  return count;
}

std::size_t count_hls_pragmas(const SourceUnit& unit) {
  std::size_t n = 0;
  for (const auto& f : unit.files) n += count_hls_pragmas(f.content);
  return n;
}

}  // namespace forge
