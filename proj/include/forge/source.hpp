#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace forge {

struct SourceFile {
  std::string name;
  std::string content;

  bool operator==(const SourceFile&) const = default;
};

// A kernel as a set of files; one of them usually holds the top function.
struct SourceUnit {
  std::vector<SourceFile> files;
  std::optional<std::string> top_hint;

  bool operator==(const SourceUnit&) const = default;

  const SourceFile* find(std::string_view name) const;

  // Throws std::invalid_argument when empty or when names repeat.
  void check() const;
};

// Position inside one file of a SourceUnit. Lines and columns are 1-based,
// offset is the byte offset into the file content.
struct SourceLoc {
  std::size_t file = 0;
  int line = 0;
  int col = 0;
  std::size_t offset = 0;

  bool operator==(const SourceLoc&) const = default;
};

bool is_c_like_file(const std::filesystem::path& p);
bool is_header_file(const std::filesystem::path& p);

// Reads every C-like file in a directory (non-recursive, sorted by name).
SourceUnit load_unit_from_dir(const std::filesystem::path& dir);
SourceUnit load_unit_from_files(const std::vector<std::filesystem::path>& files);

// Writes each file of the unit under dir (created if missing).
void write_unit(const SourceUnit& unit, const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& p);

// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& p, std::string_view content);

// Number of lines that begin (after whitespace) with "#pragma HLS".
std::size_t count_hls_pragmas(std::string_view text);
std::size_t count_hls_pragmas(const SourceUnit& unit);

}  // namespace forge
