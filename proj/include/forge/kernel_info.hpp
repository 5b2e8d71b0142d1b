#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forge/source.hpp"
#include "forge/syntax.hpp"

namespace forge {

struct ArrayAccess {
  std::string array;  // ArrayInfo::id
  int count = 0;      // subscripted accesses per iteration

  bool operator==(const ArrayAccess&) const = default;
};

// The loop's induction variable appears in the subscript of dimension `dim`.
struct IndexBinding {
  std::string array;
  int dim = 1;

  bool operator==(const IndexBinding&) const = default;
};

struct LoopInfo {
  std::string id;  // function-scoped path, "L0", "L0.1", ...
  std::string function;
  std::optional<std::int64_t> trip_count;  // nullopt = UNKNOWN
  std::optional<std::string> induction_var;
  std::optional<std::string> label;
  SourceLoc header_location;
  SourceLoc body_start_location;
  std::vector<LoopInfo> children;
  int depth = 0;

  // Assignment/expression statements directly in the body (not in child
  // loops), at least 1.
  int body_stmt_count = 1;
  int mult_stmt_count = 0;
  std::vector<ArrayAccess> array_accesses;
  std::vector<IndexBinding> indexed;
  std::vector<std::string> calls;  // in-unit callees, with repetition

  // HLS loop directives found directly in the body.
  std::vector<std::string> directives;

  // Rewrite anchors.
  bool body_braced = true;
  std::size_t body_open_offset = 0;  // one past '{'
  std::size_t body_begin_offset = 0;
  std::size_t body_end_offset = 0;
};

struct ArrayInfo {
  enum class Origin { Global, Param, Local };

  std::string id;        // "fn/name", or "::name" for file-scope arrays
  std::string name;
  std::string function;  // empty for file-scope arrays
  Origin origin = Origin::Local;
  std::vector<std::int64_t> dims;
  int element_bits = 32;
  SourceLoc definition_location;
  // Where an array_partition directive for this array goes.
  SourceLoc insert_location;
  std::size_t insert_offset = 0;

  std::int64_t element_count() const;
};

struct FunctionInfo {
  std::string name;
  SourceLoc location;
  SourceLoc body_location;
  std::size_t body_open_offset = 0;
  bool is_top = false;
  std::vector<LoopInfo> loops;
  std::vector<std::string> arrays;  // ids of params and locals, declaration order
  std::vector<std::string> calls;   // in-unit callees outside loops, with repetition
  int stmt_count = 0;                // statements outside loops
  int mult_stmt_count = 0;
  std::vector<std::string> directives;  // HLS function directives directly in the body
};

struct PartitionDirective {
  std::string function;  // enclosing function, empty at file scope
  std::string text;
  SourceLoc location;
};

struct KernelInfo {
  std::vector<FunctionInfo> functions;  // source order
  std::string top_function;
  SourceLoc top_location;
  std::vector<ArrayInfo> arrays;        // globals first, then per function
  std::vector<PartitionDirective> partition_directives;
  std::vector<std::string> file_names;

  const FunctionInfo* find_function(const std::string& name) const;
  const ArrayInfo* find_array(const std::string& id) const;
  const LoopInfo* find_loop(const std::string& function, const std::string& id) const;

  // Resolves a variable name as seen from inside `function`.
  const ArrayInfo* resolve_array(const std::string& function, const std::string& name) const;

  // Loops in preorder, per function in source order.
  std::vector<const LoopInfo*> all_loops() const;
};

std::optional<std::int64_t> infer_trip_count(const Stmt& loop, const ConstantTable& constants);

// Throws AmbiguousTop or MissingTop.
KernelInfo extract_info(const SyntaxTree& tree, const std::optional<std::string>& top_hint = std::nullopt);

// parse_source + extract_info with the unit's own hint.
KernelInfo analyze(const SourceUnit& unit);

// Bit width of one element of the given type; 32 when unknown.
int element_bits(const TypeSpec& type, const SyntaxTree& tree);

// Multi-line human-readable summary.
std::string describe(const KernelInfo& info);

}  // namespace forge
