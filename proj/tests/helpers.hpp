#pragma once

#include <string>

#include "doctest.h"
#include "forge/kernel_info.hpp"
#include "forge/source.hpp"

namespace forge::testing {

inline SourceUnit single(const std::string& code, const std::string& name = "kernel.c") {
  SourceUnit u;
  u.files.push_back({name, code});
  return u;
}

inline std::string fixture_dir(const std::string& rel) { return std::string(FORGE_FIXTURES) + "/" + rel; }

// Loop trees and arrays agree in everything the design space depends on.
inline void check_same_structure(const KernelInfo& a, const KernelInfo& b) {
  CHECK(a.top_function == b.top_function);
  const auto la = a.all_loops();
  const auto lb = b.all_loops();
  REQUIRE(la.size() == lb.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(la[i]->function == lb[i]->function);
    CHECK(la[i]->id == lb[i]->id);
    CHECK(la[i]->trip_count == lb[i]->trip_count);
    CHECK(la[i]->children.size() == lb[i]->children.size());
    CHECK(la[i]->body_stmt_count == lb[i]->body_stmt_count);
    CHECK(la[i]->array_accesses == lb[i]->array_accesses);
    CHECK(la[i]->indexed == lb[i]->indexed);
  }
  REQUIRE(a.arrays.size() == b.arrays.size());
  for (std::size_t i = 0; i < a.arrays.size(); ++i) {
    CHECK(a.arrays[i].id == b.arrays[i].id);
    CHECK(a.arrays[i].dims == b.arrays[i].dims);
  }
}

}  // namespace forge::testing
