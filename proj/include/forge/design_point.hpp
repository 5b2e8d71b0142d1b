#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "forge/pragma.hpp"
#include "forge/qor.hpp"
#include "forge/source.hpp"

namespace forge {

struct DesignPoint {
  std::size_t design_id = 0;
  PragmaConfig config;
  std::string config_text;
  // Depth-first option indices; orders designs canonically. May be empty.
  std::vector<std::size_t> canonical;
  QoRReport report;
  double latency = 0;  // worst-case cycles
  double aru = 0;
  SourceUnit source;   // annotated
  bool is_kernel = false;
};

}  // namespace forge
