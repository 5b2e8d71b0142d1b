#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forge/kernel_info.hpp"
#include "forge/pragma.hpp"
#include "forge/random.hpp"

namespace forge {

// Powers of two f with 2 <= f <= n.
std::vector<int> generate_factors(std::int64_t n);

struct TreeOptions {
  // Function inline/pipeline sites get the single option OFF.
  bool hold_function_sites_off = false;
};

struct DesignTree {
  struct LoopNode {
    std::size_t pipeline_site = 0;
    std::size_t unroll_site = 0;
    std::vector<std::size_t> children;  // indices into loops
  };

  // A loop whose induction variable subscripts an array dimension.
  struct Binding {
    std::size_t unroll_site = 0;
    std::size_t partition_site = 0;
  };

  std::vector<PragmaSite> sites;
  std::vector<std::vector<Setting>> options;  // per site, OFF first
  std::vector<LoopNode> loops;
  std::vector<std::size_t> roots;          // top-level loops
  std::vector<std::size_t> loop_of_site;   // loop index for loop sites, npos otherwise
  std::vector<std::vector<std::size_t>> r1_guards;  // unroll site -> ancestor pipeline sites
  std::vector<Binding> bindings;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

DesignTree build_design_tree(const KernelInfo& info, const TreeOptions& options = {});

struct EnumerationBudget {
  std::optional<std::size_t> max_designs = 100000;  // nullopt = unbounded
  bool prune_equivalent = false;
  // Pruning applies once the unpruned leaf count exceeds this.
  std::uint64_t prune_threshold = 4096;
};

struct Enumeration {
  std::vector<PragmaConfig> configs;  // depth-first leaf order
  bool truncated = false;
  bool pruned = false;
};

Enumeration enumerate_designs(const DesignTree& tree, const EnumerationBudget& budget = {});

// Same result as enumerate_designs, with the branches under the first
// multi-option site spread over `workers` threads.
Enumeration enumerate_designs_parallel(const DesignTree& tree, const EnumerationBudget& budget, unsigned workers);

// Leaves of the tree under rule R1 only; saturates at UINT64_MAX.
std::uint64_t count_leaves(const DesignTree& tree);

// Whether pruning would be applied under this budget.
bool pruning_active(const DesignTree& tree, const EnumerationBudget& budget);

// A leaf drawn uniformly among the R1-legal leaves.
PragmaConfig sample_uniform(const DesignTree& tree, Rng& rng);

// Option index per site; throws InvalidConfig when a setting is not offered.
std::vector<std::size_t> option_indices(const DesignTree& tree, const PragmaConfig& config);

// Depth-first order of two leaves.
bool canonical_less(const DesignTree& tree, const PragmaConfig& a, const PragmaConfig& b);

// Whether config is a leaf (R1, offered options, and bindings if pruned).
bool is_leaf(const DesignTree& tree, const PragmaConfig& config, bool pruned = false);

// "design_<k>\t<config text>\n" per config, k counted from first_id.
std::string manifest_text(const DesignTree& tree, const std::vector<PragmaConfig>& configs, std::size_t first_id = 0);

}  // namespace forge
