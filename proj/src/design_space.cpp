#include "forge/design_space.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <map>
#include <thread>

#include "forge/errors.hpp"

namespace forge {

std::vector<int> generate_factors(std::int64_t n) {
  std::vector<int> out;
  for (std::int64_t f = 2; f <= n && f <= (std::int64_t{1} << 30); f *= 2) out.push_back(static_cast<int>(f));
  return out;
}

namespace {

std::vector<Setting> site_options(const PragmaSite& site, const KernelInfo& info, const TreeOptions& opt) {
  std::vector<Setting> out{Setting::off()};
  switch (site.kind) {
    case SiteKind::FunctionInline:
    case SiteKind::FunctionPipeline:
      if (!opt.hold_function_sites_off) out.push_back(Setting::on());
      break;
    case SiteKind::LoopPipeline:
      out.push_back(Setting::on());
      break;
    case SiteKind::LoopUnroll: {
      const auto* l = info.find_loop(site.function, site.loop);
      if (l && l->trip_count) {
        for (int f : generate_factors(*l->trip_count)) out.push_back(Setting::unroll(f));
      }
      break;
    }
    case SiteKind::ArrayPartition: {
      const auto extent = info.find_array(site.array)->dims.at(static_cast<std::size_t>(site.dim) - 1);
      if (extent <= 1) break;
      for (int f : generate_factors(extent)) {
        if (f >= extent) continue;
        out.push_back(Setting::partition(PartitionType::Cyclic, f));
        out.push_back(Setting::partition(PartitionType::Block, f));
      }
      out.push_back(Setting::partition(PartitionType::Complete, 0));
      break;
    }
  }
  return out;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  return __builtin_add_overflow(a, b, &r) ? UINT64_MAX : r;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  return __builtin_mul_overflow(a, b, &r) ? UINT64_MAX : r;
}

bool pair_ok(const Setting& unroll, const Setting& part) {
  if (unroll.is_off() && part.is_off()) return true;
  return unroll.kind == Setting::Kind::Unroll && part.kind == Setting::Kind::Partition &&
         part.type != PartitionType::Complete && part.factor == unroll.factor;
}

// Leaf counts per (loop, under a pipelined ancestor), as T.
template <typename T, typename Add, typename Mul>
std::vector<std::array<T, 2>> loop_counts(const DesignTree& t, Add add, Mul mul) {
  std::vector<std::array<T, 2>> memo(t.loops.size());
  std::vector<std::array<bool, 2>> done(t.loops.size(), {false, false});
  const auto rec = [&](auto&& self, std::size_t l, bool under) -> T {
    if (done[l][under]) return memo[l][under];
    const auto& node = t.loops[l];
    T sum = 0;
    for (const auto& v : t.options[node.pipeline_site]) {
      const bool inner = under || v.kind == Setting::Kind::On;
      T prod = 1;
      for (auto c : node.children) prod = mul(prod, self(self, c, inner));
      sum = add(sum, prod);
    }
    const T unrolls = under ? T(1) : static_cast<T>(t.options[node.unroll_site].size());
    done[l][under] = true;
    return memo[l][under] = mul(unrolls, sum);
  };
  for (std::size_t l = 0; l < t.loops.size(); ++l) {
    rec(rec, l, false);
    rec(rec, l, true);
  }
  return memo;
}

// Depth-first walk over the tree's leaves.
class Walker {
 public:
  Walker(const DesignTree& t, bool pruned) : t_(t), pruned_(pruned), cur_(all_off(t.sites.size())) {
    partners_.resize(t.sites.size());
    if (pruned_) {
      for (const auto& b : t.bindings) {
        const auto later = std::max(b.unroll_site, b.partition_site);
        partners_[later].push_back(b);
      }
    }
  }

  bool allowed(std::size_t i, const Setting& s) const {
    if (!s.is_off()) {
      for (auto g : t_.r1_guards[i]) {
        if (cur_.settings[g].kind == Setting::Kind::On) return false;
      }
    }
    for (const auto& b : partners_[i]) {
      const auto& u = b.unroll_site == i ? s : cur_.settings[b.unroll_site];
      const auto& p = b.partition_site == i ? s : cur_.settings[b.partition_site];
      if (!pair_ok(u, p)) return false;
    }
    return true;
  }

  void set(std::size_t i, const Setting& s) { cur_.settings[i] = s; }

  // Calls leaf(config) for each leaf below site i; stops when leaf returns false.
  template <typename F>
  bool dfs(std::size_t i, F& leaf) {
    if (i == t_.sites.size()) return leaf(cur_);
    for (const auto& s : t_.options[i]) {
      if (!allowed(i, s)) continue;
      cur_.settings[i] = s;
      if (!dfs(i + 1, leaf)) return false;
    }
    cur_.settings[i] = Setting::off();
    return true;
  }

 private:
  const DesignTree& t_;
  bool pruned_;
  PragmaConfig cur_;
  std::vector<std::vector<DesignTree::Binding>> partners_;
};

// Collects leaves into out until `limit` is reached; returns true when a
// further leaf exists past the limit.
struct Collector {
  std::vector<PragmaConfig>& out;
  std::optional<std::size_t> limit;
  bool overflow = false;

  bool operator()(const PragmaConfig& c) {
    if (limit && out.size() >= *limit) {
      overflow = true;
      return false;
    }
    out.push_back(c);
    return true;
  }
};

}  // namespace

DesignTree build_design_tree(const KernelInfo& info, const TreeOptions& options) {
  DesignTree t;
  t.sites = enumerate_sites(info);
  std::map<std::string, std::size_t> by_key;
  for (std::size_t i = 0; i < t.sites.size(); ++i) {
    t.options.push_back(site_options(t.sites[i], info, options));
    by_key.emplace(t.sites[i].key(), i);
  }
  t.loop_of_site.assign(t.sites.size(), DesignTree::npos);
  t.r1_guards.assign(t.sites.size(), {});

  const auto add_loop = [&](auto&& self, const LoopInfo& l, std::vector<std::size_t>& ancestors) -> std::size_t {
    DesignTree::LoopNode node;
    node.pipeline_site = by_key.at("pipeline(" + l.function + "/" + l.id + ")");
    node.unroll_site = by_key.at("unroll(" + l.function + "/" + l.id + ")");
    const auto idx = t.loops.size();
    t.loops.push_back(node);
    t.loop_of_site[node.pipeline_site] = idx;
    t.loop_of_site[node.unroll_site] = idx;
    t.r1_guards[node.unroll_site] = ancestors;
    for (const auto& b : l.indexed) {
      const auto it = by_key.find("partition(" + b.array + "@" + std::to_string(b.dim) + ")");
      if (it == by_key.end()) continue;
      const DesignTree::Binding bind{node.unroll_site, it->second};
      const bool dup = std::any_of(t.bindings.begin(), t.bindings.end(), [&](const auto& x) {
        return x.unroll_site == bind.unroll_site && x.partition_site == bind.partition_site;
      });
      if (!dup) t.bindings.push_back(bind);
    }
    ancestors.push_back(node.pipeline_site);
    for (const auto& c : l.children) {
      const auto ci = self(self, c, ancestors);
      t.loops[idx].children.push_back(ci);
    }
    ancestors.pop_back();
    return idx;
  };
  for (const auto& f : info.functions) {
    for (const auto& l : f.loops) {
      std::vector<std::size_t> ancestors;
      t.roots.push_back(add_loop(add_loop, l, ancestors));
    }
  }
  return t;
}

std::uint64_t count_leaves(const DesignTree& tree) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < tree.sites.size(); ++i) {
    if (tree.loop_of_site[i] == DesignTree::npos) total = sat_mul(total, tree.options[i].size());
  }
  const auto counts = loop_counts<std::uint64_t>(tree, sat_add, sat_mul);
  for (auto r : tree.roots) total = sat_mul(total, counts[r][0]);
  return total;
}

bool pruning_active(const DesignTree& tree, const EnumerationBudget& budget) {
  return budget.prune_equivalent && count_leaves(tree) > budget.prune_threshold;
}

Enumeration enumerate_designs(const DesignTree& tree, const EnumerationBudget& budget) {
  Enumeration e;
  e.pruned = pruning_active(tree, budget);
  Walker w(tree, e.pruned);
  Collector c{e.configs, budget.max_designs};
  w.dfs(0, c);
  e.truncated = c.overflow;
  return e;
}

Enumeration enumerate_designs_parallel(const DesignTree& tree, const EnumerationBudget& budget, unsigned workers) {
  std::size_t split = 0;
  while (split < tree.sites.size() && tree.options[split].size() == 1) ++split;
  if (workers <= 1 || split == tree.sites.size()) return enumerate_designs(tree, budget);

  const bool pruned = pruning_active(tree, budget);
  const auto& branches = tree.options[split];
  std::vector<std::vector<PragmaConfig>> parts(branches.size());
  std::vector<char> overflow(branches.size(), 0);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (auto b = next++; b < branches.size(); b = next++) {
      Walker w(tree, pruned);
      for (std::size_t i = 0; i < split; ++i) w.set(i, tree.options[i][0]);
      if (!w.allowed(split, branches[b])) continue;
      w.set(split, branches[b]);
      Collector c{parts[b], budget.max_designs};
      w.dfs(split + 1, c);
      overflow[b] = c.overflow;
    }
  };
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(workers, branches.size());
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  Enumeration e;
  e.pruned = pruned;
  for (std::size_t b = 0; b < parts.size(); ++b) {
    for (auto& c : parts[b]) {
      if (budget.max_designs && e.configs.size() >= *budget.max_designs) {
        e.truncated = true;
        return e;
      }
      e.configs.push_back(std::move(c));
    }
    if (overflow[b]) {
      e.truncated = true;
      return e;
    }
  }
  return e;
}

PragmaConfig sample_uniform(const DesignTree& tree, Rng& rng) {
  PragmaConfig cfg = all_off(tree.sites.size());
  for (std::size_t i = 0; i < tree.sites.size(); ++i) {
    if (tree.loop_of_site[i] != DesignTree::npos) continue;
    cfg.settings[i] = tree.options[i][rng.below(tree.options[i].size())];
  }
  const auto counts = loop_counts<double>(
      tree, [](double a, double b) { return a + b; }, [](double a, double b) { return a * b; });
  const auto rec = [&](auto&& self, std::size_t l, bool under) -> void {
    const auto& node = tree.loops[l];
    const auto& pipes = tree.options[node.pipeline_site];
    std::vector<double> weight;
    double total = 0;
    for (const auto& v : pipes) {
      const bool inner = under || v.kind == Setting::Kind::On;
      double prod = 1;
      for (auto c : node.children) prod *= counts[c][inner];
      weight.push_back(prod);
      total += prod;
    }
    std::size_t pick = pipes.size() - 1;
    double x = rng.uniform() * total;
    for (std::size_t k = 0; k < pipes.size(); ++k) {
      if (x < weight[k]) {
        pick = k;
        break;
      }
      x -= weight[k];
    }
    cfg.settings[node.pipeline_site] = pipes[pick];
    const auto& unrolls = tree.options[node.unroll_site];
    cfg.settings[node.unroll_site] = under ? Setting::off() : unrolls[rng.below(unrolls.size())];
    const bool inner = under || pipes[pick].kind == Setting::Kind::On;
    for (auto c : node.children) self(self, c, inner);
  };
  for (auto r : tree.roots) rec(rec, r, false);
  return cfg;
}

std::vector<std::size_t> option_indices(const DesignTree& tree, const PragmaConfig& config) {
  if (config.settings.size() != tree.sites.size()) throw InvalidConfig("config size does not match the tree");
  std::vector<std::size_t> out(config.settings.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& opts = tree.options[i];
    const auto it = std::find(opts.begin(), opts.end(), config.settings[i]);
    if (it == opts.end()) {
      throw InvalidConfig(tree.sites[i].key() + "=" + config.settings[i].text() + " is not offered");
    }
    out[i] = static_cast<std::size_t>(it - opts.begin());
  }
  return out;
}

bool canonical_less(const DesignTree& tree, const PragmaConfig& a, const PragmaConfig& b) {
  return option_indices(tree, a) < option_indices(tree, b);
}

bool is_leaf(const DesignTree& tree, const PragmaConfig& config, bool pruned) {
  if (config.settings.size() != tree.sites.size()) return false;
  for (std::size_t i = 0; i < config.settings.size(); ++i) {
    const auto& opts = tree.options[i];
    if (std::find(opts.begin(), opts.end(), config.settings[i]) == opts.end()) return false;
    if (config.settings[i].is_off()) continue;
    for (auto g : tree.r1_guards[i]) {
      if (config.settings[g].kind == Setting::Kind::On) return false;
    }
  }
  if (pruned) {
    for (const auto& b : tree.bindings) {
      if (!pair_ok(config.settings[b.unroll_site], config.settings[b.partition_site])) return false;
    }
  }
  return true;
}

std::string manifest_text(const DesignTree& tree, const std::vector<PragmaConfig>& configs, std::size_t first_id) {
  std::string out;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    out += "design_" + std::to_string(first_id + k) + "\t" + config_text(tree.sites, configs[k]) + "\n";
  }
  return out;
}

}  // namespace forge
