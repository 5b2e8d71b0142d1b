#include "forge/kernel_info.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "forge/errors.hpp"

namespace forge {

std::int64_t ArrayInfo::element_count() const {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

const FunctionInfo* KernelInfo::find_function(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const ArrayInfo* KernelInfo::find_array(const std::string& id) const {
  for (const auto& a : arrays) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

namespace {

const LoopInfo* find_in(const std::vector<LoopInfo>& loops, const std::string& id) {
  for (const auto& l : loops) {
    if (l.id == id) return &l;
    if (id.starts_with(l.id + ".")) return find_in(l.children, id);
  }
  return nullptr;
}

void preorder(const std::vector<LoopInfo>& loops, std::vector<const LoopInfo*>& out) {
  for (const auto& l : loops) {
    out.push_back(&l);
    preorder(l.children, out);
  }
}

}  // namespace

const LoopInfo* KernelInfo::find_loop(const std::string& function, const std::string& id) const {
  const auto* f = find_function(function);
  return f ? find_in(f->loops, id) : nullptr;
}

const ArrayInfo* KernelInfo::resolve_array(const std::string& function, const std::string& name) const {
  if (!function.empty()) {
    if (const auto* a = find_array(function + "/" + name)) return a;
  }
  return find_array("::" + name);
}

std::vector<const LoopInfo*> KernelInfo::all_loops() const {
  std::vector<const LoopInfo*> out;
  for (const auto& f : functions) preorder(f.loops, out);
  return out;
}

// ---------------------------------------------------------------------------
// Trip counts

namespace {

struct Bound {
  std::string var;
  std::string op;
  std::int64_t value = 0;
};

std::optional<Bound> loop_condition(const Expr& cond, const std::string& var, const ConstantTable& constants) {
  if (cond.kind != Expr::Kind::Binary) return std::nullopt;
  static const std::map<std::string, std::string> flipped = {
      {"<", ">"}, {"<=", ">="}, {">", "<"}, {">=", "<="}, {"!=", "!="}};
  const auto it = flipped.find(cond.text);
  if (it == flipped.end()) return std::nullopt;
  const auto& lhs = cond.args[0];
  const auto& rhs = cond.args[1];
  if (lhs.kind == Expr::Kind::Ident && lhs.text == var) {
    if (auto v = evaluate_constant(rhs, constants)) return Bound{var, cond.text, *v};
  }
  if (rhs.kind == Expr::Kind::Ident && rhs.text == var) {
    if (auto v = evaluate_constant(lhs, constants)) return Bound{var, it->second, *v};
  }
  return std::nullopt;
}

std::optional<std::int64_t> loop_step(const Expr& step, const std::string& var, const ConstantTable& constants) {
  const auto is_var = [&](const Expr& e) { return e.kind == Expr::Kind::Ident && e.text == var; };
  if ((step.kind == Expr::Kind::Postfix || step.kind == Expr::Kind::Unary) && is_var(step.args[0])) {
    if (step.text == "++") return 1;
    if (step.text == "--") return -1;
    return std::nullopt;
  }
  if (step.kind != Expr::Kind::Assign || !is_var(step.args[0])) return std::nullopt;
  const auto& rhs = step.args[1];
  if (step.text == "+=" || step.text == "-=") {
    auto v = evaluate_constant(rhs, constants);
    if (!v) return std::nullopt;
    return step.text == "+=" ? *v : -*v;
  }
  if (step.text == "=" && rhs.kind == Expr::Kind::Binary && (rhs.text == "+" || rhs.text == "-")) {
    if (is_var(rhs.args[0])) {
      auto v = evaluate_constant(rhs.args[1], constants);
      if (!v) return std::nullopt;
      return rhs.text == "+" ? *v : -*v;
    }
    if (rhs.text == "+" && is_var(rhs.args[1])) return evaluate_constant(rhs.args[0], constants);
  }
  return std::nullopt;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

std::optional<std::int64_t> infer_trip_count(const Stmt& loop, const ConstantTable& constants) {
  if (loop.kind != Stmt::Kind::For || !loop.expr || !loop.step) return std::nullopt;
  const auto& init = loop.body.at(0);
  std::string var;
  std::optional<std::int64_t> start;
  if (init.kind == Stmt::Kind::Decl && init.decls.size() == 1 && init.decls[0].init && init.decls[0].dims.empty()) {
    var = init.decls[0].name;
    start = evaluate_constant(*init.decls[0].init, constants);
  } else if (init.kind == Stmt::Kind::Expr && init.expr->kind == Expr::Kind::Assign && init.expr->text == "=" &&
             init.expr->args[0].kind == Expr::Kind::Ident) {
    var = init.expr->args[0].text;
    start = evaluate_constant(init.expr->args[1], constants);
  }
  if (var.empty() || !start) return std::nullopt;
  const auto bound = loop_condition(*loop.expr, var, constants);
  const auto step = loop_step(*loop.step, var, constants);
  if (!bound || !step || *step == 0) return std::nullopt;

  const std::int64_t a = *start;
  const std::int64_t b = bound->value;
  const std::int64_t s = *step;
  std::int64_t count = 0;
  if (s > 0) {
    if (bound->op == "<") {
      count = b > a ? ceil_div(b - a, s) : 0;
    } else if (bound->op == "<=") {
      count = b >= a ? (b - a) / s + 1 : 0;
    } else if (bound->op == "!=") {
      if (b < a || (b - a) % s != 0) return std::nullopt;
      count = (b - a) / s;
    } else {
      return std::nullopt;
    }
  } else {
    const std::int64_t m = -s;
    if (bound->op == ">") {
      count = a > b ? ceil_div(a - b, m) : 0;
    } else if (bound->op == ">=") {
      count = a >= b ? (a - b) / m + 1 : 0;
    } else if (bound->op == "!=") {
      if (a < b || (a - b) % m != 0) return std::nullopt;
      count = (a - b) / m;
    } else {
      return std::nullopt;
    }
  }
  if (count < 1) return std::nullopt;
  return count;
}

// ---------------------------------------------------------------------------
// Types

int element_bits(const TypeSpec& type, const SyntaxTree& tree) {
  TypeSpec t = type;
  for (int guard = 0; guard < 16; ++guard) {
    const auto& tk = t.tokens;
    bool has_long = false;
    int longs = 0;
    for (std::size_t i = 0; i < tk.size(); ++i) {
      const auto& w = tk[i];
      if ((w == "ap_int" || w == "ap_uint" || w == "ap_fixed" || w == "ap_ufixed") && i + 2 < tk.size() &&
          tk[i + 1] == "<") {
        try {
          return std::stoi(tk[i + 2]);
        } catch (...) {
          return 32;
        }
      }
      if (w == "long") {
        has_long = true;
        ++longs;
      }
    }
    for (const auto& w : tk) {
      if (w == "char" || w == "bool") return 8;
      if (w == "short") return 16;
      if (w == "float") return 32;
      if (w == "double") return 64;
      if (w == "int8_t" || w == "uint8_t") return 8;
      if (w == "int16_t" || w == "uint16_t") return 16;
      if (w == "int32_t" || w == "uint32_t") return 32;
      if (w == "int64_t" || w == "uint64_t" || w == "size_t") return 64;
    }
    if (has_long) return longs >= 1 ? 64 : 32;
    for (const auto& w : tk) {
      if (w == "int" || w == "unsigned" || w == "signed") return 32;
    }
    // A typedef name: resolve one level and retry.
    bool resolved = false;
    for (const auto& w : tk) {
      const auto it = tree.typedefs.find(w);
      if (it != tree.typedefs.end()) {
        t = it->second;
        resolved = true;
        break;
      }
    }
    if (!resolved) return 32;
  }
  return 32;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

// Lowercased directive name of an HLS pragma, or empty for other pragmas.
std::string hls_kind(const std::string& text) {
  std::istringstream in(text);
  std::string hash, hls, kind;
  in >> hash >> hls >> kind;
  std::transform(hls.begin(), hls.end(), hls.begin(), ::toupper);
  if (hash != "#pragma" || hls != "HLS") return {};
  std::transform(kind.begin(), kind.end(), kind.begin(), ::tolower);
  return kind;
}

// A scope chain of array names for one function.
class Analyzer {
 public:
  Analyzer(const SyntaxTree& tree, KernelInfo& info) : tree_(tree), info_(info) {}

  void run(const std::optional<std::string>& top_hint) {
    std::vector<const FunctionDef*> defs;
    for (const auto& tu : tree_.files) {
      for (const auto& item : tu.items) {
        if (item.kind == TopItem::Kind::Decl) global_arrays(item.decl);
        if (item.kind == TopItem::Kind::Function) {
          defs.push_back(&item.function);
          defined_.insert(item.function.name);
        }
        if (item.kind == TopItem::Kind::Pragma && hls_kind(item.decl.text) == "array_partition") {
          info_.partition_directives.push_back({"", item.decl.text, item.decl.loc});
        }
      }
    }
    for (const auto* fn : defs) info_.functions.push_back(function(*fn));
    choose_top(top_hint);
    // File-scope arrays take their partition directive at the top function entry.
    const auto* top = info_.find_function(info_.top_function);
    for (auto& a : info_.arrays) {
      if (a.origin != ArrayInfo::Origin::Global) continue;
      a.insert_location = top->body_location;
      a.insert_offset = top->body_open_offset;
    }
  }

 private:
  std::optional<ArrayInfo> make_array(const TypeSpec& type, const Declarator& d, ArrayInfo::Origin origin,
                                      const std::string& function) {
    if (d.dims.empty() || d.pointer_depth > 0) return std::nullopt;
    ArrayInfo a;
    a.name = d.name;
    a.function = function;
    a.origin = origin;
    a.id = function.empty() ? "::" + d.name : function + "/" + d.name;
    a.element_bits = element_bits(type, tree_);
    a.definition_location = d.loc;
    for (const auto& dim : d.dims) {
      if (!dim) return std::nullopt;
      const auto v = evaluate_constant(*dim, tree_.constants);
      if (!v || *v < 1) return std::nullopt;
      a.dims.push_back(*v);
    }
    return a;
  }

  void global_arrays(const Stmt& decl) {
    for (const auto& d : decl.decls) {
      auto a = make_array(decl.type, d, ArrayInfo::Origin::Global, "");
      if (a && !info_.find_array(a->id)) info_.arrays.push_back(std::move(*a));
    }
  }

  FunctionInfo function(const FunctionDef& fn) {
    FunctionInfo f;
    f.name = fn.name;
    f.location = fn.loc;
    f.body_location = fn.body.loc;
    f.body_open_offset = fn.body.loc.offset + 1;
    fn_ = &f;
    for (const auto& p : fn.params) {
      auto a = make_array(p.type, p.decl, ArrayInfo::Origin::Param, fn.name);
      if (!a || info_.find_array(a->id)) continue;
      a->insert_location = fn.body.loc;
      a->insert_offset = f.body_open_offset;
      f.arrays.push_back(a->id);
      info_.arrays.push_back(std::move(*a));
    }
    local_arrays(fn.body);
    for (const auto& s : fn.body.body) {
      if (s.kind == Stmt::Kind::Pragma) {
        const auto k = hls_kind(s.text);
        if (k == "pipeline" || k == "inline") f.directives.push_back(s.text);
      }
    }
    Counts counts;
    int index = 0;
    scan_body(fn.body, "", 0, f.loops, counts, index);
    f.stmt_count = counts.stmts;
    f.mult_stmt_count = counts.mults;
    f.calls = counts.calls;
    fn_ = nullptr;
    return f;
  }

  void local_arrays(const Stmt& s) {
    if (s.kind == Stmt::Kind::Decl) {
      for (const auto& d : s.decls) {
        auto a = make_array(s.type, d, ArrayInfo::Origin::Local, fn_->name);
        if (!a || info_.find_array(a->id)) continue;
        a->insert_location = s.loc;
        a->insert_offset = s.end_offset;
        fn_->arrays.push_back(a->id);
        info_.arrays.push_back(std::move(*a));
      }
    }
    if (s.kind == Stmt::Kind::Pragma && hls_kind(s.text) == "array_partition") {
      info_.partition_directives.push_back({fn_->name, s.text, s.loc});
    }
    for (const auto& b : s.body) local_arrays(b);
  }

  struct Counts {
    int stmts = 0;
    int mults = 0;
    std::map<std::string, int> accesses;
    std::vector<std::string> access_order;
    std::vector<std::string> calls;
  };

  const ArrayInfo* lookup(const std::string& name) const { return info_.resolve_array(fn_->name, name); }

  // Counts subscripted accesses; a[i][j] is one access.
  void count_accesses(const Expr& e, Counts& c) const {
    if (e.kind == Expr::Kind::Index) {
      const Expr* base = &e;
      std::vector<const Expr*> subs;
      while (base->kind == Expr::Kind::Index) {
        subs.push_back(&base->args[1]);
        base = &base->args[0];
      }
      if (base->kind == Expr::Kind::Ident) {
        if (const auto* a = lookup(base->text)) {
          if (!c.accesses.contains(a->id)) c.access_order.push_back(a->id);
          ++c.accesses[a->id];
        }
      } else {
        count_accesses(*base, c);
      }
      for (const auto* s : subs) count_accesses(*s, c);
      return;
    }
    if (e.kind == Expr::Kind::Call && e.args[0].kind == Expr::Kind::Ident && defined_.contains(e.args[0].text)) {
      c.calls.push_back(e.args[0].text);
    }
    for (const auto& a : e.args) count_accesses(a, c);
  }

  static bool has_multiply(const Expr& e) {
    bool yes = false;
    walk_expr(e, [&](const Expr& x) {
      if ((x.kind == Expr::Kind::Binary && x.text == "*") || (x.kind == Expr::Kind::Assign && x.text == "*=")) {
        yes = true;
      }
    });
    return yes;
  }

  // Walks one body level; nested for-loops become child LoopInfo entries.
  void scan_body(const Stmt& s, const std::string& parent_id, int depth, std::vector<LoopInfo>& loops, Counts& c,
                 int& index) {
    switch (s.kind) {
      case Stmt::Kind::For: {
        const auto id = (parent_id.empty() ? "L" : parent_id + ".") + std::to_string(index++);
        loops.push_back(loop(s, id, depth));
        return;
      }
      case Stmt::Kind::Expr:
        ++c.stmts;
        if (has_multiply(*s.expr)) ++c.mults;
        count_accesses(*s.expr, c);
        return;
      case Stmt::Kind::Decl: {
        bool mult = false;
        for (const auto& d : s.decls) {
          if (!d.init) continue;
          count_accesses(*d.init, c);
          mult = mult || has_multiply(*d.init);
        }
        if (mult) ++c.mults;
        return;
      }
      case Stmt::Kind::Return:
      case Stmt::Kind::If:
      case Stmt::Kind::Switch:
        if (s.expr) count_accesses(*s.expr, c);
        break;
      default:
        break;
    }
    for (const auto& b : s.body) scan_body(b, parent_id, depth, loops, c, index);
  }

  LoopInfo loop(const Stmt& s, const std::string& id, int depth) {
    LoopInfo l;
    l.id = id;
    l.function = fn_->name;
    l.depth = depth;
    l.label = s.label;
    l.header_location = s.loc;
    l.trip_count = infer_trip_count(s, tree_.constants);
    const auto& init = s.body[0];
    if (init.kind == Stmt::Kind::Decl && !init.decls.empty()) {
      l.induction_var = init.decls[0].name;
    } else if (init.kind == Stmt::Kind::Expr && init.expr->kind == Expr::Kind::Assign &&
               init.expr->args[0].kind == Expr::Kind::Ident) {
      l.induction_var = init.expr->args[0].text;
    }
    const auto& body = s.body[1];
    l.body_braced = body.kind == Stmt::Kind::Compound;
    l.body_start_location = body.loc;
    l.body_open_offset = body.loc.offset + 1;
    l.body_begin_offset = body.loc.offset;
    l.body_end_offset = body.end_offset;
    if (l.body_braced) {
      for (const auto& b : body.body) {
        if (b.kind != Stmt::Kind::Pragma) continue;
        const auto k = hls_kind(b.text);
        if (k == "pipeline" || k == "unroll") l.directives.push_back(b.text);
      }
    }
    Counts c;
    int index = 0;
    scan_body(body, id, depth + 1, l.children, c, index);
    l.body_stmt_count = std::max(1, c.stmts);
    l.mult_stmt_count = c.mults;
    for (const auto& a : c.access_order) l.array_accesses.push_back({a, c.accesses[a]});
    l.calls = c.calls;
    if (l.induction_var) bindings(body, *l.induction_var, l.indexed);
    return l;
  }

  // Every (array, dim) whose subscript mentions var anywhere under s.
  void bindings(const Stmt& s, const std::string& var, std::vector<IndexBinding>& out) const {
    const auto visit = [&](const Expr& root) {
      walk_expr(root, [&](const Expr& e) {
        if (e.kind != Expr::Kind::Index) return;
        std::vector<const Expr*> subs;
        const Expr* base = &e;
        while (base->kind == Expr::Kind::Index) {
          subs.push_back(&base->args[1]);
          base = &base->args[0];
        }
        if (base->kind != Expr::Kind::Ident) return;
        const auto* a = lookup(base->text);
        // Only the outermost Index of a chain carries the full subscript list.
        if (!a || subs.size() != a->dims.size()) return;
        std::reverse(subs.begin(), subs.end());
        for (std::size_t d = 0; d < subs.size(); ++d) {
          bool uses = false;
          walk_expr(*subs[d], [&](const Expr& x) { uses = uses || (x.kind == Expr::Kind::Ident && x.text == var); });
          IndexBinding b{a->id, static_cast<int>(d + 1)};
          if (uses && std::find(out.begin(), out.end(), b) == out.end()) out.push_back(b);
        }
      });
    };
    if (s.expr) visit(*s.expr);
    if (s.step) visit(*s.step);
    for (const auto& d : s.decls) {
      if (d.init) visit(*d.init);
    }
    for (const auto& b : s.body) bindings(b, var, out);
  }

  void choose_top(const std::optional<std::string>& hint) {
    if (info_.functions.empty()) throw MissingTop("no function definitions in unit");
    std::string top;
    if (hint) {
      if (!info_.find_function(*hint)) throw MissingTop("top function '" + *hint + "' is not defined in the unit");
      top = *hint;
    } else {
      std::set<std::string> called;
      const auto note = [&](const std::vector<std::string>& calls, const std::string& caller) {
        for (const auto& c : calls) {
          if (c != caller) called.insert(c);
        }
      };
      for (const auto& f : info_.functions) {
        note(f.calls, f.name);
        for (const auto* l : loops_of(f)) note(l->calls, f.name);
      }
      std::vector<std::string> roots;
      for (const auto& f : info_.functions) {
        if (!called.contains(f.name)) roots.push_back(f.name);
      }
      if (roots.size() != 1) {
        std::string names;
        for (const auto& r : roots) names += (names.empty() ? "" : ", ") + r;
        throw AmbiguousTop("multiple uncalled functions: " + names);
      }
      top = roots.front();
    }
    for (auto& f : info_.functions) {
      f.is_top = f.name == top;
      if (f.is_top) info_.top_location = f.location;
    }
    info_.top_function = top;
  }

  static std::vector<const LoopInfo*> loops_of(const FunctionInfo& f) {
    std::vector<const LoopInfo*> out;
    preorder(f.loops, out);
    return out;
  }

  const SyntaxTree& tree_;
  KernelInfo& info_;
  FunctionInfo* fn_ = nullptr;
  std::set<std::string> defined_;
};

}  // namespace

KernelInfo extract_info(const SyntaxTree& tree, const std::optional<std::string>& top_hint) {
  KernelInfo info;
  for (const auto& f : tree.unit.files) info.file_names.push_back(f.name);
  Analyzer(tree, info).run(top_hint ? top_hint : tree.unit.top_hint);
  return info;
}

KernelInfo analyze(const SourceUnit& unit) { return extract_info(parse_source(unit), unit.top_hint); }

namespace {

void describe_loops(const std::vector<LoopInfo>& loops, const KernelInfo& info, std::ostringstream& out) {
  for (const auto& l : loops) {
    out << std::string(static_cast<std::size_t>(2 + 2 * l.depth), ' ') << l.id;
    if (l.label) out << " (" << *l.label << ")";
    out << " at " << info.file_names.at(l.header_location.file) << ":" << l.header_location.line
        << " trip_count=" << (l.trip_count ? std::to_string(*l.trip_count) : "UNKNOWN")
        << " stmts=" << l.body_stmt_count;
    for (const auto& a : l.array_accesses) out << " " << a.array << "x" << a.count;
    out << "\n";
    describe_loops(l.children, info, out);
  }
}

}  // namespace

std::string describe(const KernelInfo& info) {
  std::ostringstream out;
  out << "top " << info.top_function << " at " << info.file_names.at(info.top_location.file) << ":"
      << info.top_location.line << "\n";
  for (const auto& a : info.arrays) {
    out << "array " << a.id << " [";
    for (std::size_t i = 0; i < a.dims.size(); ++i) out << (i ? "][" : "") << a.dims[i];
    out << "] bits=" << a.element_bits << " at " << info.file_names.at(a.definition_location.file) << ":"
        << a.definition_location.line << "\n";
  }
  for (const auto& f : info.functions) {
    out << "function " << f.name << (f.is_top ? " (top)" : "") << " stmts=" << f.stmt_count << "\n";
    describe_loops(f.loops, info, out);
  }
  return out.str();
}

}  // namespace forge
