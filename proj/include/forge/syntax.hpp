#pragma once

// Front end for the restricted C subset HLS kernels are written in:
// functions, canonical for-loops, fixed-size arrays, arithmetic and
// assignments, object-like integer macros. No while/do loops, goto,
// recursion or dynamic allocation.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/source.hpp"

namespace forge {

struct Token {
  enum class Kind { Ident, Keyword, Number, String, Char, Punct, Pragma, End };
  Kind kind = Kind::End;
  std::string text;
  SourceLoc loc;
  // Offset one past the last byte of the token.
  std::size_t end_offset = 0;
};

struct Expr {
  enum class Kind {
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    Unary,    // text = operator, args[0] = operand
    Postfix,  // text = "++" or "--"
    Binary,   // text = operator
    Assign,   // text = "=", "+=", ...
    Ternary,
    Call,     // args[0] = callee, rest = arguments
    Index,    // args[0] = base, args[1] = subscript
    Member,   // text = "." or "->", args[0] = object, args[1] = Ident
    Cast,     // text = type, args[0] = operand
    Sizeof,   // text = type when args is empty
    InitList,
    Comma,
  };

  Kind kind = Kind::Ident;
  std::string text;
  std::vector<Expr> args;
  SourceLoc loc;
};

struct TypeSpec {
  std::vector<std::string> tokens;

  std::string str() const;
  bool empty() const { return tokens.empty(); }
};

struct Declarator {
  std::string name;
  int pointer_depth = 0;
  bool reference = false;
  // One entry per [] suffix; nullopt for an empty extent.
  std::vector<std::optional<Expr>> dims;
  std::optional<Expr> init;
  SourceLoc loc;
};

struct Stmt {
  enum class Kind { Compound, Expr, Decl, For, If, Switch, Case, Default, Return, Break, Continue, Empty, Pragma };

  Kind kind = Kind::Empty;
  SourceLoc loc;
  // Offset one past the statement's last byte (after ';' or '}').
  std::size_t end_offset = 0;
  std::optional<std::string> label;

  // Compound: children. For: [init, body]. If: [then] or [then, else].
  // Switch: [body].
  std::vector<Stmt> body;
  // Expr statement, return value, if/switch/for condition, case value.
  std::optional<Expr> expr;
  // For step.
  std::optional<Expr> step;

  TypeSpec type;
  std::vector<Declarator> decls;

  // Pragma text, "#pragma ..." without the trailing newline.
  std::string text;
};

struct Param {
  TypeSpec type;
  Declarator decl;
};

struct FunctionDef {
  std::string name;
  TypeSpec return_type;
  std::vector<Param> params;
  Stmt body;
  SourceLoc loc;
};

struct Directive {
  std::string text;
  SourceLoc loc;
};

struct Include {
  std::string name;
  bool quoted = false;
  // Index of the unit file the include names, when it names one.
  std::optional<std::size_t> resolved;
  SourceLoc loc;
};

struct TopItem {
  enum class Kind { Function, Decl, Pragma, Opaque };
  Kind kind = Kind::Opaque;
  FunctionDef function;
  Stmt decl;      // Decl or Pragma statement
  std::string opaque;  // typedefs, struct definitions and prototypes, verbatim tokens
  SourceLoc loc;
};

struct TranslationUnit {
  std::size_t file = 0;
  std::vector<TopItem> items;
  // Preprocessor lines other than pragmas, in order.
  std::vector<Directive> directives;
  std::vector<Include> includes;
};

// Object-like macros and file-scope integer constants, both stored as token
// sequences and evaluated on demand.
struct ConstantTable {
  std::map<std::string, std::vector<Token>> entries;

  std::optional<std::int64_t> lookup(const std::string& name) const;
};

struct SyntaxTree {
  SourceUnit unit;
  std::vector<TranslationUnit> files;
  ConstantTable constants;
  // typedef name -> underlying type.
  std::map<std::string, TypeSpec> typedefs;
  std::set<std::string> type_names;

  const std::string& file_name(std::size_t idx) const { return unit.files.at(idx).name; }
};

// Throws SyntaxError or UnsupportedConstruct.
SyntaxTree parse_source(const SourceUnit& unit);

// Folds an integer constant expression, substituting constants.
std::optional<std::int64_t> evaluate_constant(const Expr& e, const ConstantTable& constants);

// C text for the tree, one string per file, with expressions fully
// parenthesized. Re-parsing the output gives the same structure.
SourceUnit pretty_print(const SyntaxTree& tree);
std::string print_expr(const Expr& e);

// Visits e and every sub-expression, pre-order.
template <typename F>
void walk_expr(const Expr& e, F&& f) {
  f(e);
  for (const auto& a : e.args) walk_expr(a, f);
}

}  // namespace forge
