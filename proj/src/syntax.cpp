#include "forge/syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <sstream>

#include "forge/errors.hpp"

namespace forge {

namespace {

const std::set<std::string> kKeywords = {
    "for",    "while",    "do",       "if",      "else",     "switch",   "case",        "default",
    "return", "break",    "continue", "goto",    "sizeof",   "typedef",  "struct",      "union",
    "enum",   "class",    "template", "namespace", "using",  "new",      "delete",      "try",
    "throw",  "catch",    "const",    "volatile", "static",  "extern",   "inline",      "register",
    "auto",   "signed",   "unsigned", "long",    "short",    "int",      "char",        "float",
    "double", "void",     "bool",     "typename", "constexpr", "static_cast", "reinterpret_cast",
    "const_cast",
};

// Keywords that can start or continue a type.
const std::set<std::string> kTypeModifiers = {"const", "volatile", "static", "extern", "inline", "register",
                                              "constexpr", "signed", "unsigned", "long", "short", "typename"};
const std::set<std::string> kBaseTypes = {"int", "char", "float", "double", "void", "bool", "auto"};

const std::array<std::string_view, 24> kPuncts = {
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "::", "##",
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

struct LexOutput {
  std::vector<Token> tokens;
  std::vector<Directive> directives;
  std::vector<Include> includes;
  std::vector<std::pair<std::string, std::vector<Token>>> defines;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::size_t file, std::string file_name)
      : src_(src), file_(file), file_name_(std::move(file_name)) {}

  LexOutput run() {
    LexOutput out;
    bool line_has_code = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        advance();
        line_has_code = false;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance();
        continue;
      }
      if (c == '\\' && peek(1) == '\n') {
        advance();
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        skip_block_comment();
        continue;
      }
      if (c == '#' && !line_has_code) {
        directive(out);
        continue;
      }
      line_has_code = true;
      out.tokens.push_back(next_token());
    }
    Token end;
    end.kind = Token::Kind::End;
    end.loc = here();
    end.end_offset = pos_;
    out.tokens.push_back(end);
    return out;
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  SourceLoc here() const {
    return SourceLoc{file_, line_, static_cast<int>(pos_ - line_start_) + 1, pos_};
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto loc = here();
    throw SyntaxError(file_name_, loc.line, loc.col, msg);
  }

  void skip_block_comment() {
    advance();
    advance();
    while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance();
    if (pos_ >= src_.size()) fail("unterminated comment");
    advance();
    advance();
  }

  Token next_token() {
    Token t;
    t.loc = here();
    const char c = src_[pos_];
    if (is_ident_start(c)) {
      const auto start = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      t.kind = kKeywords.contains(t.text) ? Token::Kind::Keyword : Token::Kind::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      const auto start = pos_;
      while (pos_ < src_.size()) {
        const char d = src_[pos_];
        if (is_ident_char(d) || d == '.' || d == '\'') {
          advance();
        } else if ((d == '+' || d == '-') && pos_ > start &&
                   (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E' || src_[pos_ - 1] == 'p' ||
                    src_[pos_ - 1] == 'P') &&
                   !(src_[start] == '0' && start + 1 < pos_ && (src_[start + 1] == 'x' || src_[start + 1] == 'X') &&
                     (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))) {
          advance();
        } else {
          break;
        }
      }
      t.text = std::string(src_.substr(start, pos_ - start));
      t.kind = Token::Kind::Number;
    } else if (c == '"' || c == '\'') {
      const auto start = pos_;
      advance();
      while (pos_ < src_.size() && src_[pos_] != c) {
        if (src_[pos_] == '\\') advance();
        if (pos_ < src_.size() && src_[pos_] == '\n') fail("unterminated literal");
        if (pos_ < src_.size()) advance();
      }
      if (pos_ >= src_.size()) fail("unterminated literal");
      advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      t.kind = c == '"' ? Token::Kind::String : Token::Kind::Char;
    } else {
      t.kind = Token::Kind::Punct;
      for (auto p : kPuncts) {
        if (src_.substr(pos_, p.size()) == p) {
          t.text = std::string(p);
          break;
        }
      }
      if (t.text.empty()) {
        if (std::string_view("{}[]();,.<>+-*/%&|^!~?:=#").find(c) == std::string_view::npos) {
          fail(std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      for (std::size_t i = 0; i < t.text.size(); ++i) advance();
    }
    t.end_offset = pos_;
    return t;
  }

  // Reads one logical preprocessor line with comments removed.
  std::string directive_line() {
    std::string text;
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && peek(1) == '\n') {
        advance();
        advance();
        text += ' ';
        continue;
      }
      if (src_[pos_] == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        break;
      }
      if (src_[pos_] == '/' && peek(1) == '*') {
        skip_block_comment();
        text += ' ';
        continue;
      }
      text += src_[pos_];
      advance();
    }
    return trim(text);
  }

  void directive(LexOutput& out) {
    const auto loc = here();
    auto text = directive_line();
    auto body = trim(std::string_view(text).substr(1));
    std::size_t i = 0;
    while (i < body.size() && is_ident_char(body[i])) ++i;
    const auto name = body.substr(0, i);
    const auto rest = trim(std::string_view(body).substr(i));
    if (name == "pragma") {
      Token t;
      t.kind = Token::Kind::Pragma;
      t.text = rest.empty() ? "#pragma" : "#pragma " + rest;
      t.loc = loc;
      t.end_offset = pos_;
      out.tokens.push_back(std::move(t));
      return;
    }
    out.directives.push_back({text, loc});
    if (name == "include") {
      Include inc;
      inc.loc = loc;
      if (rest.size() >= 2 && (rest.front() == '"' || rest.front() == '<')) {
        const char close = rest.front() == '"' ? '"' : '>';
        const auto e = rest.find(close, 1);
        if (e != std::string::npos) {
          inc.name = rest.substr(1, e - 1);
          inc.quoted = close == '"';
          out.includes.push_back(inc);
        }
      }
    } else if (name == "define") {
      std::size_t j = 0;
      while (j < rest.size() && is_ident_char(rest[j])) ++j;
      if (j == 0) return;
      const auto macro = rest.substr(0, j);
      if (j < rest.size() && rest[j] == '(') return;  // function-like: ignored
      Lexer sub(std::string_view(rest).substr(j), file_, file_name_);
      try {
        auto lexed = sub.run();
        lexed.tokens.pop_back();
        for (auto& tok : lexed.tokens) tok.loc = loc;
        out.defines.emplace_back(macro, std::move(lexed.tokens));
      } catch (const SyntaxError&) {
        // Non-C replacement text; such macros are never constant.
      }
    }
  }

  std::string_view src_;
  std::size_t file_;
  std::string file_name_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
};

int precedence(const std::string& op) {
  static const std::map<std::string, int> table = {
      {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4},  {"&", 5},  {"==", 6}, {"!=", 6}, {"<", 7},  {"<=", 7},
      {">", 7},  {">=", 7}, {"<<", 8}, {">>", 8}, {"+", 9},  {"-", 9},  {"*", 10}, {"/", 10}, {"%", 10},
  };
  const auto it = table.find(op);
  return it == table.end() ? -1 : it->second;
}

bool is_assign_op(const std::string& op) {
  return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" || op == "<<=" ||
         op == ">>=" || op == "&=" || op == "|=" || op == "^=";
}

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, std::size_t file, std::string file_name, SyntaxTree& tree)
      : toks_(tokens), file_(file), file_name_(std::move(file_name)), tree_(tree) {}

  // The whole token stream as one expression, or nullopt if tokens remain.
  std::optional<Expr> standalone_expression() {
    auto e = expression();
    if (peek().kind != Token::Kind::End) return std::nullopt;
    return e;
  }

  std::vector<TopItem> parse_items(bool nested) {
    std::vector<TopItem> items;
    while (true) {
      const auto& t = peek();
      if (t.kind == Token::Kind::End) {
        if (nested) fail("expected '}'");
        break;
      }
      if (nested && is_punct("}")) break;
      parse_top_item(items);
    }
    return items;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    const auto i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  const Token& take() {
    const auto& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    prev_end_ = t.end_offset;
    return t;
  }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == Token::Kind::Punct && t.text == p;
  }
  bool is_kw(std::string_view w, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == Token::Kind::Keyword && t.text == w;
  }
  bool accept(std::string_view p) {
    if (is_punct(p)) {
      take();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    throw SyntaxError(file_name_, t.loc.line, t.loc.col,
                      msg + (t.kind == Token::Kind::End ? " at end of file" : ", found '" + t.text + "'"));
  }
  [[noreturn]] void unsupported(const std::string& what) const {
    const auto& t = peek();
    throw UnsupportedConstruct(file_name_, t.loc.line, t.loc.col, what);
  }
  const Token& expect(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    return take();
  }
  std::string expect_ident() {
    if (peek().kind != Token::Kind::Ident) fail("expected identifier");
    return take().text;
  }

  // Skips a balanced {...} and returns the tokens joined by spaces.
  std::string skip_balanced_braces() {
    std::string text;
    int depth = 0;
    do {
      if (peek().kind == Token::Kind::End) fail("unbalanced '{'");
      const auto& t = take();
      if (t.kind == Token::Kind::Punct && t.text == "{") ++depth;
      if (t.kind == Token::Kind::Punct && t.text == "}") --depth;
      text += (text.empty() ? "" : " ") + t.text;
    } while (depth > 0);
    return text;
  }

  std::string skip_to_semicolon() {
    std::string text;
    while (!is_punct(";")) {
      if (peek().kind == Token::Kind::End) fail("expected ';'");
      if (is_punct("{")) {
        text += (text.empty() ? "" : " ") + skip_balanced_braces();
        continue;
      }
      text += (text.empty() ? "" : " ") + take().text;
    }
    take();
    return text + " ;";
  }

  void parse_top_item(std::vector<TopItem>& items) {
    const auto& t = peek();
    TopItem item;
    item.loc = t.loc;
    if (t.kind == Token::Kind::Pragma) {
      item.kind = TopItem::Kind::Pragma;
      item.decl = pragma_stmt();
      items.push_back(std::move(item));
      return;
    }
    if (is_punct(";")) {
      take();
      return;
    }
    if (is_kw("extern") && peek(1).kind == Token::Kind::String) {
      take();
      take();
      if (accept("{")) {
        auto inner = parse_items(true);
        expect("}");
        for (auto& i : inner) items.push_back(std::move(i));
      }
      return;
    }
    if (is_kw("namespace")) {
      take();
      if (peek().kind == Token::Kind::Ident) take();
      expect("{");
      auto inner = parse_items(true);
      expect("}");
      for (auto& i : inner) items.push_back(std::move(i));
      return;
    }
    if (is_kw("template")) unsupported("template");
    if (is_kw("using")) {
      item.kind = TopItem::Kind::Opaque;
      take();
      item.opaque = "using " + skip_to_semicolon();
      items.push_back(std::move(item));
      return;
    }
    if (is_kw("typedef")) {
      item.kind = TopItem::Kind::Opaque;
      item.opaque = typedef_decl();
      items.push_back(std::move(item));
      return;
    }
    if ((is_kw("struct") || is_kw("union") || is_kw("enum") || is_kw("class")) &&
        (is_punct("{", 1) || (peek(1).kind == Token::Kind::Ident && is_punct("{", 2)))) {
      item.kind = TopItem::Kind::Opaque;
      const bool is_enum = is_kw("enum");
      std::string text = take().text;
      if (peek().kind == Token::Kind::Ident) text += " " + take().text;
      const auto body_start = pos_;
      text += " " + skip_balanced_braces();
      if (is_enum) record_enum(body_start);
      if (!is_punct(";")) fail("expected ';' after type definition");
      take();
      item.opaque = text + " ;";
      items.push_back(std::move(item));
      return;
    }

    const auto start = pos_;
    TypeSpec type = parse_type();
    if (type.empty()) fail("expected declaration");
    Declarator first = declarator_head();
    if (is_punct("(")) {
      FunctionDef fn;
      fn.name = first.name;
      fn.return_type = type;
      fn.loc = first.loc;
      fn.params = parameter_list();
      while (is_kw("const")) take();
      if (is_punct("{")) {
        fn.body = compound();
        item.kind = TopItem::Kind::Function;
        item.function = std::move(fn);
        items.push_back(std::move(item));
        return;
      }
      pos_ = start;
      item.kind = TopItem::Kind::Opaque;
      item.opaque = skip_to_semicolon();
      items.push_back(std::move(item));
      return;
    }
    Stmt decl;
    decl.kind = Stmt::Kind::Decl;
    decl.loc = t.loc;
    decl.type = type;
    declarator_rest(first);
    decl.decls.push_back(std::move(first));
    while (accept(",")) {
      auto d = declarator_head();
      declarator_rest(d);
      decl.decls.push_back(std::move(d));
    }
    expect(";");
    decl.end_offset = prev_end_;
    record_constants(decl);
    item.kind = TopItem::Kind::Decl;
    item.decl = std::move(decl);
    items.push_back(std::move(item));
  }

  // File-scope "const int N = 16;" behaves like a macro for bound folding.
  void record_constants(const Stmt& decl) {
    const auto& ts = decl.type.tokens;
    if (std::find(ts.begin(), ts.end(), "const") == ts.end() &&
        std::find(ts.begin(), ts.end(), "constexpr") == ts.end()) {
      return;
    }
    for (const auto& d : decl.decls) {
      if (!d.dims.empty() || d.pointer_depth > 0 || !d.init) continue;
      std::vector<Token> toks;
      expr_tokens(*d.init, toks);
      tree_.constants.entries.emplace(d.name, std::move(toks));
    }
  }

  // Re-tokenizes an expression so constants share the macro representation.
  static void expr_tokens(const Expr& e, std::vector<Token>& out) {
    Lexer lx(print_expr(e), e.loc.file, "");
    auto r = lx.run();
    r.tokens.pop_back();
    out = std::move(r.tokens);
  }

  void record_enum(std::size_t body_start) {
    // enum { A = 4, B = 8 }: only explicitly valued members become constants.
    std::size_t i = body_start + 1;
    while (i < pos_) {
      if (toks_[i].kind == Token::Kind::Ident && toks_[i + 1].kind == Token::Kind::Punct &&
          toks_[i + 1].text == "=") {
        std::vector<Token> value;
        std::size_t j = i + 2;
        int depth = 0;
        while (j < pos_ - 1) {
          const auto& tk = toks_[j];
          if (tk.kind == Token::Kind::Punct && (tk.text == "(")) ++depth;
          if (tk.kind == Token::Kind::Punct && (tk.text == ")")) --depth;
          if (depth == 0 && tk.kind == Token::Kind::Punct && (tk.text == "," || tk.text == "}")) break;
          value.push_back(tk);
          ++j;
        }
        tree_.constants.entries.emplace(toks_[i].text, std::move(value));
        i = j;
      }
      ++i;
    }
  }

  std::string typedef_decl() {
    const auto start = pos_;
    take();  // typedef
    std::string text = "typedef";
    TypeSpec underlying;
    std::string last_ident;
    int depth = 0;
    while (true) {
      if (peek().kind == Token::Kind::End) fail("expected ';' after typedef");
      const auto& t = take();
      if (t.kind == Token::Kind::Punct && t.text == "{") ++depth;
      if (t.kind == Token::Kind::Punct && t.text == "}") --depth;
      if (depth == 0 && t.kind == Token::Kind::Punct && t.text == ";") break;
      text += " " + t.text;
      if (depth == 0 && t.kind == Token::Kind::Ident) last_ident = t.text;
      if (depth == 0 && !(t.kind == Token::Kind::Punct && t.text == "}")) underlying.tokens.push_back(t.text);
    }
    (void)start;
    if (!last_ident.empty()) {
      if (!underlying.tokens.empty() && underlying.tokens.back() == last_ident) underlying.tokens.pop_back();
      tree_.typedefs[last_ident] = underlying;
      tree_.type_names.insert(last_ident);
    }
    return text + " ;";
  }

  // Specifiers and at most one named type, e.g. "static const ap_uint<8>".
  TypeSpec parse_type() {
    TypeSpec ts;
    bool has_base = false;
    while (true) {
      const auto& t = peek();
      if (t.kind == Token::Kind::Keyword && kTypeModifiers.contains(t.text)) {
        if (t.text == "signed" || t.text == "unsigned" || t.text == "long" || t.text == "short") has_base = true;
        ts.tokens.push_back(take().text);
      } else if (t.kind == Token::Kind::Keyword && kBaseTypes.contains(t.text)) {
        ts.tokens.push_back(take().text);
        has_base = true;
      } else if (t.kind == Token::Kind::Keyword &&
                 (t.text == "struct" || t.text == "union" || t.text == "enum" || t.text == "class")) {
        ts.tokens.push_back(take().text);
        ts.tokens.push_back(expect_ident());
        has_base = true;
      } else if (!has_base && (t.kind == Token::Kind::Ident || is_punct("::"))) {
        if (is_punct("::")) ts.tokens.push_back(take().text);
        ts.tokens.push_back(expect_ident());
        while (is_punct("::") && peek(1).kind == Token::Kind::Ident) {
          ts.tokens.push_back(take().text);
          ts.tokens.push_back(take().text);
        }
        if (is_punct("<")) {
          if (!template_args(ts)) return {};
        }
        has_base = true;
      } else {
        break;
      }
    }
    return has_base ? ts : TypeSpec{};
  }

  bool template_args(TypeSpec& ts) {
    int depth = 0;
    while (true) {
      const auto& t = peek();
      if (t.kind == Token::Kind::End || is_punct(";") || is_punct("{") || is_punct("}")) return false;
      if (t.kind == Token::Kind::Punct && t.text == "<") ++depth;
      if (t.kind == Token::Kind::Punct && t.text == ">") --depth;
      if (t.kind == Token::Kind::Punct && t.text == ">>") depth -= 2;
      ts.tokens.push_back(take().text);
      if (depth <= 0) return depth == 0;
    }
  }

  bool known_type_start() const {
    const auto& t = peek();
    if (t.kind == Token::Kind::Keyword) {
      return kTypeModifiers.contains(t.text) || kBaseTypes.contains(t.text) || t.text == "struct" ||
             t.text == "union" || t.text == "enum" || t.text == "class";
    }
    return t.kind == Token::Kind::Ident && tree_.type_names.contains(t.text);
  }

  bool looks_like_decl() {
    if (known_type_start()) return true;
    if (peek().kind != Token::Kind::Ident && !is_punct("::")) return false;
    const auto save = pos_;
    const auto save_end = prev_end_;
    const auto ts = parse_type();
    const bool yes = !ts.empty() && peek().kind == Token::Kind::Ident;
    pos_ = save;
    prev_end_ = save_end;
    return yes;
  }

  Declarator declarator_head() {
    Declarator d;
    while (is_punct("*") || is_kw("const")) {
      if (take().text == "*") ++d.pointer_depth;
    }
    if (is_punct("&") || is_punct("&&")) {
      take();
      d.reference = true;
    }
    if (is_punct("(")) unsupported("function pointer declarator");
    d.loc = peek().loc;
    d.name = expect_ident();
    return d;
  }

  void declarator_rest(Declarator& d) {
    while (accept("[")) {
      if (accept("]")) {
        d.dims.emplace_back(std::nullopt);
        continue;
      }
      d.dims.emplace_back(expression());
      expect("]");
    }
    if (accept("=")) {
      d.init = is_punct("{") ? init_list() : assignment();
    } else if (is_punct("{")) {
      d.init = init_list();
    }
  }

  Expr init_list() {
    Expr e;
    e.kind = Expr::Kind::InitList;
    e.loc = expect("{").loc;
    while (!is_punct("}")) {
      e.args.push_back(is_punct("{") ? init_list() : assignment());
      if (!accept(",")) break;
    }
    expect("}");
    return e;
  }

  std::vector<Param> parameter_list() {
    expect("(");
    std::vector<Param> params;
    if (is_kw("void") && is_punct(")", 1)) {
      take();
    }
    while (!is_punct(")")) {
      if (is_punct("...")) unsupported("variadic function");
      Param p;
      p.type = parse_type();
      if (p.type.empty()) fail("expected parameter type");
      while (is_punct("*") || is_kw("const")) {
        if (take().text == "*") ++p.decl.pointer_depth;
      }
      if (is_punct("&") || is_punct("&&")) {
        take();
        p.decl.reference = true;
      }
      p.decl.loc = peek().loc;
      if (peek().kind == Token::Kind::Ident) p.decl.name = take().text;
      declarator_rest(p.decl);
      params.push_back(std::move(p));
      if (!accept(",")) break;
    }
    expect(")");
    return params;
  }

  Stmt pragma_stmt() {
    Stmt s;
    s.kind = Stmt::Kind::Pragma;
    const auto& t = take();
    s.loc = t.loc;
    s.text = t.text;
    s.end_offset = t.end_offset;
    return s;
  }

  Stmt compound() {
    Stmt s;
    s.kind = Stmt::Kind::Compound;
    s.loc = expect("{").loc;
    while (!is_punct("}")) {
      if (peek().kind == Token::Kind::End) fail("expected '}'");
      s.body.push_back(statement());
    }
    take();
    s.end_offset = prev_end_;
    return s;
  }

  Stmt statement() {
    const auto& t = peek();
    if (t.kind == Token::Kind::Pragma) return pragma_stmt();
    if (t.kind == Token::Kind::Ident && is_punct(":", 1)) {
      const auto label = take().text;
      take();
      auto s = statement();
      s.label = label;
      return s;
    }
    if (is_punct("{")) return compound();
    if (t.kind == Token::Kind::Keyword) {
      const auto& w = t.text;
      if (w == "while") unsupported("while-loop");
      if (w == "do") unsupported("do-while loop");
      if (w == "goto") unsupported("goto");
      if (w == "new" || w == "delete") unsupported("dynamic allocation");
      if (w == "try" || w == "throw") unsupported("exception handling");
      if (w == "for") return for_stmt();
      if (w == "if") return if_stmt();
      if (w == "switch") {
        Stmt s;
        s.kind = Stmt::Kind::Switch;
        s.loc = take().loc;
        expect("(");
        s.expr = expression();
        expect(")");
        s.body.push_back(statement());
        s.end_offset = prev_end_;
        return s;
      }
      if (w == "case" || w == "default") {
        Stmt s;
        s.loc = take().loc;
        s.kind = w == "case" ? Stmt::Kind::Case : Stmt::Kind::Default;
        if (s.kind == Stmt::Kind::Case) s.expr = conditional();
        expect(":");
        s.end_offset = prev_end_;
        return s;
      }
      if (w == "return") {
        Stmt s;
        s.kind = Stmt::Kind::Return;
        s.loc = take().loc;
        if (!is_punct(";")) s.expr = expression();
        expect(";");
        s.end_offset = prev_end_;
        return s;
      }
      if (w == "break" || w == "continue") {
        Stmt s;
        s.kind = w == "break" ? Stmt::Kind::Break : Stmt::Kind::Continue;
        s.loc = take().loc;
        expect(";");
        s.end_offset = prev_end_;
        return s;
      }
      if (w == "typedef") {
        Stmt s;
        s.kind = Stmt::Kind::Empty;
        s.loc = t.loc;
        typedef_decl();
        s.end_offset = prev_end_;
        return s;
      }
    }
    if (is_punct(";")) {
      Stmt s;
      s.kind = Stmt::Kind::Empty;
      s.loc = take().loc;
      s.end_offset = prev_end_;
      return s;
    }
    if (looks_like_decl()) {
      auto s = local_decl();
      expect(";");
      s.end_offset = prev_end_;
      return s;
    }
    Stmt s;
    s.kind = Stmt::Kind::Expr;
    s.loc = t.loc;
    s.expr = expression();
    expect(";");
    s.end_offset = prev_end_;
    return s;
  }

  Stmt local_decl() {
    Stmt s;
    s.kind = Stmt::Kind::Decl;
    s.loc = peek().loc;
    s.type = parse_type();
    if (s.type.empty()) fail("expected type");
    do {
      auto d = declarator_head();
      if (is_punct(":")) unsupported("range-based for");
      declarator_rest(d);
      s.decls.push_back(std::move(d));
    } while (accept(","));
    return s;
  }

  Stmt for_stmt() {
    Stmt s;
    s.kind = Stmt::Kind::For;
    s.loc = take().loc;
    expect("(");
    Stmt init;
    init.loc = peek().loc;
    if (is_punct(";")) {
      init.kind = Stmt::Kind::Empty;
    } else if (looks_like_decl()) {
      init = local_decl();
    } else {
      init.kind = Stmt::Kind::Expr;
      init.expr = expression();
    }
    expect(";");
    init.end_offset = prev_end_;
    if (!is_punct(";")) s.expr = expression();
    expect(";");
    if (!is_punct(")")) s.step = expression();
    expect(")");
    s.body.push_back(std::move(init));
    s.body.push_back(statement());
    s.end_offset = prev_end_;
    return s;
  }

  Stmt if_stmt() {
    Stmt s;
    s.kind = Stmt::Kind::If;
    s.loc = take().loc;
    expect("(");
    s.expr = expression();
    expect(")");
    s.body.push_back(statement());
    if (is_kw("else")) {
      take();
      s.body.push_back(statement());
    }
    s.end_offset = prev_end_;
    return s;
  }

  Expr expression() {
    auto e = assignment();
    if (!is_punct(",")) return e;
    Expr c;
    c.kind = Expr::Kind::Comma;
    c.loc = e.loc;
    c.args.push_back(std::move(e));
    while (accept(",")) c.args.push_back(assignment());
    return c;
  }

  Expr assignment() {
    auto lhs = conditional();
    if (peek().kind == Token::Kind::Punct && is_assign_op(peek().text)) {
      Expr e;
      e.kind = Expr::Kind::Assign;
      e.loc = lhs.loc;
      e.text = take().text;
      e.args.push_back(std::move(lhs));
      e.args.push_back(assignment());
      return e;
    }
    return lhs;
  }

  Expr conditional() {
    auto c = binary(1);
    if (!accept("?")) return c;
    Expr e;
    e.kind = Expr::Kind::Ternary;
    e.loc = c.loc;
    e.args.push_back(std::move(c));
    e.args.push_back(assignment());
    expect(":");
    e.args.push_back(assignment());
    return e;
  }

  Expr binary(int min_prec) {
    auto lhs = unary();
    while (peek().kind == Token::Kind::Punct) {
      const int prec = precedence(peek().text);
      if (prec < min_prec) break;
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.loc = lhs.loc;
      e.text = take().text;
      e.args.push_back(std::move(lhs));
      e.args.push_back(binary(prec + 1));
      lhs = std::move(e);
    }
    return lhs;
  }

  bool cast_ahead() {
    if (!is_punct("(")) return false;
    const auto save = pos_;
    const auto save_end = prev_end_;
    take();
    bool yes = false;
    if (known_type_start()) {
      const auto ts = parse_type();
      while (is_punct("*") || is_punct("&")) take();
      yes = !ts.empty() && is_punct(")");
    }
    pos_ = save;
    prev_end_ = save_end;
    return yes;
  }

  Expr unary() {
    const auto& t = peek();
    if (t.kind == Token::Kind::Punct &&
        (t.text == "-" || t.text == "+" || t.text == "!" || t.text == "~" || t.text == "*" || t.text == "&" ||
         t.text == "++" || t.text == "--")) {
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.loc = t.loc;
      e.text = take().text;
      e.args.push_back(unary());
      return e;
    }
    if (is_kw("sizeof")) {
      Expr e;
      e.kind = Expr::Kind::Sizeof;
      e.loc = take().loc;
      if (cast_ahead()) {
        take();
        auto ts = parse_type();
        std::string stars;
        while (is_punct("*")) stars += take().text;
        expect(")");
        e.text = ts.str() + stars;
      } else {
        e.args.push_back(unary());
      }
      return e;
    }
    if (cast_ahead()) {
      Expr e;
      e.kind = Expr::Kind::Cast;
      e.loc = take().loc;
      auto ts = parse_type();
      std::string stars;
      while (is_punct("*") || is_punct("&")) stars += take().text;
      expect(")");
      e.text = ts.str() + stars;
      e.args.push_back(unary());
      return e;
    }
    return postfix(primary());
  }

  Expr postfix(Expr base) {
    while (true) {
      if (is_punct("[")) {
        take();
        Expr e;
        e.kind = Expr::Kind::Index;
        e.loc = base.loc;
        e.args.push_back(std::move(base));
        e.args.push_back(expression());
        expect("]");
        base = std::move(e);
      } else if (is_punct("(")) {
        take();
        Expr e;
        e.kind = Expr::Kind::Call;
        e.loc = base.loc;
        if (base.kind == Expr::Kind::Ident &&
            (base.text == "malloc" || base.text == "calloc" || base.text == "realloc" || base.text == "free")) {
          throw UnsupportedConstruct(file_name_, base.loc.line, base.loc.col, "dynamic allocation");
        }
        e.args.push_back(std::move(base));
        while (!is_punct(")")) {
          e.args.push_back(assignment());
          if (!accept(",")) break;
        }
        expect(")");
        base = std::move(e);
      } else if (is_punct(".") || is_punct("->")) {
        Expr e;
        e.kind = Expr::Kind::Member;
        e.loc = base.loc;
        e.text = take().text;
        e.args.push_back(std::move(base));
        Expr m;
        m.kind = Expr::Kind::Ident;
        m.loc = peek().loc;
        m.text = expect_ident();
        e.args.push_back(std::move(m));
        base = std::move(e);
      } else if (is_punct("++") || is_punct("--")) {
        Expr e;
        e.kind = Expr::Kind::Postfix;
        e.loc = base.loc;
        e.text = take().text;
        e.args.push_back(std::move(base));
        base = std::move(e);
      } else {
        return base;
      }
    }
  }

  Expr primary() {
    const auto& t = peek();
    Expr e;
    e.loc = t.loc;
    switch (t.kind) {
      case Token::Kind::Ident: {
        e.kind = Expr::Kind::Ident;
        e.text = take().text;
        while (is_punct("::") && peek(1).kind == Token::Kind::Ident) {
          e.text += take().text;
          e.text += take().text;
        }
        return e;
      }
      case Token::Kind::Number: {
        e.text = take().text;
        const bool hex = e.text.size() > 1 && e.text[0] == '0' && (e.text[1] == 'x' || e.text[1] == 'X');
        const bool is_float = e.text.find('.') != std::string::npos ||
                              (!hex && (e.text.find_first_of("eE") != std::string::npos)) ||
                              (!hex && (e.text.back() == 'f' || e.text.back() == 'F'));
        e.kind = is_float ? Expr::Kind::FloatLit : Expr::Kind::IntLit;
        return e;
      }
      case Token::Kind::String:
        e.kind = Expr::Kind::StrLit;
        e.text = take().text;
        while (peek().kind == Token::Kind::String) e.text += " " + take().text;
        return e;
      case Token::Kind::Char:
        e.kind = Expr::Kind::CharLit;
        e.text = take().text;
        return e;
      case Token::Kind::Keyword: {
        if (t.text == "static_cast" || t.text == "reinterpret_cast" || t.text == "const_cast") {
          take();
          expect("<");
          auto ts = parse_type();
          std::string stars;
          while (is_punct("*") || is_punct("&")) stars += take().text;
          expect(">");
          expect("(");
          e.kind = Expr::Kind::Cast;
          e.text = ts.str() + stars;
          e.args.push_back(expression());
          expect(")");
          return e;
        }
        if (t.text == "new" || t.text == "delete") unsupported("dynamic allocation");
        if (kBaseTypes.contains(t.text) || t.text == "unsigned" || t.text == "signed" || t.text == "long" ||
            t.text == "short") {
          // Functional cast such as int(x).
          e.kind = Expr::Kind::Ident;
          e.text = take().text;
          if (!is_punct("(")) fail("expected '(' after type name");
          return e;
        }
        fail("expected expression");
      }
      case Token::Kind::Punct:
        if (t.text == "(") {
          take();
          auto inner = expression();
          expect(")");
          return inner;
        }
        if (t.text == "{") return init_list();
        fail("expected expression");
      case Token::Kind::Pragma:
        fail("unexpected pragma inside expression");
      case Token::Kind::End:
        fail("expected expression");
    }
    fail("expected expression");
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  std::size_t prev_end_ = 0;
  std::size_t file_;
  std::string file_name_;
  SyntaxTree& tree_;
};

// Every typedef and struct name, collected before parsing so declarations
// using types from another file of the unit are recognized.
void collect_type_names(const std::vector<Token>& toks, std::set<std::string>& names) {
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    const auto& t = toks[i];
    if (t.kind == Token::Kind::Keyword &&
        (t.text == "struct" || t.text == "union" || t.text == "enum" || t.text == "class") &&
        toks[i + 1].kind == Token::Kind::Ident) {
      names.insert(toks[i + 1].text);
    }
    if (t.kind == Token::Kind::Keyword && t.text == "typedef") {
      int depth = 0;
      std::string last;
      for (std::size_t j = i + 1; j < toks.size(); ++j) {
        const auto& u = toks[j];
        if (u.kind == Token::Kind::Punct && u.text == "{") ++depth;
        if (u.kind == Token::Kind::Punct && u.text == "}") --depth;
        if (depth == 0 && u.kind == Token::Kind::Ident) last = u.text;
        if ((depth == 0 && u.kind == Token::Kind::Punct && u.text == ";") || u.kind == Token::Kind::End) break;
      }
      if (!last.empty()) names.insert(last);
    }
  }
}

void collect_calls(const Expr& e, std::set<std::string>& out) {
  walk_expr(e, [&](const Expr& x) {
    if (x.kind == Expr::Kind::Call && x.args[0].kind == Expr::Kind::Ident) out.insert(x.args[0].text);
  });
}

void collect_calls(const Stmt& s, std::set<std::string>& out) {
  if (s.expr) collect_calls(*s.expr, out);
  if (s.step) collect_calls(*s.step, out);
  for (const auto& d : s.decls) {
    if (d.init) collect_calls(*d.init, out);
  }
  for (const auto& b : s.body) collect_calls(b, out);
}

void reject_recursion(const SyntaxTree& tree) {
  std::map<std::string, std::set<std::string>> graph;
  std::map<std::string, const FunctionDef*> defs;
  for (const auto& tu : tree.files) {
    for (const auto& item : tu.items) {
      if (item.kind != TopItem::Kind::Function) continue;
      collect_calls(item.function.body, graph[item.function.name]);
      defs[item.function.name] = &item.function;
    }
  }
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> mark;
  std::function<void(const std::string&)> visit = [&](const std::string& fn) {
    mark[fn] = Mark::Active;
    for (const auto& callee : graph[fn]) {
      if (!defs.contains(callee)) continue;
      if (mark[callee] == Mark::Active) {
        const auto* d = defs.at(callee);
        throw UnsupportedConstruct(tree.file_name(d->loc.file), d->loc.line, d->loc.col, "recursion");
      }
      if (mark[callee] == Mark::None) visit(callee);
    }
    mark[fn] = Mark::Done;
  };
  for (const auto& [name, _] : defs) {
    if (mark[name] == Mark::None) visit(name);
  }
}

}  // namespace

std::string TypeSpec::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    const bool glue = t == "<" || t == ">" || t == "," || t == "::" || t == ">>" ||
                      (i > 0 && (tokens[i - 1] == "<" || tokens[i - 1] == "::"));
    if (i > 0 && !glue) out += ' ';
    out += t;
  }
  return out;
}

std::optional<std::int64_t> ConstantTable::lookup(const std::string& name) const {
  // Replacement tokens are re-parsed on each lookup; depth guards cycles.
  thread_local int depth = 0;
  const auto it = entries.find(name);
  if (it == entries.end() || it->second.empty() || depth > 32) return std::nullopt;
  auto toks = it->second;
  Token end;
  end.kind = Token::Kind::End;
  toks.push_back(end);
  SyntaxTree scratch;
  Parser p(toks, 0, "<constant>", scratch);
  ++depth;
  std::optional<std::int64_t> v;
  try {
    const auto e = p.standalone_expression();
    if (e) v = evaluate_constant(*e, *this);
  } catch (const Error&) {
    v = std::nullopt;
  }
  --depth;
  return v;
}

namespace {

std::optional<std::int64_t> parse_int_literal(std::string text) {
  text.erase(std::remove(text.begin(), text.end(), '\''), text.end());
  while (!text.empty() && (text.back() == 'u' || text.back() == 'U' || text.back() == 'l' || text.back() == 'L')) {
    text.pop_back();
  }
  if (text.empty()) return std::nullopt;
  int base = 10;
  std::size_t start = 0;
  if (text.size() > 1 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    start = 2;
  } else if (text.size() > 1 && text[0] == '0' && (text[1] == 'b' || text[1] == 'B')) {
    base = 2;
    start = 2;
  } else if (text.size() > 1 && text[0] == '0') {
    base = 8;
    start = 1;
  }
  std::int64_t v = 0;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
    int d = 0;
    if (c >= '0' && c <= '9') {
      d = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      d = c - 'a' + 10;
    } else {
      return std::nullopt;
    }
    if (d >= base) return std::nullopt;
    if (v > (INT64_MAX - d) / base) return std::nullopt;
    v = v * base + d;
  }
  return v;
}

}  // namespace

std::optional<std::int64_t> evaluate_constant(const Expr& e, const ConstantTable& constants) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::IntLit:
      return parse_int_literal(e.text);
    case K::Ident:
      return constants.lookup(e.text);
    case K::Cast:
      return evaluate_constant(e.args[0], constants);
    case K::Unary: {
      const auto v = evaluate_constant(e.args[0], constants);
      if (!v) return std::nullopt;
      if (e.text == "-") return -*v;
      if (e.text == "+") return *v;
      if (e.text == "~") return ~*v;
      if (e.text == "!") return static_cast<std::int64_t>(*v == 0);
      return std::nullopt;
    }
    case K::Binary: {
      const auto a = evaluate_constant(e.args[0], constants);
      const auto b = evaluate_constant(e.args[1], constants);
      if (!a || !b) return std::nullopt;
      const auto& op = e.text;
      if (op == "+") return *a + *b;
      if (op == "-") return *a - *b;
      if (op == "*") return *a * *b;
      if (op == "/") return *b == 0 ? std::nullopt : std::optional<std::int64_t>(*a / *b);
      if (op == "%") return *b == 0 ? std::nullopt : std::optional<std::int64_t>(*a % *b);
      if (op == "<<") return (*b < 0 || *b > 62) ? std::nullopt : std::optional<std::int64_t>(*a << *b);
      if (op == ">>") return (*b < 0 || *b > 62) ? std::nullopt : std::optional<std::int64_t>(*a >> *b);
      if (op == "&") return *a & *b;
      if (op == "|") return *a | *b;
      if (op == "^") return *a ^ *b;
      if (op == "<") return static_cast<std::int64_t>(*a < *b);
      if (op == "<=") return static_cast<std::int64_t>(*a <= *b);
      if (op == ">") return static_cast<std::int64_t>(*a > *b);
      if (op == ">=") return static_cast<std::int64_t>(*a >= *b);
      if (op == "==") return static_cast<std::int64_t>(*a == *b);
      if (op == "!=") return static_cast<std::int64_t>(*a != *b);
      if (op == "&&") return static_cast<std::int64_t>(*a && *b);
      if (op == "||") return static_cast<std::int64_t>(*a || *b);
      return std::nullopt;
    }
    case K::Ternary: {
      const auto c = evaluate_constant(e.args[0], constants);
      if (!c) return std::nullopt;
      return evaluate_constant(e.args[*c ? 1 : 2], constants);
    }
    default:
      return std::nullopt;
  }
}

SyntaxTree parse_source(const SourceUnit& unit) {
  unit.check();
  SyntaxTree tree;
  tree.unit = unit;
  std::vector<LexOutput> lexed;
  lexed.reserve(unit.files.size());
  for (std::size_t i = 0; i < unit.files.size(); ++i) {
    lexed.push_back(Lexer(unit.files[i].content, i, unit.files[i].name).run());
    collect_type_names(lexed.back().tokens, tree.type_names);
    for (auto& [name, toks] : lexed.back().defines) tree.constants.entries[name] = toks;
  }
  for (std::size_t i = 0; i < unit.files.size(); ++i) {
    TranslationUnit tu;
    tu.file = i;
    tu.directives = std::move(lexed[i].directives);
    tu.includes = std::move(lexed[i].includes);
    for (auto& inc : tu.includes) {
      if (!inc.quoted) continue;
      for (std::size_t j = 0; j < unit.files.size(); ++j) {
        if (unit.files[j].name == inc.name ||
            std::filesystem::path(unit.files[j].name).filename() == std::filesystem::path(inc.name).filename()) {
          inc.resolved = j;
          break;
        }
      }
    }
    Parser p(lexed[i].tokens, i, unit.files[i].name, tree);
    tu.items = p.parse_items(false);
    tree.files.push_back(std::move(tu));
  }
  std::set<std::string> seen;
  for (const auto& tu : tree.files) {
    for (const auto& item : tu.items) {
      if (item.kind != TopItem::Kind::Function) continue;
      if (!seen.insert(item.function.name).second) {
        throw SyntaxError(tree.file_name(tu.file), item.function.loc.line, item.function.loc.col,
                          "duplicate definition of function '" + item.function.name + "'");
      }
    }
  }
  reject_recursion(tree);
  return tree;
}

// ---------------------------------------------------------------------------
// Pretty printer

std::string print_expr(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Ident:
    case K::IntLit:
    case K::FloatLit:
    case K::StrLit:
    case K::CharLit:
      return e.text;
    case K::Unary:
      return "(" + e.text + print_expr(e.args[0]) + ")";
    case K::Postfix:
      return "(" + print_expr(e.args[0]) + e.text + ")";
    case K::Binary:
      return "(" + print_expr(e.args[0]) + " " + e.text + " " + print_expr(e.args[1]) + ")";
    case K::Assign:
      return print_expr(e.args[0]) + " " + e.text + " " + print_expr(e.args[1]);
    case K::Ternary:
      return "(" + print_expr(e.args[0]) + " ? " + print_expr(e.args[1]) + " : " + print_expr(e.args[2]) + ")";
    case K::Call: {
      std::string s = print_expr(e.args[0]) + "(";
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        if (i > 1) s += ", ";
        s += print_expr(e.args[i]);
      }
      return s + ")";
    }
    case K::Index:
      return print_expr(e.args[0]) + "[" + print_expr(e.args[1]) + "]";
    case K::Member:
      return print_expr(e.args[0]) + e.text + e.args[1].text;
    case K::Cast:
      return "((" + e.text + ")" + print_expr(e.args[0]) + ")";
    case K::Sizeof:
      return e.args.empty() ? "sizeof(" + e.text + ")" : "sizeof(" + print_expr(e.args[0]) + ")";
    case K::InitList: {
      std::string s = "{";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) s += ", ";
        s += print_expr(e.args[i]);
      }
      return s + "}";
    }
    case K::Comma: {
      std::string s = "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) s += ", ";
        s += print_expr(e.args[i]);
      }
      return s + ")";
    }
  }
  return {};
}

namespace {

std::string print_declarator(const Declarator& d) {
  std::string s(static_cast<std::size_t>(d.pointer_depth), '*');
  if (d.reference) s += "&";
  s += d.name;
  for (const auto& dim : d.dims) s += "[" + (dim ? print_expr(*dim) : std::string()) + "]";
  if (d.init) s += " = " + print_expr(*d.init);
  return s;
}

std::string print_decl(const Stmt& s) {
  std::string out = s.type.str() + " ";
  for (std::size_t i = 0; i < s.decls.size(); ++i) {
    if (i > 0) out += ", ";
    out += print_declarator(s.decls[i]);
  }
  return out + ";";
}

void print_stmt(const Stmt& s, int indent, std::ostringstream& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
  if (s.kind == Stmt::Kind::Pragma) {
    out << s.text << "\n";
    return;
  }
  out << pad;
  if (s.label) out << *s.label << ": ";
  switch (s.kind) {
    case Stmt::Kind::Compound:
      out << "{\n";
      for (const auto& b : s.body) print_stmt(b, indent + 1, out);
      out << pad << "}\n";
      break;
    case Stmt::Kind::Expr:
      out << print_expr(*s.expr) << ";\n";
      break;
    case Stmt::Kind::Decl:
      out << print_decl(s) << "\n";
      break;
    case Stmt::Kind::For: {
      const auto& init = s.body[0];
      out << "for (";
      if (init.kind == Stmt::Kind::Decl) {
        out << print_decl(init);
      } else if (init.kind == Stmt::Kind::Expr) {
        out << print_expr(*init.expr) << ";";
      } else {
        out << ";";
      }
      out << " " << (s.expr ? print_expr(*s.expr) : "") << "; " << (s.step ? print_expr(*s.step) : "") << ")\n";
      print_stmt(s.body[1], s.body[1].kind == Stmt::Kind::Compound ? indent : indent + 1, out);
      break;
    }
    case Stmt::Kind::If:
      out << "if (" << print_expr(*s.expr) << ")\n";
      print_stmt(s.body[0], s.body[0].kind == Stmt::Kind::Compound ? indent : indent + 1, out);
      if (s.body.size() > 1) {
        out << pad << "else\n";
        print_stmt(s.body[1], s.body[1].kind == Stmt::Kind::Compound ? indent : indent + 1, out);
      }
      break;
    case Stmt::Kind::Switch:
      out << "switch (" << print_expr(*s.expr) << ")\n";
      print_stmt(s.body[0], indent, out);
      break;
    case Stmt::Kind::Case:
      out << "case " << print_expr(*s.expr) << ":\n";
      break;
    case Stmt::Kind::Default:
      out << "default:\n";
      break;
    case Stmt::Kind::Return:
      out << "return" << (s.expr ? " " + print_expr(*s.expr) : "") << ";\n";
      break;
    case Stmt::Kind::Break:
      out << "break;\n";
      break;
    case Stmt::Kind::Continue:
      out << "continue;\n";
      break;
    case Stmt::Kind::Empty:
      out << ";\n";
      break;
    case Stmt::Kind::Pragma:
      break;
  }
}

}  // namespace

SourceUnit pretty_print(const SyntaxTree& tree) {
  SourceUnit out;
  out.top_hint = tree.unit.top_hint;
  for (const auto& tu : tree.files) {
    std::ostringstream ss;
    for (const auto& d : tu.directives) ss << d.text << "\n";
    for (const auto& item : tu.items) {
      switch (item.kind) {
        case TopItem::Kind::Function: {
          const auto& fn = item.function;
          ss << fn.return_type.str() << " " << fn.name << "(";
          for (std::size_t i = 0; i < fn.params.size(); ++i) {
            if (i > 0) ss << ", ";
            ss << fn.params[i].type.str() << " " << print_declarator(fn.params[i].decl);
          }
          ss << ")\n";
          print_stmt(fn.body, 0, ss);
          break;
        }
        case TopItem::Kind::Decl:
          ss << print_decl(item.decl) << "\n";
          break;
        case TopItem::Kind::Pragma:
          ss << item.decl.text << "\n";
          break;
        case TopItem::Kind::Opaque:
          ss << item.opaque << "\n";
          break;
      }
    }
    out.files.push_back({tree.file_name(tu.file), ss.str()});
  }
  return out;
}

}  // namespace forge
