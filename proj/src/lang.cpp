#include "loopsight/lang.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "loopsight/util.hpp"

namespace loopsight::lang {

namespace {

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> kw = {
      "import", "def", "if", "else", "for", "in", "return", "True", "False", "None"};
  return kw;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Tokens of one line's content. `start_col` is the 1-based column of the
// first character of `text` within the physical line.
void lex_line_content(std::string_view text, int lineno, int start_col,
                      std::vector<Token>& out) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto col = [&](std::size_t at) { return start_col + static_cast<int>(at); };
  while (i < n) {
    const char c = text[i];
    if (c == ' ') {
      ++i;
      continue;
    }
    if (c == '#') {
      break;  // comment to end of line
    }
    if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < n && is_ident_char(text[j])) ++j;
      std::string word(text.substr(i, j - i));
      const TokenKind kind =
          keywords().count(word) ? TokenKind::Keyword : TokenKind::Identifier;
      out.push_back({kind, std::move(word), lineno, col(i)});
      i = j;
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i + 1;
      while (j < n && is_digit(text[j])) ++j;
      if (j + 1 < n && text[j] == '.' && is_digit(text[j + 1])) {
        ++j;
        while (j < n && is_digit(text[j])) ++j;
      }
      out.push_back({TokenKind::Number, std::string(text.substr(i, j - i)), lineno, col(i)});
      i = j;
      continue;
    }
    if (c == '\'' || c == '"') {
      const char quote = c;
      std::size_t j = i + 1;
      while (j < n && text[j] != quote) {
        if (text[j] == '\\' && j + 1 < n) ++j;
        ++j;
      }
      if (j >= n) {
        throw LexError(lineno, col(i), "unterminated string literal");
      }
      out.push_back(
          {TokenKind::String, std::string(text.substr(i, j - i + 1)), lineno, col(i)});
      i = j + 1;
      continue;
    }
    // two-character operators first
    if (i + 1 < n) {
      const std::string_view two = text.substr(i, 2);
      if (two == "==" || two == "!=" || two == "<=" || two == ">=") {
        out.push_back({TokenKind::Operator, std::string(two), lineno, col(i)});
        i += 2;
        continue;
      }
    }
    if (std::string_view("=<>+-*/%").find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Operator, std::string(1, c), lineno, col(i)});
      ++i;
      continue;
    }
    if (std::string_view("()[],:.").find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), lineno, col(i)});
      ++i;
      continue;
    }
    throw LexError(lineno, col(i), std::string("illegal character '") + c + "'");
  }
}

struct PhysicalLine {
  std::string_view text;
  int number;
};

std::vector<PhysicalLine> split_lines(std::string_view source) {
  std::vector<PhysicalLine> lines;
  std::size_t start = 0;
  int number = 1;
  while (start <= source.size()) {
    const std::size_t nl = source.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < source.size()) {
        lines.push_back({source.substr(start), number});
      }
      break;
    }
    lines.push_back({source.substr(start, nl - start), number});
    start = nl + 1;
    ++number;
  }
  return lines;
}

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> out;
  std::vector<int> indents{0};
  int last_line = 1;
  for (const PhysicalLine& pl : split_lines(source)) {
    last_line = pl.number;
    std::size_t width = 0;
    while (width < pl.text.size() && pl.text[width] == ' ') ++width;
    if (width < pl.text.size() && pl.text[width] == '\t') {
      throw LexError(pl.number, static_cast<int>(width) + 1, "illegal character '\\t'");
    }
    const std::string_view content = pl.text.substr(width);
    if (content.empty() || content[0] == '#') {
      continue;  // blank or comment-only lines do not affect indentation
    }
    const int indent = static_cast<int>(width);
    if (indent > indents.back()) {
      indents.push_back(indent);
      out.push_back({TokenKind::Indent, kIndentText, pl.number, 1});
    } else {
      while (indent < indents.back()) {
        indents.pop_back();
        out.push_back({TokenKind::Dedent, kDedentText, pl.number, 1});
      }
      if (indent != indents.back()) {
        throw LexError(pl.number, 1, "unindent does not match any outer indentation level");
      }
    }
    const std::size_t before = out.size();
    lex_line_content(content, pl.number, indent + 1, out);
    if (out.size() > before) {
      out.push_back({TokenKind::Newline, kNewlineText, pl.number,
                     static_cast<int>(pl.text.size()) + 1});
    }
  }
  while (indents.back() > 0) {
    indents.pop_back();
    out.push_back({TokenKind::Dedent, kDedentText, last_line + 1, 1});
  }
  return out;
}

std::vector<Token> scan_line(std::string_view line, int lineno) {
  std::vector<Token> out;
  std::size_t width = 0;
  while (width < line.size() && (line[width] == ' ' || line[width] == '\t')) ++width;
  try {
    lex_line_content(line.substr(width), lineno, static_cast<int>(width) + 1, out);
  } catch (const LexError&) {
    // keep whatever lexed cleanly
  }
  return out;
}

std::string render(const std::vector<Token>& tokens) {
  std::string out;
  std::string current;
  int level = 0;
  auto flush = [&]() {
    if (current.empty()) return;
    for (int i = 0; i < level; ++i) out += "    ";
    out += current;
    out += '\n';
    current.clear();
  };
  for (const Token& t : tokens) {
    switch (t.kind) {
      case TokenKind::Indent:
        ++level;
        break;
      case TokenKind::Dedent:
        if (level > 0) --level;
        break;
      case TokenKind::Newline:
        flush();
        break;
      default:
        if (!current.empty()) current += ' ';
        current += t.text;
        break;
    }
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    int line = tokens_.empty() ? 1 : tokens_.back().line + 1;
    tokens_.push_back({TokenKind::Punct, "<EOF>", line, 1});
  }

  Block parse_program() {
    Block block;
    while (!at_eof()) {
      if (peek().kind == TokenKind::Indent) {
        fail(peek(), "unexpected indent");
      }
      block.stmts.push_back(parse_statement());
    }
    return block;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int def_depth_ = 0;

  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool at_eof() const { return peek().text == "<EOF>" && peek().kind == TokenKind::Punct; }

  [[noreturn]] void fail(const Token& t, const std::string& message) const {
    if (t.text == "<EOF>") {
      throw ParseError(t.line, t.column, "unexpected end of input: " + message);
    }
    throw ParseError(t.line, t.column, message);
  }

  bool check(TokenKind kind, std::string_view text = {}) const {
    return peek().kind == kind && (text.empty() || peek().text == text);
  }

  const Token& expect(TokenKind kind, std::string_view text, const std::string& what) {
    if (!check(kind, text)) {
      fail(peek(), "expected " + what);
    }
    return advance();
  }

  void expect_newline() {
    if (!check(TokenKind::Newline)) {
      fail(peek(), "expected end of line");
    }
    advance();
  }

  Block parse_block() {
    expect_newline();
    if (!check(TokenKind::Indent)) {
      fail(peek(), "expected an indented block");
    }
    advance();
    Block block;
    while (!check(TokenKind::Dedent)) {
      if (at_eof()) {
        fail(peek(), "expected dedent");
      }
      block.stmts.push_back(parse_statement());
    }
    advance();  // Dedent
    return block;
  }

  Stmt parse_statement() {
    const Token& first = peek();
    Stmt stmt;
    stmt.line = first.line;
    if (first.kind == TokenKind::Keyword) {
      if (first.text == "import") {
        advance();
        ImportStmt node;
        node.module = expect(TokenKind::Identifier, {}, "module name after 'import'");
        expect_newline();
        stmt.node = std::move(node);
        return stmt;
      }
      if (first.text == "def") {
        advance();
        DefStmt node;
        node.name = expect(TokenKind::Identifier, {}, "function name after 'def'");
        expect(TokenKind::Punct, "(", "'('");
        if (!check(TokenKind::Punct, ")")) {
          node.params.push_back(expect(TokenKind::Identifier, {}, "parameter name"));
          while (check(TokenKind::Punct, ",")) {
            advance();
            node.params.push_back(expect(TokenKind::Identifier, {}, "parameter name"));
          }
        }
        expect(TokenKind::Punct, ")", "')'");
        expect(TokenKind::Punct, ":", "':'");
        ++def_depth_;
        node.body = parse_block();
        --def_depth_;
        stmt.node = std::move(node);
        return stmt;
      }
      if (first.text == "if") {
        advance();
        IfStmt node;
        node.cond = capture_expr();
        expect(TokenKind::Punct, ":", "':'");
        node.then_body = parse_block();
        if (check(TokenKind::Keyword, "else")) {
          advance();
          expect(TokenKind::Punct, ":", "':'");
          node.else_body = parse_block();
        }
        stmt.node = std::move(node);
        return stmt;
      }
      if (first.text == "for") {
        advance();
        ForStmt node;
        node.var = expect(TokenKind::Identifier, {}, "loop variable after 'for'");
        expect(TokenKind::Keyword, "in", "'in'");
        node.iterable = capture_expr();
        expect(TokenKind::Punct, ":", "':'");
        node.body = parse_block();
        if (check(TokenKind::Keyword, "else")) {
          advance();
          expect(TokenKind::Punct, ":", "':'");
          node.else_body = parse_block();
        }
        stmt.node = std::move(node);
        return stmt;
      }
      if (first.text == "return") {
        if (def_depth_ == 0) {
          fail(first, "'return' outside function");
        }
        advance();
        ReturnStmt node;
        if (!check(TokenKind::Newline)) {
          node.expr = capture_expr();
        }
        expect_newline();
        stmt.node = std::move(node);
        return stmt;
      }
      if (first.text == "else") {
        fail(first, "'else' without matching 'if' or 'for'");
      }
      if (first.text == "in") {
        fail(first, "unexpected 'in'");
      }
      // True/False/None fall through to expression statements
    }
    // assignment or expression statement
    const std::size_t start = pos_;
    std::vector<Token> expr = capture_expr();
    if (check(TokenKind::Operator, "=")) {
      AssignStmt node;
      if (!extract_target(expr, node)) {
        fail(tokens_[start], "cannot assign to expression");
      }
      advance();  // '='
      node.rhs = capture_expr();
      expect_newline();
      stmt.node = std::move(node);
      return stmt;
    }
    expect_newline();
    ExprStmt node;
    node.expr = std::move(expr);
    stmt.node = std::move(node);
    return stmt;
  }

  // Valid targets: IDENT, or IDENT '[' expr ']' with the subscript closing at
  // the very end.
  static bool extract_target(const std::vector<Token>& expr, AssignStmt& node) {
    if (expr.empty() || expr[0].kind != TokenKind::Identifier) return false;
    node.target = expr[0];
    if (expr.size() == 1) {
      node.subscripted = false;
      return true;
    }
    if (expr.size() < 4 || expr[1].text != "[" || expr.back().text != "]") return false;
    int depth = 0;
    for (std::size_t i = 1; i < expr.size(); ++i) {
      if (expr[i].kind == TokenKind::Punct && (expr[i].text == "[" || expr[i].text == "(")) {
        ++depth;
      } else if (expr[i].kind == TokenKind::Punct &&
                 (expr[i].text == "]" || expr[i].text == ")")) {
        --depth;
        if (depth == 0 && i + 1 != expr.size()) return false;  // e.g. a[i][j]
      }
    }
    if (depth != 0) return false;
    node.subscripted = true;
    node.index.assign(expr.begin() + 2, expr.end() - 1);
    return true;
  }

  std::vector<Token> capture_expr() {
    const std::size_t start = pos_;
    parse_comparison();
    return {tokens_.begin() + static_cast<std::ptrdiff_t>(start),
            tokens_.begin() + static_cast<std::ptrdiff_t>(pos_)};
  }

  void parse_comparison() {
    parse_arith();
    if (check(TokenKind::Operator) &&
        (peek().text == "<" || peek().text == ">" || peek().text == "<=" ||
         peek().text == ">=" || peek().text == "==" || peek().text == "!=")) {
      advance();
      parse_arith();
    }
  }

  void parse_arith() {
    parse_term();
    while (check(TokenKind::Operator) && (peek().text == "+" || peek().text == "-")) {
      advance();
      parse_term();
    }
  }

  void parse_term() {
    parse_factor();
    while (check(TokenKind::Operator) &&
           (peek().text == "*" || peek().text == "/" || peek().text == "%")) {
      advance();
      parse_factor();
    }
  }

  void parse_factor() {
    const Token& t = peek();
    if (t.kind == TokenKind::Number || t.kind == TokenKind::String) {
      advance();
      return;
    }
    if (t.kind == TokenKind::Keyword &&
        (t.text == "True" || t.text == "False" || t.text == "None")) {
      advance();
      return;
    }
    if (t.kind == TokenKind::Operator && t.text == "-") {
      advance();
      parse_factor();
      return;
    }
    if (t.kind == TokenKind::Punct && t.text == "(") {
      advance();
      parse_comparison();
      expect(TokenKind::Punct, ")", "')'");
      return;
    }
    if (t.kind == TokenKind::Punct && t.text == "[") {
      advance();
      if (!check(TokenKind::Punct, "]")) {
        parse_comparison();
        while (check(TokenKind::Punct, ",")) {
          advance();
          parse_comparison();
        }
      }
      expect(TokenKind::Punct, "]", "']'");
      return;
    }
    if (t.kind == TokenKind::Identifier) {
      advance();
      parse_postfix();
      return;
    }
    fail(t, "expected an expression");
  }

  void parse_postfix() {
    for (;;) {
      if (check(TokenKind::Punct, ".")) {
        advance();
        expect(TokenKind::Identifier, {}, "attribute name after '.'");
        continue;
      }
      if (check(TokenKind::Punct, "(")) {
        advance();
        if (!check(TokenKind::Punct, ")")) {
          parse_comparison();
          while (check(TokenKind::Punct, ",")) {
            advance();
            parse_comparison();
          }
        }
        expect(TokenKind::Punct, ")", "')'");
        continue;
      }
      if (check(TokenKind::Punct, "[")) {
        advance();
        parse_comparison();
        expect(TokenKind::Punct, "]", "']'");
        continue;
      }
      return;
    }
  }
};

}  // namespace

Block parse(std::string_view source) {
  Parser parser(tokenize(source));
  return parser.parse_program();
}

CompileVerdict validate(std::string_view source) {
  try {
    parse(source);
    return {true, std::nullopt};
  } catch (const LexError& e) {
    return {false, CompileError{e.line, e.column, e.message}};
  } catch (const ParseError& e) {
    return {false, CompileError{e.line, e.column, e.message}};
  }
}

// ---------------------------------------------------------------------------
// Vocabulary

TokenVocab::Id TokenVocab::intern(const std::string& text) {
  auto it = map_.find(text);
  if (it != map_.end()) {
    return it->second;
  }
  if (frozen_) {
    throw std::invalid_argument("vocabulary is frozen; encode with frozen=true");
  }
  const Id id = next_id_++;
  map_.emplace(text, id);
  return id;
}

std::optional<TokenVocab::Id> TokenVocab::lookup(const std::string& text) const {
  auto it = map_.find(text);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void TokenVocab::freeze() {
  if (frozen_) return;
  intern(kUnkText);
  frozen_ = true;
}

TokenVocab::Id TokenVocab::unk_id() const {
  auto it = map_.find(kUnkText);
  if (it == map_.end()) {
    throw std::logic_error("vocabulary has no UNK id; freeze() it first");
  }
  return it->second;
}

std::vector<std::string> TokenVocab::id_to_text() const {
  std::vector<std::string> table(static_cast<std::size_t>(next_id_));
  for (const auto& [text, id] : map_) {
    table[static_cast<std::size_t>(id)] = text;
  }
  return table;
}

std::vector<TokenVocab::Id> encode(const std::vector<Token>& tokens, TokenVocab& vocab,
                                   bool frozen) {
  if (frozen && !vocab.frozen()) {
    throw std::invalid_argument("encode(frozen=true) requires a frozen vocabulary");
  }
  std::vector<TokenVocab::Id> ids;
  ids.reserve(tokens.size());
  for (const Token& t : tokens) {
    if (frozen) {
      const auto id = vocab.lookup(t.text);
      ids.push_back(id ? *id : vocab.unk_id());
    } else {
      ids.push_back(vocab.intern(t.text));
    }
  }
  return ids;
}

void save_vocab(const TokenVocab& vocab, const std::filesystem::path& path) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [text, id] : vocab.entries()) {
    j[text] = id;
  }
  util::write_text_file(path, j.dump(2) + "\n");
}

TokenVocab load_vocab(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(util::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("vocabulary file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw std::runtime_error("vocabulary file " + path.string() + ": expected a JSON object");
  }
  TokenVocab vocab;
  std::vector<std::string> by_id(j.size() + 1);
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
      throw std::runtime_error("vocabulary key \"" + key + "\": id must be a positive integer");
    }
    const auto id = value.get<std::int64_t>();
    if (id > static_cast<std::int64_t>(j.size())) {
      throw std::runtime_error("vocabulary key \"" + key + "\": id " + std::to_string(id) +
                               " breaks the contiguous range 1.." + std::to_string(j.size()));
    }
    if (!by_id[static_cast<std::size_t>(id)].empty()) {
      throw std::runtime_error("vocabulary key \"" + key + "\": duplicate id " +
                               std::to_string(id));
    }
    by_id[static_cast<std::size_t>(id)] = key;
    vocab.map_.emplace(key, static_cast<TokenVocab::Id>(id));
  }
  vocab.next_id_ = static_cast<TokenVocab::Id>(j.size() + 1);
  vocab.frozen_ = vocab.map_.count(TokenVocab::kUnkText) > 0;
  return vocab;
}

}  // namespace loopsight::lang
