#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Lexer, recursive-descent parser and token vocabulary for the restricted
// Python-like grammar emitted by the code generator. The grammar is
// line-oriented: every statement fits on one physical line and blocks are
// formed by indentation, so there is no implicit line joining.

namespace loopsight::lang {

enum class TokenKind {
  Keyword,
  Identifier,
  Number,
  String,
  Operator,
  Punct,
  Indent,
  Dedent,
  Newline,
};

struct Token {
  TokenKind kind;
  std::string text;
  int line = 0;    // 1-based
  int column = 0;  // 1-based
};

inline constexpr const char* kNewlineText = "<NEWLINE>";
inline constexpr const char* kIndentText = "<INDENT>";
inline constexpr const char* kDedentText = "<DEDENT>";

struct LexError : std::runtime_error {
  LexError(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + message),
        line(line),
        column(column),
        message(message) {}
  int line;
  int column;
  std::string message;
};

// Indentation-aware lexing of a full source text. Comments and blank lines
// are dropped; logical lines end with a Newline token; indentation changes
// emit Indent/Dedent. Throws LexError.
std::vector<Token> tokenize(std::string_view source);

// Lenient single-line scan without indentation handling. Returns the tokens
// that lex cleanly; stops at the first offending character. Used for
// token-level feature counting on possibly broken sources.
std::vector<Token> scan_line(std::string_view line, int lineno = 1);

// Canonical text for a token stream: four spaces per indent level, token
// texts joined by single spaces. Re-tokenizing the result reproduces the
// stream (kinds and texts).
std::string render(const std::vector<Token>& tokens);

// ---------------------------------------------------------------------------
// Statement tree (used by validate and by the loop-reuse analyzer)

struct Stmt;
struct Block {
  std::vector<Stmt> stmts;
};

struct ImportStmt {
  Token module;
};
struct AssignStmt {
  Token target;
  bool subscripted = false;
  std::vector<Token> index;  // tokens of the subscript expression, if any
  std::vector<Token> rhs;
};
struct ExprStmt {
  std::vector<Token> expr;
};
struct ReturnStmt {
  std::vector<Token> expr;  // may be empty
};
struct DefStmt {
  Token name;
  std::vector<Token> params;
  Block body;
};
struct IfStmt {
  std::vector<Token> cond;
  Block then_body;
  std::optional<Block> else_body;
};
struct ForStmt {
  Token var;
  std::vector<Token> iterable;
  Block body;
  std::optional<Block> else_body;
};

struct Stmt {
  std::variant<ImportStmt, AssignStmt, ExprStmt, ReturnStmt, DefStmt, IfStmt, ForStmt> node;
  int line = 0;
};

struct ParseError : std::runtime_error {
  ParseError(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + message),
        line(line),
        column(column),
        message(message) {}
  int line;
  int column;
  std::string message;
};

// Full parse of the restricted grammar. Throws LexError or ParseError.
Block parse(std::string_view source);

struct CompileError {
  int line = 0;
  int column = 0;
  std::string message;
};

struct CompileVerdict {
  bool ok = false;
  std::optional<CompileError> error;
};

// Parse validity as a verdict instead of an exception.
CompileVerdict validate(std::string_view source);

// ---------------------------------------------------------------------------
// Token vocabulary

class TokenVocab {
 public:
  using Id = std::int32_t;
  static constexpr Id kPadId = 0;  // reserved, never mapped
  static constexpr const char* kUnkText = "<unk>";

  // Existing id or a freshly assigned one. Refuses to grow when frozen.
  Id intern(const std::string& text);
  std::optional<Id> lookup(const std::string& text) const;

  Id next_id() const { return next_id_; }
  std::size_t size() const { return map_.size(); }

  bool frozen() const { return frozen_; }
  // Allocates the UNK id (if absent) and stops growth.
  void freeze();
  Id unk_id() const;

  // text -> id, sorted by text (stable save order).
  const std::map<std::string, Id>& entries() const { return map_; }

  // Inverse mapping; ids are contiguous from 1 so this is a dense table.
  std::vector<std::string> id_to_text() const;

  bool operator==(const TokenVocab& other) const {
    return map_ == other.map_ && next_id_ == other.next_id_;
  }

 private:
  friend TokenVocab load_vocab(const std::filesystem::path& path);
  std::map<std::string, Id> map_;
  Id next_id_ = 1;
  bool frozen_ = false;
};

// Token texts mapped through the vocabulary. Unfrozen: unseen texts are
// interned. Frozen: unseen texts map to the UNK id.
std::vector<TokenVocab::Id> encode(const std::vector<Token>& tokens, TokenVocab& vocab,
                                   bool frozen);

// JSON object {"token": id, ...}, UTF-8, ids positive and contiguous from 1.
void save_vocab(const TokenVocab& vocab, const std::filesystem::path& path);
TokenVocab load_vocab(const std::filesystem::path& path);

}  // namespace loopsight::lang
