#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "rti/term.hpp"

namespace rti {

// ---------------------------------------------------------------------------
// Parser for the pure clause subset: facts and rules over atoms, variables,
// compound terms and list sugar. `%` starts a line comment. A double-quoted
// string abbreviates the list of its one-character constants. The only
// directive accepted is `:- entry p(...).` which declares the call pattern
// used by check mode.
// ---------------------------------------------------------------------------

namespace detail {

enum class TokKind {
  AtomName,
  Variable,
  Integer,
  String,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Bar,
  Dot,
  Neck, // ":-"
  End
};

struct Token {
  TokKind kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skipLayout();
    int line = line_, col = col_;
    if (pos_ >= src_.size()) return {TokKind::End, "", line, col};
    char c = src_[pos_];
    if (c == '(') return take(TokKind::LParen, 1, line, col);
    if (c == ')') return take(TokKind::RParen, 1, line, col);
    if (c == '[') return take(TokKind::LBracket, 1, line, col);
    if (c == ']') return take(TokKind::RBracket, 1, line, col);
    if (c == ',') return take(TokKind::Comma, 1, line, col);
    if (c == '|') return take(TokKind::Bar, 1, line, col);
    if (c == '.') return take(TokKind::Dot, 1, line, col);
    if (c == ':' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-')
      return take(TokKind::Neck, 2, line, col);
    if (c == '"') return stringToken(line, col);
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string text;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        text += src_[pos_];
        advance();
      }
      return {TokKind::Integer, text, line, col};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string text;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        text += src_[pos_];
        advance();
      }
      bool isVar = std::isupper(static_cast<unsigned char>(text[0])) || text[0] == '_';
      return {isVar ? TokKind::Variable : TokKind::AtomName, text, line, col};
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }

private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skipLayout() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token take(TokKind k, int len, int line, int col) {
    std::string text = src_.substr(pos_, len);
    for (int i = 0; i < len; ++i) advance();
    return {k, text, line, col};
  }

  Token stringToken(int line, int col) {
    advance(); // opening quote
    std::string text;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\n') throw ParseError("unterminated string", line, col);
      text += src_[pos_];
      advance();
    }
    if (pos_ >= src_.size()) throw ParseError("unterminated string", line, col);
    advance(); // closing quote
    return {TokKind::String, text, line, col};
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(const std::string& src) : lexer_(src) { shift(); }

  Program parseProgram() {
    Program prog;
    while (tok_.kind != TokKind::End) {
      if (tok_.kind == TokKind::Neck) {
        parseDirective(prog);
        continue;
      }
      prog.clauses.push_back(parseClause());
    }
    return prog;
  }

private:
  void shift() { tok_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, tok_.line, tok_.column); }

  void expect(TokKind k, const char* what) {
    if (tok_.kind != k) fail(std::string("expected ") + what);
    shift();
  }

  void parseDirective(Program& prog) {
    shift(); // ":-"
    if (tok_.kind != TokKind::AtomName) fail("expected directive name");
    std::string name = tok_.text;
    if (name != "entry") fail("unsupported directive ':- " + name + "'");
    shift();
    Atom a = parseAtom();
    expect(TokKind::Dot, "'.'");
    if (prog.entry) fail("duplicate ':- entry' directive");
    prog.entry = std::move(a);
  }

  Clause parseClause() {
    Clause clause;
    clause.head = parseAtom();
    if (tok_.kind == TokKind::Neck) {
      shift();
      clause.body.push_back(parseAtom());
      while (tok_.kind == TokKind::Comma) {
        shift();
        clause.body.push_back(parseAtom());
      }
    }
    expect(TokKind::Dot, "'.'");
    return clause;
  }

  Atom parseAtom() {
    if (tok_.kind != TokKind::AtomName) fail("expected predicate name");
    Atom atom;
    atom.predicate = tok_.text;
    shift();
    if (tok_.kind == TokKind::LParen) {
      shift();
      atom.args.push_back(parseTerm());
      while (tok_.kind == TokKind::Comma) {
        shift();
        atom.args.push_back(parseTerm());
      }
      expect(TokKind::RParen, "')'");
    }
    return atom;
  }

  TermPtr parseTerm() {
    switch (tok_.kind) {
      case TokKind::Variable: {
        std::string name = tok_.text;
        shift();
        if (name == "_") name = "_G" + std::to_string(++anonCounter_);
        return Term::variable(name);
      }
      case TokKind::Integer: {
        std::string name = tok_.text;
        shift();
        return Term::compound(name);
      }
      case TokKind::String: {
        std::vector<TermPtr> items;
        for (char c : tok_.text) items.push_back(Term::compound(std::string(1, c)));
        shift();
        return Term::list(items);
      }
      case TokKind::LBracket:
        return parseList();
      case TokKind::AtomName: {
        std::string functor = tok_.text;
        shift();
        std::vector<TermPtr> args;
        if (tok_.kind == TokKind::LParen) {
          shift();
          args.push_back(parseTerm());
          while (tok_.kind == TokKind::Comma) {
            shift();
            args.push_back(parseTerm());
          }
          expect(TokKind::RParen, "')'");
        }
        return Term::compound(functor, std::move(args));
      }
      default:
        fail("expected term");
    }
  }

  TermPtr parseList() {
    shift(); // "["
    if (tok_.kind == TokKind::RBracket) {
      shift();
      return Term::nil();
    }
    std::vector<TermPtr> items;
    items.push_back(parseTerm());
    while (tok_.kind == TokKind::Comma) {
      shift();
      items.push_back(parseTerm());
    }
    TermPtr tail = Term::nil();
    if (tok_.kind == TokKind::Bar) {
      shift();
      tail = parseTerm();
    }
    expect(TokKind::RBracket, "']'");
    for (auto it = items.rbegin(); it != items.rend(); ++it) tail = Term::cons(*it, tail);
    return tail;
  }

  Lexer lexer_;
  Token tok_{TokKind::End, "", 0, 0};
  int anonCounter_ = 0;
};

} // namespace detail

/// Parses a program from source text. Throws ParseError on invalid input.
inline Program parseProgram(const std::string& text) {
  return detail::Parser(text).parseProgram();
}

/// Parses a single atom, e.g. a query like "append(A,a,A)".
inline Atom parseAtomText(const std::string& text) {
  std::string clause = text;
  if (clause.find('.') == std::string::npos) clause += ".";
  Program p = parseProgram(clause);
  if (p.clauses.size() != 1 || !p.clauses[0].body.empty())
    throw ParseError("expected a single atom", 1, 1);
  return p.clauses[0].head;
}

} // namespace rti
