#pragma once

// Signatures, terms, the instance file grammar, and flattening of nested terms
// into atomic constraints.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "eqcsp/error.hpp"

namespace eqcsp {

enum class SignatureKind { group, semilattice };

inline std::string_view to_string(SignatureKind kind) {
  return kind == SignatureKind::group ? "group" : "semilattice";
}

struct Term;
using TermPtr = std::shared_ptr<const Term>;

/// Immutable binary term tree.  Group terms use Zero/Sum/Negation, semilattice
/// terms use Meet; Variable is shared by both.
struct Term {
  enum class Kind { variable, zero, sum, negation, meet };

  Kind kind;
  std::string name;  // variable name, empty otherwise
  TermPtr lhs;
  TermPtr rhs;

  static TermPtr variable(std::string name) {
    return std::make_shared<const Term>(Term{Kind::variable, std::move(name), nullptr, nullptr});
  }
  static TermPtr zero() { return std::make_shared<const Term>(Term{Kind::zero, {}, nullptr, nullptr}); }
  static TermPtr sum(TermPtr a, TermPtr b) {
    return std::make_shared<const Term>(Term{Kind::sum, {}, std::move(a), std::move(b)});
  }
  static TermPtr negation(TermPtr a) {
    return std::make_shared<const Term>(Term{Kind::negation, {}, std::move(a), nullptr});
  }
  static TermPtr meet(TermPtr a, TermPtr b) {
    return std::make_shared<const Term>(Term{Kind::meet, {}, std::move(a), std::move(b)});
  }

  std::size_t node_count() const {
    return 1 + (lhs ? lhs->node_count() : 0) + (rhs ? rhs->node_count() : 0);
  }
};

inline bool operator==(const Term& a, const Term& b) {
  if (a.kind != b.kind || a.name != b.name) return false;
  auto same = [](const TermPtr& x, const TermPtr& y) {
    if (!x || !y) return !x && !y;
    return *x == *y;
  };
  return same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
}

inline bool belongs_to(Term::Kind kind, SignatureKind sig) {
  switch (kind) {
    case Term::Kind::variable:
      return true;
    case Term::Kind::zero:
    case Term::Kind::sum:
    case Term::Kind::negation:
      return sig == SignatureKind::group;
    case Term::Kind::meet:
      return sig == SignatureKind::semilattice;
  }
  return false;
}

inline std::string to_string(const Term& t) {
  switch (t.kind) {
    case Term::Kind::variable:
      return t.name;
    case Term::Kind::zero:
      return "0";
    case Term::Kind::sum:
      return "(+ " + to_string(*t.lhs) + " " + to_string(*t.rhs) + ")";
    case Term::Kind::negation:
      return "(- " + to_string(*t.lhs) + ")";
    case Term::Kind::meet:
      return "(meet " + to_string(*t.lhs) + " " + to_string(*t.rhs) + ")";
  }
  return {};
}

inline bool in_signature(const Term& t, SignatureKind sig) {
  if (!belongs_to(t.kind, sig)) return false;
  return (!t.lhs || in_signature(*t.lhs, sig)) && (!t.rhs || in_signature(*t.rhs, sig));
}

/// Variables of a term in order of first (left-to-right) occurrence.
inline void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.kind == Term::Kind::variable) {
    if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
    return;
  }
  if (t.lhs) collect_variables(*t.lhs, out);
  if (t.rhs) collect_variables(*t.rhs, out);
}

struct Constraint {
  enum class Relation { eq, neq };
  Relation relation;
  TermPtr lhs;
  TermPtr rhs;
};

inline bool operator==(const Constraint& a, const Constraint& b) {
  return a.relation == b.relation && *a.lhs == *b.lhs && *a.rhs == *b.rhs;
}

struct Instance {
  SignatureKind kind = SignatureKind::group;
  std::vector<std::string> variables;
  std::vector<Constraint> constraints;

  std::size_t term_size() const {
    std::size_t n = 0;
    for (const auto& c : constraints) n += c.lhs->node_count() + c.rhs->node_count();
    return n;
  }
};

inline bool operator==(const Instance& a, const Instance& b) {
  return a.kind == b.kind && a.variables == b.variables && a.constraints == b.constraints;
}

inline bool is_valid_name(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      tokens.push_back({std::string(1, c), i + 1});
      ++i;
    } else {
      std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '(' &&
             line[i] != ')')
        ++i;
      tokens.push_back({std::string(line.substr(start, i - start)), start + 1});
    }
  }
  return tokens;
}

/// Recursive-descent reader for one term out of a token stream.
class TermReader {
 public:
  using VariableCheck = std::function<void(const Token&)>;

  TermReader(const std::vector<Token>& tokens, std::size_t line, std::size_t end_column,
             SignatureKind kind, VariableCheck check)
      : tokens_(tokens), line_(line), end_column_(end_column), kind_(kind), check_(std::move(check)) {}

  TermPtr read(std::size_t& pos) const {
    if (pos >= tokens_.size()) fail("expected a term", end_column_);
    const Token& tok = tokens_[pos];
    if (tok.text == ")") fail("unexpected ')'", tok.column);
    if (tok.text != "(") {
      ++pos;
      if (tok.text == "0") {
        require_kind(Term::Kind::zero, "0", tok.column);
        return Term::zero();
      }
      if (!tok.text.empty() && tok.text.front() == '_')
        fail("names starting with '_' are reserved: " + tok.text, tok.column);
      if (!is_valid_name(tok.text)) fail("invalid name: " + tok.text, tok.column);
      if (check_) check_(tok);
      return Term::variable(tok.text);
    }
    const std::size_t open_column = tok.column;
    ++pos;
    if (pos >= tokens_.size()) fail("expected an operation after '('", end_column_);
    const Token& op = tokens_[pos++];
    Term::Kind kind;
    std::size_t arity;
    if (op.text == "+") {
      kind = Term::Kind::sum;
      arity = 2;
    } else if (op.text == "-") {
      kind = Term::Kind::negation;
      arity = 1;
    } else if (op.text == "meet") {
      kind = Term::Kind::meet;
      arity = 2;
    } else {
      fail("unknown operation: " + op.text, op.column);
    }
    require_kind(kind, op.text, op.column);
    std::vector<TermPtr> args;
    while (pos < tokens_.size() && tokens_[pos].text != ")") args.push_back(read(pos));
    if (pos >= tokens_.size()) fail("unbalanced '(' opened here", open_column);
    ++pos;  // ')'
    if (args.size() != arity)
      fail("arity mismatch: '" + op.text + "' takes " + std::to_string(arity) + " argument(s), got " +
               std::to_string(args.size()),
           op.column);
    switch (kind) {
      case Term::Kind::sum:
        return Term::sum(args[0], args[1]);
      case Term::Kind::negation:
        return Term::negation(args[0]);
      default:
        return Term::meet(args[0], args[1]);
    }
  }

  [[noreturn]] void fail(const std::string& message, std::size_t column) const {
    throw ParseError(message, line_, column);
  }

 private:
  void require_kind(Term::Kind kind, const std::string& symbol, std::size_t column) const {
    if (!belongs_to(kind, kind_))
      fail("operation not in signature " + std::string(to_string(kind_)) + ": " + symbol, column);
  }

  const std::vector<Token>& tokens_;
  std::size_t line_;
  std::size_t end_column_;
  SignatureKind kind_;
  VariableCheck check_;
};

inline std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace detail

/// Parses a standalone term (e.g. a command-line argument).  Variables need not
/// be declared.
inline TermPtr parse_term(std::string_view text, SignatureKind kind) {
  auto tokens = detail::tokenize(text);
  detail::TermReader reader(tokens, 1, text.size() + 1, kind, nullptr);
  std::size_t pos = 0;
  TermPtr t = reader.read(pos);
  if (pos != tokens.size()) reader.fail("trailing input after term", tokens[pos].column);
  return t;
}

/// Parses the line-based instance format:
///
///     structure (group|semilattice)
///     var <name> [<name> ...]
///     eq  <term> <term>
///     neq <term> <term>
inline Instance parse_instance(std::string_view text) {
  Instance inst;
  bool have_structure = false;
  std::set<std::string> declared;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = detail::strip_comment(raw);
    auto tokens = detail::tokenize(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const detail::Token& head = tokens.front();
    auto fail = [&](const std::string& message, std::size_t column) -> void {
      throw ParseError(message, line_no, column);
    };
    if (head.text == "structure") {
      if (have_structure) fail("duplicate structure line", head.column);
      if (tokens.size() != 2) fail("expected 'structure group' or 'structure semilattice'", head.column);
      if (tokens[1].text == "group")
        inst.kind = SignatureKind::group;
      else if (tokens[1].text == "semilattice")
        inst.kind = SignatureKind::semilattice;
      else
        fail("unknown structure kind: " + tokens[1].text, tokens[1].column);
      have_structure = true;
    } else if (!have_structure) {
      fail("expected a structure line first", head.column);
    } else if (head.text == "var") {
      if (tokens.size() < 2) fail("'var' needs at least one name", head.column);
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto& name = tokens[i].text;
        if (!name.empty() && name.front() == '_')
          fail("names starting with '_' are reserved: " + name, tokens[i].column);
        if (!is_valid_name(name)) fail("invalid name: " + name, tokens[i].column);
        if (!declared.insert(name).second) fail("duplicate variable: " + name, tokens[i].column);
        inst.variables.push_back(name);
      }
    } else if (head.text == "eq" || head.text == "neq") {
      detail::TermReader reader(tokens, line_no, line.size() + 1, inst.kind, [&](const detail::Token& tok) {
        if (!declared.count(tok.text)) throw ParseError("undeclared variable: " + tok.text, line_no, tok.column);
      });
      std::size_t pos = 1;
      TermPtr lhs = reader.read(pos);
      TermPtr rhs = reader.read(pos);
      if (pos != tokens.size()) fail("trailing input after constraint", tokens[pos].column);
      inst.constraints.push_back(
          {head.text == "eq" ? Constraint::Relation::eq : Constraint::Relation::neq, std::move(lhs), std::move(rhs)});
    } else {
      fail("unknown directive: " + head.text, head.column);
    }
    if (end == text.size()) break;
  }
  if (!have_structure) throw ParseError("missing structure line", line_no == 0 ? 1 : line_no, 1);
  return inst;
}

inline std::string print_instance(const Instance& inst) {
  std::ostringstream out;
  out << "structure " << to_string(inst.kind) << '\n';
  if (!inst.variables.empty()) {
    out << "var";
    for (const auto& v : inst.variables) out << ' ' << v;
    out << '\n';
  }
  for (const auto& c : inst.constraints)
    out << (c.relation == Constraint::Relation::eq ? "eq " : "neq ") << to_string(*c.lhs) << ' '
        << to_string(*c.rhs) << '\n';
  return out.str();
}

/// The instance equations & lhs != rhs, over the variables of all terms in
/// order of first occurrence.  Its unsatisfiability is entailment (identity
/// checking when there are no equations).
inline Instance entailment_instance(SignatureKind kind, const std::vector<std::pair<TermPtr, TermPtr>>& equations,
                                    const TermPtr& lhs, const TermPtr& rhs) {
  Instance inst;
  inst.kind = kind;
  std::vector<std::string> names;
  for (const auto& [s, t] : equations) {
    collect_variables(*s, names);
    collect_variables(*t, names);
    inst.constraints.push_back({Constraint::Relation::eq, s, t});
  }
  collect_variables(*lhs, names);
  collect_variables(*rhs, names);
  inst.constraints.push_back({Constraint::Relation::neq, lhs, rhs});
  for (auto& n : names)
    if (std::find(inst.variables.begin(), inst.variables.end(), n) == inst.variables.end())
      inst.variables.push_back(std::move(n));
  for (const auto& c : inst.constraints)
    if (!in_signature(*c.lhs, kind) || !in_signature(*c.rhs, kind))
      throw InputError("operation not in signature " + std::string(to_string(kind)));
  return inst;
}

// ---------------------------------------------------------------------------
// Flattening

using VarIndex = std::size_t;

enum class Operation { add, negate, zero, meet };

constexpr std::size_t arity(Operation op) {
  switch (op) {
    case Operation::add:
    case Operation::meet:
      return 2;
    case Operation::negate:
      return 1;
    case Operation::zero:
      return 0;
  }
  return 0;
}

/// result = op(args[0..arity))
struct GraphAtom {
  VarIndex result;
  Operation op;
  std::array<VarIndex, 2> args{};
};

struct VarEq {
  VarIndex lhs;
  VarIndex rhs;
};

struct VarNeq {
  VarIndex lhs;
  VarIndex rhs;
};

using FlatAtom = std::variant<GraphAtom, VarEq, VarNeq>;

struct FlatInstance {
  SignatureKind kind = SignatureKind::group;
  std::vector<std::string> variables;  // original variables first, then fresh ones
  std::size_t original_count = 0;
  std::vector<FlatAtom> atoms;
  std::map<std::string, TermPtr> provenance;  // fresh variable -> subterm it names

  std::size_t add_variable(std::string name) {
    variables.push_back(std::move(name));
    return variables.size() - 1;
  }

  std::optional<VarIndex> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i] == name) return i;
    return std::nullopt;
  }

  std::size_t disequality_count() const {
    return static_cast<std::size_t>(
        std::count_if(atoms.begin(), atoms.end(), [](const FlatAtom& a) { return std::holds_alternative<VarNeq>(a); }));
  }
};

/// Replaces every non-variable subterm by a fresh variable `_tN` (N counting
/// from 1 in post-order, left operand first) defined by a graph atom.
inline FlatInstance flatten(const Instance& inst) {
  FlatInstance flat;
  flat.kind = inst.kind;
  flat.variables = inst.variables;
  flat.original_count = inst.variables.size();
  std::unordered_map<std::string, VarIndex> index;
  for (std::size_t i = 0; i < inst.variables.size(); ++i) index.emplace(inst.variables[i], i);
  std::size_t counter = 0;

  std::function<VarIndex(const TermPtr&)> visit = [&](const TermPtr& t) -> VarIndex {
    if (t->kind == Term::Kind::variable) {
      auto it = index.find(t->name);
      if (it == index.end()) throw InputError("undeclared variable: " + t->name);
      return it->second;
    }
    GraphAtom atom{};
    switch (t->kind) {
      case Term::Kind::zero:
        atom.op = Operation::zero;
        break;
      case Term::Kind::sum:
        atom.op = Operation::add;
        atom.args[0] = visit(t->lhs);
        atom.args[1] = visit(t->rhs);
        break;
      case Term::Kind::negation:
        atom.op = Operation::negate;
        atom.args[0] = visit(t->lhs);
        break;
      case Term::Kind::meet:
        atom.op = Operation::meet;
        atom.args[0] = visit(t->lhs);
        atom.args[1] = visit(t->rhs);
        break;
      case Term::Kind::variable:
        break;
    }
    std::string name = "_t" + std::to_string(++counter);
    atom.result = flat.add_variable(name);
    flat.provenance.emplace(std::move(name), t);
    flat.atoms.emplace_back(atom);
    return atom.result;
  };

  for (const auto& c : inst.constraints) {
    if (!in_signature(*c.lhs, inst.kind) || !in_signature(*c.rhs, inst.kind))
      throw InputError("operation not in signature " + std::string(to_string(inst.kind)));
    VarIndex l = visit(c.lhs);
    VarIndex r = visit(c.rhs);
    if (c.relation == Constraint::Relation::eq)
      flat.atoms.emplace_back(VarEq{l, r});
    else
      flat.atoms.emplace_back(VarNeq{l, r});
  }
  return flat;
}

// ---------------------------------------------------------------------------
// Linearization of group instances

struct Coefficient {
  VarIndex var;
  std::int64_t value;
  friend bool operator==(const Coefficient&, const Coefficient&) = default;
};

/// Homogeneous integer row: sum of value * var = 0.  Sorted by variable,
/// no zero coefficients.
using LinearRow = std::vector<Coefficient>;

/// Equations as integer rows plus disequality pairs over a flat group instance.
struct AbelianInstance {
  std::vector<std::string> variables;
  std::size_t original_count = 0;
  std::vector<LinearRow> rows;
  std::vector<std::pair<VarIndex, VarIndex>> disequalities;

  std::size_t variable_count() const { return variables.size(); }
};

namespace detail {

inline LinearRow make_row(std::vector<Coefficient> terms) {
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.var < b.var; });
  LinearRow row;
  for (const auto& t : terms) {
    if (!row.empty() && row.back().var == t.var)
      row.back().value += t.value;
    else
      row.push_back(t);
  }
  row.erase(std::remove_if(row.begin(), row.end(), [](const Coefficient& c) { return c.value == 0; }), row.end());
  return row;
}

}  // namespace detail

/// One row per graph atom and per variable equality, in atom order; the
/// disequalities are passed through unchanged.
inline AbelianInstance linearize_group(const FlatInstance& flat) {
  if (flat.kind != SignatureKind::group) throw InputError("linearize_group needs a group instance");
  AbelianInstance out;
  out.variables = flat.variables;
  out.original_count = flat.original_count;
  for (const auto& atom : flat.atoms) {
    if (const auto* g = std::get_if<GraphAtom>(&atom)) {
      switch (g->op) {
        case Operation::add:
          out.rows.push_back(detail::make_row({{g->args[0], 1}, {g->args[1], 1}, {g->result, -1}}));
          break;
        case Operation::negate:
          out.rows.push_back(detail::make_row({{g->args[0], -1}, {g->result, -1}}));
          break;
        case Operation::zero:
          out.rows.push_back(detail::make_row({{g->result, 1}}));
          break;
        case Operation::meet:
          throw InputError("meet is not a group operation");
      }
    } else if (const auto* e = std::get_if<VarEq>(&atom)) {
      out.rows.push_back(detail::make_row({{e->lhs, 1}, {e->rhs, -1}}));
    } else {
      const auto& n = std::get<VarNeq>(atom);
      out.disequalities.emplace_back(n.lhs, n.rhs);
    }
  }
  return out;
}

}  // namespace eqcsp
