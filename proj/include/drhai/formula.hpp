#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace drhai {

enum class Connective : std::uint8_t { Atom, Not, And, Or, Implies, Iff };

/// Immutable propositional formula. Copies share structure. Equality and
/// ordering are purely syntactic: `a & b` and `b & a` are different formulas.
class Formula {
 public:
  static Formula atom(std::string name);
  static Formula negation(Formula child);
  static Formula conjunction(Formula left, Formula right);
  static Formula disjunction(Formula left, Formula right);
  static Formula implication(Formula left, Formula right);
  static Formula equivalence(Formula left, Formula right);

  Connective kind() const;
  bool is_atom() const { return kind() == Connective::Atom; }
  /// Atom or negated atom.
  bool is_literal() const;

  const std::string& name() const;  // atoms only
  const Formula& child() const;     // Not only
  const Formula& left() const;      // binary connectives only
  const Formula& right() const;

  std::size_t hash() const;
  std::size_t size() const;  // node count

  friend bool operator==(const Formula& a, const Formula& b);
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// The complement used when opposing a formula: `!x` for `x`, and `x` for
/// `!x` (one negation is stripped rather than stacked).
Formula complement(const Formula& f);

/// Atom names occurring in `f`, sorted.
std::set<std::string> atoms_of(const Formula& f);

/// Truth value of `f` under `assignment` (atom name -> value). Missing atoms
/// are false.
bool evaluate(const Formula& f,
              const std::function<bool(const std::string&)>& assignment);

bool is_valid_atom_name(std::string_view name);

/// Parses one line of formula syntax. Precedence, tightest first:
/// `!`, `&`, `|`, `->` (right-assoc), `<->` (right-assoc). `&` and `|` are
/// left-assoc. Throws ParseError with a 1-based column on malformed input.
Formula parse_formula(std::string_view text, std::size_t line = 1);

/// Minimal-parentheses rendering; parse_formula(format_formula(f)) == f.
std::string format_formula(const Formula& f);

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

/// Ordered, duplicate-free formula collection with stable indices.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::string label) : label_(std::move(label)) {}
  KnowledgeBase(std::string label, const std::vector<Formula>& formulas);

  const std::string& label() const { return label_; }
  const std::vector<Formula>& formulas() const { return formulas_; }
  std::size_t size() const { return formulas_.size(); }
  bool empty() const { return formulas_.empty(); }
  const Formula& operator[](std::size_t i) const { return formulas_[i]; }
  auto begin() const { return formulas_.begin(); }
  auto end() const { return formulas_.end(); }

  bool contains(const Formula& f) const { return index_.contains(f); }
  std::optional<std::size_t> index_of(const Formula& f) const;

  /// Appends `f`; returns its index, or nullopt if already present.
  std::optional<std::size_t> add(const Formula& f);

  std::set<std::string> atoms() const;

 private:
  std::string label_;
  std::vector<Formula> formulas_;
  std::unordered_map<Formula, std::size_t, FormulaHash> index_;
};

/// Parses a `.kb` document: one formula per line, `#` comments, blank lines
/// skipped. Duplicates raise DuplicateFormulaError citing both lines.
KnowledgeBase load_kb(std::string_view text, std::string label = {});
KnowledgeBase load_kb_file(const std::string& path, std::string label = {});
std::string format_kb(const KnowledgeBase& kb);

}  // namespace drhai

template <>
struct std::hash<drhai::Formula> {
  std::size_t operator()(const drhai::Formula& f) const { return f.hash(); }
};
