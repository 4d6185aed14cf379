#include "drhai/formula.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "drhai/errors.hpp"

namespace drhai {

struct Formula::Node {
  Connective kind;
  std::string name;
  std::optional<Formula> left;   // also the child of Not
  std::optional<Formula> right;
  std::size_t hash = 0;
  std::size_t size = 1;
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

bool is_valid_atom_name(std::string_view name) {
  if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) return false;
  for (char ch : name) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) return false;
  }
  return true;
}

Formula Formula::atom(std::string name) {
  if (!is_valid_atom_name(name)) {
    throw std::invalid_argument("invalid atom name '" + name + "'");
  }
  auto node = std::make_shared<Node>();
  node->kind = Connective::Atom;
  node->hash = mix(0, std::hash<std::string>{}(name));
  node->name = std::move(name);
  return Formula(std::move(node));
}

Formula Formula::negation(Formula child) {
  auto node = std::make_shared<Node>();
  node->kind = Connective::Not;
  node->hash = mix(static_cast<std::size_t>(Connective::Not), child.hash());
  node->size = child.size() + 1;
  node->left = std::move(child);
  return Formula(std::move(node));
}

#define DRHAI_BINARY_CTOR(fn, conn)                                    \
  Formula Formula::fn(Formula left, Formula right) {                   \
    auto node = std::make_shared<Node>();                              \
    node->kind = Connective::conn;                                     \
    node->hash = mix(mix(static_cast<std::size_t>(Connective::conn),   \
                         left.hash()),                                 \
                     right.hash());                                    \
    node->size = left.size() + right.size() + 1;                       \
    node->left = std::move(left);                                      \
    node->right = std::move(right);                                    \
    return Formula(std::move(node));                                   \
  }

DRHAI_BINARY_CTOR(conjunction, And)
DRHAI_BINARY_CTOR(disjunction, Or)
DRHAI_BINARY_CTOR(implication, Implies)
DRHAI_BINARY_CTOR(equivalence, Iff)

#undef DRHAI_BINARY_CTOR

Connective Formula::kind() const { return node_->kind; }

bool Formula::is_literal() const {
  return kind() == Connective::Atom ||
         (kind() == Connective::Not && child().is_atom());
}

const std::string& Formula::name() const { return node_->name; }
const Formula& Formula::child() const { return *node_->left; }
const Formula& Formula::left() const { return *node_->left; }
const Formula& Formula::right() const { return *node_->right; }
std::size_t Formula::hash() const { return node_->hash; }
std::size_t Formula::size() const { return node_->size; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.size() != b.size() || a.kind() != b.kind()) {
    return false;
  }
  switch (a.kind()) {
    case Connective::Atom:
      return a.name() == b.name();
    case Connective::Not:
      return a.child() == b.child();
    default:
      return a.left() == b.left() && a.right() == b.right();
  }
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  switch (a.kind()) {
    case Connective::Atom:
      return a.name() <=> b.name();
    case Connective::Not:
      return a.child() <=> b.child();
    default:
      if (auto c = a.left() <=> b.left(); c != 0) return c;
      return a.right() <=> b.right();
  }
}

Formula complement(const Formula& f) {
  if (f.kind() == Connective::Not) return f.child();
  return Formula::negation(f);
}

namespace {

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case Connective::Atom:
      out.insert(f.name());
      return;
    case Connective::Not:
      collect_atoms(f.child(), out);
      return;
    default:
      collect_atoms(f.left(), out);
      collect_atoms(f.right(), out);
  }
}

}  // namespace

std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

bool evaluate(const Formula& f,
              const std::function<bool(const std::string&)>& assignment) {
  switch (f.kind()) {
    case Connective::Atom:
      return assignment(f.name());
    case Connective::Not:
      return !evaluate(f.child(), assignment);
    case Connective::And:
      return evaluate(f.left(), assignment) && evaluate(f.right(), assignment);
    case Connective::Or:
      return evaluate(f.left(), assignment) || evaluate(f.right(), assignment);
    case Connective::Implies:
      return !evaluate(f.left(), assignment) || evaluate(f.right(), assignment);
    case Connective::Iff:
      return evaluate(f.left(), assignment) == evaluate(f.right(), assignment);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Ident, Not, And, Or, Implies, Iff, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t column;  // 1-based
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "atom";
    case Tok::Not: return "'!'";
    case Tok::And: return "'&'";
    case Tok::Or: return "'|'";
    case Tok::Implies: return "'->'";
    case Tok::Iff: return "'<->'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t line) : text_(text), line_(line) {
    tokenize();
  }

  Formula parse() {
    if (tokens_.size() == 1) fail("empty formula", 1);
    Formula f = parse_iff();
    if (peek().kind != Tok::End) {
      fail(std::string("unexpected ") + describe(peek().kind), peek().column);
    }
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t column) const {
    std::ostringstream os;
    os << "line " << line_ << ", column " << column << ": " << msg;
    throw ParseError(os.str(), line_, column);
  }

  void tokenize() {
    std::size_t i = 0;
    while (i < text_.size()) {
      char ch = text_[i];
      std::size_t col = i + 1;
      if (std::isspace(static_cast<unsigned char>(ch))) {
        ++i;
      } else if (ch == '!') {
        tokens_.push_back({Tok::Not, "!", col});
        ++i;
      } else if (ch == '&') {
        tokens_.push_back({Tok::And, "&", col});
        ++i;
      } else if (ch == '|') {
        tokens_.push_back({Tok::Or, "|", col});
        ++i;
      } else if (ch == '(') {
        tokens_.push_back({Tok::LParen, "(", col});
        ++i;
      } else if (ch == ')') {
        tokens_.push_back({Tok::RParen, ")", col});
        ++i;
      } else if (text_.substr(i, 2) == "->") {
        tokens_.push_back({Tok::Implies, "->", col});
        i += 2;
      } else if (text_.substr(i, 3) == "<->") {
        tokens_.push_back({Tok::Iff, "<->", col});
        i += 3;
      } else if (ch >= 'a' && ch <= 'z') {
        std::size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) {
          ++j;
        }
        tokens_.push_back({Tok::Ident, std::string(text_.substr(i, j - i)), col});
        i = j;
      } else {
        fail(std::string("unexpected character '") + ch + "'", col);
      }
    }
    tokens_.push_back({Tok::End, "", text_.size() + 1});
  }

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  Formula parse_iff() {
    Formula left = parse_implies();
    if (peek().kind == Tok::Iff) {
      next();
      return Formula::equivalence(std::move(left), parse_iff());
    }
    return left;
  }

  Formula parse_implies() {
    Formula left = parse_or();
    if (peek().kind == Tok::Implies) {
      next();
      return Formula::implication(std::move(left), parse_implies());
    }
    return left;
  }

  Formula parse_or() {
    Formula left = parse_and();
    while (peek().kind == Tok::Or) {
      next();
      left = Formula::disjunction(std::move(left), parse_and());
    }
    return left;
  }

  Formula parse_and() {
    Formula left = parse_unary();
    while (peek().kind == Tok::And) {
      next();
      left = Formula::conjunction(std::move(left), parse_unary());
    }
    return left;
  }

  Formula parse_unary() {
    const Token& tok = next();
    switch (tok.kind) {
      case Tok::Not:
        return Formula::negation(parse_unary());
      case Tok::Ident:
        return Formula::atom(tok.text);
      case Tok::LParen: {
        Formula inner = parse_iff();
        if (peek().kind != Tok::RParen) {
          fail(std::string("expected ')' but found ") + describe(peek().kind),
               peek().column);
        }
        next();
        return inner;
      }
      default:
        fail(std::string("expected a formula but found ") + describe(tok.kind),
             tok.column);
    }
  }

  std::string_view text_;
  std::size_t line_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

int precedence(Connective c) {
  switch (c) {
    case Connective::Iff: return 1;
    case Connective::Implies: return 2;
    case Connective::Or: return 3;
    case Connective::And: return 4;
    case Connective::Not: return 5;
    case Connective::Atom: return 6;
  }
  return 0;
}

bool right_assoc(Connective c) {
  return c == Connective::Implies || c == Connective::Iff;
}

const char* symbol(Connective c) {
  switch (c) {
    case Connective::And: return " & ";
    case Connective::Or: return " | ";
    case Connective::Implies: return " -> ";
    case Connective::Iff: return " <-> ";
    default: return "";
  }
}

void render(const Formula& f, std::string& out) {
  auto sub = [&out](const Formula& g, bool parens) {
    if (parens) out += '(';
    render(g, out);
    if (parens) out += ')';
  };
  const int p = precedence(f.kind());
  switch (f.kind()) {
    case Connective::Atom:
      out += f.name();
      return;
    case Connective::Not:
      out += '!';
      sub(f.child(), precedence(f.child().kind()) < p);
      return;
    default: {
      const int pl = precedence(f.left().kind());
      const int pr = precedence(f.right().kind());
      const bool ra = right_assoc(f.kind());
      sub(f.left(), pl < p || (pl == p && ra));
      out += symbol(f.kind());
      sub(f.right(), pr < p || (pr == p && !ra));
    }
  }
}

}  // namespace

Formula parse_formula(std::string_view text, std::size_t line) {
  return Parser(text, line).parse();
}

std::string format_formula(const Formula& f) {
  std::string out;
  render(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Knowledge bases

KnowledgeBase::KnowledgeBase(std::string label,
                             const std::vector<Formula>& formulas)
    : label_(std::move(label)) {
  for (const auto& f : formulas) add(f);
}

std::optional<std::size_t> KnowledgeBase::index_of(const Formula& f) const {
  auto it = index_.find(f);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KnowledgeBase::add(const Formula& f) {
  auto [it, inserted] = index_.emplace(f, formulas_.size());
  if (!inserted) return std::nullopt;
  formulas_.push_back(f);
  return it->second;
}

std::set<std::string> KnowledgeBase::atoms() const {
  std::set<std::string> out;
  for (const auto& f : formulas_) collect_atoms(f, out);
  return out;
}

KnowledgeBase load_kb(std::string_view text, std::string label) {
  KnowledgeBase kb(std::move(label));
  std::unordered_map<Formula, std::size_t, FormulaHash> first_line;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    Formula f = parse_formula(line, line_no);
    auto [it, inserted] = first_line.emplace(f, line_no);
    if (!inserted) {
      std::ostringstream os;
      os << "line " << line_no << ": duplicate formula '" << format_formula(f)
         << "' (first on line " << it->second << ")";
      throw DuplicateFormulaError(os.str(), line_no, it->second);
    }
    kb.add(f);
    if (end == text.size()) break;
  }
  return kb;
}

KnowledgeBase load_kb_file(const std::string& path, std::string label) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open knowledge base file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_kb(buf.str(), label.empty() ? path : std::move(label));
}

std::string format_kb(const KnowledgeBase& kb) {
  std::string out;
  for (const auto& f : kb) {
    out += format_formula(f);
    out += '\n';
  }
  return out;
}

}  // namespace drhai
