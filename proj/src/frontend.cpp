#include "shiq/frontend.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "shiq/errors.hpp"

namespace shiq {
namespace {

struct Sexp {
  // Empty for a list.
  std::string atom;
  std::vector<Sexp> items;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is_list() const { return atom.empty(); }
};

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> out;
    for (skip(); pos_ < text_.size(); skip()) out.push_back(read());
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t line, std::size_t column) const {
    throw ParseError(what + " at " + std::to_string(line) + ":" + std::to_string(column), line,
                     column);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool delimiter(char c) {
    return c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c));
  }

  Sexp read() {
    Sexp node;
    node.line = line_;
    node.column = column_;
    const char c = text_[pos_];
    if (c == ')') fail("unexpected ')'", line_, column_);
    if (c != '(') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && !delimiter(text_[pos_])) advance();
      node.atom = std::string(text_.substr(start, pos_ - start));
      return node;
    }
    advance();
    for (skip(); pos_ < text_.size() && text_[pos_] != ')'; skip()) node.items.push_back(read());
    if (pos_ >= text_.size()) fail("unterminated list", node.line, node.column);
    advance();
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

[[noreturn]] void fail_at(const Sexp& s, const std::string& what) {
  throw ParseError(what + " at " + std::to_string(s.line) + ":" + std::to_string(s.column),
                   s.line, s.column);
}

const std::string& identifier(const Sexp& s, const char* what) {
  if (s.is_list()) fail_at(s, std::string("expected ") + what);
  const char c = s.atom.front();
  if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'))
    fail_at(s, std::string("bad ") + what + " '" + s.atom + "'");
  return s.atom;
}

const std::string& head(const Sexp& s) {
  if (!s.is_list() || s.items.empty() || s.items.front().is_list()) fail_at(s, "expected a form");
  return s.items.front().atom;
}

void arity(const Sexp& s, std::size_t n) {
  if (s.items.size() != n + 1)
    fail_at(s, "'" + head(s) + "' takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
}

Role to_role(const Sexp& s) {
  if (!s.is_list()) return Role{identifier(s, "role"), false};
  if (head(s) != "inv") fail_at(s, "expected a role");
  arity(s, 1);
  return inv(to_role(s.items[1]));
}

std::uint32_t to_number(const Sexp& s) {
  if (s.is_list()) fail_at(s, "expected a number");
  const std::string& t = s.atom;
  if (t.front() == '-' && t.size() > 1 &&
      std::all_of(t.begin() + 1, t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw ValidationError("negative number " + t + " at " + std::to_string(s.line) + ":" +
                          std::to_string(s.column));
  std::uint32_t value = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size()) fail_at(s, "bad number '" + t + "'");
  return value;
}

Concept to_concept(const Sexp& s) {
  if (!s.is_list()) return Concept::atom(identifier(s, "concept name"));
  const std::string& op = head(s);
  if (op == "not") {
    arity(s, 1);
    return Concept::negation(to_concept(s.items[1]));
  }
  if (op == "and" || op == "or") {
    arity(s, 2);
    auto l = to_concept(s.items[1]);
    auto r = to_concept(s.items[2]);
    return op == "and" ? Concept::conjunction(l, r) : Concept::disjunction(l, r);
  }
  if (op == "some" || op == "all") {
    arity(s, 2);
    auto r = to_role(s.items[1]);
    auto c = to_concept(s.items[2]);
    return op == "some" ? Concept::some(r, c) : Concept::all(r, c);
  }
  if (op == "at-least" || op == "at-most") {
    arity(s, 3);
    const auto n = to_number(s.items[1]);
    auto r = to_role(s.items[2]);
    auto c = to_concept(s.items[3]);
    return op == "at-least" ? Concept::at_least(n, r, c) : Concept::at_most(n, r, c);
  }
  fail_at(s, "unknown concept constructor '" + op + "'");
}

Sexp single(std::string_view text, const char* what) {
  auto forms = Reader(text).read_all();
  if (forms.size() != 1) throw ParseError(std::string("expected exactly one ") + what, 1, 1);
  return std::move(forms.front());
}

void check_concept_names(const Concept& c) {
  std::set<std::string> names;
  collect_atoms(c, names);
  collect_roles(c, names);
  for (const auto& n : names) {
    if (is_reserved_name(n)) throw ValidationError("reserved name '" + n + "'");
  }
}

}  // namespace

KnowledgeBase parse_kb(std::string_view text) {
  std::vector<Gci> tbox;
  std::vector<RoleInclusion> inclusions;
  std::set<std::string> transitive;
  std::vector<Assertion> abox;
  for (const Sexp& form : Reader(text).read_all()) {
    const std::string& op = head(form);
    if (op == "transitive") {
      arity(form, 1);
      const Role r = to_role(form.items[1]);
      transitive.insert(r.name);
    } else if (op == "subrole") {
      arity(form, 2);
      inclusions.push_back({to_role(form.items[1]), to_role(form.items[2])});
    } else if (op == "implies") {
      arity(form, 2);
      tbox.push_back({to_concept(form.items[1]), to_concept(form.items[2])});
    } else if (op == "instance") {
      arity(form, 2);
      abox.push_back(InstanceAssertion{identifier(form.items[1], "individual"),
                                       to_concept(form.items[2])});
    } else if (op == "related") {
      arity(form, 3);
      abox.push_back(RelatedAssertion{identifier(form.items[1], "individual"),
                                      identifier(form.items[2], "individual"),
                                      to_role(form.items[3])});
    } else if (op == "distinct") {
      arity(form, 2);
      abox.push_back(DistinctAssertion{identifier(form.items[1], "individual"),
                                       identifier(form.items[2], "individual")});
    } else {
      fail_at(form, "unknown declaration '" + op + "'");
    }
  }
  std::vector<RoleInclusion> unique;
  for (const auto& inc : inclusions) {
    if (std::find(unique.begin(), unique.end(), inc) == unique.end()) unique.push_back(inc);
  }
  KnowledgeBase kb(std::move(tbox), RoleBox({}, std::move(unique), std::move(transitive)),
                   std::move(abox));
  kb.validate();
  return kb;
}

Concept parse_concept(std::string_view text) {
  Concept c = to_concept(single(text, "concept"));
  check_concept_names(c);
  return c;
}

Role parse_role(std::string_view text) {
  Role r = to_role(single(text, "role"));
  if (is_reserved_name(r.name)) throw ValidationError("reserved name '" + r.name + "'");
  return r;
}

std::string print_kb(const KnowledgeBase& kb) {
  std::ostringstream os;
  for (const auto& inc : kb.rbox().inclusions())
    os << "(subrole " << to_string(inc.sub) << " " << to_string(inc.super) << ")\n";
  for (const auto& t : kb.rbox().transitive_names()) os << "(transitive " << t << ")\n";
  for (const auto& g : kb.tbox())
    os << "(implies " << to_string(g.sub) << " " << to_string(g.super) << ")\n";
  for (const auto& a : kb.abox()) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) {
      os << "(instance " << inst->individual << " " << to_string(inst->expr) << ")\n";
    } else if (const auto* rel = std::get_if<RelatedAssertion>(&a)) {
      os << "(related " << rel->from << " " << rel->to << " " << to_string(rel->role) << ")\n";
    } else {
      const auto& d = std::get<DistinctAssertion>(a);
      os << "(distinct " << d.first << " " << d.second << ")\n";
    }
  }
  return os.str();
}

}  // namespace shiq
