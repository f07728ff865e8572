// S-expression knowledge base format and the command-line front end.

#ifndef SHIQ_FRONTEND_HPP_
#define SHIQ_FRONTEND_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "shiq/syntax.hpp"

namespace shiq {

// Declarations:
//   (transitive r) (subrole R S) (implies C D)
//   (instance a C) (related a b R) (distinct a b)
// Concepts: atoms, (not C), (and C D), (or C D), (some R C), (all R C),
// (at-least n R C), (at-most n R C). Roles: r or (inv r). `;` starts a
// comment that runs to the end of the line.
//
// Throws ParseError (with line and column) on malformed input and
// ValidationError on reserved names, negative numbers or non-simple roles
// in number restrictions.
KnowledgeBase parse_kb(std::string_view text);
Concept parse_concept(std::string_view text);
Role parse_role(std::string_view text);

// Role declarations first, then the terminology, then the assertions.
std::string print_kb(const KnowledgeBase& kb);

// Runs one command. `args` excludes the program name. Returns the exit
// status: 0 for a positive verdict, 1 for a negative one, 2 for parse or
// validation errors, 3 when a search budget is exhausted.
int cli_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace shiq

#endif  // SHIQ_FRONTEND_HPP_
