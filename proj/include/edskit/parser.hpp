#pragma once

#include "edskit/poly.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace edskit {

class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, UnknownVariable };
    ParseError(Kind kind, size_t offset, const std::string& what)
        : std::runtime_error(what), kind_(kind), offset_(offset) {}
    Kind kind() const { return kind_; }
    size_t offset() const { return offset_; }

private:
    Kind kind_;
    size_t offset_;
};

// Grammar:
//   EXPR     := TERM (('+'|'-') TERM)*
//   TERM     := FACTOR ('*' FACTOR)*
//   FACTOR   := ATOM ('^' UINT)?
//   ATOM     := RATIONAL | NAME | '(' EXPR ')' | '-' ATOM
//   RATIONAL := INT ('/' UINT)?
// Whitespace is insignificant. The result lives on `variables`.
Poly parse_expr(const std::string& text, const std::vector<std::string>& variables);

} // namespace edskit
