#include "edskit/parser.hpp"

#include <algorithm>
#include <cctype>

namespace edskit {

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

    Poly run()
    {
        skip();
        if (pos_ >= s_.size()) fail("empty expression");
        Poly p = expr();
        skip();
        if (pos_ != s_.size()) fail(std::string("unexpected character '") + s_[pos_] + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError(ParseError::Kind::Syntax, pos_, "syntax error at offset " + std::to_string(pos_) + ": " + msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    std::string digits()
    {
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return s_.substr(start, pos_ - start);
    }

    Poly expr()
    {
        Poly acc = term();
        for (;;) {
            if (accept('+')) acc += term();
            else if (accept('-')) acc -= term();
            else return acc;
        }
    }

    Poly term()
    {
        Poly acc = factor();
        while (accept('*')) acc = acc * factor();
        return acc;
    }

    Poly factor()
    {
        Poly base = atom();
        if (accept('^')) {
            skip();
            std::string d = digits();
            if (d.empty()) fail("expected non-negative integer exponent");
            if (d.size() > 6) fail("exponent too large");
            base = base.pow(static_cast<unsigned>(std::stoul(d)));
        }
        return base;
    }

    Poly atom()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            return -atom();
        }
        if (c == '(') {
            ++pos_;
            Poly inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string n = digits();
            std::string d = "1";
            size_t save = pos_;
            skip();
            if (pos_ < s_.size() && s_[pos_] == '/') {
                ++pos_;
                skip();
                d = digits();
                if (d.empty()) fail("expected denominator");
                if (d.find_first_not_of('0') == std::string::npos) fail("zero denominator");
            } else {
                pos_ = save;
            }
            return Poly::constant(Rational(mpz_class(n), mpz_class(d)), vars_);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (std::find(vars_.begin(), vars_.end(), name) == vars_.end())
                throw ParseError(ParseError::Kind::UnknownVariable, start, "unknown variable '" + name + "' at offset " + std::to_string(start));
            return Poly::variable(name, vars_);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    size_t pos_ = 0;
};

} // namespace

Poly parse_expr(const std::string& text, const std::vector<std::string>& variables)
{
    Poly p = Parser(text, variables).run();
    return p.with_vars(variables);
}

} // namespace edskit
