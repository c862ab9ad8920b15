#pragma once

#include "edskit/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace edskit {

using Exponent = std::vector<unsigned>;

unsigned total_degree(const Exponent& e);

// Ascending graded-lex: lower total degree first; ties broken so that a larger
// exponent on an earlier variable ranks higher.
struct GrlexLess {
    bool operator()(const Exponent& a, const Exponent& b) const;
};

using VarMap = std::map<std::string, Rational>;

// Multivariate polynomial over Q on an ordered variable list.
class Poly {
public:
    using TermMap = std::map<Exponent, Rational, GrlexLess>;

    Poly() = default;
    explicit Poly(std::vector<std::string> vars);
    Poly(std::vector<std::string> vars, TermMap terms);

    static Poly constant(const Rational& c, std::vector<std::string> vars = {});
    static Poly variable(const std::string& name, std::vector<std::string> vars = {});
    static Poly monomial(const Rational& c, const Exponent& e, std::vector<std::string> vars);

    const std::vector<std::string>& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }
    int var_index(const std::string& name) const;

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_term() const;
    Rational coefficient(const Exponent& e) const;
    int total_degree() const;
    int min_degree() const;
    unsigned degree_in(const std::string& var) const;
    bool depends_on(const std::string& var) const;

    // Same polynomial on a different variable list. Throws if a used variable is dropped.
    Poly with_vars(const std::vector<std::string>& vars) const;
    // Drops variables that never occur.
    Poly compact() const;

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly& operator*=(const Poly& o);
    Poly& operator*=(const Rational& c);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
    friend Poly operator*(const Rational& c, Poly a) { return a *= c; }
    Poly operator-() const;

    // Product keeping only terms of total degree <= max_degree.
    static Poly mul_truncated(const Poly& a, const Poly& b, int max_degree);
    Poly truncated(int max_degree) const;
    Poly homogeneous_part(int degree) const;
    Poly pow(unsigned e) const;

    // Derivative; zero for a variable not in the list.
    Poly diff(const std::string& var) const;

    // Throws std::out_of_range naming the first used variable without a value.
    Rational evaluate(const VarMap& point) const;
    Poly partial_evaluate(const VarMap& point) const;
    Poly substitute(const std::map<std::string, Poly>& values) const;

    std::string str() const;

    friend bool operator==(const Poly& a, const Poly& b);
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

private:
    void prune();
    static std::vector<std::string> merge_vars(const std::vector<std::string>& a, const std::vector<std::string>& b);

    std::vector<std::string> vars_;
    TermMap terms_;
};

std::ostream& operator<<(std::ostream& os, const Poly& p);

// Spec-level operations.
enum class PolyOp { Add, Sub, Mul };
Poly poly_arith(const Poly& a, const Poly& b, PolyOp op);
// Throws std::invalid_argument when var is not in f's variable list.
Poly partial_derivative(const Poly& f, const std::string& var);
Rational evaluate(const Poly& f, const VarMap& point);

} // namespace edskit
