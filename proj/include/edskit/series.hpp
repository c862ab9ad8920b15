#pragma once

#include "edskit/poly.hpp"

#include <map>
#include <string>
#include <vector>

namespace edskit {

// Multivariate power series truncated at total degree `order`.
class TruncatedSeries {
public:
    TruncatedSeries() = default;
    TruncatedSeries(const Poly& p, int order);

    static TruncatedSeries zero(std::vector<std::string> vars, int order);
    static TruncatedSeries constant(const Rational& c, std::vector<std::string> vars, int order);
    static TruncatedSeries variable(const std::string& name, std::vector<std::string> vars, int order);

    int order() const { return order_; }
    const Poly& poly() const { return p_; }
    const std::vector<std::string>& vars() const { return p_.vars(); }
    const Poly::TermMap& terms() const { return p_.terms(); }

    bool is_zero() const { return p_.is_zero(); }
    Rational constant_term() const { return p_.constant_term(); }
    Rational coefficient(const Exponent& e) const { return p_.coefficient(e); }
    // Lowest total degree with a nonzero coefficient, or -1.
    int valuation() const { return p_.min_degree(); }

    TruncatedSeries zero_like() const { return TruncatedSeries(Poly(p_.vars()), order_); }
    TruncatedSeries constant_like(const Rational& c) const { return TruncatedSeries(Poly::constant(c, p_.vars()), order_); }
    TruncatedSeries with_vars(const std::vector<std::string>& vars) const { return TruncatedSeries(p_.with_vars(vars), order_); }
    TruncatedSeries retruncate(int order) const;

    TruncatedSeries& operator+=(const TruncatedSeries& o);
    TruncatedSeries& operator-=(const TruncatedSeries& o);
    TruncatedSeries& operator*=(const TruncatedSeries& o);
    TruncatedSeries& operator*=(const Rational& c) { p_ *= c; return *this; }
    friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
    friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
    friend TruncatedSeries operator*(TruncatedSeries a, const TruncatedSeries& b) { return a *= b; }
    friend TruncatedSeries operator*(TruncatedSeries a, const Rational& c) { return a *= c; }
    friend TruncatedSeries operator*(const Rational& c, TruncatedSeries a) { return a *= c; }
    TruncatedSeries operator-() const { return TruncatedSeries(-p_, order_); }

    // Derivative; the order bound is kept although the top degree is no longer reliable.
    TruncatedSeries diff(const std::string& var) const { return TruncatedSeries(p_.diff(var), order_); }
    Rational evaluate(const VarMap& point) const { return p_.evaluate(point); }

    std::string str() const;

    friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b)
    {
        return a.order_ == b.order_ && a.p_ == b.p_;
    }
    friend bool operator!=(const TruncatedSeries& a, const TruncatedSeries& b) { return !(a == b); }

private:
    void check_order(const TruncatedSeries& o) const;

    Poly p_;
    int order_ = 0;
};

std::ostream& operator<<(std::ostream& os, const TruncatedSeries& s);

using SeriesArgs = std::map<std::string, TruncatedSeries>;
using SeriesMatrix = std::vector<std::vector<TruncatedSeries>>;

// Throws std::invalid_argument when var is not in the variable list.
TruncatedSeries partial_derivative(const TruncatedSeries& f, const std::string& var);

// Taylor expansion of g(args) to total degree `order`. Every used variable of g
// needs an argument; arguments share one variable list and have order >= `order`.
TruncatedSeries series_compose(const Poly& g, const SeriesArgs& args, int order);

// Same for a truncated g. Exact only when each argument has zero constant term,
// which is enforced.
TruncatedSeries series_compose(const TruncatedSeries& g, const SeriesArgs& args, int order);

// Inverse modulo total degree > order. Throws std::domain_error when the
// constant-term matrix is singular.
SeriesMatrix series_matrix_invert(const SeriesMatrix& B, int order);

SeriesMatrix series_matmul(const SeriesMatrix& a, const SeriesMatrix& b);
SeriesMatrix series_identity(size_t n, const std::vector<std::string>& vars, int order);

} // namespace edskit
