#include "edskit/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace edskit {

Rational::Rational(const mpz_class& n, const mpz_class& d) : q_(n, d)
{
    if (d == 0) throw std::invalid_argument("zero denominator");
    q_.canonicalize();
}

Rational Rational::from_string(const std::string& s)
{
    size_t i = 0;
    bool neg = false;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) { neg = s[i] == '-'; ++i; }
    auto digits = [&](size_t& k) {
        size_t start = k;
        while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
        return s.substr(start, k - start);
    };
    std::string n = digits(i);
    if (n.empty()) throw std::invalid_argument("malformed rational: '" + s + "'");
    std::string d = "1";
    if (i < s.size() && s[i] == '/') {
        ++i;
        d = digits(i);
        if (d.empty()) throw std::invalid_argument("malformed rational: '" + s + "'");
    }
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i != s.size()) throw std::invalid_argument("malformed rational: '" + s + "'");
    mpz_class nz(n), dz(d);
    if (dz == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    Rational r(nz, dz);
    return neg ? -r : r;
}

Rational& Rational::operator/=(const Rational& o)
{
    if (o.is_zero()) throw std::domain_error("division by zero");
    q_ /= o.q_;
    return *this;
}

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

Rational pow(const Rational& r, unsigned e)
{
    Rational out(1), base = r;
    while (e) {
        if (e & 1u) out *= base;
        base *= base;
        e >>= 1u;
    }
    return out;
}

Rational round_dyadic(double x, unsigned bits)
{
    double scaled = std::ldexp(x, static_cast<int>(bits));
    mpz_class n(static_cast<long>(std::llround(scaled)));
    mpz_class d = 1;
    d <<= bits;
    return Rational(n, d);
}

} // namespace edskit
