#include "edskit/poly.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace edskit {

unsigned total_degree(const Exponent& e)
{
    unsigned d = 0;
    for (unsigned v : e) d += v;
    return d;
}

bool GrlexLess::operator()(const Exponent& a, const Exponent& b) const
{
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    // Same degree: the exponent vector that is lexicographically larger ranks higher.
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Poly::Poly(std::vector<std::string> vars) : vars_(std::move(vars))
{
    for (size_t i = 0; i < vars_.size(); ++i)
        for (size_t j = i + 1; j < vars_.size(); ++j)
            if (vars_[i] == vars_[j]) throw std::invalid_argument("duplicate variable '" + vars_[i] + "'");
}

Poly::Poly(std::vector<std::string> vars, TermMap terms) : Poly(std::move(vars))
{
    for (const auto& [e, c] : terms)
        if (e.size() != vars_.size()) throw std::invalid_argument("exponent length mismatch");
    terms_ = std::move(terms);
    prune();
}

Poly Poly::constant(const Rational& c, std::vector<std::string> vars)
{
    Poly p(std::move(vars));
    if (!c.is_zero()) p.terms_[Exponent(p.vars_.size(), 0)] = c;
    return p;
}

Poly Poly::variable(const std::string& name, std::vector<std::string> vars)
{
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) vars.push_back(name);
    Poly p(std::move(vars));
    Exponent e(p.vars_.size(), 0);
    e[p.var_index(name)] = 1;
    p.terms_[e] = Rational(1);
    return p;
}

Poly Poly::monomial(const Rational& c, const Exponent& e, std::vector<std::string> vars)
{
    Poly p(std::move(vars));
    if (e.size() != p.vars_.size()) throw std::invalid_argument("exponent length mismatch");
    if (!c.is_zero()) p.terms_[e] = c;
    return p;
}

int Poly::var_index(const std::string& name) const
{
    for (size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return static_cast<int>(i);
    return -1;
}

bool Poly::is_constant() const
{
    return terms_.empty() || (terms_.size() == 1 && edskit::total_degree(terms_.begin()->first) == 0);
}

Rational Poly::constant_term() const
{
    if (terms_.empty()) return Rational(0);
    const auto& [e, c] = *terms_.begin();
    return edskit::total_degree(e) == 0 ? c : Rational(0);
}

Rational Poly::coefficient(const Exponent& e) const
{
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
}

int Poly::total_degree() const
{
    if (terms_.empty()) return -1;
    return static_cast<int>(edskit::total_degree(terms_.rbegin()->first));
}

int Poly::min_degree() const
{
    if (terms_.empty()) return -1;
    return static_cast<int>(edskit::total_degree(terms_.begin()->first));
}

unsigned Poly::degree_in(const std::string& var) const
{
    int i = var_index(var);
    if (i < 0) return 0;
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[i]);
    return d;
}

bool Poly::depends_on(const std::string& var) const { return degree_in(var) > 0; }

std::vector<std::string> Poly::merge_vars(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    std::vector<std::string> out = a;
    for (const auto& v : b)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

Poly Poly::with_vars(const std::vector<std::string>& vars) const
{
    if (vars == vars_) return *this;
    Poly out(vars);
    std::vector<int> map(vars_.size(), -1);
    for (size_t i = 0; i < vars_.size(); ++i) map[i] = out.var_index(vars_[i]);
    for (const auto& [e, c] : terms_) {
        Exponent ne(vars.size(), 0);
        for (size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (map[i] < 0) throw std::invalid_argument("variable '" + vars_[i] + "' dropped while in use");
            ne[map[i]] = e[i];
        }
        out.terms_[ne] = c;
    }
    return out;
}

Poly Poly::compact() const
{
    std::vector<std::string> used;
    for (size_t i = 0; i < vars_.size(); ++i)
        for (const auto& [e, c] : terms_)
            if (e[i]) { used.push_back(vars_[i]); break; }
    return with_vars(used);
}

void Poly::prune()
{
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->second.is_zero()) it = terms_.erase(it);
        else ++it;
    }
}

namespace {

// Brings two polynomials onto one variable list.
void align(Poly& a, Poly& b)
{
    if (a.vars() == b.vars()) return;
    if (b.vars().empty() || (b.is_constant() && a.vars().size() >= b.vars().size())) {
        b = b.is_zero() ? Poly(a.vars()) : Poly::constant(b.constant_term(), a.vars());
        return;
    }
    if (a.vars().empty() || a.is_constant()) {
        a = a.is_zero() ? Poly(b.vars()) : Poly::constant(a.constant_term(), b.vars());
        return;
    }
    std::vector<std::string> u = a.vars();
    for (const auto& v : b.vars())
        if (std::find(u.begin(), u.end(), v) == u.end()) u.push_back(v);
    a = a.with_vars(u);
    b = b.with_vars(u);
}

} // namespace

Poly& Poly::operator+=(const Poly& o)
{
    Poly b = o;
    align(*this, b);
    for (const auto& [e, c] : b.terms_) {
        auto [it, inserted] = terms_.emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
    return *this;
}

Poly& Poly::operator-=(const Poly& o) { return *this += -o; }

Poly Poly::operator-() const
{
    Poly r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
}

Poly& Poly::operator*=(const Rational& c)
{
    if (c.is_zero()) { terms_.clear(); return *this; }
    for (auto& [e, v] : terms_) v *= c;
    return *this;
}

Poly& Poly::operator*=(const Poly& o)
{
    *this = *this * o;
    return *this;
}

Poly Poly::mul_truncated(const Poly& a0, const Poly& b0, int max_degree)
{
    Poly a = a0, b = b0;
    align(a, b);
    Poly out(a.vars_);
    if (a.is_zero() || b.is_zero()) return out;
    const size_t n = a.vars_.size();
    Exponent e(n);
    for (const auto& [ea, ca] : a.terms_) {
        int da = static_cast<int>(edskit::total_degree(ea));
        if (max_degree >= 0 && da > max_degree) break;
        for (const auto& [eb, cb] : b.terms_) {
            int db = static_cast<int>(edskit::total_degree(eb));
            if (max_degree >= 0 && da + db > max_degree) break;
            for (size_t i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
            auto [it, inserted] = out.terms_.emplace(e, ca * cb);
            if (!inserted) it->second += ca * cb;
        }
    }
    out.prune();
    return out;
}

Poly operator*(const Poly& a, const Poly& b) { return Poly::mul_truncated(a, b, -1); }

Poly Poly::truncated(int max_degree) const
{
    Poly out(vars_);
    for (const auto& [e, c] : terms_) {
        if (static_cast<int>(edskit::total_degree(e)) > max_degree) break;
        out.terms_.emplace_hint(out.terms_.end(), e, c);
    }
    return out;
}

Poly Poly::homogeneous_part(int degree) const
{
    Poly out(vars_);
    for (const auto& [e, c] : terms_)
        if (static_cast<int>(edskit::total_degree(e)) == degree) out.terms_.emplace(e, c);
    return out;
}

Poly Poly::pow(unsigned e) const
{
    Poly out = Poly::constant(Rational(1), vars_), base = *this;
    while (e) {
        if (e & 1u) out = out * base;
        e >>= 1u;
        if (e) base = base * base;
    }
    return out;
}

Poly Poly::diff(const std::string& var) const
{
    int i = var_index(var);
    Poly out(vars_);
    if (i < 0) return out;
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0) continue;
        Exponent ne = e;
        ne[i] -= 1;
        out.terms_.emplace(ne, c * Rational(static_cast<long>(e[i])));
    }
    return out;
}

Rational Poly::evaluate(const VarMap& point) const
{
    std::vector<const Rational*> vals(vars_.size(), nullptr);
    for (size_t i = 0; i < vars_.size(); ++i) {
        auto it = point.find(vars_[i]);
        if (it != point.end()) vals[i] = &it->second;
    }
    Rational sum(0);
    for (const auto& [e, c] : terms_) {
        Rational t = c;
        for (size_t i = 0; i < e.size(); ++i) {
            if (!e[i]) continue;
            if (!vals[i]) throw std::out_of_range("missing value for variable '" + vars_[i] + "'");
            t *= edskit::pow(*vals[i], e[i]);
        }
        sum += t;
    }
    return sum;
}

Poly Poly::partial_evaluate(const VarMap& point) const
{
    Poly out(vars_);
    for (const auto& [e, c] : terms_) {
        Exponent ne = e;
        Rational t = c;
        for (size_t i = 0; i < e.size(); ++i) {
            if (!e[i]) continue;
            auto it = point.find(vars_[i]);
            if (it == point.end()) continue;
            t *= edskit::pow(it->second, e[i]);
            ne[i] = 0;
        }
        if (t.is_zero()) continue;
        auto [it, inserted] = out.terms_.emplace(ne, t);
        if (!inserted) it->second += t;
    }
    out.prune();
    return out;
}

Poly Poly::substitute(const std::map<std::string, Poly>& values) const
{
    Poly out;
    for (const auto& [e, c] : terms_) {
        Poly t = Poly::constant(c);
        Exponent keep(vars_.size(), 0);
        bool kept = false;
        for (size_t i = 0; i < e.size(); ++i) {
            if (!e[i]) continue;
            auto it = values.find(vars_[i]);
            if (it == values.end()) { keep[i] = e[i]; kept = true; }
            else t = t * it->second.pow(e[i]);
        }
        if (kept) t = t * Poly::monomial(Rational(1), keep, vars_);
        out += t;
    }
    return out;
}

namespace {

std::string monomial_str(const Exponent& e, const std::vector<std::string>& vars, bool& first_power)
{
    std::string s;
    first_power = false;
    bool first = true;
    for (size_t i = 0; i < e.size(); ++i) {
        if (!e[i]) continue;
        if (!first) s += "*";
        s += vars[i];
        if (e[i] > 1) {
            s += "^" + std::to_string(e[i]);
            if (first) first_power = true;
        }
        first = false;
    }
    return s;
}

} // namespace

std::string Poly::str() const
{
    if (terms_.empty()) return "0";
    std::string out;
    bool leading = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        bool power_first = false;
        std::string mono = monomial_str(e, vars_, power_first);
        bool neg = c.sign() < 0;
        Rational a = abs(c);
        std::string body;
        if (mono.empty()) body = a.str();
        else if (a.is_one()) body = mono;
        else body = a.str() + "*" + mono;
        if (leading) {
            // A leading "-x^2" would parse as (-x)^2, so spell the unit coefficient out.
            if (neg && a.is_one() && power_first) body = "1*" + body;
            out = neg ? "-" + body : body;
            leading = false;
        } else {
            out += neg ? " - " : " + ";
            out += body;
        }
    }
    return out;
}

bool operator==(const Poly& a, const Poly& b)
{
    Poly d = a - b;
    return d.is_zero();
}

std::ostream& operator<<(std::ostream& os, const Poly& p) { return os << p.str(); }

Poly poly_arith(const Poly& a, const Poly& b, PolyOp op)
{
    switch (op) {
    case PolyOp::Add: return a + b;
    case PolyOp::Sub: return a - b;
    case PolyOp::Mul: return a * b;
    }
    return Poly();
}

Poly partial_derivative(const Poly& f, const std::string& var)
{
    if (f.var_index(var) < 0) throw std::invalid_argument("unknown variable '" + var + "'");
    return f.diff(var);
}

Rational evaluate(const Poly& f, const VarMap& point) { return f.evaluate(point); }

} // namespace edskit
