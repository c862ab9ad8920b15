#include "edskit/series.hpp"
#include "edskit/linalg.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace edskit {

TruncatedSeries::TruncatedSeries(const Poly& p, int order) : p_(p.truncated(order)), order_(order)
{
    if (order < 0) throw std::invalid_argument("negative truncation order");
}

TruncatedSeries TruncatedSeries::zero(std::vector<std::string> vars, int order)
{
    return TruncatedSeries(Poly(std::move(vars)), order);
}

TruncatedSeries TruncatedSeries::constant(const Rational& c, std::vector<std::string> vars, int order)
{
    return TruncatedSeries(Poly::constant(c, std::move(vars)), order);
}

TruncatedSeries TruncatedSeries::variable(const std::string& name, std::vector<std::string> vars, int order)
{
    return TruncatedSeries(Poly::variable(name, std::move(vars)), order);
}

TruncatedSeries TruncatedSeries::retruncate(int order) const
{
    if (order > order_) throw std::invalid_argument("cannot raise truncation order");
    return TruncatedSeries(p_, order);
}

void TruncatedSeries::check_order(const TruncatedSeries& o) const
{
    if (o.order_ != order_)
        throw std::invalid_argument("series order mismatch: " + std::to_string(order_) + " vs " + std::to_string(o.order_));
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& o)
{
    check_order(o);
    p_ += o.p_;
    return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& o)
{
    check_order(o);
    p_ -= o.p_;
    return *this;
}

TruncatedSeries& TruncatedSeries::operator*=(const TruncatedSeries& o)
{
    check_order(o);
    p_ = Poly::mul_truncated(p_, o.p_, order_);
    return *this;
}

std::string TruncatedSeries::str() const
{
    return p_.str() + " + O(" + std::to_string(order_ + 1) + ")";
}

std::ostream& operator<<(std::ostream& os, const TruncatedSeries& s) { return os << s.str(); }

TruncatedSeries partial_derivative(const TruncatedSeries& f, const std::string& var)
{
    if (f.poly().var_index(var) < 0) throw std::invalid_argument("unknown variable '" + var + "'");
    return f.diff(var);
}

namespace {

struct PowerCache {
    TruncatedSeries base;
    std::vector<TruncatedSeries> powers;

    const TruncatedSeries& get(unsigned k)
    {
        while (powers.size() <= k) powers.push_back(powers.back() * base);
        return powers[k];
    }
};

TruncatedSeries compose_terms(const Poly& g, const SeriesArgs& args, int order)
{
    std::vector<std::string> out_vars;
    bool have_vars = false;
    for (const auto& [name, s] : args) {
        if (s.order() < order)
            throw std::invalid_argument("order mismatch: argument '" + name + "' has order " + std::to_string(s.order()) + " < " + std::to_string(order));
        if (!have_vars) { out_vars = s.vars(); have_vars = true; }
        else if (s.vars() != out_vars) {
            for (const auto& v : s.vars())
                if (std::find(out_vars.begin(), out_vars.end(), v) == out_vars.end()) out_vars.push_back(v);
        }
    }
    std::vector<PowerCache> caches;
    std::vector<int> cache_of(g.vars().size(), -1);
    for (size_t i = 0; i < g.vars().size(); ++i) {
        if (!g.depends_on(g.vars()[i])) continue;
        auto it = args.find(g.vars()[i]);
        if (it == args.end()) throw std::invalid_argument("no argument series for variable '" + g.vars()[i] + "'");
        TruncatedSeries b = it->second.retruncate(order).with_vars(out_vars);
        cache_of[i] = static_cast<int>(caches.size());
        caches.push_back(PowerCache{b, {b.constant_like(Rational(1))}});
    }
    TruncatedSeries result = TruncatedSeries::zero(out_vars, order);
    for (const auto& [e, c] : g.terms()) {
        TruncatedSeries t = result.constant_like(c);
        for (size_t i = 0; i < e.size() && !t.is_zero(); ++i)
            if (e[i]) t *= caches[cache_of[i]].get(e[i]);
        result += t;
    }
    return result;
}

} // namespace

TruncatedSeries series_compose(const Poly& g, const SeriesArgs& args, int order)
{
    return compose_terms(g, args, order);
}

TruncatedSeries series_compose(const TruncatedSeries& g, const SeriesArgs& args, int order)
{
    for (const auto& v : g.vars()) {
        if (!g.poly().depends_on(v)) continue;
        auto it = args.find(v);
        if (it != args.end() && !it->second.constant_term().is_zero())
            throw std::invalid_argument("composition of a truncated series needs arguments without constant term ('" + v + "')");
    }
    return compose_terms(g.poly(), args, order);
}

SeriesMatrix series_matmul(const SeriesMatrix& a, const SeriesMatrix& b)
{
    const size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    SeriesMatrix out(n, std::vector<TruncatedSeries>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) {
            TruncatedSeries acc = b[0][j].zero_like();
            for (size_t l = 0; l < k; ++l) acc += a[i][l] * b[l][j];
            out[i][j] = acc;
        }
    return out;
}

SeriesMatrix series_identity(size_t n, const std::vector<std::string>& vars, int order)
{
    SeriesMatrix out(n, std::vector<TruncatedSeries>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) out[i][j] = TruncatedSeries::constant(Rational(i == j ? 1 : 0), vars, order);
    return out;
}

SeriesMatrix series_matrix_invert(const SeriesMatrix& B, int order)
{
    const size_t n = B.size();
    if (n == 0) return {};
    std::vector<std::string> vars;
    for (const auto& row : B) {
        if (row.size() != n) throw std::invalid_argument("series matrix is not square");
        for (const auto& s : row)
            for (const auto& v : s.vars())
                if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
    Mat B0(n, n);
    SeriesMatrix rest(n, std::vector<TruncatedSeries>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            TruncatedSeries s = B[i][j].retruncate(order).with_vars(vars);
            B0(i, j) = s.constant_term();
            rest[i][j] = s - s.constant_like(B0(i, j));
        }
    Mat B0inv;
    try {
        B0inv = inverse(B0);
    } catch (const std::domain_error&) {
        throw std::domain_error("constant term of the series matrix is singular");
    }
    SeriesMatrix C(n, std::vector<TruncatedSeries>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) C[i][j] = TruncatedSeries::constant(B0inv(i, j), vars, order);
    // B^{-1} = sum_j (-B0^{-1} R)^j B0^{-1}; R has no constant term, so `order` terms suffice.
    SeriesMatrix step = series_matmul(C, rest);
    for (auto& row : step)
        for (auto& s : row) s = -s;
    SeriesMatrix term = C, result = C;
    for (int j = 1; j <= order; ++j) {
        term = series_matmul(step, term);
        bool all_zero = true;
        for (size_t a = 0; a < n; ++a)
            for (size_t b = 0; b < n; ++b) {
                result[a][b] += term[a][b];
                all_zero = all_zero && term[a][b].is_zero();
            }
        if (all_zero) break;
    }
    return result;
}

} // namespace edskit
