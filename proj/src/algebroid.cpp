#include "edskit/algebroid.hpp"

#include <functional>

namespace edskit {

std::map<MultiIndex, Rational> coefficients_at(const AlgebroidForm& w, const VarMap& point)
{
    std::map<MultiIndex, Rational> out;
    for (const auto& [I, f] : w.terms()) {
        Rational v = f.evaluate(point);
        if (!v.is_zero()) out.emplace(I, v);
    }
    return out;
}

Rational evaluate_form(const AlgebroidForm& w, const VarMap& point, const std::vector<Vec>& vectors)
{
    if (static_cast<int>(vectors.size()) != w.degree()) throw std::invalid_argument("number of vectors does not match form degree");
    const size_t N = w.parent()->rank();
    std::vector<std::vector<Rational>> vecs;
    for (const auto& v : vectors) {
        if (static_cast<size_t>(v.size()) != N) throw std::invalid_argument("vector length does not match rank");
        vecs.emplace_back(v.data(), v.data() + v.size());
    }
    return alternating_eval(coefficients_at(w, point), vecs, Rational(0), Rational(1));
}

Rational evaluate_form(const AlgebroidForm& w, const VarMap& point, const std::vector<FiberVector>& vectors)
{
    std::vector<Vec> raw;
    for (const auto& v : vectors) {
        if (v.base_point != point) throw std::invalid_argument("base point mismatch");
        raw.push_back(v.components);
    }
    return evaluate_form(w, point, raw);
}

namespace {

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn)
{
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k > n) return;
    for (;;) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

bool restrict_vanishes(const AlgebroidForm& w, const SubspaceCandidate& E)
{
    const int rows = static_cast<int>(E.span.rows());
    if (rank(E.span) < E.dim() || rows < E.dim()) throw std::invalid_argument("degenerate spanning set");
    if (w.degree() > E.dim()) throw std::invalid_argument("form degree exceeds subspace dimension");
    if (w.is_zero()) return true;
    auto coeffs = coefficients_at(w, E.base_point);
    bool ok = true;
    for_each_subset(rows, w.degree(), [&](const std::vector<int>& sel) {
        if (!ok) return;
        std::vector<std::vector<Rational>> vecs;
        for (int r : sel) {
            std::vector<Rational> v(E.span.cols());
            for (Eigen::Index c = 0; c < E.span.cols(); ++c) v[c] = E.span(r, c);
            vecs.push_back(std::move(v));
        }
        if (!alternating_eval(coeffs, vecs, Rational(0), Rational(1)).is_zero()) ok = false;
    });
    return ok;
}

} // namespace edskit
