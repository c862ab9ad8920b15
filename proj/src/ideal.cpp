#include "edskit/ideal.hpp"

#include <random>

namespace edskit {

std::vector<MultiIndex> increasing_tuples(int n, int k)
{
    std::vector<MultiIndex> out;
    if (k < 0 || k > n) return out;
    MultiIndex idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        out.push_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return out;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

Vec form_vector_at(const AlgebroidForm& w, const VarMap& point)
{
    const int N = static_cast<int>(w.parent()->rank());
    auto tuples = increasing_tuples(N, w.degree());
    Vec out(static_cast<Eigen::Index>(tuples.size()));
    for (size_t i = 0; i < tuples.size(); ++i) out(static_cast<Eigen::Index>(i)) = Rational(0);
    auto coeffs = coefficients_at(w, point);
    for (size_t i = 0; i < tuples.size(); ++i) {
        auto it = coeffs.find(tuples[i]);
        if (it != coeffs.end()) out(static_cast<Eigen::Index>(i)) = it->second;
    }
    return out;
}

Mat algebraic_span_at(const std::vector<AlgebroidForm>& forms, const VarMap& point, int d)
{
    std::vector<Vec> rows;
    for (const auto& g : forms) {
        if (g.degree() > d) continue;
        const auto& A = g.parent();
        const int N = static_cast<int>(A->rank());
        // Specialise g to constants at the point before wedging.
        AlgebroidForm g0(A, g.degree());
        for (const auto& [I, c] : coefficients_at(g, point)) g0.add_term(I, Poly::constant(c, A->coords()));
        for (const auto& J : increasing_tuples(N, d - g.degree())) {
            AlgebroidForm mono(A, static_cast<int>(J.size()));
            mono.add_term(J, Poly::constant(1, A->coords()));
            AlgebroidForm p = wedge(g0, mono);
            if (!p.is_zero()) rows.push_back(form_vector_at(p, point));
        }
    }
    if (rows.empty()) return Mat(0, 0);
    Mat M(static_cast<Eigen::Index>(rows.size()), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return M;
}

namespace {

bool in_row_span(const Mat& M, const Vec& v)
{
    bool zero = true;
    for (Eigen::Index i = 0; i < v.size(); ++i) zero = zero && v(i).is_zero();
    if (zero) return true;
    if (M.rows() == 0) return false;
    Mat aug(M.rows() + 1, M.cols());
    aug.topRows(M.rows()) = M;
    aug.row(M.rows()) = v.transpose();
    return rank(aug) == rank(M);
}

} // namespace

IdealSpec close_ideal(const std::vector<AlgebroidForm>& generators, std::vector<std::string> names, bool assert_closed,
                      int samples, std::uint64_t seed)
{
    IdealSpec out;
    if (generators.empty()) return out;
    out.ambient = generators.front().parent();
    if (names.empty())
        for (size_t i = 0; i < generators.size(); ++i) names.push_back("g" + std::to_string(i + 1));
    if (names.size() != generators.size()) throw std::invalid_argument("generator name count mismatch");
    for (const auto& g : generators) {
        if (g.parent() != out.ambient) throw std::invalid_argument("generators live on different structures");
        if (g.degree() == 0) throw std::invalid_argument("degree-0 generator");
    }
    out.generators = generators;
    out.closed_generators = generators;
    out.labels = names;
    std::vector<AlgebroidForm> deltas;
    for (size_t i = 0; i < generators.size(); ++i) {
        AlgebroidForm d = delta(generators[i]);
        deltas.push_back(d);
        if (d.is_zero()) continue;
        out.closed_generators.push_back(d);
        out.labels.push_back("delta " + names[i]);
    }
    if (assert_closed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> dist(-7, 7);
        bool ok = true;
        std::string detail;
        for (int s = 0; s < samples && ok; ++s) {
            VarMap pt;
            for (const auto& c : out.ambient->coords()) pt[c] = Rational(s == 0 ? 0 : dist(rng));
            for (size_t i = 0; i < generators.size() && ok; ++i) {
                if (deltas[i].is_zero()) continue;
                Mat span = algebraic_span_at(generators, pt, deltas[i].degree());
                if (!in_row_span(span, form_vector_at(deltas[i], pt))) {
                    ok = false;
                    detail = "delta " + names[i] + " leaves the algebraic span at sample " + std::to_string(s);
                }
            }
        }
        out.asserted_closed_verdict = ok;
        out.certificate = ok ? "generators algebraically closed under delta at " + std::to_string(samples) + " sample points" : detail;
    } else {
        out.certificate = "closure by adjoining deltas; delta of every closed generator is zero or a closed generator";
    }
    return out;
}

} // namespace edskit
