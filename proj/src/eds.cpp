#include "edskit/eds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace edskit {

namespace {

std::vector<std::vector<Rational>> rows_of(const Mat& M)
{
    std::vector<std::vector<Rational>> out(M.rows(), std::vector<Rational>(M.cols()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) out[i][j] = M(i, j);
    return out;
}

Mat stack(const std::vector<Vec>& rows, Eigen::Index cols)
{
    Mat M(static_cast<Eigen::Index>(rows.size()), cols);
    for (size_t i = 0; i < rows.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return M;
}

void check_element(const IdealSpec& ideal, const IntegralElement& E)
{
    if (!ideal.ambient) throw std::invalid_argument("ideal without ambient structure");
    if (static_cast<size_t>(E.span.cols()) != ideal.ambient->rank()) throw std::invalid_argument("element vectors do not match the rank");
    if (E.declared_dim >= 0 && E.declared_dim != E.span.rows()) throw std::invalid_argument("declared dimension differs from the number of spanning vectors");
    if (rank(E.span) < E.span.rows()) throw std::invalid_argument("degenerate spanning set: rank below the declared dimension");
    for (const auto& c : ideal.ambient->coords())
        if (!E.base_point.count(c)) throw std::invalid_argument("base point misses coordinate '" + c + "'");
}

} // namespace

bool is_integral_element(const IdealSpec& ideal, const IntegralElement& E)
{
    check_element(ideal, E);
    const int k = static_cast<int>(E.span.rows());
    for (const auto& w : ideal.closed_generators) {
        if (w.degree() > k) continue;
        if (!restrict_vanishes(w, E)) return false;
    }
    return true;
}

Mat polar_equations(const IdealSpec& ideal, const IntegralElement& E)
{
    check_element(ideal, E);
    const int k = static_cast<int>(E.span.rows());
    const int N = static_cast<int>(ideal.ambient->rank());
    auto span = rows_of(E.span);
    std::vector<Vec> rows;
    for (const auto& w : ideal.closed_generators) {
        const int d = w.degree();
        if (d > k + 1) continue;
        auto coeffs = coefficients_at(w, E.base_point);
        if (coeffs.empty()) continue;
        for (const auto& J : increasing_tuples(k, d - 1)) {
            Vec row(N);
            bool nonzero = false;
            for (int b = 0; b < N; ++b) {
                std::vector<std::vector<Rational>> vecs;
                std::vector<Rational> unit(N, Rational(0));
                unit[b] = Rational(1);
                vecs.push_back(unit);
                for (int j : J) vecs.push_back(span[j]);
                row(b) = alternating_eval(coeffs, vecs, Rational(0), Rational(1));
                nonzero = nonzero || !row(b).is_zero();
            }
            if (nonzero) rows.push_back(row);
        }
    }
    return stack(rows, N);
}

PolarSpace polar_space(const IdealSpec& ideal, const IntegralElement& E)
{
    if (!is_integral_element(ideal, E)) throw std::invalid_argument("polar space requested for a non-integral element");
    PolarSpace out;
    out.element = E;
    out.equations = polar_equations(ideal, E);
    const Eigen::Index N = static_cast<Eigen::Index>(ideal.ambient->rank());
    Mat K = out.equations.rows() ? Mat(nullspace(out.equations)) : rational_identity(N);
    out.basis = K.transpose();
    out.dim = static_cast<int>(out.basis.rows());
    out.r = out.dim - (static_cast<int>(E.span.rows()) + 1);
    return out;
}

PolarSpace polar_space_of_point(const IdealSpec& ideal, const VarMap& point)
{
    IntegralElement zero{point, Mat(0, static_cast<Eigen::Index>(ideal.ambient->rank()))};
    return polar_space(ideal, zero);
}

Extensions extensions(const IdealSpec& ideal, const IntegralElement& E)
{
    PolarSpace H = polar_space(ideal, E);
    Extensions out;
    out.r = H.r;
    std::vector<Vec> extra;
    Mat acc = E.span;
    for (Eigen::Index i = 0; i < H.basis.rows(); ++i) {
        Mat trial(acc.rows() + 1, acc.cols());
        trial.topRows(acc.rows()) = acc;
        trial.row(acc.rows()) = H.basis.row(i);
        if (rank(trial) > rank(acc)) {
            acc = trial;
            extra.push_back(H.basis.row(i).transpose());
        }
    }
    out.quotient_basis = stack(extra, E.span.cols());
    return out;
}

// ---------------------------------------------------------------- charts

GrassmannChart::GrassmannChart(StructurePtr ambient, std::vector<int> pivots) : A_(std::move(ambient)), pivots_(std::move(pivots))
{
    const int N = static_cast<int>(A_->rank());
    std::sort(pivots_.begin(), pivots_.end());
    if (std::adjacent_find(pivots_.begin(), pivots_.end()) != pivots_.end()) throw std::invalid_argument("repeated chart pivot");
    for (int p : pivots_)
        if (p < 0 || p >= N) throw std::invalid_argument("chart pivot out of range");
    coords_ = A_->coords();
    std::set<std::string> used(coords_.begin(), coords_.end());
    const int k = static_cast<int>(pivots_.size());
    p_names_.assign(k, std::vector<std::string>(N));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < N; ++j) {
            if (std::find(pivots_.begin(), pivots_.end(), j) != pivots_.end()) continue;
            std::string name = k == 1 ? "p" + std::to_string(j + 1) : "p" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
            if (!used.insert(name).second) throw std::invalid_argument("chart coordinate '" + name + "' collides with a base coordinate");
            p_names_[i][j] = name;
            p_coords_.push_back(name);
            coords_.push_back(name);
        }
}

AlgebroidForm GrassmannChart::omega() const
{
    AlgebroidForm w(A_, k());
    w.add_term(pivots_, Poly::constant(1, A_->coords()));
    return w;
}

std::string GrassmannChart::omega_str() const
{
    std::string s;
    for (size_t i = 0; i < pivots_.size(); ++i) s += (i ? "^" : "") + A_->basis()[pivots_[i]].name + "*";
    return s.empty() ? "1" : s;
}

std::vector<std::vector<Poly>> GrassmannChart::frame() const
{
    const int N = static_cast<int>(A_->rank());
    std::vector<std::vector<Poly>> X(k(), std::vector<Poly>(N, Poly(coords_)));
    for (int i = 0; i < k(); ++i)
        for (int j = 0; j < N; ++j) {
            if (j == pivots_[i]) X[i][j] = Poly::constant(1, coords_);
            else if (!p_names_[i][j].empty()) X[i][j] = Poly::variable(p_names_[i][j], coords_);
        }
    return X;
}

namespace {

Mat pivot_block(const Mat& span, const std::vector<int>& pivots)
{
    Mat M(span.rows(), static_cast<Eigen::Index>(pivots.size()));
    for (Eigen::Index i = 0; i < span.rows(); ++i)
        for (size_t j = 0; j < pivots.size(); ++j) M(i, static_cast<Eigen::Index>(j)) = span(i, pivots[j]);
    return M;
}

} // namespace

bool GrassmannChart::contains(const IntegralElement& E) const
{
    if (E.span.rows() != k()) return false;
    return rank(pivot_block(E.span, pivots_)) == k();
}

VarMap GrassmannChart::coordinates_of(const IntegralElement& E) const
{
    if (E.span.rows() != k()) throw std::invalid_argument("element dimension differs from the chart dimension");
    Mat M = pivot_block(E.span, pivots_);
    if (rank(M) < k()) throw std::invalid_argument("chart domain violation: Omega vanishes on the element");
    Mat X = Mat(inverse(M)) * E.span;
    VarMap out;
    for (const auto& c : A_->coords()) out[c] = E.base_point.at(c);
    for (int i = 0; i < k(); ++i)
        for (size_t j = 0; j < A_->rank(); ++j)
            if (!p_names_[i][j].empty()) out[p_names_[i][j]] = X(i, static_cast<Eigen::Index>(j));
    return out;
}

IntegralElement GrassmannChart::element_at(const VarMap& pt) const
{
    IntegralElement E;
    for (const auto& c : A_->coords()) E.base_point[c] = pt.at(c);
    const int N = static_cast<int>(A_->rank());
    E.span = rational_zero(k(), N);
    for (int i = 0; i < k(); ++i)
        for (int j = 0; j < N; ++j) {
            if (j == pivots_[i]) E.span(i, j) = Rational(1);
            else if (!p_names_[i][j].empty()) E.span(i, j) = pt.at(p_names_[i][j]);
        }
    return E;
}

GrassmannChart default_chart(const StructurePtr& A, const IntegralElement& E)
{
    auto e = rref(E.span);
    std::vector<int> piv;
    for (auto p : e.pivots) piv.push_back(static_cast<int>(p));
    return GrassmannChart(A, piv);
}

ChartFunctions chart_functions(const IdealSpec& ideal, const GrassmannChart& chart)
{
    if (ideal.ambient != chart.ambient()) throw std::invalid_argument("chart and ideal live on different structures");
    ChartFunctions out;
    const auto& cc = chart.coords();
    auto X = chart.frame();
    const Poly zero(cc), one = Poly::constant(1, cc);
    for (size_t g = 0; g < ideal.closed_generators.size(); ++g) {
        const auto& w = ideal.closed_generators[g];
        const std::string& name = g < ideal.labels.size() ? ideal.labels[g] : "g" + std::to_string(g + 1);
        if (w.degree() > chart.k()) {
            out.skipped.push_back(name + " (degree " + std::to_string(w.degree()) + " > " + std::to_string(chart.k()) + ")");
            continue;
        }
        std::map<MultiIndex, Poly> coeffs;
        for (const auto& [I, f] : w.terms()) coeffs.emplace(I, f.with_vars(cc));
        for (const auto& J : increasing_tuples(chart.k(), w.degree())) {
            std::vector<std::vector<Poly>> vecs;
            std::string lab = name + "(";
            for (size_t t = 0; t < J.size(); ++t) {
                vecs.push_back(X[J[t]]);
                lab += (t ? "," : "") + std::string("X") + std::to_string(J[t] + 1);
            }
            lab += ")";
            Poly f = alternating_eval(coeffs, vecs, zero, one);
            out.functions.push_back({lab, f});
        }
    }
    return out;
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::CertifiedAtSamples: return "CERTIFIED-AT-SAMPLES";
    case Verdict::Failed: return "FAILED";
    case Verdict::Indeterminate: return "INDETERMINATE";
    }
    return "?";
}

// ---------------------------------------------------------------- probes

namespace {

struct ProbeSetup {
    ChartFunctions funcs;
    std::vector<int> selected;
    std::vector<std::string> pivots;
    VarMap at_e;
    int rank = 0;
    bool affine = true;
};

Mat jacobian_at(const std::vector<Poly>& fs, const std::vector<std::string>& vars, const VarMap& pt)
{
    Mat J(static_cast<Eigen::Index>(fs.size()), static_cast<Eigen::Index>(vars.size()));
    for (size_t i = 0; i < fs.size(); ++i)
        for (size_t j = 0; j < vars.size(); ++j) J(i, j) = fs[i].diff(vars[j]).evaluate(pt);
    return J;
}

// Index of the first chart coordinate with a nonzero coefficient; the
// differential with the earliest such coordinate has the largest leading
// monomial in graded-lex order.
int leading_position(const Mat& J, Eigen::Index row)
{
    for (Eigen::Index j = 0; j < J.cols(); ++j)
        if (!J(row, j).is_zero()) return static_cast<int>(j);
    return static_cast<int>(J.cols());
}

bool affine_in(const Poly& f, const std::vector<std::string>& vars)
{
    std::vector<int> idx;
    for (const auto& v : vars) idx.push_back(f.var_index(v));
    for (const auto& [e, c] : f.terms()) {
        unsigned d = 0;
        for (int i : idx)
            if (i >= 0) d += e[i];
        if (d > 1) return false;
    }
    return true;
}

ProbeSetup setup_probe(const IdealSpec& ideal, const IntegralElement& E, const GrassmannChart& chart)
{
    ProbeSetup s;
    s.funcs = chart_functions(ideal, chart);
    s.at_e = chart.coordinates_of(E);
    const auto& cc = chart.coords();
    std::vector<Poly> fs;
    for (const auto& f : s.funcs.functions) fs.push_back(f.f);
    if (fs.empty()) return s;
    Mat J = jacobian_at(fs, cc, s.at_e);
    std::vector<int> order(fs.size());
    for (size_t i = 0; i < fs.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return leading_position(J, a) < leading_position(J, b); });
    Mat acc(0, J.cols());
    for (int i : order) {
        Mat trial(acc.rows() + 1, J.cols());
        trial.topRows(acc.rows()) = acc;
        trial.row(acc.rows()) = J.row(i);
        if (rank(trial) > acc.rows()) {
            acc = trial;
            s.selected.push_back(i);
        }
    }
    s.rank = static_cast<int>(s.selected.size());
    if (s.rank == 0) return s;
    // Pivot coordinates: p-coordinates in reverse order, then base coordinates.
    std::vector<std::string> pref(chart.p_coords().rbegin(), chart.p_coords().rend());
    for (const auto& c : chart.ambient()->coords()) pref.push_back(c);
    Mat cols(acc.rows(), 0);
    for (const auto& v : pref) {
        Eigen::Index j = std::find(cc.begin(), cc.end(), v) - cc.begin();
        Mat trial(acc.rows(), cols.cols() + 1);
        trial.leftCols(cols.cols()) = cols;
        trial.col(cols.cols()) = acc.col(j);
        if (rank(trial) > cols.cols()) {
            cols = trial;
            s.pivots.push_back(v);
            if (static_cast<int>(s.pivots.size()) == s.rank) break;
        }
    }
    for (int i : s.selected) s.affine = s.affine && affine_in(fs[i], s.pivots);
    return s;
}

// Solves the selected functions for the pivot coordinates, other
// coordinates fixed at their values in `pt`. Exact when affine.
bool solve_pivots(const ProbeSetup& s, VarMap& pt, bool& exact)
{
    std::vector<Poly> fs;
    for (int i : s.selected) fs.push_back(s.funcs.functions[i].f);
    const size_t r = s.pivots.size();
    if (s.affine) {
        VarMap rest = pt;
        for (const auto& v : s.pivots) rest.erase(v);
        Mat A(static_cast<Eigen::Index>(fs.size()), static_cast<Eigen::Index>(r));
        Vec b(static_cast<Eigen::Index>(fs.size()));
        VarMap zero_piv = rest;
        for (const auto& v : s.pivots) zero_piv[v] = Rational(0);
        for (size_t i = 0; i < fs.size(); ++i) {
            for (size_t j = 0; j < r; ++j) A(i, j) = fs[i].diff(s.pivots[j]).evaluate(zero_piv);
            b(i) = -fs[i].evaluate(zero_piv);
        }
        try {
            Vec y = solve_unique(A, b);
            for (size_t j = 0; j < r; ++j) pt[s.pivots[j]] = y(j);
        } catch (const std::domain_error&) {
            return false;
        }
        exact = true;
        return true;
    }
    // Floating Newton from the current values, then dyadic rounding.
    Eigen::VectorXd y(r);
    for (size_t j = 0; j < r; ++j) y(j) = pt.at(s.pivots[j]).to_double();
    for (int it = 0; it < 60; ++it) {
        VarMap q = pt;
        for (size_t j = 0; j < r; ++j) q[s.pivots[j]] = round_dyadic(y(j), 52);
        Eigen::VectorXd F(fs.size());
        Eigen::MatrixXd Jd(fs.size(), r);
        for (size_t i = 0; i < fs.size(); ++i) {
            F(i) = fs[i].evaluate(q).to_double();
            for (size_t j = 0; j < r; ++j) Jd(i, j) = fs[i].diff(s.pivots[j]).evaluate(q).to_double();
        }
        if (F.norm() < 1e-12) break;
        Eigen::VectorXd step = Jd.colPivHouseholderQr().solve(F);
        if (!step.allFinite()) return false;
        y -= step;
    }
    for (size_t j = 0; j < r; ++j) pt[s.pivots[j]] = round_dyadic(y(j), 40);
    double res = 0;
    for (const auto& f : fs) res = std::max(res, std::abs(f.evaluate(pt).to_double()));
    if (!(res < 1e-9)) return false;
    exact = false;
    return true;
}

int float_rank(const Mat& M, double threshold)
{
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_double(M));
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > threshold) ++r;
    return r;
}

std::vector<ProbeSample> draw_samples(const IdealSpec& ideal, const GrassmannChart& chart, const ProbeSetup& s,
                                      const ProbeOptions& opt, int& attempts)
{
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<int> texp(4, 12), sign(0, 1);
    std::vector<ProbeSample> out;
    const auto& cc = chart.coords();
    std::vector<Poly> all;
    for (const auto& f : s.funcs.functions) all.push_back(f.f);
    std::vector<Poly> sel;
    for (int i : s.selected) sel.push_back(all[i]);
    attempts = 0;
    const int max_attempts = 4 * std::max(opt.samples, 1);
    while (static_cast<int>(out.size()) < opt.samples && attempts < max_attempts) {
        ++attempts;
        VarMap pt = s.at_e;
        for (const auto& c : cc) {
            if (std::find(s.pivots.begin(), s.pivots.end(), c) != s.pivots.end()) continue;
            Rational step = Rational(1) / pow(Rational(2), static_cast<unsigned>(texp(rng)));
            pt[c] = pt[c] + (sign(rng) ? step : -step);
        }
        ProbeSample smp;
        if (!s.pivots.empty() && !solve_pivots(s, pt, smp.exact)) continue;
        smp.chart_point = pt;
        smp.element = chart.element_at(pt);
        if (smp.exact) {
            for (const auto& f : all) smp.vanish = smp.vanish && f.evaluate(pt).is_zero();
            smp.jacobian_rank = sel.empty() ? 0 : static_cast<int>(rank(jacobian_at(sel, cc, pt)));
        } else {
            for (const auto& f : all) smp.vanish = smp.vanish && std::abs(f.evaluate(pt).to_double()) < 1e-9;
            smp.jacobian_rank = sel.empty() ? 0 : float_rank(jacobian_at(sel, cc, pt), 1e-7);
        }
        smp.ordinary = smp.vanish && smp.jacobian_rank == s.rank;
        if (smp.exact && smp.vanish) {
            smp.dim_h = polar_space(ideal, smp.element).dim;
        } else {
            Mat eq = polar_equations(ideal, smp.element);
            smp.dim_h = static_cast<int>(ideal.ambient->rank()) - float_rank(eq, 1e-7);
        }
        out.push_back(std::move(smp));
    }
    return out;
}

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
}

} // namespace

ProbeResult kahler_ordinary_probe(const IdealSpec& ideal, const IntegralElement& E, const GrassmannChart& chart, const ProbeOptions& opt)
{
    ProbeResult res;
    res.chart = chart.omega_str();
    if (!chart.contains(E)) throw std::invalid_argument("chart domain violation: Omega vanishes on the element");
    if (!is_integral_element(ideal, E)) {
        res.verdict = Verdict::Failed;
        res.reason = "element is not integral";
        return res;
    }
    ProbeSetup s = setup_probe(ideal, E, chart);
    auto& ev = res.evidence;
    for (const auto& f : s.funcs.functions) ev.functions.push_back(f.label + " = " + f.f.compact().str());
    for (const auto& sk : s.funcs.skipped) ev.notes.push_back("skipped " + sk);
    ev.selected = s.selected;
    ev.jacobian_rank = s.rank;
    ev.pivots = s.pivots;
    ev.affine = s.affine;

    for (const auto& f : s.funcs.functions)
        if (!f.f.evaluate(s.at_e).is_zero()) {
            res.verdict = Verdict::Failed;
            res.reason = "element is not a zero of " + f.label;
            return res;
        }
    bool nonzero_funcs = std::any_of(s.funcs.functions.begin(), s.funcs.functions.end(), [](const ChartFunction& f) { return !f.f.is_zero(); });
    if (s.rank == 0 && nonzero_funcs) {
        res.verdict = Verdict::Failed;
        res.reason = "chart functions are nonzero but all differentials vanish at the element";
        return res;
    }
    if (!nonzero_funcs) {
        res.verdict = Verdict::CertifiedAtSamples;
        res.reason = "no nonzero chart functions";
        ev.samples = draw_samples(ideal, chart, s, opt, ev.attempts);
        return res;
    }
    ev.samples = draw_samples(ideal, chart, s, opt, ev.attempts);
    if (static_cast<int>(ev.samples.size()) < opt.samples) {
        res.verdict = Verdict::Indeterminate;
        res.reason = "only " + std::to_string(ev.samples.size()) + " of " + std::to_string(opt.samples) + " nearby integral elements could be produced";
        return res;
    }
    for (size_t i = 0; i < ev.samples.size(); ++i) {
        const auto& smp = ev.samples[i];
        if (!smp.ordinary) {
            res.verdict = Verdict::Failed;
            res.reason = "sample " + std::to_string(i) + (smp.vanish ? " has selected Jacobian rank " + std::to_string(smp.jacobian_rank)
                                                                     : " is a zero of the selected functions but not of all chart functions");
            return res;
        }
    }
    res.verdict = Verdict::CertifiedAtSamples;
    std::ostringstream os;
    os << s.rank << " function(s) with independent differentials; " << ev.samples.size() << " samples solved for {" << join(s.pivots) << "}"
       << (s.affine ? " exactly" : " by Newton");
    res.reason = os.str();
    return res;
}

ProbeResult kahler_regular_probe(const IdealSpec& ideal, const IntegralElement& E, const GrassmannChart& chart, const ProbeOptions& opt)
{
    ProbeResult res = kahler_ordinary_probe(ideal, E, chart, opt);
    if (res.verdict != Verdict::CertifiedAtSamples) {
        res.reason = "ordinary probe " + to_string(res.verdict) + ": " + res.reason;
        return res;
    }
    auto& ev = res.evidence;
    ev.dim_h_at_element = polar_space(ideal, E).dim;
    std::optional<size_t> witness, witness_ord;
    for (size_t i = 0; i < ev.samples.size(); ++i) {
        if (ev.samples[i].dim_h != ev.dim_h_at_element) {
            if (!witness) witness = i;
            if (ev.samples[i].ordinary && !witness_ord) witness_ord = i;
        }
    }
    ev.constant_all = !witness.has_value();
    ev.constant_ordinary_only = !witness_ord.has_value();
    if (witness) {
        res.verdict = Verdict::Failed;
        res.reason = "dim H jumps: " + std::to_string(ev.dim_h_at_element) + " at the element vs " +
                     std::to_string(ev.samples[*witness].dim_h) + " at sample " + std::to_string(*witness);
        return res;
    }
    res.verdict = Verdict::CertifiedAtSamples;
    res.reason = "dim H = " + std::to_string(ev.dim_h_at_element) + " at the element and at all " + std::to_string(ev.samples.size()) + " samples";
    return res;
}

FlagResult flag_probe(const IdealSpec& ideal, const std::vector<IntegralElement>& flag, int l, const ProbeOptions& opt,
                      const std::vector<std::optional<std::vector<int>>>& charts)
{
    if (flag.empty()) throw std::invalid_argument("empty flag");
    FlagResult out;
    out.l = l;
    for (size_t i = 0; i < flag.size(); ++i) {
        check_element(ideal, flag[i]);
        if (flag[i].span.rows() != l + static_cast<Eigen::Index>(i))
            throw std::invalid_argument("wrong-dimension flag: member " + std::to_string(i + 1) + " has dimension " +
                                        std::to_string(flag[i].span.rows()) + ", expected " + std::to_string(l + static_cast<int>(i)));
        if (flag[i].base_point != flag[0].base_point) throw std::invalid_argument("flag members have different base points");
        if (i > 0) {
            Mat both(flag[i - 1].span.rows() + flag[i].span.rows(), flag[i].span.cols());
            both << flag[i - 1].span, flag[i].span;
            if (rank(both) != flag[i].span.rows())
                throw std::invalid_argument("non-nested flag: member " + std::to_string(i) + " is not contained in member " + std::to_string(i + 1));
        }
    }
    bool ok = true;
    for (const auto& E : flag) {
        out.integral.push_back(is_integral_element(ideal, E));
        ok = ok && out.integral.back();
    }
    if (!ok) out.reason = "not every member is integral";
    for (size_t i = 0; ok && i + 1 < flag.size(); ++i) {
        GrassmannChart chart = (i < charts.size() && charts[i]) ? GrassmannChart(ideal.ambient, *charts[i]) : default_chart(ideal.ambient, flag[i]);
        out.probes.push_back(kahler_regular_probe(ideal, flag[i], chart, opt));
        if (out.probes.back().verdict != Verdict::CertifiedAtSamples) {
            ok = false;
            out.reason = "member " + std::to_string(i + 1) + ": " + out.probes.back().reason;
        }
    }
    out.ordinary = ok;
    out.verdict = ok ? std::to_string(l) + "-ORDINARY-AT-SAMPLES" : "NOT " + std::to_string(l) + "-ORDINARY";
    if (ok) out.reason = flag.size() == 1 ? "single member is integral" : "all members but the last are Kaehler-regular at samples";
    return out;
}

} // namespace edskit
