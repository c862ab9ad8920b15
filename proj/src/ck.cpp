#include "edskit/ck.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace edskit {

namespace {

using PolyVec = std::vector<Poly>;

Vec zero_vec(Eigen::Index n)
{
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Rational(0);
    return v;
}

Vec unit_vec(Eigen::Index n, Eigen::Index k)
{
    Vec v = zero_vec(n);
    v(k) = Rational(1);
    return v;
}

Mat rows_to_mat(const std::vector<Vec>& rows, Eigen::Index cols)
{
    Mat M(static_cast<Eigen::Index>(rows.size()), cols);
    for (size_t i = 0; i < rows.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return M;
}

bool same_rows(const Mat& A, const Mat& B)
{
    return same_column_span(Mat(A.transpose()), Mat(B.transpose()));
}

// gamma-bar for a structure in split form: base vector -> fiber vector.
template <class T>
std::vector<T> gamma_bar(const AlgebroidStructure& A, const std::vector<T>& w, const T& zero)
{
    std::vector<T> out(A.rank(), zero);
    for (size_t j = 0; j < w.size(); ++j) out[A.splitting_label(static_cast<int>(j))] = w[j];
    return out;
}

Vec anchor_image(const AlgebroidStructure& A, const Vec& v)
{
    Vec out = zero_vec(static_cast<Eigen::Index>(A.dim()));
    for (size_t j = 0; j < A.dim(); ++j) out(static_cast<Eigen::Index>(j)) = v(A.splitting_label(static_cast<int>(j)));
    return out;
}

Mat kernel_rows(const AlgebroidStructure& A)
{
    auto ker = A.kernel_labels();
    Mat K = rational_zero(static_cast<Eigen::Index>(ker.size()), static_cast<Eigen::Index>(A.rank()));
    for (size_t a = 0; a < ker.size(); ++a) K(static_cast<Eigen::Index>(a), ker[a]) = Rational(1);
    return K;
}

void require_split_form(const StructurePtr& A)
{
    if (!A) throw std::invalid_argument("ideal without ambient structure");
    auto rep = validate_structure(A);
    if (!rep.split_form.empty()) throw std::invalid_argument("ambient structure is not in split form: " + rep.split_form.front());
}

Poly coefficient_of_power(const Poly& f, int var, unsigned power)
{
    Poly::TermMap out;
    for (const auto& [e, c] : f.terms())
        if (e[var] == power) {
            Exponent k = e;
            k[var] = 0;
            out.emplace(k, c);
        }
    return Poly(f.vars(), out);
}

Poly shift_power(const Poly& f, int var, unsigned by)
{
    Poly::TermMap out;
    for (const auto& [e, c] : f.terms()) {
        Exponent k = e;
        k[var] += by;
        out.emplace(k, c);
    }
    return Poly(f.vars(), out);
}

std::string join(const std::vector<std::string>& v, const char* sep = ", ")
{
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

// Symbolic data of one extension problem over the chart variables.
struct ChartData {
    std::vector<std::string> vars;   // x, y, u, p
    std::vector<std::string> u;
    std::vector<std::vector<std::string>> p;
    PolyVec z;                       // base coordinates
    std::vector<PolyVec> frame;      // kernel units, then gamma(dz/dx^i)
    std::vector<std::string> frame_names;
    std::vector<std::map<MultiIndex, Poly>> coeffs; // closed generators on the chart
};

ChartData chart_data(const ExtensionProblem& P, bool with_y)
{
    const auto& A = *P.ideal.ambient;
    const auto& ch = P.chart;
    ChartData d;
    d.vars = ch.x_names;
    if (with_y) d.vars.push_back(ch.y_name);
    for (int s = 0; s < ch.s(); ++s) d.u.push_back("u" + std::to_string(s + 1));
    d.p.assign(ch.s(), {});
    for (int s = 0; s < ch.s(); ++s)
        for (int i = 0; i < ch.p(); ++i) d.p[s].push_back("p" + std::to_string(s + 1) + "_" + std::to_string(i + 1));
    for (const auto& u : d.u) d.vars.push_back(u);
    for (const auto& row : d.p)
        for (const auto& v : row) d.vars.push_back(v);

    const auto& V = d.vars;
    const size_t n = A.dim();
    auto U = [&](int s) { return s < static_cast<int>(P.u_on_current.size()) ? P.u_on_current[s].with_vars(V) : Poly(V); };
    for (size_t j = 0; j < n; ++j) {
        const Eigen::Index J = static_cast<Eigen::Index>(j);
        Poly zj = Poly::constant(ch.base_point.at(A.coords()[j]), V);
        for (int i = 0; i < ch.p(); ++i) zj += Poly::variable(ch.x_names[i], V) * ch.x_directions[i](J);
        if (with_y) zj += Poly::variable(ch.y_name, V) * ch.y_direction(J);
        for (int s = 0; s < ch.s(); ++s) zj += (U(s) + Poly::variable(d.u[s], V)) * ch.u_directions[s](J);
        d.z.push_back(zj);
    }
    const Poly zero(V);
    for (int k : A.kernel_labels()) {
        PolyVec e(A.rank(), zero);
        e[k] = Poly::constant(1, V);
        d.frame.push_back(e);
        d.frame_names.push_back(A.basis()[k].name);
    }
    for (int i = 0; i < ch.p(); ++i) {
        PolyVec w(n, zero);
        for (size_t j = 0; j < n; ++j) {
            const Eigen::Index J = static_cast<Eigen::Index>(j);
            w[j] = Poly::constant(ch.x_directions[i](J), V);
            for (int s = 0; s < ch.s(); ++s)
                w[j] += (U(s).diff(ch.x_names[i]) + Poly::variable(d.p[s][i], V)) * ch.u_directions[s](J);
        }
        d.frame.push_back(gamma_bar(A, w, zero));
        d.frame_names.push_back("X" + std::to_string(i + 1));
    }
    std::map<std::string, Poly> subst;
    for (size_t j = 0; j < n; ++j) subst.emplace(A.coords()[j], d.z[j]);
    for (const auto& w : P.ideal.closed_generators) {
        std::map<MultiIndex, Poly> c;
        for (const auto& [I, f] : w.terms()) c.emplace(I, f.substitute(subst).with_vars(V));
        d.coeffs.push_back(std::move(c));
    }
    return d;
}

std::vector<PolarRow> all_rows(const ExtensionProblem& P, const ChartData& d)
{
    std::vector<PolarRow> out;
    const int F = static_cast<int>(d.frame.size());
    for (size_t g = 0; g < P.ideal.closed_generators.size(); ++g) {
        const int deg = P.ideal.closed_generators[g].degree();
        if (deg - 1 > F) continue;
        const std::string& name = g < P.ideal.labels.size() ? P.ideal.labels[g] : "g" + std::to_string(g + 1);
        for (const auto& J : increasing_tuples(F, deg - 1)) {
            std::vector<std::string> parts{"v"};
            for (int j : J) parts.push_back(d.frame_names[j]);
            out.push_back({static_cast<int>(g), std::vector<int>(J.begin(), J.end()), name + "(" + join(parts, ",") + ")"});
        }
    }
    return out;
}

Poly row_value(const ChartData& d, const PolarRow& row, const PolyVec& v)
{
    std::vector<PolyVec> vecs{v};
    for (int j : row.subset) vecs.push_back(d.frame[j]);
    const Poly zero(d.vars), one = Poly::constant(1, d.vars);
    return alternating_eval(d.coeffs[row.generator], vecs, zero, one);
}

PolyVec gamma_of(const AlgebroidStructure& A, const Vec& w, const std::vector<std::string>& V)
{
    PolyVec pw;
    for (Eigen::Index j = 0; j < w.size(); ++j) pw.push_back(Poly::constant(w(j), V));
    return gamma_bar(A, pw, Poly(V));
}

VarMap zero_point(const std::vector<std::string>& vars)
{
    VarMap m;
    for (const auto& v : vars) m[v] = Rational(0);
    return m;
}

} // namespace

Mat AdaptedChart::frame() const
{
    std::vector<Vec> rows(x_directions);
    rows.push_back(y_direction);
    rows.insert(rows.end(), u_directions.begin(), u_directions.end());
    rows.insert(rows.end(), v_directions.begin(), v_directions.end());
    return rows_to_mat(rows, y_direction.size());
}

SeriesManifold ExtensionProblem::current() const
{
    const auto& A = *ideal.ambient;
    const auto& V = chart.x_names;
    SeriesManifold m{ideal.ambient, V, {}, order};
    for (size_t j = 0; j < A.dim(); ++j) {
        const Eigen::Index J = static_cast<Eigen::Index>(j);
        Poly zj = Poly::constant(chart.base_point.at(A.coords()[j]), V);
        for (int i = 0; i < chart.p(); ++i) zj += Poly::variable(V[i], V) * chart.x_directions[i](J);
        for (int s = 0; s < chart.s() && s < static_cast<int>(u_on_current.size()); ++s) zj += u_on_current[s].with_vars(V) * chart.u_directions[s](J);
        m.components.push_back(zj.truncated(order));
    }
    return m;
}

void check_problem(const ExtensionProblem& P)
{
    require_split_form(P.ideal.ambient);
    const auto& A = *P.ideal.ambient;
    const Eigen::Index n = static_cast<Eigen::Index>(A.dim());
    const auto& ch = P.chart;
    if (P.order < 1) throw std::invalid_argument("truncation order must be positive");
    for (const auto& c : A.coords())
        if (!ch.base_point.count(c)) throw std::invalid_argument("base point misses coordinate '" + c + "'");
    if (static_cast<int>(ch.x_names.size()) != ch.p()) throw std::invalid_argument("one name per x-direction is required");
    std::vector<std::string> names = ch.x_names;
    names.push_back(ch.y_name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) throw std::invalid_argument("repeated domain variable name");
    Mat F = ch.frame();
    if (F.cols() != n || F.rows() != n)
        throw std::invalid_argument("partition sizes p + 1 + s + r = " + std::to_string(F.rows()) + " differ from the base dimension " + std::to_string(n));
    if (rank(F) != n) throw std::invalid_argument("degenerate partition: the adapted directions do not form a basis (is y already tangent to M?)");
    if (static_cast<int>(P.u_on_current.size()) > ch.s()) throw std::invalid_argument("more u-values than u-directions");
    for (const auto& u : P.u_on_current) {
        for (const auto& v : u.vars())
            if (u.depends_on(v) && std::find(ch.x_names.begin(), ch.x_names.end(), v) == ch.x_names.end())
                throw std::invalid_argument("u-value depends on '" + v + "', which is not an x-coordinate");
        if (!u.constant_term().is_zero()) throw std::invalid_argument("current manifold does not pass through the base point");
    }
}

TransversalityVerdict check_transversality(const ExtensionProblem& P, int samples)
{
    check_problem(P);
    const auto& A = *P.ideal.ambient;
    const auto& ch = P.chart;
    const Eigen::Index N = static_cast<Eigen::Index>(A.rank());
    TransversalityVerdict out;
    out.points.push_back(zero_point(ch.x_names));
    for (int k = 1; k < samples && ch.p() > 0; ++k) {
        VarMap pt;
        for (int i = 0; i < ch.p(); ++i) {
            Rational step = Rational(1) / pow(Rational(2), static_cast<unsigned>(6 + k + i));
            pt[ch.x_names[i]] = (k + i) % 2 ? step : -step;
        }
        out.points.push_back(pt);
    }
    ChartData d = chart_data(P, false);
    std::vector<Vec> directions;
    for (Eigen::Index a = 0; a < kernel_rows(A).rows(); ++a) directions.push_back(kernel_rows(A).row(a).transpose());
    auto add_gamma = [&](const Vec& w) {
        std::vector<Rational> g = gamma_bar(A, std::vector<Rational>(w.data(), w.data() + w.size()), Rational(0));
        directions.push_back(Eigen::Map<Vec>(g.data(), N));
    };
    for (const auto& w : ch.x_directions) add_gamma(w);
    add_gamma(ch.y_direction);
    for (const auto& w : ch.u_directions) add_gamma(w);
    Mat R = rows_to_mat(directions, N);

    for (size_t k = 0; k < out.points.size(); ++k) {
        VarMap cp = zero_point(d.vars);
        for (const auto& [v, x] : out.points[k]) cp[v] = x;
        IntegralElement F;
        for (size_t j = 0; j < A.dim(); ++j) F.base_point[A.coords()[j]] = d.z[j].evaluate(cp);
        F.span = Mat(static_cast<Eigen::Index>(d.frame.size()), N);
        for (size_t r = 0; r < d.frame.size(); ++r)
            for (Eigen::Index c = 0; c < N; ++c) F.span(static_cast<Eigen::Index>(r), c) = d.frame[r][c].evaluate(cp);
        Mat eq = polar_equations(P.ideal, F);
        Mat H = eq.rows() ? Mat(Mat(nullspace(eq)).transpose()) : rational_identity(N);
        Mat both(R.rows() + H.rows(), N);
        both << R, H;
        int rk = static_cast<int>(rank(both));
        if (k == 0) out.rank = rk;
        if (rk != N) {
            out.pass = false;
            out.witness = k;
            out.rank = rk;
            out.reason = "rank " + std::to_string(rk) + " < " + std::to_string(N) + " at sample " + std::to_string(k);
            return out;
        }
    }
    out.pass = true;
    out.reason = "rank " + std::to_string(N) + " at " + std::to_string(out.points.size()) + " point(s)";
    return out;
}

NormalizedPolar normalize_polar_forms(const ExtensionProblem& P)
{
    check_problem(P);
    const auto& A = *P.ideal.ambient;
    const auto& ch = P.chart;
    const int s = ch.s();
    ChartData d = chart_data(P, true);
    VarMap origin = zero_point(d.vars);
    auto rows = all_rows(P, d);
    Mat full(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(A.rank()));
    Mat ublock(static_cast<Eigen::Index>(rows.size()), s);
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t b = 0; b < A.rank(); ++b) {
            PolyVec e(A.rank(), Poly(d.vars));
            e[b] = Poly::constant(1, d.vars);
            full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) = row_value(d, rows[r], e).evaluate(origin);
        }
        for (int t = 0; t < s; ++t)
            ublock(static_cast<Eigen::Index>(r), t) = row_value(d, rows[r], gamma_of(A, ch.u_directions[t], d.vars)).evaluate(origin);
    }
    NormalizedPolar out;
    out.polar_rank = static_cast<int>(rank(full));
    if (out.polar_rank != s)
        throw std::domain_error("polar equations at the base point have rank " + std::to_string(out.polar_rank) + ", expected s = " + std::to_string(s));
    Mat sel(0, s);
    for (size_t r = 0; r < rows.size() && sel.rows() < s; ++r) {
        Mat trial(sel.rows() + 1, s);
        trial.topRows(sel.rows()) = sel;
        trial.row(sel.rows()) = ublock.row(static_cast<Eigen::Index>(r));
        if (rank(trial) > sel.rows()) {
            sel = trial;
            out.rows.push_back(rows[r]);
        }
    }
    if (sel.rows() < s) throw std::domain_error("polar rows are degenerate on the u-block at the base point");
    out.normalization = s ? Mat(inverse(sel)) : Mat(0, 0);
    return out;
}

std::vector<std::string> CauchyProblem::chart_vars() const
{
    std::vector<std::string> v = domain();
    v.insert(v.end(), u_names.begin(), u_names.end());
    for (const auto& row : p_names) v.insert(v.end(), row.begin(), row.end());
    return v;
}

std::vector<std::string> CauchyProblem::domain() const
{
    std::vector<std::string> v = x_names;
    v.push_back(y_name);
    return v;
}

CauchyProblem assemble_G(const ExtensionProblem& P, const NormalizedPolar& kappa)
{
    check_problem(P);
    const auto& A = *P.ideal.ambient;
    const auto& ch = P.chart;
    const int s = ch.s();
    if (static_cast<int>(kappa.rows.size()) != s) throw std::invalid_argument("need one normalized polar form per u-direction");
    ChartData d = chart_data(P, true);
    CauchyProblem out;
    out.x_names = ch.x_names;
    out.y_name = ch.y_name;
    out.u_names = d.u;
    out.p_names = d.p;
    out.order = P.order;
    const Poly zero(d.vars), one = Poly::constant(1, d.vars);

    PolyVec raw_a;
    std::vector<PolyVec> raw_b;
    for (const auto& row : kappa.rows) {
        raw_a.push_back(row_value(d, row, gamma_of(A, ch.y_direction, d.vars)));
        PolyVec b;
        for (int t = 0; t < s; ++t) b.push_back(row_value(d, row, gamma_of(A, ch.u_directions[t], d.vars)));
        raw_b.push_back(b);
    }
    PolyVec Av(s, zero);
    std::vector<PolyVec> B(s, PolyVec(s, zero));
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) {
            const Rational& m = kappa.normalization(i, k);
            if (m.is_zero()) continue;
            Av[i] += raw_a[k] * m;
            for (int t = 0; t < s; ++t) B[i][t] += raw_b[k][t] * m;
        }
    out.denominator = s ? ring_det(B, zero, one) : one;
    if (out.denominator.evaluate(zero_point(d.vars)).is_zero()) throw std::domain_error("B is singular at the base point");
    // Cramer: G^sigma = -det(B with column sigma replaced by A) / det B.
    for (int sg = 0; sg < s; ++sg) {
        auto Bs = B;
        for (int i = 0; i < s; ++i) Bs[i][sg] = Av[i];
        out.numerators.push_back(-ring_det(Bs, zero, one));
    }
    return out;
}

namespace {

SeriesArgs cauchy_args(const CauchyProblem& C, const std::vector<TruncatedSeries>& F)
{
    const auto dom = C.domain();
    SeriesArgs args;
    for (const auto& v : dom) args.emplace(v, TruncatedSeries::variable(v, dom, C.order));
    for (size_t s = 0; s < C.u_names.size(); ++s) {
        args.emplace(C.u_names[s], F[s]);
        for (size_t i = 0; i < C.x_names.size(); ++i) args.emplace(C.p_names[s][i], F[s].diff(C.x_names[i]));
    }
    return args;
}

std::vector<TruncatedSeries> evaluate_G(const CauchyProblem& C, const std::vector<TruncatedSeries>& F)
{
    const auto dom = C.domain();
    SeriesArgs args = cauchy_args(C, F);
    TruncatedSeries D = series_compose(C.denominator.with_vars(C.chart_vars()), args, C.order);
    TruncatedSeries Dinv = series_matrix_invert({{D}}, C.order)[0][0];
    std::vector<TruncatedSeries> G;
    for (const auto& num : C.numerators) G.push_back(series_compose(num.with_vars(C.chart_vars()), args, C.order) * Dinv);
    return G;
}

} // namespace

std::vector<TruncatedSeries> cauchy_residual(const CauchyProblem& C, const std::vector<TruncatedSeries>& F)
{
    auto G = evaluate_G(C, F);
    std::vector<TruncatedSeries> out;
    for (size_t s = 0; s < F.size(); ++s) out.push_back(F[s].diff(C.y_name) - G[s]);
    return out;
}

std::vector<TruncatedSeries> solve_cauchy(const CauchyProblem& C)
{
    if (C.order < 1) throw std::invalid_argument("truncation order must be positive");
    if (C.numerators.size() != C.u_names.size()) throw std::invalid_argument("one right-hand side per unknown is required");
    const auto dom = C.domain();
    const int y = static_cast<int>(dom.size()) - 1;
    if (C.denominator.with_vars(C.chart_vars()).evaluate(zero_point(C.chart_vars())).is_zero())
        throw std::domain_error("denominator of G vanishes at the origin");
    std::vector<TruncatedSeries> F(C.u_names.size(), TruncatedSeries::zero(dom, C.order));
    for (int j = 0; j < C.order && !F.empty(); ++j) {
        auto G = evaluate_G(C, F);
        for (size_t s = 0; s < F.size(); ++s) {
            Poly cj = coefficient_of_power(G[s].poly(), y, static_cast<unsigned>(j));
            F[s] += TruncatedSeries(shift_power(cj, y, static_cast<unsigned>(j + 1)) * (Rational(1) / Rational(j + 1)), C.order);
        }
    }
    auto res = cauchy_residual(C, F);
    for (size_t s = 0; s < res.size(); ++s)
        if (!res[s].poly().truncated(C.order - 1).is_zero())
            throw std::runtime_error("Cauchy residual of unknown " + std::to_string(s + 1) + " does not vanish through degree " +
                                     std::to_string(C.order - 1) + ": " + res[s].poly().truncated(C.order - 1).str());
    return F;
}

ExtensionResult extend_once(const ExtensionProblem& P)
{
    check_problem(P);
    const auto& A = *P.ideal.ambient;
    const auto& ch = P.chart;
    ExtensionResult out;
    out.transversality = check_transversality(P);
    if (!out.transversality.pass) throw std::runtime_error("transversality fails: " + out.transversality.reason);
    out.kappa = normalize_polar_forms(P);
    out.cauchy = assemble_G(P, out.kappa);
    auto F = solve_cauchy(out.cauchy);

    const auto dom = out.cauchy.domain();
    for (int s = 0; s < ch.s(); ++s) {
        Poly u = s < static_cast<int>(P.u_on_current.size()) ? P.u_on_current[s].with_vars(dom) : Poly(dom);
        out.u_values.push_back((u + F[s].poly()).truncated(P.order));
    }
    out.manifold = SeriesManifold{P.ideal.ambient, dom, {}, P.order};
    for (size_t j = 0; j < A.dim(); ++j) {
        const Eigen::Index J = static_cast<Eigen::Index>(j);
        Poly zj = Poly::constant(ch.base_point.at(A.coords()[j]), dom);
        for (int i = 0; i < ch.p(); ++i) zj += Poly::variable(ch.x_names[i], dom) * ch.x_directions[i](J);
        zj += Poly::variable(ch.y_name, dom) * ch.y_direction(J);
        for (int s = 0; s < ch.s(); ++s) zj += out.u_values[s] * ch.u_directions[s](J);
        out.manifold.components.push_back(zj);
    }
    SeriesManifold back = out.manifold.restrict_to_zero(ch.y_name);
    SeriesManifold M = P.current();
    for (size_t j = 0; j < A.dim(); ++j)
        if (back.components[j].with_vars(M.domain) != M.components[j])
            throw std::runtime_error("extension does not contain the current manifold in coordinate " + A.coords()[j]);
    out.verification = verify_integral_manifold(out.manifold, P.ideal, P.order);
    if (!out.verification.clean()) throw std::runtime_error("extension is not integral: " + out.verification.summary());
    return out;
}

SeriesManifold reparametrize_linear(const SeriesManifold& m, const Mat& T, const std::vector<std::string>& new_domain)
{
    if (T.rows() != static_cast<Eigen::Index>(m.domain.size()) || T.cols() != static_cast<Eigen::Index>(new_domain.size()))
        throw std::invalid_argument("reparametrization matrix has the wrong shape");
    std::map<std::string, Poly> subst;
    for (size_t i = 0; i < m.domain.size(); ++i) {
        Poly v(new_domain);
        for (size_t k = 0; k < new_domain.size(); ++k)
            v += Poly::variable(new_domain[k], new_domain) * T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        subst.emplace(m.domain[i], v);
    }
    SeriesManifold out{m.ambient, new_domain, {}, m.order};
    for (const auto& c : m.components) {
        Poly r = c.substitute(subst).with_vars(new_domain);
        out.components.push_back(m.order ? r.truncated(*m.order) : r);
    }
    return out;
}

CkResult build_from_flag(const IdealSpec& ideal, const std::vector<IntegralElement>& flag, int order, const FlagResult* certificate)
{
    require_split_form(ideal.ambient);
    const auto& A = *ideal.ambient;
    const Eigen::Index n = static_cast<Eigen::Index>(A.dim());
    const Eigen::Index N = static_cast<Eigen::Index>(A.rank());
    if (order < 2) throw std::invalid_argument("truncation order must be at least 2");
    if (flag.empty()) throw std::invalid_argument("empty flag");
    const int l = static_cast<int>(A.kernel_labels().size());
    for (size_t i = 0; i < flag.size(); ++i) {
        if (flag[i].span.rows() != l + static_cast<Eigen::Index>(i))
            throw std::invalid_argument("flag member " + std::to_string(i + 1) + " has dimension " + std::to_string(flag[i].span.rows()) +
                                        ", expected " + std::to_string(l + static_cast<int>(i)));
        if (flag[i].base_point != flag[0].base_point) throw std::invalid_argument("flag members have different base points");
        if (!is_integral_element(ideal, flag[i])) throw std::invalid_argument("flag member " + std::to_string(i + 1) + " is not integral");
        if (i > 0) {
            Mat both(flag[i - 1].span.rows() + flag[i].span.rows(), N);
            both << flag[i - 1].span, flag[i].span;
            if (rank(both) != flag[i].span.rows()) throw std::invalid_argument("non-nested flag at member " + std::to_string(i + 1));
        }
    }
    if (!same_rows(flag[0].span, kernel_rows(A))) throw std::invalid_argument("first flag member is not the kernel of the anchor");
    if (certificate && !certificate->ordinary) throw std::invalid_argument("flag is not ordinary: " + certificate->reason);

    CkResult res;
    auto& tr = res.transcript;
    tr.tag = certificate ? "CERTIFIED-AT-SAMPLES" : "PROVISIONAL";
    const VarMap& z0 = flag[0].base_point;
    const int p = static_cast<int>(flag.size()) - 1;

    for (int q = 1; q <= p; ++q) {
        const Mat& prev = flag[q - 1].span;
        for (Eigen::Index r = 0; r < flag[q].span.rows(); ++r) {
            Mat trial(prev.rows() + 1, N);
            trial << prev, flag[q].span.row(r);
            if (rank(trial) > prev.rows()) {
                tr.xi.push_back(anchor_image(A, flag[q].span.row(r).transpose()));
                break;
            }
        }
    }
    std::vector<Mat> W;
    for (int q = 0; q < p; ++q) {
        PolarSpace H = polar_space(ideal, flag[q]);
        std::vector<Vec> img;
        for (Eigen::Index r = 0; r < H.basis.rows(); ++r) img.push_back(anchor_image(A, H.basis.row(r).transpose()));
        W.push_back(rows_to_mat(img, n));
        tr.codims.push_back(static_cast<int>(n - rank(W.back())));
        if (q > 0 && tr.codims[q] < tr.codims[q - 1]) throw std::runtime_error("codimensions of the polar spaces decrease along the flag");
    }

    Mat Xi = rows_to_mat(tr.xi, n);
    std::vector<int> pivots;
    for (auto c : rref(Xi).pivots) pivots.push_back(static_cast<int>(c));
    std::vector<int> free_coords;
    for (int j = 0; j < n; ++j)
        if (std::find(pivots.begin(), pivots.end(), j) == pivots.end()) free_coords.push_back(j);
    auto complete = [&](const Mat& base) {
        Mat acc(base.rows() + static_cast<Eigen::Index>(tr.eta.size()), n);
        acc << base, rows_to_mat(tr.eta, n);
        for (int j : free_coords) {
            if (rank(acc) == n) break;
            Mat trial(acc.rows() + 1, n);
            trial << acc, unit_vec(n, j).transpose();
            if (rank(trial) > rank(acc)) {
                acc = trial;
                tr.eta.push_back(unit_vec(n, j));
            }
        }
        if (rank(acc) != n) throw std::runtime_error("cannot complete the adapted frame");
    };
    for (int q = 0; q < p; ++q) {
        complete(W[q]);
        if (static_cast<int>(tr.eta.size()) != tr.codims[q]) throw std::runtime_error("u-block size differs from the polar codimension");
    }
    complete(Xi);

    std::vector<Poly> u_values;
    SeriesManifold current{ideal.ambient, {}, {}, order};
    for (const auto& c : A.coords()) current.components.push_back(Poly::constant(z0.at(c), {}));
    for (int q = 0; q < p; ++q) {
        ExtensionProblem P;
        P.ideal = ideal;
        P.order = order;
        auto& ch = P.chart;
        ch.base_point = z0;
        for (int i = 0; i < q; ++i) {
            ch.x_names.push_back("x" + std::to_string(i + 1));
            ch.x_directions.push_back(tr.xi[i]);
        }
        ch.y_name = "x" + std::to_string(q + 1);
        ch.y_direction = tr.xi[q];
        for (int s = 0; s < static_cast<int>(tr.eta.size()); ++s) (s < tr.codims[q] ? ch.u_directions : ch.v_directions).push_back(tr.eta[s]);
        for (int i = q + 1; i < p; ++i) ch.v_directions.push_back(tr.xi[i]);
        P.u_on_current = u_values;

        CkStep step;
        step.q = q;
        step.chart = ch;
        step.c = tr.codims[q];
        ExtensionResult ext;
        try {
            ext = extend_once(P);
        } catch (const std::exception& e) {
            throw std::runtime_error("step " + std::to_string(q) + ": " + e.what());
        }
        for (const auto& r : ext.kappa.rows) step.kappa.push_back(r.label);
        step.transversality = ext.transversality.reason;
        step.verification = ext.verification.summary();
        tr.steps.push_back(step);
        u_values = ext.u_values;
        current = ext.manifold;
    }

    // Rename the domain after the pivot coordinates of the flag directions.
    if (p > 0) {
        Mat Xp(p, p);
        for (int i = 0; i < p; ++i)
            for (int k = 0; k < p; ++k) Xp(i, k) = tr.xi[i](pivots[k]);
        for (int k = 0; k < p; ++k) tr.domain.push_back(A.coords()[pivots[k]]);
        current = reparametrize_linear(current, Mat(inverse(Mat(Xp.transpose()))), tr.domain);
    }
    res.manifold = current;

    VerificationReport rep = verify_integral_manifold(res.manifold, ideal, order);
    tr.final_verification = rep.summary();
    if (!rep.clean()) throw std::runtime_error("final manifold is not integral: " + rep.summary());
    Mat J = res.manifold.jacobian_at_origin();
    std::vector<Vec> img;
    for (Eigen::Index a = 0; a < kernel_rows(A).rows(); ++a) img.push_back(kernel_rows(A).row(a).transpose());
    for (Eigen::Index c = 0; c < J.cols(); ++c) {
        std::vector<Rational> w(static_cast<size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) w[static_cast<size_t>(j)] = J(j, c);
        std::vector<Rational> g = gamma_bar(A, w, Rational(0));
        img.push_back(Eigen::Map<Vec>(g.data(), N));
    }
    tr.span_matches_top = same_rows(rows_to_mat(img, N), flag.back().span);
    if (!tr.span_matches_top) throw std::runtime_error("prolonged tangent space at the base point differs from the top of the flag");
    return res;
}

} // namespace edskit
