#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "builders.hpp"
#include "oracles.hpp"
#include "edskit/ck.hpp"
#include "edskit/eds.hpp"
#include "edskit/linalg.hpp"
#include "edskit/prolongation.hpp"

#include <random>

using namespace edskit;

namespace {

constexpr int kCases = 200;

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    bool coin() { return integer(0, 1) == 1; }
    // Grid of halves in [-2, 2].
    Rational grid() { return Rational(integer(-4, 4)) / Rational(2); }

    Poly poly(const std::vector<std::string>& vars, int max_deg = 2, int max_terms = 3, int min_deg = 0)
    {
        Poly out(vars);
        int terms = integer(0, max_terms);
        for (int t = 0; t < terms; ++t) {
            Exponent e(vars.size(), 0);
            int deg = integer(min_deg, max_deg);
            for (int d = 0; d < deg; ++d) ++e[static_cast<size_t>(integer(0, static_cast<int>(vars.size()) - 1))];
            out += Poly::monomial(Rational(integer(-3, 3)), e, vars);
        }
        return out;
    }

    AlgebroidForm form(const StructurePtr& A, int k)
    {
        AlgebroidForm w(A, k);
        if (k == 0) return AlgebroidForm::function(A, poly(A->coords()));
        int terms = integer(1, 3);
        for (int t = 0; t < terms; ++t) {
            MultiIndex I;
            for (int j = 0; j < k; ++j) I.push_back(integer(0, static_cast<int>(A->rank()) - 1));
            w.add_term(I, poly(A->coords()));
        }
        return w;
    }

    Vec vec(Eigen::Index n)
    {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = grid();
        return v;
    }
};

bool is_zero_form(const AlgebroidForm& w)
{
    for (const auto& [I, f] : w.terms())
        if (!f.is_zero()) return false;
    return true;
}

bool same_form(const AlgebroidForm& a, const AlgebroidForm& b) { return is_zero_form(a - b); }

// Frame of the Heisenberg group on R^3 plus a kernel line: rho(e2) = d/dy + x d/dz,
// [e1, e2] = e3, [e1, k] = k.
StructurePtr heisenberg()
{
    std::vector<std::string> x{"x", "y", "z"};
    std::vector<BasisLabel> b{{"e1", LabelKind::Splitting, "x"},
                              {"e2", LabelKind::Splitting, "y"},
                              {"e3", LabelKind::Splitting, "z"},
                              {"k", LabelKind::Kernel, ""}};
    auto A = std::make_shared<AlgebroidStructure>(x, b, Poly(x));
    A->set_anchor(1, 2, Poly::variable("x", x));
    A->set_bracket(0, 1, 2, Poly::constant(1, x));
    A->set_bracket(0, 3, 3, Poly::constant(1, x));
    return A;
}

VarMap random_point(Gen& g, const StructurePtr& A)
{
    VarMap z;
    for (const auto& c : A->coords()) z[c] = g.grid();
    return z;
}

Mat stack(const Mat& top, const Vec& row)
{
    Mat out(top.rows() + 1, top.cols());
    out.topRows(top.rows()) = top;
    out.row(top.rows()) = row.transpose();
    return out;
}

// Oracle membership in H(E): every closed generator of degree d <= k + 1
// vanishes on (v, E_J) for every (d - 1)-subset J, by permutation sums.
bool polar_by_brute_force(const IdealSpec& ideal, const IntegralElement& E, const Vec& v)
{
    const int k = static_cast<int>(E.span.rows());
    auto as_raw = [](const Vec& x) {
        std::vector<Rational> r;
        for (Eigen::Index i = 0; i < x.size(); ++i) r.push_back(x(i));
        return r;
    };
    for (const auto& w : ideal.closed_generators) {
        const int d = w.degree();
        if (d > k + 1) continue;
        std::map<MultiIndex, Rational> flat;
        for (const auto& [I, f] : w.terms()) flat[I] = f.evaluate(E.base_point);
        for (const auto& J : increasing_tuples(k, d - 1)) {
            std::vector<std::vector<Rational>> vecs{as_raw(v)};
            for (int j : J) vecs.push_back(as_raw(E.span.row(j).transpose()));
            if (oracle::brute_force_evaluate(flat, vecs) != Rational(0)) return false;
        }
    }
    return true;
}

// A random integral line: a random vector pushed onto the annihilator of the
// degree-one generators by fixing one coordinate.
Vec ip_line(Gen& g, const VarMap& z)
{
    Vec v = g.vec(6);
    v(3) = -(z.at("P") * v(1) + z.at("Q") * v(2));
    return v;
}

Vec r3_line(Gen& g, const VarMap& z)
{
    Vec v = g.vec(4);
    v(1) = Rational(0);
    v(2) = z.at("x2") * v(0);
    return v;
}

} // namespace

TEST_CASE("delta squares to zero")
{
    Gen g(101);
    std::vector<StructurePtr> structures{build::ip_prolonged(), heisenberg(), build::simple_r3()};
    for (const auto& A : structures) {
        auto report = validate_structure(A);
        REQUIRE(report.jacobi.empty());
        REQUIRE(report.anchor_compatibility.empty());
    }
    for (int c = 0; c < kCases; ++c) {
        const auto& A = structures[static_cast<size_t>(c) % structures.size()];
        auto w = g.form(A, g.integer(0, 2));
        CAPTURE(form_str(w));
        CHECK(is_zero_form(delta(delta(w))));
    }
}

TEST_CASE("delta is a graded derivation")
{
    Gen g(202);
    std::vector<StructurePtr> structures{build::ip_prolonged(), heisenberg()};
    for (int c = 0; c < kCases; ++c) {
        const auto& A = structures[static_cast<size_t>(c) % structures.size()];
        const int p = g.integer(0, 2), q = g.integer(0, 1);
        auto a = g.form(A, p), b = g.form(A, q);
        auto lhs = delta(wedge(a, b));
        auto rhs = wedge(delta(a), b) + (p % 2 ? wedge(a, delta(b)).scaled(Rational(-1)) : wedge(a, delta(b)));
        CAPTURE(form_str(a));
        CAPTURE(form_str(b));
        CHECK(same_form(lhs, rhs));
    }
}

TEST_CASE("polar space matches brute force and one-step integrality")
{
    Gen g(303);
    auto ip = build::ip_prolonged();
    auto r3 = build::simple_r3();
    IdealSpec ip_ideal = close_ideal({build::sigma11(ip)}, {"sigma11"});
    IdealSpec r3_ideal = close_ideal(build::simple_r3_generators(r3), {"theta1", "theta2"});
    int members = 0, outsiders = 0;
    for (int c = 0; c < kCases; ++c) {
        const bool use_ip = c % 2 == 0;
        const IdealSpec& ideal = use_ip ? ip_ideal : r3_ideal;
        VarMap z = random_point(g, ideal.ambient);
        Vec v1 = use_ip ? ip_line(g, z) : r3_line(g, z);
        if (v1.isZero()) continue;
        IntegralElement E{z, Mat(v1.transpose())};
        REQUIRE(is_integral_element(ideal, E));
        if (g.coin()) {
            // Grow to a plane inside H(E) when there is room.
            auto H = polar_space(ideal, E);
            Vec v2 = Vec::Zero(v1.size());
            for (Eigen::Index i = 0; i < H.basis.rows(); ++i) v2 += H.basis.row(i).transpose() * g.grid();
            if (rank(stack(E.span, v2)) == 2) E.span = stack(E.span, v2);
        }
        auto H = polar_space(ideal, E);
        Vec w = g.vec(v1.size());
        if (g.coin()) {
            w = Vec::Zero(v1.size());
            for (Eigen::Index i = 0; i < H.basis.rows(); ++i) w += H.basis.row(i).transpose() * g.grid();
        }
        const bool in_H = rank(stack(H.basis, w)) == H.basis.rows();
        CHECK(in_H == polar_by_brute_force(ideal, E, w));
        Mat grown = stack(E.span, w);
        if (rank(grown) == E.span.rows() + 1) {
            CHECK(in_H == is_integral_element(ideal, IntegralElement{z, grown}));
            (in_H ? members : outsiders)++;
        }
    }
    // Both branches must actually be exercised.
    CHECK(members > 20);
    CHECK(outsiders > 20);
}

TEST_CASE("pullback commutes with delta")
{
    Gen g(404);
    auto ip = build::ip_prolonged();
    auto r3 = build::simple_r3();
    for (int c = 0; c < kCases; ++c) {
        const bool use_ip = c % 2 == 0;
        StructurePtr A = use_ip ? ip : r3;
        const int m = g.integer(1, 2);
        std::vector<std::string> dom = m == 1 ? std::vector<std::string>{"a"} : std::vector<std::string>{"a", "b"};
        // Graph over m randomly chosen ambient coordinates.
        std::vector<int> order(A->dim());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), g.rng);
        std::vector<Poly> comps(A->dim(), Poly(dom));
        for (size_t j = 0; j < A->dim(); ++j) {
            auto pos = static_cast<size_t>(std::find(order.begin(), order.end(), static_cast<int>(j)) - order.begin());
            if (pos < dom.size())
                comps[j] = Poly::variable(dom[pos], dom) + g.poly(dom, 2, 2, 2) + Poly::constant(g.grid(), dom);
            else
                comps[j] = g.poly(dom);
        }
        SeriesManifold M{A, dom, comps, std::nullopt};
        auto P = build_pullback(M);
        auto w = g.form(A, g.integer(0, 1));
        CAPTURE(form_str(w));
        CHECK(same_form(P.pull(delta(w)), delta(P.pull(w))));
    }
}

TEST_CASE("section pullback equals the lifted section map")
{
    Gen g(505);
    FiberBundleSpec bundle{build::ip_adapted(), {"s", "P", "Q"}};
    StructurePtr A = build_fiber_prolongation(bundle);
    std::vector<std::string> dom{"t", "w"};
    for (int c = 0; c < kCases; ++c) {
        SeriesManifold M{A, dom,
                         {Poly::variable("t", dom), Poly::variable("w", dom), g.poly(dom, 3), g.poly(dom, 3), g.poly(dom, 3)},
                         std::nullopt};
        CHECK(section_pullback_equivalence(M, bundle));
    }
}

TEST_CASE("Cauchy solutions of affine systems have zero residual")
{
    Gen g(606);
    for (int c = 0; c < kCases; ++c) {
        const int nx = g.integer(1, 2), ns = g.integer(1, 2), order = g.integer(2, 5);
        CauchyProblem C;
        for (int i = 1; i <= nx; ++i) C.x_names.push_back("x" + std::to_string(i));
        C.y_name = "y";
        C.p_names.resize(static_cast<size_t>(ns));
        for (int s = 1; s <= ns; ++s) {
            C.u_names.push_back("u" + std::to_string(s));
            for (int i = 1; i <= nx; ++i) C.p_names[static_cast<size_t>(s - 1)].push_back("p" + std::to_string(s) + "_" + std::to_string(i));
        }
        C.order = order;
        const auto vars = C.chart_vars();
        const auto dom = C.domain();
        Rational d(g.integer(1, 3) * (g.coin() ? 1 : -1));
        C.denominator = Poly::constant(d, vars);
        // Affine numerators: a constant plus small integer multiples of every chart variable.
        std::vector<std::map<std::string, Rational>> coeff(static_cast<size_t>(ns));
        std::vector<Rational> c0(static_cast<size_t>(ns));
        for (int s = 0; s < ns; ++s) {
            c0[static_cast<size_t>(s)] = g.grid();
            Poly n = Poly::constant(c0[static_cast<size_t>(s)], vars);
            for (const auto& v : vars) {
                Rational a(g.integer(-2, 2));
                coeff[static_cast<size_t>(s)][v] = a;
                n += Poly::variable(v, vars) * Poly::constant(a, vars);
            }
            C.numerators.push_back(n);
        }
        auto F = solve_cauchy(C);
        REQUIRE(F.size() == static_cast<size_t>(ns));
        // Residual d dF/dy - N(x, y, F, dF/dx), assembled here by hand.
        for (int s = 0; s < ns; ++s) {
            const auto& cs = coeff[static_cast<size_t>(s)];
            Poly rhs = Poly::constant(c0[static_cast<size_t>(s)], dom);
            for (const auto& x : C.x_names) rhs += Poly::variable(x, dom) * Poly::constant(cs.at(x), dom);
            rhs += Poly::variable("y", dom) * Poly::constant(cs.at("y"), dom);
            for (int t = 0; t < ns; ++t) {
                const Poly& Ft = F[static_cast<size_t>(t)].poly();
                rhs += Ft * Poly::constant(cs.at(C.u_names[static_cast<size_t>(t)]), dom);
                for (int i = 0; i < nx; ++i)
                    rhs += partial_derivative(Ft, C.x_names[static_cast<size_t>(i)]) *
                           Poly::constant(cs.at(C.p_names[static_cast<size_t>(t)][static_cast<size_t>(i)]), dom);
            }
            Poly res = partial_derivative(F[static_cast<size_t>(s)].poly(), "y") * Poly::constant(d, dom) - rhs;
            for (const auto& [e, a] : res.terms())
                if (static_cast<int>(total_degree(e)) <= order - 1) CHECK(a == Rational(0));
            // Initial condition F(x, 0) = 0.
            CHECK(F[static_cast<size_t>(s)].poly().partial_evaluate({{"y", Rational(0)}}).is_zero());
        }
    }
}
