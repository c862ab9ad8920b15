#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "builders.hpp"
#include "edskit/ck.hpp"

using namespace edskit;

namespace {

Mat rows(std::initializer_list<std::initializer_list<Rational>> r)
{
    Mat M(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (const auto& v : row) M(i, j++) = v;
        ++i;
    }
    return M;
}

Vec vec(std::initializer_list<Rational> v)
{
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto& x : v) out(i++) = x;
    return out;
}

IdealSpec r3_ideal()
{
    auto A = build::simple_r3();
    return close_ideal(build::simple_r3_generators(A), {"theta1", "theta2"});
}

IdealSpec ip_ideal()
{
    StructurePtr A = build::ip_prolonged();
    return close_ideal({build::sigma11(A)}, {"sigma11"});
}

VarMap r3_point(const Rational& a, const Rational& b, const Rational& c) { return {{"x1", a}, {"x2", b}, {"x3", c}}; }

// Step from the point z along y with the given u- and v-blocks.
ExtensionProblem point_problem(const VarMap& z, const Vec& y, std::vector<Vec> u, std::vector<Vec> v, int order = 4)
{
    ExtensionProblem P;
    P.ideal = r3_ideal();
    P.order = order;
    P.chart.base_point = z;
    P.chart.y_name = "y";
    P.chart.y_direction = y;
    P.chart.u_directions = std::move(u);
    P.chart.v_directions = std::move(v);
    return P;
}

// Flag for the prolonged example at the worked point with parameters (c1, c2, d2).
std::vector<IntegralElement> ip_flag(const Rational& c1, const Rational& c2, const Rational& d2)
{
    VarMap z{{"t", Rational(0)}, {"w", Rational(0)}, {"s", c1}, {"P", c2}, {"Q", Rational(0)}};
    return {{z, rows({{0, 0, 1, 0, 0, 0}})},
            {z, rows({{0, 0, 1, 0, 0, 0}, {1, 1, 0, -c2, d2, 0}})},
            {z, rows({{0, 0, 1, 0, 0, 0}, {1, 1, 0, -c2, d2, 0}, {0, 1, 0, -c2, d2, 0}})}};
}

CauchyProblem scalar_problem(const std::string& rhs, int order)
{
    CauchyProblem C;
    C.x_names = {"x"};
    C.y_name = "y";
    C.u_names = {"u1"};
    C.p_names = {{"p1_1"}};
    C.order = order;
    C.numerators = {parse_expr(rhs, C.chart_vars())};
    C.denominator = Poly::constant(1, C.chart_vars());
    return C;
}

} // namespace

TEST_CASE("Cauchy solver on closed-form right-hand sides")
{
    auto F = solve_cauchy(scalar_problem("3/2", 5));
    CHECK(F[0].poly() == parse_expr("3/2*y", {"x", "y"}));
    F = solve_cauchy(scalar_problem("u1", 5));
    CHECK(F[0].is_zero());
    // dF/dy = 1 + F: F = e^y - 1
    F = solve_cauchy(scalar_problem("1 + u1", 5));
    CHECK(F[0].poly() == parse_expr("y + 1/2*y^2 + 1/6*y^3 + 1/24*y^4 + 1/120*y^5", {"x", "y"}));
    // dF/dy = x + dF/dx: F = x y + y^2/2
    F = solve_cauchy(scalar_problem("x + p1_1", 4));
    CHECK(F[0].poly() == parse_expr("x*y + 1/2*y^2", {"x", "y"}));
    // Rational right-hand side: dF/dy = 1/(1 - y), F = -log(1 - y)
    CauchyProblem C = scalar_problem("1", 4);
    C.denominator = parse_expr("1 - y", C.chart_vars());
    F = solve_cauchy(C);
    CHECK(F[0].poly() == parse_expr("y + 1/2*y^2 + 1/3*y^3 + 1/4*y^4", {"x", "y"}));
    C.denominator = parse_expr("y", C.chart_vars());
    CHECK_THROWS_AS(solve_cauchy(C), std::domain_error);
}

TEST_CASE("transversality of the restriction manifold")
{
    VarMap z = r3_point(0, 1, 2);
    auto good = point_problem(z, vec({1, 0, 1}), {vec({0, 1, 0}), vec({0, 0, 1})}, {});
    auto tv = check_transversality(good);
    CHECK(tv.pass);
    CHECK(tv.rank == 4);
    // u along x1 shares the splitting direction of H with y: rank 3.
    auto bad = point_problem(z, vec({1, 0, 1}), {vec({1, 0, 0})}, {vec({0, 1, 0})});
    auto tb = check_transversality(bad);
    CHECK_FALSE(tb.pass);
    CHECK(tb.witness == size_t{0});
    CHECK(tb.rank == 3);
    CHECK_THROWS_AS(extend_once(bad), std::runtime_error);
    auto degenerate = point_problem(z, vec({1, 0, 1}), {vec({2, 0, 2}), vec({0, 1, 0})}, {});
    CHECK_THROWS_AS(check_problem(degenerate), std::invalid_argument);
}

TEST_CASE("one step of the first example along the x1 direction")
{
    for (int x2 : {1, -3}) {
        VarMap z = r3_point(5, x2, 7);
        auto P = point_problem(z, vec({1, 0, 0}), {vec({0, 1, 0}), vec({0, 0, 1})}, {});
        NormalizedPolar k = normalize_polar_forms(P);
        CHECK(k.rows.size() == 2);
        CHECK(k.polar_rank == 2);
        CauchyProblem C = assemble_G(P, k);
        REQUIRE(C.numerators.size() == 2);
        CHECK(C.denominator.is_constant());
        // G = (0, x2) with x2 = x2(z0) + u1; on R it is the constant x2(z0).
        CHECK((C.numerators[0] * (Rational(1) / C.denominator.constant_term())).is_zero());
        CHECK(C.numerators[1] * (Rational(1) / C.denominator.constant_term()) == parse_expr("u1 + " + std::to_string(x2), C.chart_vars()));
        ExtensionResult X = extend_once(P);
        CHECK(X.verification.clean());
        CHECK(X.manifold.components[2] == parse_expr(std::to_string(x2) + "*y + 7", {"y"}));
        CHECK(X.manifold.components[1] == Poly::constant(x2, {"y"}));
    }
    // Wrong number of u-directions for the polar rank.
    auto P = point_problem(r3_point(0, 1, 2), vec({1, 0, 0}), {vec({0, 1, 0})}, {vec({0, 0, 1})});
    CHECK_THROWS_AS(normalize_polar_forms(P), std::domain_error);
}

TEST_CASE("first example from its flag")
{
    IdealSpec I = r3_ideal();
    for (auto [a, b, c] : {std::tuple<int, int, int>{0, 1, 2}, {3, -2, 5}, {-1, 4, 0}}) {
        VarMap z = r3_point(a, b, c);
        std::vector<IntegralElement> flag{{z, rows({{0, 0, 0, 1}})}, {z, rows({{0, 0, 0, 1}, {1, 0, b, 0}})}};
        CkResult r = build_from_flag(I, flag, 4);
        CHECK(r.transcript.tag == "PROVISIONAL");
        CHECK(r.transcript.span_matches_top);
        REQUIRE(r.manifold.domain == std::vector<std::string>{"x1"});
        auto closed = build::simple_r3_curve(I.ambient, Rational(a), Rational(b), Rational(c));
        // Domain variable is the displacement in x1.
        for (size_t j = 0; j < 3; ++j) {
            Poly expect = closed.components[j].substitute({{"x", parse_expr("x1 + " + std::to_string(a), {"x1"})}}).with_vars({"x1"});
            CHECK(r.manifold.components[j] == expect);
        }
        REQUIRE(r.transcript.steps.size() == 1);
        CHECK(r.transcript.steps[0].c == 2);
    }
    VarMap z = r3_point(0, 1, 2);
    std::vector<IntegralElement> flag{{z, rows({{0, 0, 0, 1}})}, {z, rows({{0, 0, 0, 1}, {1, 0, 1, 0}})}};
    FlagResult cert = flag_probe(I, flag, 1, {8, 0});
    CHECK(build_from_flag(I, flag, 4, &cert).transcript.tag == "CERTIFIED-AT-SAMPLES");
    FlagResult not_ok = cert;
    not_ok.ordinary = false;
    CHECK_THROWS_AS(build_from_flag(I, flag, 4, &not_ok), std::invalid_argument);
    CHECK_THROWS_AS(build_from_flag(I, flag, 1), std::invalid_argument);
    std::vector<IntegralElement> skewed{{z, rows({{1, 0, 1, 0}})}, {z, rows({{0, 0, 0, 1}, {1, 0, 1, 0}})}};
    CHECK_THROWS_AS(build_from_flag(I, skewed, 4), std::invalid_argument);

    CkResult point = build_from_flag(I, {flag[0]}, 3);
    CHECK(point.manifold.domain.empty());
    CHECK(point.manifold.origin() == z);
    CHECK(point.transcript.span_matches_top);
}

TEST_CASE("prolonged example from its flag")
{
    IdealSpec I = ip_ideal();
    CkResult r = build_from_flag(I, ip_flag(1, 1, 0), 6);
    CHECK(r.manifold.domain == std::vector<std::string>{"t", "w"});
    REQUIRE(r.transcript.steps.size() == 2);
    CHECK(r.transcript.codims == std::vector<int>{2, 3});
    const auto& s = r.manifold.components[2];
    const auto& P = r.manifold.components[3];
    const auto& Q = r.manifold.components[4];
    // Members of the family s = g(w), P = -g'(w), Q = 0.
    CHECK(s.diff("t").is_zero());
    CHECK(P.truncated(5) == -s.diff("w").truncated(5));
    CHECK(Q.is_zero());
    // Shares the 1-jet with the closed form c1 e^{-h}.
    auto f = oracle::h_family_components(1, 1, 0, 6);
    for (unsigned k = 0; k <= 1; ++k) CHECK(s.coefficient({0, k}) == f.s[k]);
    CHECK(P.constant_term() == f.P[0]);
    // With zero restriction functions the curve of the first step keeps P constant.
    CHECK(s == parse_expr("1 - w", {"t", "w"}));
    CHECK(P == Poly::constant(1, {"t", "w"}));

    CkResult flat = build_from_flag(I, ip_flag(1, 0, 0), 4);
    CHECK(flat.manifold.components[2] == Poly::constant(1, {"t", "w"}));
    CHECK(flat.manifold.components[4].is_zero());

    CkResult general = build_from_flag(I, ip_flag(-2, Rational(3, 4), 5), 5);
    CHECK(verify_integral_manifold(general.manifold, I, 5).clean());
    CHECK(general.transcript.span_matches_top);
}

TEST_CASE("linear reparametrization")
{
    auto A = build::simple_r3();
    SeriesManifold m{A, {"a", "b"}, {parse_expr("a + b", {"a", "b"}), parse_expr("a*b", {"a", "b"}), parse_expr("b^2", {"a", "b"})}, 4};
    Mat T = rows({{1, 1}, {0, 2}});
    SeriesManifold r = reparametrize_linear(m, T, {"s", "t"});
    CHECK(r.components[0] == parse_expr("s + 3*t", {"s", "t"}));
    CHECK(r.components[1] == parse_expr("2*s*t + 2*t^2", {"s", "t"}));
    CHECK(r.components[2] == parse_expr("4*t^2", {"s", "t"}));
    CHECK_THROWS_AS(reparametrize_linear(m, rows({{1, 0}}), {"s", "t"}), std::invalid_argument);
}
