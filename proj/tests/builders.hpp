#pragma once
// In-code copies of the two worked structures, for unit tests that do not go
// through the JSON loader.

#include "edskit/algebroid.hpp"
#include "edskit/parser.hpp"
#include "edskit/prolongation.hpp"
#include "oracles.hpp"

#include <memory>

namespace build {

using namespace edskit;

// R^3 tangent bundle times a trivial line, all brackets zero.
inline StructurePtr simple_r3()
{
    std::vector<std::string> x{"x1", "x2", "x3"};
    std::vector<BasisLabel> b{{"d1", LabelKind::Splitting, "x1"},
                              {"d2", LabelKind::Splitting, "x2"},
                              {"d3", LabelKind::Splitting, "x3"},
                              {"k1", LabelKind::Kernel, ""}};
    return std::make_shared<AlgebroidStructure>(x, b, Poly(x));
}

// Abelian IP algebroid over (t, w) with basis {T0, e1, W1}.
inline StructurePtr ip_base()
{
    std::vector<std::string> x{"t", "w"};
    std::vector<BasisLabel> b{{"T0", LabelKind::Splitting, "t"}, {"e1", LabelKind::Kernel, ""}, {"W1", LabelKind::Splitting, "w"}};
    return std::make_shared<AlgebroidStructure>(x, b, Poly(x));
}

// {Gamma0, W1, H1} over (t, w) with [Gamma0, W1] = -H1.
inline std::shared_ptr<AlgebroidStructure> ip_adapted()
{
    std::vector<std::string> x{"t", "w"};
    std::vector<BasisLabel> b{{"Gamma0", LabelKind::Splitting, "t"}, {"W1", LabelKind::Splitting, "w"}, {"H1", LabelKind::Kernel, ""}};
    auto A = std::make_shared<AlgebroidStructure>(x, b, Poly(x));
    A->set_bracket(0, 1, 2, Poly::constant(-1, x));
    return A;
}

// The prolongation over (t, w, s, P, Q), assembled by hand.
inline std::shared_ptr<AlgebroidStructure> ip_prolonged()
{
    std::vector<std::string> x{"t", "w", "s", "P", "Q"};
    std::vector<BasisLabel> b{{"Gamma0", LabelKind::Splitting, "t"}, {"W1", LabelKind::Splitting, "w"}, {"H1", LabelKind::Kernel, ""},
                              {"Ds", LabelKind::Splitting, "s"},     {"DP", LabelKind::Splitting, "P"}, {"DQ", LabelKind::Splitting, "Q"}};
    auto A = std::make_shared<AlgebroidStructure>(x, b, Poly(x));
    A->set_bracket(0, 1, 2, Poly::constant(-1, x));
    return A;
}

inline AlgebroidForm one_form(const StructurePtr& A, const std::vector<std::pair<std::string, std::string>>& terms)
{
    AlgebroidForm w(A, 1);
    for (const auto& [label, expr] : terms) w.add_term({A->label_index(label)}, parse_expr(expr, A->coords()));
    return w;
}

inline AlgebroidForm function(const StructurePtr& A, const std::string& expr)
{
    return AlgebroidForm::function(A, parse_expr(expr, A->coords()));
}

// theta1 = dx3 - x2 dx1, theta2 = dx2
inline std::vector<AlgebroidForm> simple_r3_generators(const StructurePtr& A)
{
    return {one_form(A, {{"d3", "1"}, {"d1", "-x2"}}), one_form(A, {{"d2", "1"}})};
}

// sigma11 = ds + P Psi1 + Q Theta1
inline AlgebroidForm sigma11(const StructurePtr& A)
{
    return one_form(A, {{"Ds", "1"}, {"W1", "P"}, {"H1", "Q"}});
}

// The worked closed-form section (t, w) -> (t, w, s, P, 0) as series of order n.
inline SeriesManifold h_family_section(const StructurePtr& A, const Rational& c1, const Rational& c2, const Rational& d2, int n)
{
    auto f = oracle::h_family_components(c1, c2, d2, static_cast<size_t>(n));
    std::vector<std::string> dom{"t", "w"};
    auto uni = [&](const oracle::Univariate& a) {
        Poly out(dom);
        for (size_t k = 0; k < a.size(); ++k) out += Poly::monomial(a[k], Exponent{0, static_cast<unsigned>(k)}, dom);
        return out;
    };
    return SeriesManifold{A, dom, {Poly::variable("t", dom), Poly::variable("w", dom), uni(f.s), uni(f.P), Poly(dom)}, n};
}

// x -> (x, b, b (x - a) + c), the closed-form curve of the first example.
inline SeriesManifold simple_r3_curve(const StructurePtr& A, const Rational& a, const Rational& b, const Rational& c)
{
    std::vector<std::string> dom{"x"};
    Poly x = Poly::variable("x", dom);
    return SeriesManifold{A, dom, {x, Poly::constant(b, dom), x * b - Poly::constant(b * a - c, dom)}, std::nullopt};
}

inline Poly univariate(const oracle::Univariate& a, const std::string& var, const std::vector<std::string>& vars)
{
    Poly out(vars);
    for (size_t k = 0; k < a.size(); ++k) out += Poly::monomial(a[k], edskit::Exponent{static_cast<unsigned>(k)}, {var}).with_vars(vars);
    return out;
}

} // namespace build
