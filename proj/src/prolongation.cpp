#include "edskit/prolongation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace edskit {

StructurePtr build_fiber_prolongation(const FiberBundleSpec& spec)
{
    const auto& B = *spec.base;
    std::vector<std::string> coords = B.coords();
    std::set<std::string> names(coords.begin(), coords.end());
    std::set<std::string> labels;
    for (const auto& l : B.basis()) labels.insert(l.name);
    std::vector<BasisLabel> basis = B.basis();
    for (const auto& u : spec.fiber_coords) {
        if (!names.insert(u).second) throw std::invalid_argument("fiber coordinate '" + u + "' collides with an existing coordinate");
        coords.push_back(u);
        std::string lab = "D" + u;
        if (!labels.insert(lab).second) throw std::invalid_argument("fiber label '" + lab + "' collides with a base label");
        basis.push_back({lab, LabelKind::Splitting, u});
    }
    auto out = std::make_shared<AlgebroidStructure>(coords, basis, Poly(coords));
    const size_t N = B.rank();
    for (size_t a = 0; a < N; ++a) {
        for (size_t i = 0; i < B.dim(); ++i) out->set_anchor(a, i, B.anchor(a, i).with_vars(coords));
        for (size_t i = B.dim(); i < coords.size(); ++i) out->set_anchor(a, i, Poly(coords));
    }
    for (size_t a = 0; a < N; ++a)
        for (size_t b = 0; b < N; ++b)
            for (size_t g = 0; g < N; ++g) out->set_raw(a, b, g, B.L(a, b, g).with_vars(coords));
    return out;
}

VarMap SeriesManifold::origin() const
{
    VarMap zero;
    for (const auto& x : domain) zero[x] = Rational(0);
    VarMap out;
    for (size_t j = 0; j < components.size(); ++j) out[ambient->coords()[j]] = components[j].evaluate(zero);
    return out;
}

std::vector<std::vector<Poly>> SeriesManifold::jacobian() const
{
    std::vector<std::vector<Poly>> J(components.size());
    for (size_t j = 0; j < components.size(); ++j)
        for (const auto& x : domain) J[j].push_back(components[j].diff(x).with_vars(domain));
    return J;
}

Mat SeriesManifold::jacobian_at_origin() const
{
    VarMap zero;
    for (const auto& x : domain) zero[x] = Rational(0);
    auto J = jacobian();
    Mat out(static_cast<Eigen::Index>(components.size()), static_cast<Eigen::Index>(domain.size()));
    for (size_t j = 0; j < J.size(); ++j)
        for (size_t i = 0; i < domain.size(); ++i) out(j, i) = J[j][i].evaluate(zero);
    return out;
}

SeriesManifold SeriesManifold::restrict_to_zero(const std::string& var) const
{
    SeriesManifold out = *this;
    out.domain.erase(std::remove(out.domain.begin(), out.domain.end(), var), out.domain.end());
    for (auto& c : out.components) c = c.partial_evaluate({{var, Rational(0)}}).with_vars(out.domain);
    return out;
}

std::string SeriesManifold::component_str(size_t j) const
{
    std::string s = components.at(j).str();
    if (order) s += " + O(" + std::to_string(*order + 1) + ")";
    return s;
}

void check_manifold(const SeriesManifold& m)
{
    if (!m.ambient) throw std::invalid_argument("manifold without ambient structure");
    if (m.components.size() != m.ambient->dim()) throw std::invalid_argument("component count does not match ambient dimension");
    std::set<std::string> seen;
    for (const auto& x : m.domain)
        if (!seen.insert(x).second) throw std::invalid_argument("duplicate domain coordinate '" + x + "'");
    for (const auto& c : m.components) {
        for (const auto& v : c.vars())
            if (c.depends_on(v) && !seen.count(v)) throw std::invalid_argument("component depends on '" + v + "', which is not a domain coordinate");
        if (m.order && c.total_degree() > *m.order) throw std::invalid_argument("component exceeds the truncation order");
    }
    if (rank(m.jacobian_at_origin()) != static_cast<Eigen::Index>(m.domain.size()))
        throw std::invalid_argument("rank-deficient Jacobian at the origin: not an immersion there");
}

namespace {

Poly clip(const Poly& p, const std::optional<int>& order) { return order ? p.truncated(*order) : p; }

} // namespace

PullbackOperator build_pullback(const SeriesManifold& m)
{
    check_manifold(m);
    const auto& Abar = *m.ambient;
    PullbackOperator P;
    P.ambient = m.ambient;
    P.order = m.order;

    std::vector<std::string> dom = m.domain;
    std::vector<Poly> comps;
    for (const auto& c : m.components) comps.push_back(c.with_vars(dom));
    SeriesManifold mm = m;
    mm.components = comps;
    auto J = mm.jacobian();
    P.components = comps;

    std::vector<int> kernel = Abar.kernel_labels();
    std::vector<BasisLabel> basis;
    for (int a : kernel) basis.push_back({Abar.basis()[a].name, LabelKind::Kernel, ""});
    for (const auto& x : dom) basis.push_back({"gamma_" + x, LabelKind::Splitting, x});
    auto induced = std::make_shared<AlgebroidStructure>(dom, basis, Poly(dom));

    const size_t Nb = Abar.rank(), Ni = basis.size();
    P.inclusion.assign(Nb, std::vector<Poly>(Ni, Poly(dom)));
    for (size_t a = 0; a < kernel.size(); ++a) P.inclusion[kernel[a]][a] = Poly::constant(1, dom);
    for (size_t i = 0; i < dom.size(); ++i)
        for (size_t j = 0; j < Abar.dim(); ++j) {
            int g = Abar.splitting_label(static_cast<int>(j));
            if (g < 0) throw std::invalid_argument("ambient structure is not split-adapted");
            P.inclusion[g][kernel.size() + i] = J[j][i];
        }

    std::map<std::string, Poly> subst;
    for (size_t j = 0; j < Abar.dim(); ++j) subst.emplace(Abar.coords()[j], comps[j]);
    auto compose = [&](const Poly& f) { return clip(f.substitute(subst).with_vars(dom), m.order); };

    // Kernel-valued structure functions by bilinearity over the inclusion.
    for (size_t c = 0; c < kernel.size(); ++c)
        for (size_t A = 0; A < Ni; ++A)
            for (size_t B = A + 1; B < Ni; ++B) {
                Poly acc(dom);
                for (size_t al = 0; al < Nb; ++al) {
                    if (P.inclusion[al][A].is_zero()) continue;
                    for (size_t be = 0; be < Nb; ++be) {
                        if (P.inclusion[be][B].is_zero()) continue;
                        const Poly& l = Abar.L(al, be, kernel[c]);
                        if (l.is_zero()) continue;
                        acc += P.inclusion[al][A] * P.inclusion[be][B] * compose(l);
                    }
                }
                acc = clip(acc, m.order ? std::optional<int>(*m.order - 1) : std::nullopt);
                if (!acc.is_zero()) induced->set_bracket(A, B, c, acc);
            }
    P.induced = induced;

    for (size_t al = 0; al < Nb; ++al) {
        AlgebroidForm w(P.induced, 1);
        for (size_t A = 0; A < Ni; ++A) w.add_term({static_cast<int>(A)}, P.inclusion[al][A]);
        P.table.push_back(w);
    }
    return P;
}

AlgebroidForm truncate_form(const AlgebroidForm& w, int deg)
{
    AlgebroidForm out(w.parent(), w.degree());
    for (const auto& [I, f] : w.terms()) out.add_term(I, f.truncated(deg));
    return out;
}

Poly PullbackOperator::pull_function(const Poly& f) const
{
    std::map<std::string, Poly> subst;
    const auto& dom = induced->coords();
    for (size_t j = 0; j < ambient->dim(); ++j) subst.emplace(ambient->coords()[j], components.at(j));
    return clip(f.substitute(subst).with_vars(dom), order);
}

AlgebroidForm PullbackOperator::pull(const AlgebroidForm& w) const
{
    if (w.parent() != ambient) throw std::invalid_argument("form does not live on the ambient structure");
    AlgebroidForm out(induced, w.degree());
    std::map<MultiIndex, AlgebroidForm> cache;
    for (const auto& [I, f] : w.terms()) {
        auto it = cache.find(I);
        if (it == cache.end()) {
            AlgebroidForm acc = AlgebroidForm::function(induced, Poly::constant(1, induced->coords()));
            for (int a : I) {
                acc = wedge(acc, table[a]);
                if (order) acc = truncate_form(acc, *order);
            }
            it = cache.emplace(I, acc).first;
        }
        Poly g = pull_function(f);
        if (g.is_zero()) continue;
        AlgebroidForm term = it->second.scaled(g);
        if (order) term = truncate_form(term, *order);
        out += term;
    }
    return out;
}

bool VerificationReport::clean() const
{
    return std::all_of(generators.begin(), generators.end(), [](const GeneratorVerdict& g) { return g.clean; });
}

std::string VerificationReport::summary() const
{
    std::ostringstream os;
    os << (clean() ? "CLEAN" : "NOT CLEAN") << " (" << (exact ? "exact candidate" : "series candidate") << ", order " << order
       << ", coefficients compared through degree " << checked_through << ")";
    for (const auto& g : generators) {
        os << "\n  " << g.label << ": ";
        if (g.clean) os << "CLEAN";
        else os << "nonzero at degree " << g.lowest_degree << " (" << g.witness << ")";
    }
    return os.str();
}

VerificationReport verify_integral_manifold(const SeriesManifold& candidate, const IdealSpec& ideal, int order)
{
    if (order < 0) throw std::invalid_argument("negative verification order");
    if (candidate.order && *candidate.order < order)
        throw std::invalid_argument("truncation-order mismatch: candidate has order " + std::to_string(*candidate.order) +
                                    ", verification requested at order " + std::to_string(order));
    if (ideal.ambient && candidate.ambient != ideal.ambient) throw std::invalid_argument("candidate and ideal live on different structures");
    SeriesManifold m = candidate;
    if (m.order) {
        m.order = order;
        for (auto& c : m.components) c = c.truncated(order);
    }
    PullbackOperator P = build_pullback(m);
    VerificationReport rep;
    rep.order = order;
    rep.exact = m.is_exact();
    rep.checked_through = rep.exact ? order : order - 1;
    for (size_t g = 0; g < ideal.closed_generators.size(); ++g) {
        const auto& w = ideal.closed_generators[g];
        GeneratorVerdict v;
        v.label = g < ideal.labels.size() ? ideal.labels[g] : "g" + std::to_string(g + 1);
        v.form_degree = w.degree();
        if (static_cast<size_t>(w.degree()) > P.induced->rank()) {
            // Vanishes for degree reasons.
            rep.generators.push_back(v);
            continue;
        }
        AlgebroidForm pulled = P.pull(w);
        for (const auto& [I, f] : pulled.terms()) {
            Poly t = f.truncated(rep.checked_through);
            if (t.is_zero()) continue;
            int d = t.min_degree();
            if (v.clean || d < v.lowest_degree) {
                v.clean = false;
                v.lowest_degree = d;
                std::string lab;
                for (size_t k = 0; k < I.size(); ++k) lab += (k ? "^" : "") + P.induced->basis()[I[k]].name;
                v.witness = "coefficient of " + (lab.empty() ? std::string("1") : lab) + " starts with " + t.homogeneous_part(d).str();
            }
        }
        rep.generators.push_back(v);
    }
    return rep;
}

bool section_pullback_equivalence(const SeriesManifold& candidate, const FiberBundleSpec& bundle)
{
    const auto& B = *bundle.base;
    const auto& Abar = *candidate.ambient;
    if (Abar.dim() != B.dim() + bundle.fiber_coords.size() || Abar.rank() != B.rank() + bundle.fiber_coords.size())
        throw std::invalid_argument("candidate ambient is not the prolongation of the given bundle");
    for (size_t i = 0; i < B.dim(); ++i)
        if (Abar.coords()[i] != B.coords()[i]) throw std::invalid_argument("candidate ambient is not the prolongation of the given bundle");
    if (candidate.domain != B.coords()) throw std::invalid_argument("candidate is not a section: domain differs from the base coordinates");
    for (size_t i = 0; i < B.dim(); ++i)
        if (candidate.components[i] != Poly::variable(B.coords()[i], candidate.domain))
            throw std::invalid_argument("candidate is not a section: base component " + B.coords()[i] + " is not the identity");

    PullbackOperator P = build_pullback(candidate);
    const auto& dom = candidate.domain;
    const size_t Nb = Abar.rank();
    // Phi: induced kernel label <-> base kernel label of the same name,
    // gamma_<x> <-> base splitting label of x.
    for (size_t al = 0; al < B.rank(); ++al) {
        const auto& lab = B.basis()[al];
        int col = P.induced->label_index(lab.kind == LabelKind::Kernel ? lab.name : "gamma_" + lab.splits);
        if (col < 0) return false;
        // S(e_alpha) = lifted e_alpha + sum_mu rho(e_alpha)(sigma^mu) D<u^mu>
        std::vector<Poly> S(Nb, Poly(dom));
        S[al] = Poly::constant(1, dom);
        for (size_t mu = 0; mu < bundle.fiber_coords.size(); ++mu) {
            const Poly& sigma = candidate.components[B.dim() + mu];
            Poly acc(dom);
            for (size_t i = 0; i < B.dim(); ++i) acc += B.anchor(al, i).with_vars(dom) * sigma.diff(B.coords()[i]);
            S[B.rank() + mu] = acc;
        }
        for (size_t be = 0; be < Nb; ++be)
            if (S[be] != P.inclusion[be][col]) return false;
    }
    return true;
}

} // namespace edskit
