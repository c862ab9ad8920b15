#pragma once

#include "edskit/linalg.hpp"
#include "edskit/poly.hpp"
#include "edskit/series.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace edskit {

// Coefficient ring hooks: Poly (exact) or TruncatedSeries (order-bounded).
template <typename C>
struct Coeff;

template <>
struct Coeff<Poly> {
    static Poly zero(const Poly& proto) { return Poly(proto.vars()); }
    static Poly constant(const Poly& proto, const Rational& c) { return Poly::constant(c, proto.vars()); }
    static Poly lift(const Poly& proto, const Poly& p) { (void)proto; return p; }
};

template <>
struct Coeff<TruncatedSeries> {
    static TruncatedSeries zero(const TruncatedSeries& proto) { return proto.zero_like(); }
    static TruncatedSeries constant(const TruncatedSeries& proto, const Rational& c) { return proto.constant_like(c); }
    static TruncatedSeries lift(const TruncatedSeries& proto, const Poly& p) { return TruncatedSeries(p, proto.order()); }
};

enum class LabelKind { Kernel, Splitting };

struct BasisLabel {
    std::string name;
    LabelKind kind = LabelKind::Kernel;
    std::string splits; // coordinate name for splitting labels
};

// Transitive Lie algebroid in split-adapted local form over one chart.
template <typename C>
class Structure {
public:
    Structure() = default;
    Structure(std::vector<std::string> coords, std::vector<BasisLabel> basis, C proto)
        : coords_(std::move(coords)), basis_(std::move(basis)), proto_(std::move(proto))
    {
        const size_t N = basis_.size(), n = coords_.size();
        anchor_.assign(N, std::vector<C>(n, Coeff<C>::zero(proto_)));
        L_.assign(N * N * N, Coeff<C>::zero(proto_));
        for (size_t a = 0; a < N; ++a) {
            if (basis_[a].kind != LabelKind::Splitting) continue;
            int j = coord_index(basis_[a].splits);
            if (j < 0) throw std::invalid_argument("label '" + basis_[a].name + "' splits unknown coordinate '" + basis_[a].splits + "'");
            anchor_[a][j] = Coeff<C>::constant(proto_, Rational(1));
        }
    }

    size_t rank() const { return basis_.size(); }
    size_t dim() const { return coords_.size(); }
    const std::vector<std::string>& coords() const { return coords_; }
    const std::vector<BasisLabel>& basis() const { return basis_; }
    const C& proto() const { return proto_; }

    int coord_index(const std::string& name) const
    {
        auto it = std::find(coords_.begin(), coords_.end(), name);
        return it == coords_.end() ? -1 : static_cast<int>(it - coords_.begin());
    }
    int label_index(const std::string& name) const
    {
        for (size_t i = 0; i < basis_.size(); ++i)
            if (basis_[i].name == name) return static_cast<int>(i);
        return -1;
    }
    std::vector<int> kernel_labels() const
    {
        std::vector<int> out;
        for (size_t i = 0; i < basis_.size(); ++i)
            if (basis_[i].kind == LabelKind::Kernel) out.push_back(static_cast<int>(i));
        return out;
    }
    // Splitting label for coordinate j, or -1.
    int splitting_label(int j) const
    {
        for (size_t i = 0; i < basis_.size(); ++i)
            if (basis_[i].kind == LabelKind::Splitting && basis_[i].splits == coords_[j]) return static_cast<int>(i);
        return -1;
    }

    const C& anchor(size_t alpha, size_t i) const { return anchor_.at(alpha).at(i); }
    void set_anchor(size_t alpha, size_t i, C v) { anchor_.at(alpha).at(i) = std::move(v); }

    // L^gamma_{alpha beta}
    const C& L(size_t alpha, size_t beta, size_t gamma) const { return L_.at(idx(alpha, beta, gamma)); }
    // Sets L^gamma_{alpha beta} and L^gamma_{beta alpha} = -value.
    void set_bracket(size_t alpha, size_t beta, size_t gamma, const C& value)
    {
        L_.at(idx(alpha, beta, gamma)) = value;
        L_.at(idx(beta, alpha, gamma)) = -value;
    }
    // Raw write of one entry, used to build deliberately inconsistent tables.
    void set_raw(size_t alpha, size_t beta, size_t gamma, const C& value) { L_.at(idx(alpha, beta, gamma)) = value; }

private:
    size_t idx(size_t a, size_t b, size_t g) const
    {
        const size_t N = basis_.size();
        if (a >= N || b >= N || g >= N) throw std::out_of_range("structure index out of range");
        return (a * N + b) * N + g;
    }

    std::vector<std::string> coords_;
    std::vector<BasisLabel> basis_;
    std::vector<std::vector<C>> anchor_;
    std::vector<C> L_;
    C proto_;
};

using MultiIndex = std::vector<int>;

// Exterior form with coefficients indexed by strictly increasing label tuples.
template <typename C>
class Form {
public:
    using Parent = std::shared_ptr<const Structure<C>>;

    Form() = default;
    Form(Parent parent, int degree) : parent_(std::move(parent)), degree_(degree)
    {
        if (!parent_) throw std::invalid_argument("form without parent structure");
        if (degree < 0 || static_cast<size_t>(degree) > parent_->rank()) throw std::invalid_argument("form degree out of range");
    }

    static Form function(Parent parent, const C& f)
    {
        Form out(std::move(parent), 0);
        out.add_term({}, f);
        return out;
    }
    static Form dual(Parent parent, int alpha)
    {
        Form out(parent, 1);
        out.add_term({alpha}, Coeff<C>::constant(parent->proto(), Rational(1)));
        return out;
    }

    const Parent& parent() const { return parent_; }
    int degree() const { return degree_; }
    const std::map<MultiIndex, C>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    C coefficient(const MultiIndex& I) const
    {
        auto it = terms_.find(I);
        return it == terms_.end() ? Coeff<C>::zero(parent_->proto()) : it->second;
    }

    // Adds f e^{I}; I need not be sorted, the sign of the sort is applied.
    void add_term(MultiIndex I, const C& f)
    {
        if (static_cast<int>(I.size()) != degree_) throw std::invalid_argument("index length does not match form degree");
        int sign = sort_with_sign(I);
        if (sign == 0 || f.is_zero()) return;
        for (int a : I)
            if (a < 0 || static_cast<size_t>(a) >= parent_->rank()) throw std::out_of_range("basis index out of range");
        auto it = terms_.find(I);
        C v = sign > 0 ? f : -f;
        if (it == terms_.end()) terms_.emplace(I, v);
        else {
            it->second += v;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    Form& operator+=(const Form& o)
    {
        check_compatible(o);
        for (const auto& [I, f] : o.terms_) add_term(I, f);
        return *this;
    }
    Form& operator-=(const Form& o)
    {
        check_compatible(o);
        for (const auto& [I, f] : o.terms_) add_term(I, -f);
        return *this;
    }
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    Form operator-() const
    {
        Form out = *this;
        for (auto& [I, f] : out.terms_) f = -f;
        return out;
    }
    Form scaled(const C& g) const
    {
        Form out(parent_, degree_);
        for (const auto& [I, f] : terms_) out.add_term(I, f * g);
        return out;
    }
    Form scaled(const Rational& c) const
    {
        Form out(parent_, degree_);
        for (const auto& [I, f] : terms_) out.add_term(I, f * c);
        return out;
    }

    friend bool operator==(const Form& a, const Form& b)
    {
        if (a.degree_ != b.degree_) return false;
        Form d = a - b;
        return d.is_zero();
    }
    friend bool operator!=(const Form& a, const Form& b) { return !(a == b); }

    // Sorts in place; returns the permutation sign, or 0 on a repeated index.
    static int sort_with_sign(MultiIndex& I)
    {
        int sign = 1;
        for (size_t i = 1; i < I.size(); ++i)
            for (size_t j = i; j > 0 && I[j - 1] >= I[j]; --j) {
                if (I[j - 1] == I[j]) return 0;
                std::swap(I[j - 1], I[j]);
                sign = -sign;
            }
        return sign;
    }

    void check_compatible(const Form& o) const
    {
        if (parent_ != o.parent_) throw std::invalid_argument("parent structure mismatch");
        if (degree_ != o.degree_) throw std::invalid_argument("degree mismatch");
    }

private:
    Parent parent_;
    int degree_ = 0;
    std::map<MultiIndex, C> terms_;
};

using AlgebroidStructure = Structure<Poly>;
using AlgebroidForm = Form<Poly>;
using StructurePtr = std::shared_ptr<const AlgebroidStructure>;

template <typename C>
Form<C> wedge(const Form<C>& a, const Form<C>& b)
{
    if (a.parent() != b.parent()) throw std::invalid_argument("parent structure mismatch");
    if (static_cast<size_t>(a.degree() + b.degree()) > a.parent()->rank()) return Form<C>(a.parent(), static_cast<int>(a.parent()->rank()));
    Form<C> out(a.parent(), a.degree() + b.degree());
    for (const auto& [I, f] : a.terms())
        for (const auto& [J, g] : b.terms()) {
            MultiIndex K = I;
            K.insert(K.end(), J.begin(), J.end());
            out.add_term(K, f * g);
        }
    return out;
}

template <typename C>
Form<C> wedge_all(const std::vector<Form<C>>& forms, const typename Form<C>::Parent& parent)
{
    Form<C> out = Form<C>::function(parent, Coeff<C>::constant(parent->proto(), Rational(1)));
    for (const auto& f : forms) out = wedge(out, f);
    return out;
}

// delta f = (df/dx^i) rho_alpha^i e^alpha
template <typename C>
Form<C> delta_function(const typename Form<C>::Parent& A, const C& f)
{
    Form<C> out(A, 1);
    std::vector<C> partials;
    partials.reserve(A->dim());
    for (const auto& x : A->coords()) partials.push_back(f.diff(x));
    for (size_t a = 0; a < A->rank(); ++a) {
        C acc = Coeff<C>::zero(A->proto());
        for (size_t i = 0; i < A->dim(); ++i) {
            if (partials[i].is_zero() || A->anchor(a, i).is_zero()) continue;
            acc += partials[i] * A->anchor(a, i);
        }
        out.add_term({static_cast<int>(a)}, acc);
    }
    return out;
}

// delta e^alpha = -1/2 L^alpha_{beta gamma} e^beta ^ e^gamma
template <typename C>
Form<C> delta_dual(const typename Form<C>::Parent& A, int alpha)
{
    Form<C> out(A, 2);
    const size_t N = A->rank();
    for (size_t b = 0; b < N; ++b)
        for (size_t g = b + 1; g < N; ++g) {
            const C& l = A->L(b, g, alpha);
            if (l.is_zero()) continue;
            out.add_term({static_cast<int>(b), static_cast<int>(g)}, -l);
        }
    return out;
}

// Exterior derivative by the Leibniz rule over basis monomials.
template <typename C>
Form<C> delta(const Form<C>& w)
{
    const auto& A = w.parent();
    const int k = w.degree();
    if (static_cast<size_t>(k) >= A->rank()) return Form<C>(A, static_cast<int>(A->rank()));
    Form<C> out(A, k + 1);
    std::map<int, Form<C>> dual_cache;
    for (const auto& [I, f] : w.terms()) {
        Form<C> df = delta_function<C>(A, f);
        for (const auto& [J, g] : df.terms()) {
            MultiIndex K = J;
            K.insert(K.end(), I.begin(), I.end());
            out.add_term(K, g);
        }
        for (size_t pos = 0; pos < I.size(); ++pos) {
            auto it = dual_cache.find(I[pos]);
            if (it == dual_cache.end()) it = dual_cache.emplace(I[pos], delta_dual<C>(A, I[pos])).first;
            const int sign = (pos % 2 == 0) ? 1 : -1;
            for (const auto& [J, l] : it->second.terms()) {
                MultiIndex K(I.begin(), I.begin() + static_cast<long>(pos));
                K.insert(K.end(), J.begin(), J.end());
                K.insert(K.end(), I.begin() + static_cast<long>(pos) + 1, I.end());
                out.add_term(K, sign > 0 ? f * l : -(f * l));
            }
        }
    }
    return out;
}

// Determinant of a small square matrix over a commutative ring, by cofactor
// expansion along the first row. Matrices here have size at most the form degree.
template <typename T>
T ring_det(const std::vector<std::vector<T>>& m, const T& zero, const T& one)
{
    const size_t n = m.size();
    if (n == 0) return one;
    if (n == 1) return m[0][0];
    if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    T acc = zero;
    for (size_t c = 0; c < n; ++c) {
        if (m[0][c].is_zero()) continue;
        std::vector<std::vector<T>> minor;
        for (size_t r = 1; r < n; ++r) {
            std::vector<T> row;
            for (size_t cc = 0; cc < n; ++cc)
                if (cc != c) row.push_back(m[r][cc]);
            minor.push_back(std::move(row));
        }
        T term = m[0][c] * ring_det(minor, zero, one);
        if (c % 2 == 0) acc += term;
        else acc -= term;
    }
    return acc;
}

// omega(v_1..v_k) = sum_I f_I det[e^{I_j}(v_l)], with coefficient values
// already specialised and vector components in the ring T.
template <typename T>
T alternating_eval(const std::map<MultiIndex, T>& coeffs, const std::vector<std::vector<T>>& vecs, const T& zero, const T& one)
{
    T acc = zero;
    for (const auto& [I, f] : coeffs) {
        if (f.is_zero()) continue;
        std::vector<std::vector<T>> m(I.size(), std::vector<T>(I.size(), zero));
        bool zero_col = false;
        for (size_t l = 0; l < I.size() && !zero_col; ++l) {
            bool all = true;
            for (size_t j = 0; j < I.size(); ++j) {
                m[j][l] = vecs[l][I[j]];
                all = all && m[j][l].is_zero();
            }
            zero_col = all;
        }
        if (zero_col) continue;
        acc += f * ring_det(m, zero, one);
    }
    return acc;
}

struct FiberVector {
    VarMap base_point;
    Vec components;
};

// Coefficients of a Poly form evaluated at a base point.
std::map<MultiIndex, Rational> coefficients_at(const AlgebroidForm& w, const VarMap& point);

// Full antisymmetric multilinear evaluation.
Rational evaluate_form(const AlgebroidForm& w, const VarMap& point, const std::vector<FiberVector>& vectors);
// Same with raw component vectors at `point`.
Rational evaluate_form(const AlgebroidForm& w, const VarMap& point, const std::vector<Vec>& vectors);

// Candidate subspace of a fiber: base point and row-wise spanning vectors.
struct SubspaceCandidate {
    VarMap base_point;
    Mat span; // rows are vectors
    int declared_dim = -1; // -1: number of rows
    int dim() const { return declared_dim < 0 ? static_cast<int>(span.rows()) : declared_dim; }
};

// True iff w vanishes on every increasing tuple of spanning vectors. Throws
// std::invalid_argument on a degenerate spanning set.
bool restrict_vanishes(const AlgebroidForm& w, const SubspaceCandidate& E);

struct ValidationReport {
    std::vector<std::string> antisymmetry;
    std::vector<std::string> split_form;
    std::vector<std::string> anchor_compatibility; // delta^2 x^i != 0
    std::vector<std::string> jacobi;               // delta^2 e^alpha != 0
    bool valid() const { return antisymmetry.empty() && split_form.empty() && anchor_compatibility.empty() && jacobi.empty(); }
};

template <typename C>
ValidationReport validate_structure(const std::shared_ptr<const Structure<C>>& A)
{
    ValidationReport rep;
    const size_t N = A->rank(), n = A->dim();
    size_t splitting = 0;
    for (size_t a = 0; a < N; ++a) {
        const auto& lab = A->basis()[a];
        if (lab.kind == LabelKind::Splitting) {
            ++splitting;
            int j = A->coord_index(lab.splits);
            if (j < 0) throw std::invalid_argument("label '" + lab.name + "' splits an unknown coordinate");
            for (size_t i = 0; i < n; ++i) {
                const C& r = A->anchor(a, i);
                C want = Coeff<C>::constant(A->proto(), Rational(static_cast<int>(i) == j ? 1 : 0));
                if (!(r - want).is_zero())
                    rep.split_form.push_back("anchor of splitting label " + lab.name + " is not the unit row of " + lab.splits);
            }
        } else {
            for (size_t i = 0; i < n; ++i)
                if (!A->anchor(a, i).is_zero()) rep.split_form.push_back("anchor of kernel label " + lab.name + " is nonzero");
        }
    }
    for (size_t j = 0; j < n; ++j)
        if (A->splitting_label(static_cast<int>(j)) < 0) rep.split_form.push_back("coordinate " + A->coords()[j] + " has no splitting label");
    if (splitting != n) rep.split_form.push_back("splitting labels do not match coordinates one-to-one");
    for (size_t a = 0; a < N; ++a)
        for (size_t b = a; b < N; ++b)
            for (size_t g = 0; g < N; ++g) {
                if (!(A->L(a, b, g) + A->L(b, a, g)).is_zero())
                    rep.antisymmetry.push_back("L^" + A->basis()[g].name + "_{" + A->basis()[a].name + "," + A->basis()[b].name + "} is not antisymmetric");
            }
    for (size_t i = 0; i < n; ++i) {
        C x = Coeff<C>::lift(A->proto(), Poly::variable(A->coords()[i], A->coords()));
        Form<C> dd = delta(delta_function<C>(A, x));
        for (const auto& [I, f] : dd.terms())
            rep.anchor_compatibility.push_back("delta^2 " + A->coords()[i] + " has coefficient " + f.str() + " on " + A->basis()[I[0]].name + "^" + A->basis()[I[1]].name);
    }
    for (size_t g = 0; g < N; ++g) {
        Form<C> dd = delta(delta_dual<C>(A, static_cast<int>(g)));
        for (const auto& [I, f] : dd.terms()) {
            std::string lab;
            for (size_t k = 0; k < I.size(); ++k) lab += (k ? "^" : "") + A->basis()[I[k]].name;
            rep.jacobi.push_back("delta^2 e^" + A->basis()[g].name + " has coefficient " + f.str() + " on " + lab);
        }
    }
    return rep;
}

template <typename C>
std::string form_str(const Form<C>& w)
{
    if (w.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [I, f] : w.terms()) {
        if (!first) out += " + ";
        first = false;
        out += "(" + f.str() + ")";
        for (size_t k = 0; k < I.size(); ++k) out += (k ? "^" : "*") + w.parent()->basis()[I[k]].name;
    }
    return out;
}

} // namespace edskit
