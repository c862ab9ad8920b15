#include "edskit/io.hpp"
#include "edskit/parser.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace edskit {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw SchemaError(where + ": " + what); }

const ordered_json& member(const ordered_json& j, const std::string& key, const std::string& where)
{
    if (!j.is_object()) fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where, "missing key '" + key + "'");
    return *it;
}

std::string as_string(const ordered_json& j, const std::string& where)
{
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    fail(where, "expected a string");
}

Poly expr(const ordered_json& j, const std::vector<std::string>& vars, const std::string& where)
{
    try {
        return parse_expr(as_string(j, where), vars);
    } catch (const ParseError& e) {
        fail(where, e.what());
    }
}

Rational rational(const ordered_json& j, const std::string& where)
{
    Poly p = expr(j, {}, where);
    if (!p.is_constant()) fail(where, "expected a rational number");
    return p.constant_term();
}

std::vector<std::string> names(const ordered_json& j, const std::string& where)
{
    if (!j.is_array()) fail(where, "expected an array of names");
    std::vector<std::string> out;
    for (size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

VarMap point(const ordered_json& j, const AlgebroidStructure& A, const std::string& where)
{
    if (!j.is_object()) fail(where, "expected an object of coordinates");
    VarMap out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (A.coord_index(it.key()) < 0) fail(where, "unknown coordinate '" + it.key() + "'");
        out[it.key()] = rational(it.value(), where + "." + it.key());
    }
    for (const auto& c : A.coords())
        if (!out.count(c)) fail(where, "missing coordinate '" + c + "'");
    return out;
}

Mat matrix(const ordered_json& j, size_t cols, const std::string& where)
{
    if (!j.is_array()) fail(where, "expected a matrix (array of rows)");
    Mat M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < j.size(); ++r) {
        const std::string w = where + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols) fail(w, "expected a row of length " + std::to_string(cols));
        for (size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rational(j[r][c], w);
    }
    return M;
}

ordered_json matrix_json(const Mat& M)
{
    ordered_json out = ordered_json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c).str());
        out.push_back(row);
    }
    return out;
}

ordered_json point_json(const VarMap& p, const AlgebroidStructure& A)
{
    ordered_json out = ordered_json::object();
    for (const auto& c : A.coords()) out[c] = p.at(c).str();
    return out;
}

ElementQuery element_query(const ordered_json& j, const AlgebroidStructure& A, const std::string& where)
{
    ElementQuery q;
    q.base_point = point(member(j, "base_point", where), A, where + ".base_point");
    q.span = matrix(member(j, "span", where), A.rank(), where + ".span");
    if (j.contains("chart")) {
        q.chart = names(j["chart"], where + ".chart");
        for (const auto& n : q.chart)
            if (A.label_index(n) < 0) fail(where + ".chart", "unknown basis label '" + n + "'");
    }
    return q;
}

ordered_json element_json(const ElementQuery& q, const AlgebroidStructure& A)
{
    ordered_json out = {{"base_point", point_json(q.base_point, A)}, {"span", matrix_json(q.span)}};
    if (!q.chart.empty()) out["chart"] = q.chart;
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw SchemaError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json parse_json(const std::string& text)
{
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

IdealSpec ProblemFile::ideal() const
{
    std::vector<AlgebroidForm> forms;
    std::vector<std::string> labels;
    for (const auto& g : generators) {
        forms.push_back(g.form);
        labels.push_back(g.name);
    }
    return close_ideal(forms, labels, assert_closed);
}

IntegralElement ProblemFile::element(const std::string& name) const
{
    auto it = elements.find(name);
    if (it == elements.end()) {
        it = extensions.find(name);
        if (it == extensions.end()) throw SchemaError("unknown element '" + name + "'");
    }
    return {it->second.base_point, it->second.span};
}

std::vector<IntegralElement> ProblemFile::flag(const std::string& name) const
{
    auto it = flags.find(name);
    if (it == flags.end()) throw SchemaError("unknown flag '" + name + "'");
    std::vector<IntegralElement> out;
    for (const auto& M : it->second.members) out.push_back({it->second.base_point, M});
    return out;
}

ProblemFile parse_problem(const std::string& text)
{
    ordered_json root = parse_json(text);
    ProblemFile pf;
    const auto& alg = member(root, "algebroid", "$");
    std::vector<std::string> coords = names(member(alg, "coords", "algebroid"), "algebroid.coords");
    std::set<std::string> seen;
    for (const auto& c : coords)
        if (!seen.insert(c).second) fail("algebroid.coords", "repeated coordinate '" + c + "'");
    const auto& bj = member(alg, "basis", "algebroid");
    if (!bj.is_array() || bj.empty()) fail("algebroid.basis", "expected a non-empty array");
    std::vector<BasisLabel> basis;
    for (size_t i = 0; i < bj.size(); ++i) {
        const std::string w = "algebroid.basis[" + std::to_string(i) + "]";
        BasisLabel b;
        b.name = as_string(member(bj[i], "name", w), w + ".name");
        if (!seen.insert(b.name).second) fail(w, "name '" + b.name + "' is already used");
        std::string kind = as_string(member(bj[i], "kind", w), w + ".kind");
        if (kind == "kernel") b.kind = LabelKind::Kernel;
        else if (kind == "splitting") {
            b.kind = LabelKind::Splitting;
            b.splits = as_string(member(bj[i], "splits", w), w + ".splits");
            if (std::find(coords.begin(), coords.end(), b.splits) == coords.end()) fail(w, "splits unknown coordinate '" + b.splits + "'");
        } else fail(w + ".kind", "expected \"kernel\" or \"splitting\"");
        basis.push_back(b);
    }
    std::shared_ptr<AlgebroidStructure> A;
    try {
        A = std::make_shared<AlgebroidStructure>(coords, basis, Poly(coords));
    } catch (const std::invalid_argument& e) {
        fail("algebroid", e.what());
    }
    if (alg.contains("anchor")) {
        const auto& an = alg["anchor"];
        if (!an.is_object()) fail("algebroid.anchor", "expected an object");
        for (auto it = an.begin(); it != an.end(); ++it) {
            const std::string w = "algebroid.anchor." + it.key();
            int a = A->label_index(it.key());
            if (a < 0) fail(w, "unknown basis label");
            if (!it.value().is_array() || it.value().size() != coords.size()) fail(w, "expected " + std::to_string(coords.size()) + " expressions");
            for (size_t i = 0; i < coords.size(); ++i) A->set_anchor(a, i, expr(it.value()[i], coords, w + "[" + std::to_string(i) + "]"));
        }
    }
    if (alg.contains("brackets")) {
        const auto& br = alg["brackets"];
        if (!br.is_object()) fail("algebroid.brackets", "expected an object");
        for (auto it = br.begin(); it != br.end(); ++it) {
            const std::string w = "algebroid.brackets." + it.key();
            auto comma = it.key().find(',');
            if (comma == std::string::npos) fail(w, "key must be \"a,b\"");
            int a = A->label_index(it.key().substr(0, comma)), b = A->label_index(it.key().substr(comma + 1));
            if (a < 0 || b < 0) fail(w, "unknown basis label");
            if (a >= b) fail(w, "only pairs a < b in basis order are stored");
            if (!it.value().is_object()) fail(w, "expected an object");
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                int g = A->label_index(jt.key());
                if (g < 0) fail(w + "." + jt.key(), "unknown basis label");
                A->set_bracket(a, b, g, expr(jt.value(), coords, w + "." + jt.key()));
            }
        }
    }
    pf.algebroid = A;

    const auto& idl = member(root, "ideal", "$");
    const auto& gens = member(idl, "generators", "ideal");
    if (!gens.is_array()) fail("ideal.generators", "expected an array");
    for (size_t i = 0; i < gens.size(); ++i) {
        const std::string w = "ideal.generators[" + std::to_string(i) + "]";
        const auto& g = gens[i];
        const auto& dj = member(g, "degree", w);
        if (!dj.is_number_integer()) fail(w + ".degree", "expected an integer");
        int deg = dj.get<int>();
        if (deg < 1 || static_cast<size_t>(deg) > A->rank()) fail(w + ".degree", "out of range");
        GeneratorSpec spec{g.contains("name") ? as_string(g["name"], w + ".name") : "g" + std::to_string(i + 1), AlgebroidForm(A, deg)};
        const auto& terms = member(g, "terms", w);
        if (!terms.is_array()) fail(w + ".terms", "expected an array");
        for (size_t t = 0; t < terms.size(); ++t) {
            const std::string wt = w + ".terms[" + std::to_string(t) + "]";
            auto idx = names(member(terms[t], "index", wt), wt + ".index");
            if (static_cast<int>(idx.size()) != deg) fail(wt + ".index", "length differs from the degree");
            std::vector<int> I;
            for (const auto& n : idx) {
                int k = A->label_index(n);
                if (k < 0) fail(wt + ".index", "unknown basis label '" + n + "'");
                I.push_back(k);
            }
            spec.form.add_term(I, expr(member(terms[t], "coeff", wt), coords, wt + ".coeff"));
        }
        pf.generators.push_back(spec);
    }
    if (idl.contains("closed")) {
        if (!idl["closed"].is_boolean()) fail("ideal.closed", "expected a boolean");
        pf.assert_closed = idl["closed"].get<bool>();
    }

    if (root.contains("queries")) {
        const auto& q = root["queries"];
        if (!q.is_object()) fail("queries", "expected an object");
        for (const char* kind : {"elements", "extensions"}) {
            if (!q.contains(kind)) continue;
            auto& target = std::string(kind) == "elements" ? pf.elements : pf.extensions;
            const auto& obj = q[kind];
            if (!obj.is_object()) fail(std::string("queries.") + kind, "expected an object");
            for (auto it = obj.begin(); it != obj.end(); ++it)
                target[it.key()] = element_query(it.value(), *A, std::string("queries.") + kind + "." + it.key());
        }
        if (q.contains("flags")) {
            const auto& obj = q["flags"];
            if (!obj.is_object()) fail("queries.flags", "expected an object");
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                const std::string w = "queries.flags." + it.key();
                FlagQuery f;
                f.base_point = point(member(it.value(), "base_point", w), *A, w + ".base_point");
                const auto& mem = member(it.value(), "members", w);
                if (!mem.is_array() || mem.empty()) fail(w + ".members", "expected a non-empty array of span matrices");
                for (size_t m = 0; m < mem.size(); ++m) f.members.push_back(matrix(mem[m], A->rank(), w + ".members[" + std::to_string(m) + "]"));
                if (it.value().contains("l")) {
                    if (!it.value()["l"].is_number_integer()) fail(w + ".l", "expected an integer");
                    f.l = it.value()["l"].get<int>();
                }
                pf.flags[it.key()] = f;
            }
        }
    }
    return pf;
}

ProblemFile load_problem(const std::string& path) { return parse_problem(read_file(path)); }

std::string dump_problem(const ProblemFile& pf)
{
    const auto& A = *pf.algebroid;
    ordered_json alg;
    alg["coords"] = A.coords();
    alg["basis"] = ordered_json::array();
    for (const auto& b : A.basis()) {
        ordered_json e = {{"name", b.name}, {"kind", b.kind == LabelKind::Kernel ? "kernel" : "splitting"}};
        if (b.kind == LabelKind::Splitting) e["splits"] = b.splits;
        alg["basis"].push_back(e);
    }
    alg["anchor"] = ordered_json::object();
    for (size_t a = 0; a < A.rank(); ++a) {
        ordered_json row = ordered_json::array();
        for (size_t i = 0; i < A.dim(); ++i) row.push_back(A.anchor(a, i).str());
        alg["anchor"][A.basis()[a].name] = row;
    }
    alg["brackets"] = ordered_json::object();
    for (size_t a = 0; a < A.rank(); ++a)
        for (size_t b = a + 1; b < A.rank(); ++b) {
            ordered_json e = ordered_json::object();
            for (size_t g = 0; g < A.rank(); ++g)
                if (!A.L(a, b, g).is_zero()) e[A.basis()[g].name] = A.L(a, b, g).str();
            if (!e.empty()) alg["brackets"][A.basis()[a].name + "," + A.basis()[b].name] = e;
        }
    ordered_json idl;
    idl["generators"] = ordered_json::array();
    for (const auto& g : pf.generators) {
        ordered_json e = {{"name", g.name}, {"degree", g.form.degree()}, {"terms", ordered_json::array()}};
        for (const auto& [I, f] : g.form.terms()) {
            std::vector<std::string> idx;
            for (int k : I) idx.push_back(A.basis()[k].name);
            e["terms"].push_back({{"index", idx}, {"coeff", f.str()}});
        }
        idl["generators"].push_back(e);
    }
    if (pf.assert_closed) idl["closed"] = true;
    ordered_json q = {{"elements", ordered_json::object()}, {"flags", ordered_json::object()}, {"extensions", ordered_json::object()}};
    for (const auto& [n, e] : pf.elements) q["elements"][n] = element_json(e, A);
    for (const auto& [n, e] : pf.extensions) q["extensions"][n] = element_json(e, A);
    for (const auto& [n, f] : pf.flags) {
        ordered_json fj = {{"base_point", point_json(f.base_point, A)}, {"members", ordered_json::array()}};
        for (const auto& M : f.members) fj["members"].push_back(matrix_json(M));
        if (f.l) fj["l"] = *f.l;
        q["flags"][n] = fj;
    }
    ordered_json root = {{"algebroid", alg}, {"ideal", idl}, {"queries", q}};
    return root.dump(2) + "\n";
}

SeriesManifold parse_manifold(const std::string& text, const StructurePtr& ambient)
{
    ordered_json root = parse_json(text);
    SeriesManifold m;
    m.ambient = ambient;
    m.domain = names(member(root, "domain", "$"), "domain");
    const auto& oj = member(root, "order", "$");
    if (oj.is_number_integer()) {
        if (oj.get<int>() < 0) fail("order", "must be non-negative");
        m.order = oj.get<int>();
    } else if (!oj.is_null()) fail("order", "expected an integer or null");
    const auto& comps = member(root, "components", "$");
    if (!comps.is_object()) fail("components", "expected an object keyed by coordinate");
    for (auto it = comps.begin(); it != comps.end(); ++it)
        if (ambient->coord_index(it.key()) < 0) fail("components." + it.key(), "unknown coordinate");
    for (const auto& c : ambient->coords()) m.components.push_back(expr(member(comps, c, "components"), m.domain, "components." + c));
    return m;
}

SeriesManifold load_manifold(const std::string& path, const StructurePtr& ambient) { return parse_manifold(read_file(path), ambient); }

std::string dump_manifold(const SeriesManifold& m)
{
    ordered_json root;
    root["domain"] = m.domain;
    root["order"] = m.order ? ordered_json(*m.order) : ordered_json(nullptr);
    root["components"] = ordered_json::object();
    for (size_t j = 0; j < m.components.size(); ++j) root["components"][m.ambient->coords()[j]] = m.components[j].str();
    return root.dump(2) + "\n";
}

bool same_structure(const AlgebroidStructure& a, const AlgebroidStructure& b)
{
    if (a.coords() != b.coords() || a.rank() != b.rank()) return false;
    for (size_t i = 0; i < a.rank(); ++i) {
        const auto &x = a.basis()[i], &y = b.basis()[i];
        if (x.name != y.name || x.kind != y.kind || x.splits != y.splits) return false;
        for (size_t j = 0; j < a.dim(); ++j)
            if (a.anchor(i, j) != b.anchor(i, j)) return false;
        for (size_t k = 0; k < a.rank(); ++k)
            for (size_t g = 0; g < a.rank(); ++g)
                if (a.L(i, k, g) != b.L(i, k, g)) return false;
    }
    return true;
}

} // namespace edskit
