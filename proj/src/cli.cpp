#include "edskit/cli.hpp"
#include "edskit/io.hpp"
#include "edskit/parser.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace edskit {

using nlohmann::ordered_json;

namespace {

struct Options {
    std::string file;
    std::string element;
    std::string flag;
    std::string manifold;
    std::string output;
    int samples = 16;
    std::uint64_t seed = 0;
    int order = 6;
    bool order_given = false;
    bool provisional = false;
    bool json = false;
};

std::string vec_str(const Mat& M, Eigen::Index r)
{
    std::string s = "(";
    for (Eigen::Index c = 0; c < M.cols(); ++c) s += (c ? ", " : "") + M(r, c).str();
    return s + ")";
}

ordered_json rows_json(const Mat& M)
{
    ordered_json out = ordered_json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c).str());
        out.push_back(row);
    }
    return out;
}

ordered_json point_json(const VarMap& p)
{
    ordered_json out = ordered_json::object();
    for (const auto& [k, v] : p) out[k] = v.str();
    return out;
}

std::string point_str(const VarMap& p, const std::vector<std::string>& order)
{
    std::string s;
    for (const auto& c : order) s += (s.empty() ? "" : ", ") + c + "=" + p.at(c).str();
    return s;
}

ordered_json validation_json(const ValidationReport& r)
{
    return {{"valid", r.valid()},
            {"antisymmetry", r.antisymmetry},
            {"split_form", r.split_form},
            {"anchor_compatibility", r.anchor_compatibility},
            {"jacobi", r.jacobi}};
}

ordered_json probe_json(const ProbeResult& r)
{
    const auto& e = r.evidence;
    ordered_json samples = ordered_json::array();
    for (const auto& s : e.samples)
        samples.push_back({{"chart_point", point_json(s.chart_point)},
                           {"exact", s.exact},
                           {"vanish", s.vanish},
                           {"jacobian_rank", s.jacobian_rank},
                           {"ordinary", s.ordinary},
                           {"dim_h", s.dim_h}});
    ordered_json ev = {{"functions", e.functions}, {"selected", e.selected}, {"jacobian_rank", e.jacobian_rank},
                       {"pivots", e.pivots},       {"affine", e.affine},     {"attempts", e.attempts},
                       {"samples", samples},       {"notes", e.notes}};
    if (e.dim_h_at_element >= 0) ev["dim_h_at_element"] = e.dim_h_at_element;
    if (e.constant_all) ev["constant_all"] = *e.constant_all;
    if (e.constant_ordinary_only) ev["constant_ordinary_only"] = *e.constant_ordinary_only;
    return {{"verdict", to_string(r.verdict)}, {"reason", r.reason}, {"chart", r.chart}, {"evidence", ev}};
}

ordered_json verification_json(const VerificationReport& r)
{
    ordered_json gens = ordered_json::array();
    for (const auto& g : r.generators) {
        ordered_json j = {{"label", g.label}, {"form_degree", g.form_degree}, {"clean", g.clean}};
        if (!g.clean) {
            j["lowest_degree"] = g.lowest_degree;
            j["witness"] = g.witness;
        }
        gens.push_back(j);
    }
    return {{"clean", r.clean()}, {"order", r.order}, {"checked_through", r.checked_through}, {"exact", r.exact}, {"generators", gens}};
}

std::string summarize_samples(const ProbeEvidence& e)
{
    int exact = 0;
    std::set<int> dims;
    for (const auto& s : e.samples) {
        exact += s.exact ? 1 : 0;
        dims.insert(s.dim_h);
    }
    std::string d;
    for (int x : dims) d += (d.empty() ? "" : ", ") + std::to_string(x);
    return std::to_string(e.samples.size()) + " samples (" + std::to_string(exact) + " exact, " + std::to_string(e.attempts) +
           " attempts), dim H at samples {" + d + "}";
}

void print_probe(std::ostream& out, const ProbeResult& r, const std::string& indent)
{
    out << indent << "chart: Omega = " << r.chart << "\n";
    for (const auto& f : r.evidence.functions) out << indent << "  " << f << "\n";
    for (const auto& n : r.evidence.notes) out << indent << "  (" << n << ")\n";
    out << indent << "regular probe: " << to_string(r.verdict) << " - " << r.reason << "\n";
    if (!r.evidence.samples.empty()) out << indent << "  " << summarize_samples(r.evidence) << "\n";
    if (r.evidence.dim_h_at_element >= 0) out << indent << "  dim H at the element: " << r.evidence.dim_h_at_element << "\n";
}

GrassmannChart chart_for(const ProblemFile& pf, const std::string& name, const IntegralElement& E)
{
    auto it = pf.elements.find(name);
    const ElementQuery* q = it != pf.elements.end() ? &it->second : nullptr;
    if (!q) {
        auto jt = pf.extensions.find(name);
        if (jt != pf.extensions.end()) q = &jt->second;
    }
    if (q && !q->chart.empty()) {
        std::vector<int> piv;
        for (const auto& l : q->chart) piv.push_back(pf.algebroid->label_index(l));
        return GrassmannChart(pf.algebroid, piv);
    }
    return default_chart(pf.algebroid, E);
}

int cmd_validate(const Options& o, std::ostream& out)
{
    ProblemFile pf = load_problem(o.file);
    ValidationReport rep = validate_structure(pf.algebroid);
    IdealSpec I = pf.ideal();
    bool closed_ok = !I.asserted_closed_verdict || *I.asserted_closed_verdict;
    int code = rep.valid() && closed_ok ? Success : MathFailure;
    if (o.json) {
        ordered_json gens = ordered_json::array();
        for (size_t g = 0; g < I.closed_generators.size(); ++g)
            gens.push_back({{"label", I.labels[g]}, {"degree", I.closed_generators[g].degree()}, {"form", form_str(I.closed_generators[g])}});
        ordered_json j = {{"command", "validate"}, {"structure", validation_json(rep)},
                          {"ideal", {{"closed_generators", gens}, {"certificate", I.certificate}}}, {"exit_code", code}};
        if (I.asserted_closed_verdict) j["ideal"]["asserted_closed_verdict"] = *I.asserted_closed_verdict;
        out << j.dump(2) << "\n";
        return code;
    }
    out << "structure: " << (rep.valid() ? "valid" : "INVALID") << "\n";
    auto section = [&](const char* name, const std::vector<std::string>& w) {
        out << "  " << name << ": " << (w.empty() ? "ok" : "FAIL") << "\n";
        for (const auto& s : w) out << "    witness: " << s << "\n";
    };
    section("antisymmetry", rep.antisymmetry);
    section("split form", rep.split_form);
    section("anchor compatibility", rep.anchor_compatibility);
    section("jacobi", rep.jacobi);
    out << "ideal: " << I.generators.size() << " generator(s), " << I.closed_generators.size() << " after closure\n";
    for (size_t g = 0; g < I.closed_generators.size(); ++g) out << "  " << I.labels[g] << " = " << form_str(I.closed_generators[g]) << "\n";
    if (I.asserted_closed_verdict) out << "asserted closed: " << (*I.asserted_closed_verdict ? "confirmed" : "REFUTED") << "\n";
    if (!I.certificate.empty()) out << "certificate: " << I.certificate << "\n";
    return code;
}

int analyze_element(const Options& o, const ProblemFile& pf, std::ostream& out)
{
    IdealSpec I = pf.ideal();
    IntegralElement E = pf.element(o.element);
    const auto& A = *pf.algebroid;
    bool integral = is_integral_element(I, E);
    ordered_json j = {{"command", "analyze"}, {"element", o.element}, {"dim", E.span.rows()}, {"integral", integral}};
    if (!o.json) {
        out << "element " << o.element << " (dim " << E.span.rows() << ") at " << point_str(E.base_point, A.coords()) << "\n";
        out << "integral: " << (integral ? "yes" : "no") << "\n";
    }
    if (!integral) {
        j["exit_code"] = MathFailure;
        if (o.json) out << j.dump(2) << "\n";
        return MathFailure;
    }
    PolarSpace H = polar_space(I, E);
    Extensions ex = extensions(I, E);
    GrassmannChart chart = chart_for(pf, o.element, E);
    ProbeResult rp = kahler_regular_probe(I, E, chart, {o.samples, o.seed});
    int code = rp.verdict == Verdict::CertifiedAtSamples ? Success : MathFailure;
    if (o.json) {
        j["polar_space"] = {{"dim", H.dim}, {"r", H.r}, {"basis", rows_json(H.basis)}, {"equations", rows_json(H.equations)}};
        j["extensions"] = {{"r", ex.r}, {"quotient_basis", rows_json(ex.quotient_basis)}};
        j["regular_probe"] = probe_json(rp);
        j["exit_code"] = code;
        out << j.dump(2) << "\n";
        return code;
    }
    std::vector<std::string> labels;
    for (const auto& b : A.basis()) labels.push_back(b.name);
    std::string lab;
    for (const auto& l : labels) lab += (lab.empty() ? "" : ", ") + l;
    out << "polar space: dim H = " << H.dim << ", r = " << H.r << "   [basis order: " << lab << "]\n";
    for (Eigen::Index r = 0; r < H.basis.rows(); ++r) out << "  " << vec_str(H.basis, r) << "\n";
    out << "extensions: " << ex.quotient_basis.rows() << " direction(s) completing the element to H\n";
    for (Eigen::Index r = 0; r < ex.quotient_basis.rows(); ++r) out << "  " << vec_str(ex.quotient_basis, r) << "\n";
    print_probe(out, rp, "");
    return code;
}

int analyze_flag(const Options& o, const ProblemFile& pf, std::ostream& out)
{
    IdealSpec I = pf.ideal();
    auto flag = pf.flag(o.flag);
    const auto& q = pf.flags.at(o.flag);
    int l = q.l ? *q.l : static_cast<int>(pf.algebroid->kernel_labels().size());
    FlagResult fr = flag_probe(I, flag, l, {o.samples, o.seed});
    int code = fr.ordinary ? Success : MathFailure;
    if (o.json) {
        ordered_json probes = ordered_json::array();
        for (const auto& p : fr.probes) probes.push_back(probe_json(p));
        std::vector<bool> integral(fr.integral.begin(), fr.integral.end());
        ordered_json j = {{"command", "analyze"}, {"flag", o.flag}, {"l", fr.l}, {"verdict", fr.verdict}, {"ordinary", fr.ordinary},
                          {"integral", integral}, {"probes", probes}, {"reason", fr.reason}, {"exit_code", code}};
        out << j.dump(2) << "\n";
        return code;
    }
    out << "flag " << o.flag << " with l = " << l << " at " << point_str(q.base_point, pf.algebroid->coords()) << "\n";
    for (size_t i = 0; i < flag.size(); ++i) {
        out << "member " << i + 1 << " (dim " << flag[i].span.rows() << "): integral " << (fr.integral[i] ? "yes" : "no") << "\n";
        if (i < fr.probes.size()) print_probe(out, fr.probes[i], "  ");
    }
    out << "verdict: " << fr.verdict << "\n";
    if (!fr.ordinary) out << "reason: " << fr.reason << "\n";
    return code;
}

int cmd_analyze(const Options& o, std::ostream& out)
{
    ProblemFile pf = load_problem(o.file);
    if (o.element.empty() == o.flag.empty()) throw SchemaError("analyze needs exactly one of --element or --flag");
    return o.element.empty() ? analyze_flag(o, pf, out) : analyze_element(o, pf, out);
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err)
{
    if (o.order < 2) throw SchemaError("minimum order 2 (got " + std::to_string(o.order) + ")");
    ProblemFile pf = load_problem(o.file);
    IdealSpec I = pf.ideal();
    auto flag = pf.flag(o.flag);
    std::optional<FlagResult> cert;
    if (!o.provisional) {
        int l = static_cast<int>(pf.algebroid->kernel_labels().size());
        cert = flag_probe(I, flag, l, {o.samples, o.seed});
        if (!cert->ordinary) {
            if (o.json) out << ordered_json{{"command", "solve"}, {"flag", o.flag}, {"verdict", cert->verdict}, {"reason", cert->reason}, {"exit_code", MathFailure}}.dump(2) << "\n";
            else out << "flag probe: " << cert->verdict << " - " << cert->reason << "\n(use --provisional to build anyway)\n";
            return MathFailure;
        }
    }
    CkResult res;
    try {
        res = build_from_flag(I, flag, o.order, cert ? &*cert : nullptr);
    } catch (const std::runtime_error& e) {
        err << "solve failed: " << e.what() << "\n";
        return MathFailure;
    } catch (const std::domain_error& e) {
        err << "solve failed: " << e.what() << "\n";
        return MathFailure;
    }
    const auto& tr = res.transcript;
    const auto& A = *pf.algebroid;
    std::string path = o.output.empty() ? o.flag + ".manifold.json" : o.output;
    {
        std::ofstream f(path);
        if (!f) throw SchemaError(path + ": cannot write manifold file");
        f << dump_manifold(res.manifold);
    }
    if (o.json) {
        ordered_json steps = ordered_json::array();
        for (const auto& s : tr.steps) {
            ordered_json dirs = {{"x", ordered_json::array()}, {"u", ordered_json::array()}, {"v", ordered_json::array()}};
            for (const auto& v : s.chart.x_directions) dirs["x"].push_back(rows_json(Mat(v.transpose()))[0]);
            dirs["y"] = rows_json(Mat(s.chart.y_direction.transpose()))[0];
            for (const auto& v : s.chart.u_directions) dirs["u"].push_back(rows_json(Mat(v.transpose()))[0]);
            for (const auto& v : s.chart.v_directions) dirs["v"].push_back(rows_json(Mat(v.transpose()))[0]);
            steps.push_back({{"q", s.q}, {"c", s.c}, {"chart", dirs}, {"kappa", s.kappa}, {"transversality", s.transversality}, {"verification", s.verification}});
        }
        ordered_json comps = ordered_json::object();
        for (size_t j = 0; j < A.dim(); ++j) comps[A.coords()[j]] = res.manifold.components[j].str();
        ordered_json j = {{"command", "solve"}, {"flag", o.flag}, {"tag", tr.tag}, {"order", o.order}, {"codims", tr.codims},
                          {"steps", steps}, {"domain", tr.domain}, {"components", comps},
                          {"span_matches_top", tr.span_matches_top}, {"verification", tr.final_verification},
                          {"manifold_file", path}, {"exit_code", Success}};
        out << j.dump(2) << "\n";
        return Success;
    }
    out << "flag " << o.flag << ": " << (cert ? cert->verdict : std::string("not probed")) << "\n";
    out << "tag: " << tr.tag << "\n";
    for (const auto& s : tr.steps) {
        out << "step " << s.q << ": c = " << s.c << ", y along " << vec_str(Mat(s.chart.y_direction.transpose()), 0);
        out << ", u-block {";
        for (size_t k = 0; k < s.chart.u_directions.size(); ++k) out << (k ? ", " : "") << vec_str(Mat(s.chart.u_directions[k].transpose()), 0);
        out << "}\n  kappa: ";
        for (size_t k = 0; k < s.kappa.size(); ++k) out << (k ? ", " : "") << s.kappa[k];
        out << (s.kappa.empty() ? "(none)" : "") << "\n  transversality: " << s.transversality << "\n  verification: " << s.verification << "\n";
    }
    out << "manifold (truncation order " << o.order << "), domain {";
    for (size_t k = 0; k < res.manifold.domain.size(); ++k) out << (k ? ", " : "") << res.manifold.domain[k];
    out << "}:\n";
    for (size_t j = 0; j < A.dim(); ++j) out << "  " << A.coords()[j] << " = " << res.manifold.components[j].str() << "\n";
    out << "verification: " << tr.final_verification << "\n";
    out << "base point span equals flag top: " << (tr.span_matches_top ? "yes" : "no") << "\n";
    out << "manifold written to " << path << "\n";
    return Success;
}

int cmd_verify(const Options& o, std::ostream& out)
{
    ProblemFile pf = load_problem(o.file);
    SeriesManifold m = load_manifold(o.manifold, pf.algebroid);
    int order = o.order_given ? o.order : (m.order ? *m.order : 6);
    VerificationReport rep = verify_integral_manifold(m, pf.ideal(), order);
    int code = rep.clean() ? Success : MathFailure;
    const GeneratorVerdict* first = nullptr;
    for (const auto& g : rep.generators)
        if (!g.clean && (!first || g.lowest_degree < first->lowest_degree)) first = &g;
    if (o.json) {
        ordered_json j = {{"command", "verify"}, {"report", verification_json(rep)}, {"exit_code", code}};
        if (first) j["first_failure"] = {{"generator", first->label}, {"degree", first->lowest_degree}};
        out << j.dump(2) << "\n";
        return code;
    }
    out << rep.summary() << "\n";
    if (first) out << "first failure: " << first->label << " at degree " << first->lowest_degree << "\n";
    return code;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exterior differential systems on Lie algebroids"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* c) {
        c->add_option("file", o.file, "problem file")->required();
        c->add_flag("--json", o.json, "machine-readable report");
    };
    auto sampling = [&](CLI::App* c) {
        c->add_option("--samples", o.samples, "probe samples")->check(CLI::PositiveNumber);
        c->add_option("--seed", o.seed, "probe seed (EDSKIT_SEED overrides)");
    };
    CLI::App* validate = app.add_subcommand("validate", "check the structure and the ideal");
    common(validate);
    CLI::App* analyze = app.add_subcommand("analyze", "integrality, polar spaces and probes");
    common(analyze);
    sampling(analyze);
    analyze->add_option("--element", o.element, "element query");
    analyze->add_option("--flag", o.flag, "flag query");
    CLI::App* solve = app.add_subcommand("solve", "build an integral manifold from a flag");
    common(solve);
    sampling(solve);
    solve->add_option("--flag", o.flag, "flag query")->required();
    solve->add_option("--order", o.order, "truncation order");
    solve->add_flag("--provisional", o.provisional, "skip the flag probe");
    solve->add_option("--output", o.output, "manifold file to write (default <flag>.manifold.json)");
    CLI::App* verify = app.add_subcommand("verify", "check a manifold against the ideal");
    common(verify);
    verify->add_option("--manifold", o.manifold, "manifold file")->required();
    auto* order_opt = verify->add_option("--order", o.order, "verification order");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Success;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return InputError;
    }
    o.order_given = order_opt->count() > 0;
    if (const char* env = std::getenv("EDSKIT_SEED")) {
        try {
            size_t used = 0;
            o.seed = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            err << "error: EDSKIT_SEED is not an unsigned integer\n";
            return InputError;
        }
    }
    try {
        if (validate->parsed()) return cmd_validate(o, out);
        if (analyze->parsed()) return cmd_analyze(o, out);
        if (solve->parsed()) return cmd_solve(o, out, err);
        return cmd_verify(o, out);
    } catch (const SchemaError& e) {
        err << "input error: " << e.what() << "\n";
        return InputError;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        return InputError;
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << "\n";
        return InputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return MathFailure;
    }
}

} // namespace edskit
