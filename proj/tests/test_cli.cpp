#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "builders.hpp"
#include "edskit/cli.hpp"
#include "edskit/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace edskit;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(EDSKIT_FIXTURE_DIR) + "/" + name; }

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    fs::path dir = fs::temp_directory_path() / "edskit_test_cli";
    fs::create_directories(dir);
    return dir / name;
}

std::string write_temp(const std::string& name, const std::string& text)
{
    auto p = scratch(name);
    std::ofstream(p) << text;
    return p.string();
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

const char* kProblems[] = {"simple-r3.json", "ip-r1-prolonged.json", "ip-r1-c2zero.json", "ip-r1-mutated.json"};

} // namespace

TEST_CASE("fixtures load to the hand-built structures")
{
    auto r3 = load_problem(fixture("simple-r3.json"));
    CHECK(same_structure(*r3.algebroid, *build::simple_r3()));
    auto gens = build::simple_r3_generators(r3.algebroid);
    REQUIRE(r3.generators.size() == 2);
    CHECK(r3.generators[0].form == gens[0]);
    CHECK(r3.generators[1].form == gens[1]);

    auto ip = load_problem(fixture("ip-r1-prolonged.json"));
    CHECK(same_structure(*ip.algebroid, *build::ip_prolonged()));
    REQUIRE(ip.generators.size() == 1);
    CHECK(ip.generators[0].form == build::sigma11(ip.algebroid));
    CHECK(ip.flag("main").size() == 3);
    CHECK(ip.element("E1").span.rows() == 1);

    auto mutated = load_problem(fixture("ip-r1-mutated.json"));
    CHECK_FALSE(same_structure(*mutated.algebroid, *ip.algebroid));
}

TEST_CASE("problem and manifold round trips are canonical")
{
    for (const char* name : kProblems) {
        CAPTURE(name);
        auto p = load_problem(fixture(name));
        std::string once = dump_problem(p);
        auto q = parse_problem(once);
        CHECK(dump_problem(q) == once);
        CHECK(same_structure(*p.algebroid, *q.algebroid));
        CHECK(q.elements.size() == p.elements.size());
        CHECK(q.flags.size() == p.flags.size());
    }
    auto ip = load_problem(fixture("ip-r1-prolonged.json"));
    auto m = load_manifold(fixture("ip-r1-h-family.manifold.json"), ip.algebroid);
    std::string once = dump_manifold(m);
    CHECK(dump_manifold(parse_manifold(once, ip.algebroid)) == once);
}

TEST_CASE("the h-family fixture agrees with the series oracle")
{
    auto ip = load_problem(fixture("ip-r1-prolonged.json"));
    auto m = load_manifold(fixture("ip-r1-h-family.manifold.json"), ip.algebroid);
    auto ref = build::h_family_section(ip.algebroid, 1, 1, 0, 6);
    REQUIRE(m.order == ref.order);
    REQUIRE(m.components.size() == ref.components.size());
    for (size_t i = 0; i < m.components.size(); ++i) CHECK(m.components[i] == ref.components[i]);
}

TEST_CASE("schema errors are input errors")
{
    std::string good = slurp(fixture("simple-r3.json"));
    CHECK(cli({"validate", write_temp("broken.json", "{ not json")}).code == InputError);
    CHECK(cli({"validate", "/nonexistent/problem.json"}).code == InputError);

    std::string reversed = good;
    auto pos = reversed.find("\"brackets\": {}");
    REQUIRE(pos != std::string::npos);
    reversed.replace(pos, 14, "\"brackets\": {\"d2,d1\": {\"k1\": \"1\"}}");
    auto r = cli({"validate", write_temp("reversed.json", reversed)});
    CHECK(r.code == InputError);
    CHECK_THROWS_AS(parse_problem(reversed), SchemaError);

    std::string unknown = good;
    pos = unknown.rfind("\"d2\"");
    REQUIRE(pos != std::string::npos);
    unknown.replace(pos, 4, "\"zz\"");
    CHECK_THROWS_AS(parse_problem(unknown), SchemaError);

    CHECK(cli({"analyze", fixture("simple-r3.json"), "--element", "nope"}).code == InputError);
    CHECK(cli({"frobnicate"}).code == InputError);
}

TEST_CASE("validate")
{
    for (const char* name : {"simple-r3.json", "ip-r1-prolonged.json", "ip-r1-c2zero.json"}) {
        CAPTURE(name);
        CHECK(cli({"validate", fixture(name)}).code == Success);
    }
    auto bad = cli({"validate", fixture("ip-r1-mutated.json")});
    CHECK(bad.code == MathFailure);
    CHECK(contains(bad.out, "jacobi: FAIL"));
    CHECK(contains(bad.out, "witness"));
}

TEST_CASE("analyze elements and flags")
{
    auto ip = fixture("ip-r1-prolonged.json");
    CHECK(cli({"analyze", ip, "--element", "E1"}).code == Success);
    CHECK(cli({"analyze", ip, "--element", "E_z"}).code == Success);
    CHECK(cli({"analyze", ip, "--element", "E2_tilde"}).code == MathFailure);
    CHECK(cli({"analyze", fixture("simple-r3.json"), "--element", "off"}).code == MathFailure);

    auto main = cli({"analyze", ip, "--flag", "main"});
    CHECK(main.code == Success);
    CHECK(contains(main.out, "1-ORDINARY-AT-SAMPLES"));
    auto tilde = cli({"analyze", ip, "--flag", "tilde"});
    CHECK(tilde.code == MathFailure);
    CHECK(contains(tilde.out, "NOT 1-ORDINARY"));
    CHECK(contains(tilde.out, "4 at the element vs 3"));
    CHECK(cli({"analyze", ip, "--flag", "literal"}).code == InputError);
}

TEST_CASE("solve the straight-line example")
{
    auto out = scratch("r3.manifold.json").string();
    auto r = cli({"solve", fixture("simple-r3.json"), "--flag", "main", "--order", "4", "--output", out});
    REQUIRE(r.code == Success);
    CHECK(contains(r.out, "x3 = x1 + 2"));
    CHECK(contains(r.out, "tag: CERTIFIED-AT-SAMPLES"));
    CHECK(contains(r.out, "base point span equals flag top: yes"));

    auto p = load_problem(fixture("simple-r3.json"));
    auto m = load_manifold(out, p.algebroid);
    auto ref = build::simple_r3_curve(p.algebroid, 0, 1, 2);
    std::vector<std::string> dom{"x1"};
    CHECK(m.domain == dom);
    CHECK(m.components[1] == Poly::constant(1, dom));
    CHECK(m.components[2] == Poly::variable("x1", dom) + Poly::constant(2, dom));
    CHECK(ref.components.size() == m.components.size());

    CHECK(cli({"verify", fixture("simple-r3.json"), "--manifold", out}).code == Success);
    CHECK(cli({"verify", fixture("simple-r3.json"), "--manifold", fixture("simple-r3-j.manifold.json")}).code == Success);
}

TEST_CASE("solve the prolonged example")
{
    auto out = scratch("ip.manifold.json").string();
    auto r = cli({"solve", fixture("ip-r1-prolonged.json"), "--flag", "main", "--order", "5", "--output", out});
    REQUIRE(r.code == Success);
    CHECK(contains(r.out, "P = 1"));
    CHECK(contains(r.out, "Q = 0"));

    auto flat = cli({"solve", fixture("ip-r1-c2zero.json"), "--flag", "main", "--order", "5", "--output",
                     scratch("flat.manifold.json").string()});
    REQUIRE(flat.code == Success);
    CHECK(contains(flat.out, "s = 1\n"));
    CHECK(contains(flat.out, "Q = 0\n"));

    auto low = cli({"solve", fixture("ip-r1-prolonged.json"), "--flag", "main", "--order", "1"});
    CHECK(low.code == InputError);
    CHECK(contains(low.err, "minimum order 2"));

    auto tilde = cli({"solve", fixture("ip-r1-prolonged.json"), "--flag", "tilde", "--order", "3", "--output",
                      scratch("tilde.manifold.json").string()});
    CHECK(tilde.code == MathFailure);
    auto prov = cli({"solve", fixture("ip-r1-prolonged.json"), "--flag", "tilde", "--order", "3", "--provisional",
                     "--output", scratch("tilde.manifold.json").string()});
    CHECK(prov.code == Success);
    CHECK(contains(prov.out, "tag: PROVISIONAL"));
}

TEST_CASE("verify reports the first failing degree")
{
    auto ip = fixture("ip-r1-prolonged.json");
    CHECK(cli({"verify", ip, "--manifold", fixture("ip-r1-h-family.manifold.json")}).code == Success);
    auto bad = cli({"verify", ip, "--manifold", fixture("ip-r1-tampered.manifold.json")});
    CHECK(bad.code == MathFailure);
    CHECK(contains(bad.out, "first failure: sigma11 at degree 2"));
}

TEST_CASE("seeding is deterministic and overridable")
{
    auto ip = fixture("ip-r1-prolonged.json");
    auto a = cli({"analyze", ip, "--flag", "main", "--json"});
    auto b = cli({"analyze", ip, "--flag", "main", "--json"});
    CHECK(a.out == b.out);
    auto seeded = cli({"analyze", ip, "--flag", "main", "--json", "--seed", "7"});
    CHECK(seeded.out != a.out);

    ::setenv("EDSKIT_SEED", "7", 1);
    auto env = cli({"analyze", ip, "--flag", "main", "--json"});
    auto env_over = cli({"analyze", ip, "--flag", "main", "--json", "--seed", "99"});
    ::setenv("EDSKIT_SEED", "x7", 1);
    auto env_bad = cli({"analyze", ip, "--flag", "main"});
    ::unsetenv("EDSKIT_SEED");
    CHECK(env.out == seeded.out);
    CHECK(env_over.out == seeded.out);
    CHECK(env_bad.code == InputError);
}
