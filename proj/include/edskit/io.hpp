#pragma once

#include "edskit/ck.hpp"
#include "edskit/eds.hpp"
#include "edskit/prolongation.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edskit {

// Malformed or inconsistent input; maps to exit code 2.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ElementQuery {
    VarMap base_point;
    Mat span;
    std::vector<std::string> chart; // optional pivot labels
};

struct FlagQuery {
    VarMap base_point;
    std::vector<Mat> members;
    std::optional<int> l;
};

struct GeneratorSpec {
    std::string name;
    AlgebroidForm form;
};

struct ProblemFile {
    StructurePtr algebroid;
    std::vector<GeneratorSpec> generators;
    bool assert_closed = false;
    std::map<std::string, ElementQuery> elements;
    std::map<std::string, FlagQuery> flags;
    std::map<std::string, ElementQuery> extensions;

    IdealSpec ideal() const;
    IntegralElement element(const std::string& name) const;
    std::vector<IntegralElement> flag(const std::string& name) const;
};

// Throws SchemaError with a path-like location.
ProblemFile parse_problem(const std::string& json_text);
ProblemFile load_problem(const std::string& path);
// Canonical form: full anchor rows, nonzero brackets with a < b in basis order,
// sorted query names.
std::string dump_problem(const ProblemFile& problem);

// {"domain": [...], "order": N or null, "components": {coord: expr}}
SeriesManifold parse_manifold(const std::string& json_text, const StructurePtr& ambient);
SeriesManifold load_manifold(const std::string& path, const StructurePtr& ambient);
std::string dump_manifold(const SeriesManifold& m);

bool same_structure(const AlgebroidStructure& a, const AlgebroidStructure& b);

} // namespace edskit
