#pragma once

#include "edskit/algebroid.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edskit {

// Generators plus the nonzero deltas of generators.
struct IdealSpec {
    StructurePtr ambient;
    std::vector<AlgebroidForm> generators;
    std::vector<AlgebroidForm> closed_generators;
    std::vector<std::string> labels; // one per closed generator, "g1", "delta g1", ...

    // Set when the caller asserted that the generators are already closed:
    // true iff each delta g lies in the algebraic span of the generators at
    // every sampled point.
    std::optional<bool> asserted_closed_verdict;
    std::string certificate;
};

// Throws std::invalid_argument on a degree-0 generator or mixed parents.
IdealSpec close_ideal(const std::vector<AlgebroidForm>& generators, std::vector<std::string> names = {},
                      bool assert_closed = false, int samples = 8, std::uint64_t seed = 0);

// Increasing multi-indices of length k from {0..n-1}, lexicographic.
std::vector<MultiIndex> increasing_tuples(int n, int k);

// Rows span the degree-d part of the algebraic ideal generated by `forms` at
// `point`, written over increasing_tuples(N, d).
Mat algebraic_span_at(const std::vector<AlgebroidForm>& forms, const VarMap& point, int d);

// Coefficient vector of a d-form at a point over increasing_tuples(N, d).
Vec form_vector_at(const AlgebroidForm& w, const VarMap& point);

} // namespace edskit
