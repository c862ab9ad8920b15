#pragma once

#include "edskit/algebroid.hpp"
#include "edskit/ideal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace edskit {

struct FiberBundleSpec {
    StructurePtr base;
    std::vector<std::string> fiber_coords;
};

// Lifted base sections keep their anchor columns; each fiber coordinate u gets
// a splitting label "D<u>" with zero brackets. Throws on a name collision.
StructurePtr build_fiber_prolongation(const FiberBundleSpec& spec);

// Candidate immersion x -> z(x). Components are indexed like the ambient
// coordinates and live on the domain variables. order == nullopt means the
// components are exact polynomials; otherwise they are series truncated at
// that total degree.
struct SeriesManifold {
    StructurePtr ambient;
    std::vector<std::string> domain;
    std::vector<Poly> components;
    std::optional<int> order;

    VarMap origin() const;                   // ambient point z(0)
    std::vector<std::vector<Poly>> jacobian() const; // [ambient coord][domain coord]
    Mat jacobian_at_origin() const;
    bool is_exact() const { return !order.has_value(); }
    // Restrict one domain variable to zero and drop it.
    SeriesManifold restrict_to_zero(const std::string& var) const;
    std::string component_str(size_t j) const;
};

// Checks shapes and the immersion condition at the origin.
void check_manifold(const SeriesManifold& m);

struct PullbackOperator {
    StructurePtr ambient;
    StructurePtr induced; // basis: ambient kernel labels, then "gamma_<x>" per domain coordinate
    // Ambient components of each induced basis vector: [ambient label][induced label].
    std::vector<std::vector<Poly>> inclusion;
    // I* of each ambient dual basis element.
    std::vector<AlgebroidForm> table;
    std::vector<Poly> components; // z(x) on the domain variables
    std::optional<int> order;

    Poly pull_function(const Poly& f) const;
    AlgebroidForm pull(const AlgebroidForm& w) const;
};

PullbackOperator build_pullback(const SeriesManifold& candidate);

// Drops every coefficient term of total degree > deg.
AlgebroidForm truncate_form(const AlgebroidForm& w, int deg);

struct GeneratorVerdict {
    std::string label;
    int form_degree = 0;
    bool clean = true;
    int lowest_degree = -1; // lowest total degree with a nonzero coefficient, -1 when clean
    std::string witness;
};

struct VerificationReport {
    int order = 0;
    int checked_through = 0; // coefficients of total degree <= this are compared
    bool exact = false;
    std::vector<GeneratorVerdict> generators;
    bool clean() const;
    std::string summary() const;
};

// Series candidates of order N are compared through total degree N-1, since
// the pullback involves one derivative of the components; exact candidates
// through N. Throws std::invalid_argument when the candidate order is below N.
VerificationReport verify_integral_manifold(const SeriesManifold& candidate, const IdealSpec& ideal, int order);

// Compares I from build_pullback with S(a) = (a, Ts(rho(a))) built directly
// from the base structure. The candidate must be a section of the bundle.
bool section_pullback_equivalence(const SeriesManifold& candidate, const FiberBundleSpec& bundle);

} // namespace edskit
