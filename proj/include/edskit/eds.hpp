#pragma once

#include "edskit/algebroid.hpp"
#include "edskit/ideal.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edskit {

// Base point plus k row vectors in the fiber.
using IntegralElement = SubspaceCandidate;

// Throws std::invalid_argument on a degenerate spanning set.
bool is_integral_element(const IdealSpec& ideal, const IntegralElement& E);

struct PolarSpace {
    IntegralElement element;
    Mat equations; // rows: linear conditions on v
    Mat basis;     // rows: solution basis
    int dim = 0;
    int r = -1;    // dim - (k + 1)
};

// Linear conditions omega(v, e_J) = 0 for every closed generator omega of
// degree d <= k + 1 and every increasing (d-1)-tuple J of spanning vectors.
// No integrality check.
Mat polar_equations(const IdealSpec& ideal, const IntegralElement& E);

// Throws std::invalid_argument when E is not integral.
PolarSpace polar_space(const IdealSpec& ideal, const IntegralElement& E);

struct Extensions {
    int r = -1;
    Mat quotient_basis; // rows completing E to H(E)
};

Extensions extensions(const IdealSpec& ideal, const IntegralElement& E);

// Chart on G_k around elements where Omega = e^{pivots[0]} ^ ... is nonzero.
// Normal form: X_i = e_{pivots[i]} + sum over non-pivot labels j of p e_j.
// The p for (i, j) is named p<j> when k = 1 and p<i>_<j> otherwise, with
// 1-based i and 1-based basis position j.
class GrassmannChart {
public:
    GrassmannChart() = default;
    GrassmannChart(StructurePtr ambient, std::vector<int> pivots);

    const StructurePtr& ambient() const { return A_; }
    int k() const { return static_cast<int>(pivots_.size()); }
    const std::vector<int>& pivots() const { return pivots_; }
    const std::vector<std::string>& coords() const { return coords_; }
    // Names of the p-coordinates in (i, j) order.
    const std::vector<std::string>& p_coords() const { return p_coords_; }
    const std::string& p_name(int i, int j) const { return p_names_.at(i).at(j); }

    AlgebroidForm omega() const;
    std::string omega_str() const;
    // Normal-form frame with Poly entries in the chart coordinates.
    std::vector<std::vector<Poly>> frame() const;

    bool contains(const IntegralElement& E) const;
    // Throws std::invalid_argument when Omega vanishes on E.
    VarMap coordinates_of(const IntegralElement& E) const;
    IntegralElement element_at(const VarMap& chart_point) const;

private:
    StructurePtr A_;
    std::vector<int> pivots_;
    std::vector<std::string> coords_;
    std::vector<std::string> p_coords_;
    std::vector<std::vector<std::string>> p_names_;
};

// Chart whose pivots are the rref pivot columns of E's spanning rows.
GrassmannChart default_chart(const StructurePtr& A, const IntegralElement& E);

struct ChartFunction {
    std::string label;
    Poly f;
};

struct ChartFunctions {
    std::vector<ChartFunction> functions;
    std::vector<std::string> skipped; // generators of degree > k
};

// For every closed generator omega of degree d <= k and every increasing
// d-tuple J of frame vectors: omega(X_J) / Omega(X) (the denominator is 1).
// These generate the same function ideal as {theta_Omega : theta in I^k}.
ChartFunctions chart_functions(const IdealSpec& ideal, const GrassmannChart& chart);

enum class Verdict { CertifiedAtSamples, Failed, Indeterminate };
std::string to_string(Verdict v);

struct ProbeSample {
    VarMap chart_point;
    IntegralElement element;
    bool exact = true;       // solved by exact elimination
    bool vanish = true;      // all chart functions vanish there
    int jacobian_rank = -1;  // rank of the selected differentials there
    bool ordinary = false;   // vanish && jacobian_rank == selected count
    int dim_h = -1;
};

struct ProbeEvidence {
    std::vector<std::string> functions;
    std::vector<int> selected;
    int jacobian_rank = 0;
    std::vector<std::string> pivots;  // chart coordinates solved for
    bool affine = true;
    std::vector<ProbeSample> samples;
    int attempts = 0;
    int dim_h_at_element = -1;
    // Regular probe, both readings: over all samples, and over samples that
    // are themselves ordinary zeros.
    std::optional<bool> constant_all;
    std::optional<bool> constant_ordinary_only;
    std::vector<std::string> notes;
};

struct ProbeResult {
    Verdict verdict = Verdict::Indeterminate;
    std::string reason;
    ProbeEvidence evidence;
    std::string chart;
};

struct ProbeOptions {
    int samples = 16;
    std::uint64_t seed = 0;
};

ProbeResult kahler_ordinary_probe(const IdealSpec& ideal, const IntegralElement& E, const GrassmannChart& chart,
                                  const ProbeOptions& opt = {});
ProbeResult kahler_regular_probe(const IdealSpec& ideal, const IntegralElement& E, const GrassmannChart& chart,
                                 const ProbeOptions& opt = {});

struct FlagResult {
    int l = 0;
    bool ordinary = false;
    std::string verdict; // "<l>-ORDINARY-AT-SAMPLES" or "NOT <l>-ORDINARY"
    std::vector<bool> integral;
    std::vector<ProbeResult> probes; // regular probes, all members but the last
    std::string reason;
};

// Throws std::invalid_argument for a non-nested or wrongly sized flag.
FlagResult flag_probe(const IdealSpec& ideal, const std::vector<IntegralElement>& flag, int l, const ProbeOptions& opt = {},
                      const std::vector<std::optional<std::vector<int>>>& charts = {});

// H of the zero subspace at a point; equal to E exactly when E is the unique
// maximal integral element there.
PolarSpace polar_space_of_point(const IdealSpec& ideal, const VarMap& point);

} // namespace edskit
