#pragma once

#include "edskit/eds.hpp"
#include "edskit/prolongation.hpp"
#include "edskit/series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace edskit {

// Linear adapted coordinates around a base point: the current manifold sits
// at z = z0 + sum x^i xi_i + sum U^s(x) eta_s, the new direction is y_direction,
// and R is the slice where every v-coordinate vanishes.
struct AdaptedChart {
    VarMap base_point;
    std::vector<std::string> x_names;
    std::string y_name;
    std::vector<Vec> x_directions;
    Vec y_direction;
    std::vector<Vec> u_directions;
    std::vector<Vec> v_directions;

    int p() const { return static_cast<int>(x_directions.size()); }
    int s() const { return static_cast<int>(u_directions.size()); }
    int r() const { return static_cast<int>(v_directions.size()); }
    // Rows: x-directions, y, u-directions, v-directions.
    Mat frame() const;
};

struct ExtensionProblem {
    IdealSpec ideal;
    AdaptedChart chart;
    // Values of the u-coordinates along the current manifold, one per u-direction,
    // as polynomials in x_names (missing entries are zero).
    std::vector<Poly> u_on_current;
    int order = 6;

    // The current manifold M as a series map of the x_names.
    SeriesManifold current() const;
};

// Throws std::invalid_argument when the partition is not a basis of the base
// tangent space or the ambient structure is not in split form.
void check_problem(const ExtensionProblem& problem);

struct TransversalityVerdict {
    bool pass = false;
    std::vector<VarMap> points; // domain points of M that were checked
    std::optional<size_t> witness;
    int rank = 0;
    std::string reason;
};

// At every sample point of M: rank of (R-prolongation directions + H(F)) == rank A.
TransversalityVerdict check_transversality(const ExtensionProblem& problem, int samples = 4);

// One polar row omega(v, F_J): closed generator index and J as positions in
// the frame (kernel labels first, then x-directions).
struct PolarRow {
    int generator = 0;
    std::vector<int> subset;
    std::string label;
};

struct NormalizedPolar {
    std::vector<PolarRow> rows; // the s selected rows
    Mat normalization;          // M^{-1}: kappa^sigma = sum_tau M^{-1}_{sigma tau} row_tau
    int polar_rank = 0;         // rank of all polar rows at the base point
};

// Selects s polar rows whose u-block is invertible at the base point and
// normalizes them so psi_kappa(gamma(eta_tau)) = delta at the base point.
// Throws std::domain_error when the polar rank at the base point is not s.
NormalizedPolar normalize_polar_forms(const ExtensionProblem& problem);

// dF/dy = G(x, y, u, p) with G^sigma = numerators[sigma] / denominator.
// Chart variables: x_names, y_name, u1..us, and p<sigma>_<i> for dF^sigma/dx^i.
struct CauchyProblem {
    std::vector<std::string> x_names;
    std::string y_name;
    std::vector<std::string> u_names;
    std::vector<std::vector<std::string>> p_names; // [sigma][i]
    std::vector<Poly> numerators;
    Poly denominator;
    int order = 6;

    std::vector<std::string> chart_vars() const;
    std::vector<std::string> domain() const; // x_names then y_name
};

// Throws std::domain_error when B is singular at the base point.
CauchyProblem assemble_G(const ExtensionProblem& problem, const NormalizedPolar& kappa);

// Unique solution with F(x, 0) = 0 by recursion on the degree in y. The residual
// dF/dy - G is checked to vanish through total degree order - 1.
std::vector<TruncatedSeries> solve_cauchy(const CauchyProblem& problem);

// Residual dF/dy - G(x, y, F, dF/dx) as series of the problem order.
std::vector<TruncatedSeries> cauchy_residual(const CauchyProblem& problem, const std::vector<TruncatedSeries>& F);

struct ExtensionResult {
    SeriesManifold manifold; // domain x_names then y_name
    std::vector<Poly> u_values; // u-coordinates along the new manifold
    NormalizedPolar kappa;
    CauchyProblem cauchy;
    TransversalityVerdict transversality;
    VerificationReport verification;
};

// Throws std::runtime_error when the result does not verify CLEAN or does not
// contain the current manifold.
ExtensionResult extend_once(const ExtensionProblem& problem);

struct CkStep {
    int q = 0;
    AdaptedChart chart;
    int c = 0;
    std::vector<std::string> kappa;
    std::string transversality;
    std::string verification;
};

struct CkTranscript {
    std::string tag; // "CERTIFIED-AT-SAMPLES" or "PROVISIONAL"
    std::vector<Vec> xi;
    std::vector<Vec> eta;
    std::vector<int> codims;
    std::vector<CkStep> steps;
    std::vector<std::string> domain; // final names, after reparametrization
    bool span_matches_top = false;
    std::string final_verification;
};

struct CkResult {
    SeriesManifold manifold;
    CkTranscript transcript;
};

// Builds an integral manifold whose prolonged tangent space at the base point
// is the top of the flag. The first member must be the kernel of the anchor.
// Without a certificate the result is tagged PROVISIONAL; a certificate that
// is not ordinary is an error. Step failures are rethrown with the step index.
CkResult build_from_flag(const IdealSpec& ideal, const std::vector<IntegralElement>& flag, int order,
                         const FlagResult* certificate = nullptr);

// Substitutes old domain variables by linear combinations of new ones:
// old_i = sum_k T(i, k) new_k.
SeriesManifold reparametrize_linear(const SeriesManifold& m, const Mat& T, const std::vector<std::string>& new_domain);

} // namespace edskit
