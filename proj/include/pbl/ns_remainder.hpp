#pragma once

/// @file ns_remainder.hpp
/// @brief Linearized remainder system in stream-function form, its Picard iteration, and the
///        numerical probes of the stability estimates.

#include "pbl/composer.hpp"
#include "pbl/mesh.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pbl {

struct NSGridOptions {
    int nx = 97;
    int ny = 129;
    double Y_max = 3.0;
    /// X nodes cluster toward both ends down to a spacing of x_layer * eps
    double x_layer = 0.25;
};

/// X two-sided tanh (the clamped outflow column carries a layer of width ~ eps), Y tanh with
/// half the nodes below 4 sqrt(eps).
GridPtr ns_grid(double L, double eps, const NSGridOptions& opt = {});

/// Coefficients (U_s, V_s) of the linearized system on its grid.
struct LinearizedProblem {
    double eps = 0.0;
    GridPtr grid;
    Field Us, UsX, UsY, lapUs;
    Field Vs, VsX, VsY, lapVs;

    static LinearizedProblem from(const ApproximateSolution& a);
};

struct LinearizedSolution {
    Field Phi, U, V, P;
    double residual = 0.0;  ///< ||A Phi - rhs|| / ||rhs|| (0 for zero forcing)
};

/// Fourth-order operator
///   U_s Delta Phi_X - Phi_X Delta U_s - eps Delta^2 Phi + V_s Delta Phi_Y - Phi_Y Delta V_s
/// with Phi = d_n Phi = 0 on all four sides, factorized once.
class LinearizedSolver {
public:
    explicit LinearizedSolver(LinearizedProblem p);
    ~LinearizedSolver();
    LinearizedSolver(LinearizedSolver&&) noexcept;
    LinearizedSolver& operator=(LinearizedSolver&&) noexcept;

    const LinearizedProblem& problem() const { return p_; }
    const Eigen::SparseMatrix<double>& matrix() const { return A_; }

    /// the interior rows of the operator applied to Phi (boundary rows 0)
    Field apply(const Field& Phi) const;
    /// solve with the stream-function right side computed from (F1, F2)
    LinearizedSolution solve(const Field& F1, const Field& F2) const;
    /// solve with an explicit right side at interior nodes
    Field solve_stream(const Field& rhs, double* residual = nullptr) const;

    /// velocities by differentiation, pressure by line integration (P(0,0) = 0)
    LinearizedSolution recover(const Field& Phi, const Field& F1, const Field& F2) const;

private:
    struct Factor;
    LinearizedProblem p_;
    Eigen::SparseMatrix<double> A_;
    std::vector<char> interior_;
    std::unique_ptr<Factor> lu_;
};

/// d_Y F1 - d_X F2 at interior nodes
Field stream_rhs(const Field& F1, const Field& F2);

/// (||U|| + ||V|| + sqrt(eps)||grad U|| + sqrt(eps)||grad V||) / (||F1|| + ||F2||)
double prop_ratio(const LinearizedSolver& solver, const Field& F1, const Field& F2);

struct LemmaSides {
    double lhs = 0.0, rhs = 0.0;
    double constant() const;
};

struct ProbeReport {
    double delta = 0.0;
    QuotientNorms norms;
    LemmaSides basic;        ///< ||G||_Y^2 vs ||G||_X^2 + |<f, G>|
    LemmaSides derivative;   ///< three-term form vs (L + sqrt eps)(X^2 + Y^2) + |<f, G omega>|
    LemmaSides away;         ///< ||(Phi_X + Q_s Phi_Y) sqrt(eta)||^2 vs (L + sqrt eps)(X^2 + Y^2) + ||F||^2
};

/// G = Phi / U_s (0 on the wall row)
Field quotient_field(const Field& Phi, const Field& Us);

/// delta = max(sqrt(L), eps^(1/4)) unless given
ProbeReport lemma_probes(const LinearizedSolver& solver, const Field& Phi, const Field& F1, const Field& F2,
                         double delta = 0.0);

struct PicardOptions {
    /// stop when ||U_{n+1} - U_n||_Z < tol_factor * eps^(3/2)
    double tol_factor = 1e-10;
    int max_iter = 60;
};

struct ContractionState {
    int iterates = 0;
    std::vector<double> steps;   ///< ||U_{n+1} - U_n||_Z
    std::vector<double> ratios;  ///< steps[n] / steps[n-1], from iterate 2 on
    double factor = 0.0;         ///< largest recorded ratio (0 when none)
    bool converged = false;
    ZNorm z;
    double sup = 0.0;            ///< max |(U, V)|
    double sup_ratio = 0.0;      ///< sup / eps^(7/8)
    /// ball check with the constants measured on the first iterate: C1 = ||R|| / eps^(3/2),
    /// C2 = ||W_1||_Z / ||R||, C0 = C1 C2 + 1
    double C1 = 0.0, C2 = 0.0, C0 = 0.0;
    bool in_ball = false;
};

struct PicardResult {
    Field U, V, P, Phi;
    ContractionState state;
};

/// Fixed point of W = T(U): linearized solve with forcing -R - U . grad U.
/// Throws DivergenceError after three consecutive ratios >= 1 or when max_iter is reached.
PicardResult picard_solve(const LinearizedSolver& solver, const Field& R1, const Field& R2,
                          const PicardOptions& opt = {});

/// Smooth forcing used for the ratio study: bumps vanishing on the boundary.
std::pair<Field, Field> smooth_forcing(const GridPtr& grid);
/// random smooth forcing, deterministic in the seed
std::pair<Field, Field> random_forcing(const GridPtr& grid, std::uint64_t seed);

struct HardyCorpusOptions {
    int profiles = 100;
    std::vector<double> xis{1.0, 0.5, 0.25};
    std::uint64_t seed = 1;
    int ny = 401;
    double Y_max = 8.0;
};

struct HardyRow {
    double xi = 0.0;
    double C = 0.0;         ///< max over the corpus of lhs / (parts)
    double C_fine = 0.0;    ///< after one refinement
    double change() const;  ///< |C_fine / C - 1|
};

struct HardyCorpusReport {
    double eps = 0.0;
    std::vector<HardyRow> rows;
    bool finite() const;
    double max_change() const;
};

/// Hardy probe over random decaying profiles against the U_s column at X = L/2.
HardyCorpusReport hardy_corpus(const ExpansionProfiles& prof, double eps, const HardyCorpusOptions& opt = {});

/// max abs of (U_s + U - u0e - u0b) / sqrt(eps) and (V_s + V - v0e) / sqrt(eps) over the grid
struct TheoremRatios {
    double u = 0.0, v = 0.0;
};
TheoremRatios theorem_ratios(const ApproximateSolution& a, const Field& U, const Field& V);

std::string contraction_csv(const ContractionState& s);

} // namespace pbl
