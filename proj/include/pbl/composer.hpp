#pragma once

/// @file composer.hpp
/// @brief Composite approximation (U_s, V_s, P_s), its remainder (R1, R2) and viscosity sweeps.

#include "pbl/euler_base.hpp"
#include "pbl/euler_linearized.hpp"
#include "pbl/mesh.hpp"
#include "pbl/prandtl_linearized.hpp"
#include "pbl/prandtl_zero.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pbl {

/// Discretization of the profile chain.
struct ExpansionOptions {
    double L = 0.25;
    int layer_nx = 129;
    int layer_ny = 801;
    double y_max = 20.0;
    double Y_max = 8.0;
    int euler_ny = 385;
    double euler_beta = 2.5;
    /// leading march starts at -spin.length from Blasius of age 1 - spin.length
    SpinUpOptions spin{0.95, 0.25, 1.04};
    /// every profile is solved on [-margin, L + margin]; the corner singularities of the
    /// Euler correctors then sit outside [0, L]
    double margin = 0.125;
};

/// Every profile of the expansion, on the grids it was solved on.
struct ExpansionProfiles {
    std::shared_ptr<const EulerFlow> flow;       ///< physical coordinates
    std::shared_ptr<const EulerFlow> work_flow;  ///< working coordinates xi = X + margin
    double margin = 0.0;
    int col0 = 0;           ///< working column of X = 0
    GridPtr physical_grid;  ///< layer nodes with 0 <= X <= L, physical X
    /// all of the below live in working coordinates
    PrandtlSolution prandtl;
    LayerBase base;
    EulerCorrector c1, c2;
    BLCorrector bl1;
    SecondOrderLayer L2;
    OuterTraces traces;
};

/// Leading-order march on the working domain.
struct PrandtlStage {
    PrandtlSolution prandtl;  ///< working coordinates
    double margin = 0.0;
    int col0 = 0;
};
PrandtlStage solve_prandtl_stage(const EulerFlow& flow, const InflowProfile& inflow, const ExpansionOptions& opt);

/// March and solve the chain prandtl -> corrector 1 -> layer 1 -> corrector 2 -> layer 2.
ExpansionProfiles build_profiles(const EulerFlow& flow, const InflowProfile& inflow, const ExpansionOptions& opt);
/// the same from a finished Prandtl stage
ExpansionProfiles build_profiles(const EulerFlow& flow, PrandtlStage stage, const ExpansionOptions& opt);
/// Blasius inflow posed at the spin-up start of `opt`
InflowProfile default_inflow(const EulerFlow& flow, const ExpansionOptions& opt);

enum class Truncation {
    full,        ///< all orders
    drop_order2  ///< u2e, v2e, p2e, the hatted pair, p2b and p3b removed
};

struct ApproximateSolution {
    double eps = 0.0;
    GridPtr grid;
    Bundle U, V;       ///< composite fields with X, Y derivatives
    Field P, PX, PY;
    /// the same without the analytic base flow (empty for from_fields)
    Bundle dU, dV;
    Field dPX, dPY;
    std::shared_ptr<const EulerFlow> base;
    /// leading composite u0e + u0b (empty for from_fields)
    Field U0;
    /// U_s(0|L, Y) = u0e + u0b + sqrt(eps) a, V_s(0|L, Y) = v0e + sqrt(eps) b
    std::vector<double> a0, aL, b0, bL;

    /// derivatives by the shared diff operators; no base fold-out
    static ApproximateSolution from_fields(const Field& U, const Field& V, const Field& P, double eps);
};

/// Composite grid: X nodes shared with the layer, Y tanh-clustered with half the nodes below 4 sqrt(eps).
GridPtr composer_grid(const ExpansionProfiles& prof, double eps, int ny, double Y_max = 8.0);

/// Evaluates the composite fields at arbitrary nodes; boundary-layer fields are cubic-interpolated
/// to y = Y / sqrt(eps). Throws ResolutionError with fewer than 8 Y nodes in (0, sqrt(eps)].
ApproximateSolution assemble(const ExpansionProfiles& prof, double eps, const GridPtr& grid,
                             Truncation trunc = Truncation::full);

struct Remainder {
    Field R1, R2;
    double norm1 = 0.0, norm2 = 0.0;
    double total() const { return norm1 + norm2; }
};

Remainder remainder(const ApproximateSolution& a);

struct ProfileFacts {
    double wall_max = 0.0;         ///< max |U_s(X, 0)|
    double min_interior = 0.0;     ///< min U_s over Y > 0
    double lower_inner = 0.0;      ///< min U_s sqrt(eps)/Y over 0 < Y <= sqrt(eps)
    double lower_outer = 0.0;      ///< min U_s over Y >= sqrt(eps)
    double delta = 0.0;
    double v_ratio = 0.0;          ///< max |V_s| / (delta U_s) over 0 < Y <= delta
    double away0 = 0.0, away1 = 0.0;  ///< sup_{Y >= delta} |d^j_Y (U_s - u0e)| / sqrt(eps)
    double divergence = 0.0;       ///< max |U_X + V_Y|
    double div_constant = 0.0;     ///< divergence / (h_x^2 + h_y^2) of the layer grid
    bool positive() const { return min_interior > 0.0 && lower_inner > 0.0 && lower_outer > 0.0; }
};

/// delta = max(sqrt(L), eps^(1/4)) unless given
ProfileFacts profile_facts(const ApproximateSolution& a, const ExpansionProfiles& prof, double delta = 0.0);

struct SweepRow {
    double eps = 0.0;
    int ny = 0;
    double norm1 = 0.0, norm2 = 0.0, total = 0.0;
    double slope_so_far = 0.0;  ///< fit over rows 0..k (0 for the first row)
    ProfileFacts facts;
};

struct RemainderReport {
    std::vector<SweepRow> rows;
    double slope = 0.0, intercept = 0.0;
    double slope_lo = 1.3, slope_hi = 1.7;
    bool pass() const { return slope >= slope_lo && slope <= slope_hi; }
};

struct GridPolicy {
    int ny_ref = 257;        ///< Y nodes at eps_ref
    double eps_ref = 1e-2;
    double Y_max = 8.0;
    /// ny doubles per decade of eps below eps_ref
    int ny_for(double eps) const;
};

/// least-squares fit of log(v) against log(eps); returns (slope, intercept)
std::pair<double, double> loglog_fit(const std::vector<double>& eps, const std::vector<double>& v);

/// eps list strictly decreasing, >= 4 entries spanning >= 1.5 decades
RemainderReport sweep(const ExpansionProfiles& prof, const std::vector<double>& eps_list, const GridPolicy& policy = {},
                      Truncation trunc = Truncation::full);

/// comma-separated table: eps,ny,R1,R2,R1+R2,slope_so_far
std::string sweep_csv(const RemainderReport& r);

} // namespace pbl
