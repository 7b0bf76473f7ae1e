#pragma once

/// @file prandtl_linearized.hpp
/// @brief Order-1 and order-2 layer correctors, their forcings, layer pressures and the cutoff pair.

#include "pbl/bl_march.hpp"
#include "pbl/euler_base.hpp"
#include "pbl/euler_linearized.hpp"
#include "pbl/mesh.hpp"
#include "pbl/prandtl_zero.hpp"

#include <array>
#include <vector>

namespace pbl {

/// Wall traces of the outer correctors on the layer x nodes.
struct OuterTraces {
    std::vector<double> U1, U1x, U1Y, U1Yx;    ///< u1e, d_X u1e, d_Y u1e, d_X d_Y u1e at Y = 0
    std::vector<double> V1, V1x, V1Y, V1Yx, V1YY, V1YYx;
    std::vector<double> U2, U2x, V2, V2x, V2Y, V2Yx;  ///< empty until the order-2 corrector exists

    static OuterTraces from(const std::vector<double>& layer_x, const EulerCorrector* c1, const EulerCorrector* c2);
};

/// Taylor aggregates u^(k)_e, v^(k)_e on the layer grid, k = 0, 1, 2.
struct MatchedAggregates {
    GridPtr grid;
    std::array<Field, 3> u, ux, uy;  ///< u^(k)_e and its x, y derivatives
    std::array<Field, 3> v, vx, vy;  ///< v^(k)_e and its x, y derivatives
    /// u^k_p = u^k_b + u^(k)_e and v^k_p = v^k_b - v^k_b|0 + v^(k)_e for k = 0, 1 (filled as correctors appear)
    std::array<Field, 2> u_p, v_p;
};

MatchedAggregates build_aggregates(const EulerFlow& flow, const GridPtr& layer_grid, const OuterTraces& t);

struct BLCorrector {
    int order = 1;
    Bundle u, v;             ///< u^k_b, v^k_b
    Field w;                 ///< v^k_b - v^k_b|0
    std::vector<double> v_wall;  ///< v^k_b(x, 0)
    std::vector<double> v_wall_x, v_wall_xx;
    Bundle p;                ///< p^k_b (zero at order 1); p.fy is g^(2)
    std::vector<double> inflow;  ///< U^k_B: the profile at x = 0
    std::vector<double> start;   ///< profile the march starts from (x = -spinup)
    std::vector<double> eta, I_eta;
    /// u_yy + rhs at the starting corner: the first parabolic corner condition
    double corner_residual = 0.0;
};

/// eta(y) = (1-y) e^{-y}, I_eta(y) = int_y^inf eta = -y e^{-y}
double homogenizer(double y);
double homogenizer_tail(double y);

/// Prandtl layer profiles as bundles with the march-consistent x stencil.
struct LayerBase {
    Bundle u0b, v0b;
    Field u0p_x, u0p_y;  ///< march-consistent derivatives of u0p
    Field ext_u0p_x, ext_u0p_y;  ///< the same on the spin-up grid
};

LayerBase make_layer_base(const PrandtlSolution& p);

Field build_f1(const PrandtlSolution& p, const LayerBase& base, const MatchedAggregates& agg);

enum class InflowChoice {
    plain,      ///< a0 e^{-y^2}
    compatible  ///< plus (c2 y^2/2 + c3 y^3/6) chi(y) so the first two parabolic corner conditions hold
};

/// starting profile from column 0 of ubar_x and rhs, wall value a0
std::vector<double> corrector_inflow(const Field& ubar_x, const Field& rhs, double a0, InflowChoice choice);

/// Linear layer march with lift a(x) eta(y) for the wall data a(x). rhs and wall live on the
/// layer grid; on the spin-up columns they are continued linearly in x.
BLCorrector solve_bl_corrector(int order, const PrandtlSolution& p, const LayerBase& base, const Field& rhs,
                               const std::vector<double>& wall, InflowChoice choice = InflowChoice::compatible,
                               bool homogenize = true);

BLCorrector solve_bl1(const PrandtlSolution& p, const LayerBase& base, const Field& f1, const OuterTraces& t,
                      InflowChoice choice = InflowChoice::compatible);

/// u^1_p, v^1_p aggregates once the order-1 corrector exists
void attach_order1(MatchedAggregates& agg, const BLCorrector& bl1);
void attach_order0(MatchedAggregates& agg, const PrandtlSolution& p);

struct SecondOrderLayerForcing {
    Field f2, g2;
};

SecondOrderLayerForcing build_f2_g2(const PrandtlSolution& p, const LayerBase& base, const MatchedAggregates& agg,
                                    const BLCorrector& bl1, const OuterTraces& t);

/// Cutoff pair evaluated at a point; derivatives in layer variables (x, y).
struct HatValues {
    double u = 0, ux = 0, uy = 0, uxx = 0, uyy = 0;
    double v = 0, vx = 0, vy = 0, vxx = 0, vyy = 0;
};

struct HatInputs {
    double u = 0, ux = 0, uy = 0, uxx = 0, uyy = 0;  ///< u^2_b and derivatives
    double v = 0, vx = 0, vy = 0, vxx = 0, vyy = 0;  ///< v^2_b and derivatives
    double v0 = 0, v0x = 0, v0xx = 0;                ///< v^2_b(x, 0) and derivatives
    double I = 0;                                    ///< int_0^y u^2_b
};

/// u_hat = chi u + sqrt(eps) chi' I, v_hat = chi (v - v0), chi = cutoff(sqrt(eps) y)
HatValues hat_values(const HatInputs& in, double y, double eps);

struct ModifiedBL2 {
    double eps = 0.0;
    Field u_hat, v_hat;
    Field p3b;
};

struct SecondOrderLayer {
    BLCorrector bl2;
    Field I2;        ///< int_0^y u^2_b
    Bundle p3b;      ///< p3b.fy = -(integrand)
};

SecondOrderLayer solve_bl2_and_pressures(const PrandtlSolution& p, const LayerBase& base, const MatchedAggregates& agg,
                                         const BLCorrector& bl1, const SecondOrderLayerForcing& fg,
                                         const OuterTraces& t, InflowChoice choice = InflowChoice::compatible);

/// hatted pair on the layer grid at a given eps
ModifiedBL2 modify_bl2(const SecondOrderLayer& L2, double eps);

} // namespace pbl
