#pragma once

/// @file euler_linearized.hpp
/// @brief First- and second-order Euler correctors as divergence-form elliptic solves.

#include "pbl/euler_base.hpp"
#include "pbl/mesh.hpp"
#include "pbl/prandtl_zero.hpp"

#include <functional>
#include <vector>

namespace pbl {

/// Side data for the stream-function corrector.
enum class SideChoice {
    corner_compatible,  ///< (s Y^2/2 + q Y^4/24) chi(Y) and (g(L) + ...) chi(Y); s, q fixed by the equation at the wall corners
    corner_curvature,   ///< the same with q = 0
    exponential         ///< 0 and g(L) e^{-Y}
};

struct CorrectorBC {
    SideChoice choice = SideChoice::corner_compatible;
    std::vector<double> wall;   ///< psi(X, 0)
    std::vector<double> side0;  ///< psi(0, Y)
    std::vector<double> sideL;  ///< psi(L, Y)
    double s0 = 0.0, sL = 0.0;  ///< corner curvatures psi_YY at (0,0), (L,0)
    double q0 = 0.0, qL = 0.0;  ///< psi_YYYY at the same corners (fourth-order compatibility)
    /// Delta psi - F' psi - S at the wall corners implied by the data (recorded, not enforced)
    double corner_residual0 = 0.0, corner_residualL = 0.0;
};

struct EllipticResult {
    Field w;          ///< homogenized unknown, zero on the boundary
    Field forcing;    ///< rhs - A(lift) at interior nodes
    double residual = 0.0;     ///< relative algebraic residual
    double energy_grad = 0.0;  ///< ||a^(1/2) w_X||^2 + ||a^(1/2) w_Y||^2 (face sums)
    double energy_pair = 0.0;  ///< <w, forcing>
};

/// Solve d_X(a w_X) + d_Y(a w_Y) = rhs with w = lift on the boundary.
/// Returns the homogenized part w - lift.
EllipticResult solve_divergence_form(const std::function<double(double, double)>& a, const Field& rhs,
                                     const Field& lift);

/// Apply the finite-volume operator (interior nodes; boundary rows 0).
Field apply_divergence_form(const std::function<double(double, double)>& a, const Field& w);

struct EulerCorrector {
    int order = 1;
    GridPtr grid;
    Field psi;
    Bundle u, v;      ///< u = psi_Y, v = -psi_X with the wall trace of v imposed
    Field p, pX, pY;  ///< pressure; pX is the integrand it was built from, pY = D_Y p
    Field lift;
    Field source;     ///< S in Delta psi - F' psi = S
    CorrectorBC bc;
    EllipticResult solve;
};

struct SecondOrderForcing {
    Field H;     ///< int_0^X Delta^2 psi / u_e dX' at fixed Y
    Field quad;  ///< F_e''/2 (psi^1)^2
};

/// Euler grid: X nodes shared with the layer grid, Y tanh-clustered toward the wall.
GridPtr make_euler_grid(const std::vector<double>& x, double Y_max, int ny, double beta);

/// order-1 corrector driven by the wall trace v0b(x, 0)
EulerCorrector solve_corrector1(const EulerFlow& flow, const PrandtlSolution& prandtl, const GridPtr& grid,
                                SideChoice choice = SideChoice::corner_compatible);

SecondOrderForcing build_h_forcing(const EulerFlow& flow, const EulerCorrector& c1);

/// order-2 corrector driven by v1b(x, 0) on the layer x nodes
EulerCorrector solve_corrector2(const EulerFlow& flow, const SecondOrderForcing& forcing,
                                const std::vector<double>& layer_x, const std::vector<double>& v1b_wall,
                                const EulerCorrector& c1, const GridPtr& grid,
                                SideChoice choice = SideChoice::corner_curvature);

/// Generic stream-function corrector: Delta psi - F' psi = S, psi(X,0) = int_0^X vwall.
/// `lower` (order 2) supplies the quadratic forcing of the pressure.
EulerCorrector solve_stream_corrector(const EulerFlow& flow, int order, const Field& S, const std::vector<double>& vwall,
                                      const EulerCorrector* lower, SideChoice choice);

} // namespace pbl
