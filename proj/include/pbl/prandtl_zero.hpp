#pragma once

/// @file prandtl_zero.hpp
/// @brief Leading-order Prandtl layer: inflow data, the nonlinear march and Oleinik checks.

#include "pbl/bl_march.hpp"
#include "pbl/euler_base.hpp"
#include "pbl/mesh.hpp"

#include <string>
#include <vector>

namespace pbl {

struct CompatReport {
    double value_residual = 0.0;      ///< U(0)
    double parabolic_residual = 0.0;  ///< U''(0) + u_e u_eX at the corner
    double far_residual = 0.0;        ///< U(y_max) - u_e(0,0)
    bool ok(double tol = 1e-8) const;
};

struct InflowProfile {
    std::vector<double> y, U0P;
    double wall_shear = 0.0;
    double wall_curvature = 0.0;  ///< U''(0)
    double x_at = 0.0;            ///< station the profile is posed at
    CompatReport compat{};
    std::string source;

    /// U(0)=0, U>0 inside, U'(0)>0, far value within tol of u_e(x_at,0); throws ConfigError
    void validate(const EulerFlow& flow, double far_tol = 1e-6) const;
};

/// U = u_e f'(y sqrt(u_e / age)) with u_e = u_e(x_at,0); optionally plus c y^2 cutoff(y) so that
/// U''(0) + u_e u_eX = 0.
InflowProfile make_blasius_inflow(const EulerFlow& flow, const std::vector<double>& y, bool corner_correction = true,
                                  double x_at = 0.0, double age = 1.0);

/// two-column text (y, U); interpolated onto y
InflowProfile load_inflow(const std::string& path, const EulerFlow& flow, const std::vector<double>& y);

CompatReport compatibility_check(const EulerFlow& flow, const InflowProfile& inflow);

struct PrandtlSolution {
    GridPtr grid;  ///< (x, y) layer grid
    Field u0p, v0p;
    Field u0b, v0b;
    std::vector<double> ue;    ///< u_e(x, 0)
    std::vector<double> p0px;  ///< -u_e u_eX at the wall
    std::vector<double> wall_shear;
    double m0 = 0.0, y0 = 0.0;
    std::vector<int> newton_iterations;

    /// March grid including the spin-up columns. Its x nodes start at 0; physical x = node - shift.
    /// Columns offset.. coincide with `grid`. Without spin-up ext.grid == grid.
    struct Extension {
        GridPtr grid;
        int offset = 0;
        int linear_start = 0;  ///< first column used by the linearized marches
        GridPtr linear_grid;   ///< columns linear_start.. of grid, x restarted at 0
        double shift = 0.0;
        Field u0p, v0p, u0b, v0b;
        std::vector<double> ue, p0px;
    } ext;
};

/// layer grid with uniform nodes on [0,L] x [0,y_max]
GridPtr make_layer_grid(double L, double y_max, int nx, int ny);

struct SpinUpOptions {
    double length = 0.0;          ///< leading-order march starts at x = -length
    double linear_length = 0.25;  ///< linearized marches start at x = -linear_length (clipped to length)
    double ratio = 1.04;          ///< upstream spacing grows by this factor away from x = 0
};

/// Grid with upstream columns covering [-length, 0] (shifted so x starts at 0); the spacing next
/// to x = 0 equals the first spacing of `grid`. `pre` is the number of added columns.
GridPtr make_spinup_grid(const GridPtr& grid, const SpinUpOptions& spin, int& pre);

/// With spin.length > 0 the inflow is posed at x = -length (inflow.x_at) and marched through the
/// analytically continued Euler trace; the x = 0 profile is the one reached there.
PrandtlSolution solve_prandtl(const EulerFlow& flow, const InflowProfile& inflow, const GridPtr& grid,
                              NewtonOptions newton = {}, SpinUpOptions spin = {});

/// v0b from v0p: subtract y v_eY(x,0) and fix the constant so v0b(y_max) = 0
void derive_layer_parts(const EulerFlow& flow, PrandtlSolution& sol);
void derive_layer_parts(const EulerFlow& flow, const Field& u0p, const Field& v0p, double shift, Field& u0b, Field& v0b);

struct OleinikReport {
    bool positivity = false, wall_shear = false, bounds = false, decay = false;
    double min_interior_u = 0.0;
    double m0 = 0.0, y0 = 0.0;
    double sup_u = 0.0, sup_uy = 0.0, sup_uyy = 0.0, sup_ux = 0.0;
    double tail = 0.0;  ///< max |u0b(x, y_max - ...)| over the last node row before the boundary
    std::string failure;
    bool ok() const { return positivity && wall_shear && bounds && decay; }
};

OleinikReport check_oleinik(const PrandtlSolution& sol, double decay_tol = 1e-6);

/// tabular text: x y u v per line
void write_prandtl(const std::string& path, const PrandtlSolution& sol);
PrandtlSolution read_prandtl(const std::string& path, const EulerFlow& flow);

} // namespace pbl
