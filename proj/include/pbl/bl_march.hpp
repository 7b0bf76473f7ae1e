#pragma once

/// @file bl_march.hpp
/// @brief Implicit x-marching for boundary-layer systems on the (x, y) grid.
///
/// Both marches use the biased x-stencil of `Scheme::biased`. Stations 1 and 2
/// are solved together because station 1 uses the centered stencil.

#include "pbl/mesh.hpp"

#include <vector>

namespace pbl {

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 40;
};

struct NonlinearMarchInput {
    GridPtr grid;
    std::vector<double> ue;      ///< far-field value u_e(x_i, 0)
    std::vector<double> px;      ///< pressure gradient p_x(x_i)
    std::vector<double> inflow;  ///< u(0, y_j)
    NewtonOptions newton{};
};

struct NonlinearMarchResult {
    Field u, v;
    std::vector<int> iterations;  ///< Newton iterations per station
};

/// u u_x + v u_y - u_yy + p_x = 0, v = -int_0^y u_x, u(x,0) = 0, u(x,y_max) = u_e.
/// Throws SeparationError when the wall shear stops being positive.
NonlinearMarchResult march_prandtl(const NonlinearMarchInput& in);

struct LinearMarchInput {
    GridPtr grid;
    Field ubar, vbar;        ///< background profile
    Field ubar_x, ubar_y;    ///< its derivatives (consistent with the march stencils)
    Field rhs;               ///< right side
    std::vector<double> wall, far, inflow;
};

struct LinearMarchResult {
    Field u;
    Field w;  ///< w = v - v(x,0) = -int_0^y u_x
};

/// ubar u_x + u ubar_x + vbar u_y + w ubar_y - u_yy = rhs with continuity w_y = -u_x.
LinearMarchResult march_linear(const LinearMarchInput& in);

/// -int_0^y D_x u with the trapezoid rule, consistent with the march continuity rows.
Field integrate_continuity(const Field& u);

} // namespace pbl
