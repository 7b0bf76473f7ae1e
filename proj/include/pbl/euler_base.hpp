#pragma once

/// @file euler_base.hpp
/// @brief Closed-form steady Euler flows on the strip and the coefficient fields derived from them.

#include "pbl/mesh.hpp"

#include <string>
#include <utility>

namespace pbl {

enum class FlowKind { shear, strain, harmonic };

std::string to_string(FlowKind k);
FlowKind flow_kind_from_string(const std::string& s);

struct FlowParams {
    double alpha = 0.1;  ///< strain rate / harmonic amplitude
    double beta = 0.0;   ///< shear profile amplitude, U = 1 + beta e^{-Y}
    double k = 1.0;      ///< harmonic wavenumber
};

/// Exact Euler flow. Derivatives are closed form.
class EulerFlow {
public:
    EulerFlow(FlowKind kind, FlowParams p);

    FlowKind kind() const { return kind_; }
    const FlowParams& params() const { return p_; }

    /// d^a/dX^a d^b/dY^b of u, v and psi (a + b <= 5)
    double u(double X, double Y, int a = 0, int b = 0) const;
    double v(double X, double Y, int a = 0, int b = 0) const;
    double psi(double X, double Y, int a = 0, int b = 0) const;
    double p(double X, double Y) const;
    double pX(double X, double Y) const;
    double pY(double X, double Y) const;

    double lap_u(double X, double Y) const { return u(X, Y, 2, 0) + u(X, Y, 0, 2); }
    double lap_v(double X, double Y) const { return v(X, Y, 2, 0) + v(X, Y, 0, 2); }
    /// F_e'(psi) = Delta u / u
    double feprime(double X, double Y) const;
    /// F_e''(psi) = d_Y(F_e') / u
    double fepp(double X, double Y) const;
    /// Delta^2 psi
    double bilap_psi(double X, double Y) const;

    /// bounds c0 <= u <= C0 measured on [0,L] x [0,Y_max]
    double c0() const { return c0_; }
    double C0() const { return C0_; }
    void set_bounds(double c0, double C0) {
        c0_ = c0;
        C0_ = C0;
    }

    /// the same flow in coordinates xi = X - origin
    EulerFlow translated(double origin) const;
    double origin() const { return origin_; }

private:
    FlowKind kind_;
    FlowParams p_;
    double c0_ = 1.0, C0_ = 1.0;
    double origin_ = 0.0;
};

/// Build a catalog flow and check u >= c0 > 0 on [0,L] x [0,Y_max].
EulerFlow make_flow(FlowKind kind, FlowParams params, double L = 0.25, double Y_max = 8.0);

struct FeFields {
    Field feprime;  ///< Delta u / u
    Field fepp;     ///< d_Y(Delta u / u) / u
};

FeFields extract_feprime(const EulerFlow& flow, const GridPtr& grid);

struct EulerResidual {
    Field momentum_x, momentum_y, divergence;
};

/// Discrete Euler residuals of the sampled fields.
EulerResidual euler_residual(const EulerFlow& flow, const GridPtr& grid);

} // namespace pbl
