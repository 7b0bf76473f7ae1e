#pragma once

/// @file mesh.hpp
/// @brief Tensor-product grids, scalar fields, finite differences, quadrature and weighted norms.

#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pbl {

enum class Axis { x, y };

/// Scheme for first x-derivatives. `biased` is the upwind march stencil:
/// forward at node 0, centered at node 1, BDF2 from node 2 on.
enum class Scheme { centered, biased };

enum class StretchKind { uniform, tanh };

struct Stretch {
    StretchKind kind = StretchKind::uniform;
    /// smallest viscosity the grid must resolve (tanh only)
    double eps_min = 1e-4;
};

struct GridSpec {
    double L = 0.25;
    double Y_max = 8.0;
    double y_max = 20.0;
    int nx = 64;
    int ny = 128;
    Stretch stretch{};
};

/// Tensor-product grid with strictly increasing nodes starting at 0.
class Grid {
public:
    Grid(std::vector<double> x, std::vector<double> y, double y_max = 20.0);

    int nx() const { return static_cast<int>(x_.size()); }
    int ny() const { return static_cast<int>(y_.size()); }
    std::size_t size() const { return x_.size() * y_.size(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * y_.size() + j; }

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    double x(int i) const { return x_[i]; }
    double y(int j) const { return y_[j]; }
    double length() const { return x_.back(); }
    double height() const { return y_.back(); }
    double y_max() const { return y_max_; }

    double max_dx() const;
    double max_dy() const;

    /// boundary-layer companion coordinates Y_j / sqrt(eps)
    std::vector<double> layer_y(double eps) const;

    bool same_nodes(const Grid& o) const { return x_ == o.x_ && y_ == o.y_; }

private:
    std::vector<double> x_, y_;
    double y_max_;
};

using GridPtr = std::shared_ptr<const Grid>;

std::vector<double> uniform_nodes(double a, double b, int n);
/// tanh map clustered at `a`; beta = 0 gives uniform nodes
std::vector<double> tanh_wall_nodes(double a, double b, int n, double beta);
/// tanh map clustered at both ends
std::vector<double> tanh_two_sided_nodes(double a, double b, int n, double beta);
/// beta such that half of the wall-clustered nodes lie in [a, a + target]
double tanh_beta_for_half(double extent, double target);

GridPtr build_grid(const GridSpec& spec);
GridPtr make_grid(std::vector<double> x, std::vector<double> y, double y_max = 20.0);
/// n -> 2n-1 in both directions (uniform spacings halve exactly)
GridSpec refined(const GridSpec& spec);

/// Scalar field on a grid, index (i, j) <-> (X_i, Y_j), column-major in y.
class Field {
public:
    Field() = default;
    explicit Field(GridPtr g, std::string label = {});
    Field(GridPtr g, std::vector<double> values, std::string label = {});

    static Field sample(GridPtr g, const std::function<double(double, double)>& f,
                        std::string label = {});

    double& operator()(int i, int j) { return v_[g_->index(i, j)]; }
    double operator()(int i, int j) const { return v_[g_->index(i, j)]; }
    double& operator[](std::size_t k) { return v_[k]; }
    double operator[](std::size_t k) const { return v_[k]; }

    const Grid& grid() const { return *g_; }
    const GridPtr& grid_ptr() const { return g_; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }
    const std::string& label() const { return label_; }
    void set_label(std::string s) { label_ = std::move(s); }
    bool empty() const { return !g_; }

    const double* column(int i) const { return v_.data() + g_->index(i, 0); }
    double* column(int i) { return v_.data() + g_->index(i, 0); }
    std::vector<double> row(int j) const;

    /// throws DomainError on NaN/Inf
    void check_finite() const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

private:
    GridPtr g_;
    std::vector<double> v_;
    std::string label_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
/// pointwise product
Field operator*(const Field& a, const Field& b);

/// Finite-difference weights on an explicit stencil.
struct Stencil {
    int first = 0;
    int n = 0;
    std::array<double, 4> w{};
};

/// Fornberg weights of the m-th derivative at z from nodes x[0..n-1].
std::vector<double> fd_weights(double z, const double* x, int n, int m);

/// Per-node stencils for derivative `order` on `nodes`.
std::vector<Stencil> derivative_stencils(const std::vector<double>& nodes, int order,
                                         Scheme scheme = Scheme::centered);

std::vector<double> diff1d(const std::vector<double>& nodes, const std::vector<double>& f,
                           int order, Scheme scheme = Scheme::centered);

/// Second-order finite differences; order must be 1 or 2.
Field diff(const Field& f, Axis axis, int order, Scheme scheme = Scheme::centered);

/// Sparse matrix of diff on the flattened field.
Eigen::SparseMatrix<double> derivative_matrix(const Grid& g, Axis axis, int order);

std::vector<double> trapezoid_weights(const std::vector<double>& nodes);
double trapezoid(const std::vector<double>& nodes, const std::vector<double>& f);
/// running integral from nodes[0]
std::vector<double> cumulative_trapezoid(const std::vector<double>& nodes,
                                         const std::vector<double>& f);
/// integral from each node to nodes.back()
std::vector<double> tail_trapezoid(const std::vector<double>& nodes, const std::vector<double>& f);

struct Region {
    double x0 = -INFINITY, x1 = INFINITY, y0 = -INFINITY, y1 = INFINITY;
};

double integrate(const Field& f);
/// integral over the nodes inside the box (trapezoid restricted to the sub-grid)
double integrate(const Field& f, const Region& r);
double inner(const Field& a, const Field& b);
double l2_norm(const Field& f);
double sup_norm(const Field& f);

enum class Extrapolation { zero, hold, error };

/// Local 4-point cubic interpolation, exact at nodes.
class CubicInterpolator {
public:
    CubicInterpolator(std::vector<double> nodes, Extrapolation ext = Extrapolation::error);
    /// stencil for a target point; n == 0 means "outside, value 0"
    Stencil weights(double t) const;
    double operator()(const double* f, double t) const;
    const std::vector<double>& nodes() const { return nodes_; }

private:
    std::vector<double> nodes_;
    Extrapolation ext_;
};

Field resample(const Field& f, const GridPtr& target, Extrapolation ext = Extrapolation::error);

/// Field together with its first and second derivatives along each axis.
struct Bundle {
    Field f, fx, fy, fxx, fyy;
};

Bundle make_bundle(const Field& f, Scheme xscheme = Scheme::centered);
Bundle zero_bundle(const GridPtr& g);

/// columns offset .. offset + target.nx() - 1 of f, placed on target (same y nodes)
Field slice_columns(const Field& f, const GridPtr& target, int offset);
Bundle slice_columns(const Bundle& b, const GridPtr& target, int offset);
/// column extension of f to a grid with `pre` extra leading columns, linear in x through column 0
Field extend_columns_linear(const Field& f, const GridPtr& ext, int pre);
std::vector<double> extend_linear(const std::vector<double>& x, const std::vector<double>& f,
                                  const std::vector<double>& ext_x, int pre);

/// Smooth unit cutoff: 1 on [0,1], 0 on [2,inf), C-infinity; values and 3 derivatives.
std::array<double, 4> cutoff(double s);
/// eta_delta(Y) = 1 - cutoff(Y/delta): 0 on [0,delta], 1 on [2 delta, inf)
double eta_delta(double Y, double delta);

enum class WeightKind { none, omega, omega_tilde, eta_delta };

struct WeightedNormConfig {
    double eps = 1e-3;
    const Field* Us = nullptr;
    WeightKind weight = WeightKind::none;
    double delta = 0.0;

    /// checks eps > 0 and delta >= max(sqrt(L), eps^(1/4)) when eta_delta is selected
    void validate(double L) const;
    double weight_at(double X, double Y, double L) const;
};

struct QuotientNorms {
    double X = 0.0;  ///< ||G||_X
    double Y = 0.0;  ///< ||G||_Y
    double X_sq = 0.0;
    double Y_sq = 0.0;
};

QuotientNorms quotient_norms(const Field& G, const WeightedNormConfig& cfg);

struct ZNorm {
    double l2 = 0.0, grad = 0.0, hess = 0.0, total = 0.0;
};

/// ||U||_Z = ||U|| + sqrt(eps)||grad U|| + eps^(3/2)||grad^2 U|| for the pair (U, V).
ZNorm z_norm(const Field& U, const Field& V, double eps);

struct HardyResult {
    double lhs = 0.0;
    std::array<double, 2> parts{};  ///< xi eps ||sqrt(U_s) H'||^2, xi^-2 ||U_s H||^2
    double constant() const;
};

HardyResult hardy_probe(const std::vector<double>& Y, const std::vector<double>& H,
                        const std::vector<double>& Us, double xi, double eps);

} // namespace pbl
