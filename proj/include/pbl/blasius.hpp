#pragma once

/// @file blasius.hpp
/// @brief Blasius similarity profile f''' + f f''/2 = 0 by shooting.

#include <vector>

namespace pbl {

class Blasius {
public:
    /// shoot on [0, eta_max] until f'(eta_max) = 1
    explicit Blasius(double eta_max = 12.0, double step = 1e-3);

    double wall_curvature() const { return fpp0_; }  ///< f''(0)
    /// lim (eta - f(eta)) as eta -> infinity
    double displacement() const { return beta_; }

    double f(double eta) const;
    double fp(double eta) const;
    double fpp(double eta) const;

private:
    double eval(const std::vector<double>& t, double eta) const;
    double eta_max_, h_;
    double fpp0_ = 0.0, beta_ = 0.0;
    std::vector<double> f_, fp_, fpp_;
};

/// shared instance (the profile is universal)
const Blasius& blasius();

} // namespace pbl
