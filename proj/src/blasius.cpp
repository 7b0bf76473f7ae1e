#include "pbl/blasius.hpp"

#include "pbl/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace pbl {

namespace {

using State = std::array<double, 3>;

void rhs(const State& s, State& d, double) {
    d[0] = s[1];
    d[1] = s[2];
    d[2] = -0.5 * s[0] * s[2];
}

} // namespace

Blasius::Blasius(double eta_max, double step) : eta_max_(eta_max), h_(step) {
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(1e-14, 1e-14, ode::runge_kutta_dopri5<State>());
    auto miss = [&](double s) {
        State st{0.0, 0.0, s};
        ode::integrate_adaptive(stepper, rhs, st, 0.0, eta_max_, 0.01);
        return st[1] - 1.0;
    };
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(miss, 0.2, 0.5, boost::math::tools::eps_tolerance<double>(52), it);
    fpp0_ = 0.5 * (r.first + r.second);

    const int n = static_cast<int>(std::lround(eta_max_ / h_)) + 1;
    f_.resize(n);
    fp_.resize(n);
    fpp_.resize(n);
    std::vector<double> times(n);
    for (int k = 0; k < n; ++k) times[k] = std::min(eta_max_, k * h_);
    State st{0.0, 0.0, fpp0_};
    int k = 0;
    ode::integrate_times(stepper, rhs, st, times.begin(), times.end(), 0.01, [&](const State& s, double) {
        f_[k] = s[0];
        fp_[k] = s[1];
        fpp_[k] = s[2];
        ++k;
    });
    if (k != n) throw SolverError("Blasius: dense output incomplete");
    beta_ = eta_max_ - f_.back();
}

double Blasius::eval(const std::vector<double>& t, double eta) const {
    // 4-point Lagrange on the uniform table
    const int n = static_cast<int>(t.size());
    double s = eta / h_;
    int k = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, n - 4);
    double r = s - k;
    double w0 = -(r - 1) * (r - 2) * (r - 3) / 6.0, w1 = r * (r - 2) * (r - 3) / 2.0;
    double w2 = -r * (r - 1) * (r - 3) / 2.0, w3 = r * (r - 1) * (r - 2) / 6.0;
    return w0 * t[k] + w1 * t[k + 1] + w2 * t[k + 2] + w3 * t[k + 3];
}

double Blasius::f(double eta) const {
    if (eta >= eta_max_) return eta - beta_;
    return eval(f_, eta);
}
double Blasius::fp(double eta) const {
    if (eta >= eta_max_) return 1.0;
    return eval(fp_, eta);
}
double Blasius::fpp(double eta) const {
    if (eta >= eta_max_) return 0.0;
    return eval(fpp_, eta);
}

const Blasius& blasius() {
    static const Blasius b;
    return b;
}

} // namespace pbl
