// One line per acceptance criterion; exit status 1 when any fails.

#include "pbl/blasius.hpp"
#include "pbl/composer.hpp"
#include "pbl/errors.hpp"
#include "pbl/ns_remainder.hpp"

#include "mms.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

using namespace pbl;

namespace {

const std::vector<double> kSweep{1e-2, std::pow(10.0, -2.5), 1e-3, std::pow(10.0, -3.5)};
const std::vector<double> kHalvings{1e-3, 5e-4, 2.5e-4};
const std::vector<double> kStructural{2e-3, 1e-3, 5e-4, 2.5e-4};
const std::vector<double> kRho{1e-2, std::pow(10.0, -2.5), 1e-3, std::pow(10.0, -3.5), 1e-4};

struct Result {
    bool pass = false;
    std::string detail;
};

double worst_pair(const std::vector<double>& v) {
    double w = 1.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double a = std::fabs(v[k - 1]), b = std::fabs(v[k]);
        if (!(a > 0.0) || !(b > 0.0)) return INFINITY;
        w = std::max(w, std::max(a, b) / std::min(a, b));
    }
    return w;
}

EulerFlow flow_of(FlowKind k) {
    ExpansionOptions o;
    return make_flow(k, {0.1, 0.0, 1.0}, o.L, o.Y_max);
}

const ExpansionProfiles& profiles(FlowKind k) {
    static std::map<FlowKind, std::unique_ptr<ExpansionProfiles>> cache;
    auto& p = cache[k];
    if (!p) {
        ExpansionOptions o;
        auto flow = flow_of(k);
        p = std::make_unique<ExpansionProfiles>(build_profiles(flow, default_inflow(flow, o), o));
    }
    return *p;
}

struct NSRow {
    double eps, factor, sup_ratio, tu, tv;
    bool converged, in_ball;
};

std::vector<NSRow> ns_rows(FlowKind k) {
    static std::map<FlowKind, std::vector<NSRow>> cache;
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    const auto& P = profiles(k);
    std::vector<NSRow> rows;
    for (double eps : kHalvings) {
        auto g = ns_grid(P.physical_grid->length(), eps);
        auto a = assemble(P, eps, g);
        auto R = remainder(a);
        LinearizedSolver S(LinearizedProblem::from(a));
        NSRow r{eps, INFINITY, 0, 0, 0, false, false};
        try {
            auto res = picard_solve(S, R.R1, R.R2);
            auto th = theorem_ratios(a, res.U, res.V);
            r = {eps, res.state.factor, res.state.sup_ratio, th.u, th.v, res.state.converged, res.state.in_ball};
        } catch (const DivergenceError&) {
        }
        rows.push_back(r);
    }
    cache[k] = rows;
    return rows;
}

Result criterion1() {
    const auto& P = profiles(FlowKind::shear);
    auto full = sweep(P, kSweep);
    auto cut = sweep(P, kSweep, {}, Truncation::drop_order2);
    const double drop = full.slope - cut.slope;
    std::string rows;
    for (const auto& r : full.rows) rows += fmt::format(" {:.2e}", r.total);
    return {full.slope >= 1.3 && full.slope <= 1.7 && drop >= 0.3,
            fmt::format("slope {:.3f} in [1.3, 1.7], truncated {:.3f}, drop {:.3f} >= 0.3; ||R||:{}", full.slope,
                        cut.slope, drop, rows)};
}

Result criterion2() {
    bool ok = true;
    std::string d;
    for (FlowKind k : {FlowKind::shear, FlowKind::strain}) {
        auto rows = ns_rows(k);
        std::vector<double> u, v;
        for (const auto& r : rows) {
            ok = ok && r.converged;
            u.push_back(r.tu);
            v.push_back(r.tv);
        }
        const double wu = worst_pair(u), wv = worst_pair(v);
        ok = ok && wu <= 2.0 && wv <= 2.0;
        d += fmt::format("{}: u {:.3f}..{:.3f} (x{:.2f}), v {:.3f}..{:.3f} (x{:.2f}); ", to_string(k),
                         *std::min_element(u.begin(), u.end()), *std::max_element(u.begin(), u.end()), wu,
                         *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end()), wv);
    }
    return {ok, d + "limit x2 per halving"};
}

Result criterion3() {
    const auto& P = profiles(FlowKind::shear);
    auto ol = check_oleinik(P.prandtl);
    double min_shear = INFINITY;
    for (double s : P.prandtl.wall_shear) min_shear = std::min(min_shear, s);
    auto blasius_error = [&](const PrandtlSolution& s, int col0, int nxp, double margin) {
        double w = 0.0;
        for (int i = 0; i < nxp; ++i) {
            const double x = s.grid->x(col0 + i) - margin;
            w = std::max(w, std::fabs(s.wall_shear[col0 + i] * std::sqrt(1.0 + x) / blasius().wall_curvature() - 1.0));
        }
        return w;
    };
    const double e_def = blasius_error(P.prandtl, P.col0, P.physical_grid->nx(), P.margin);
    ExpansionOptions fine;
    fine.layer_nx = 2 * (fine.layer_nx - 1) + 1;
    fine.layer_ny = 2 * (fine.layer_ny - 1) + 1;
    auto flow = flow_of(FlowKind::shear);
    auto st = solve_prandtl_stage(flow, default_inflow(flow, fine), fine);
    const double e_fine = blasius_error(st.prandtl, st.col0, fine.layer_nx, st.margin);
    const bool ok = ol.positivity && ol.wall_shear && min_shear >= ol.m0 && ol.m0 > 0.0 && e_def <= 0.05 && e_fine <= 0.01;
    return {ok, fmt::format("min interior u0p {:.2e} > 0, min wall shear {:.5f} >= m0 {:.5f}; Blasius shear error {:.2e} "
                            "(<= 5%), refined {:.2e} (<= 1%)",
                            ol.min_interior_u, min_shear, ol.m0, e_def, e_fine)};
}

Result criterion4() {
    auto h = hardy_corpus(profiles(FlowKind::shear), 1e-3);
    std::string d;
    for (const auto& r : h.rows) d += fmt::format(" xi={:.2f}: C {:.4f} -> {:.4f};", r.xi, r.C, r.C_fine);
    return {h.finite() && h.max_change() < 0.1,
            fmt::format("100 profiles;{} max change {:.2e} (< 10%)", d, h.max_change())};
}

Result criterion5() {
    const auto& P = profiles(FlowKind::shear);
    std::vector<double> rho;
    double homog = 0.0;
    for (double eps : kRho) {
        auto g = ns_grid(P.physical_grid->length(), eps);
        LinearizedSolver S(LinearizedProblem::from(assemble(P, eps, g)));
        auto [F1, F2] = smooth_forcing(g);
        const double r = prop_ratio(S, F1, F2);
        homog = std::max(homog, std::fabs(prop_ratio(S, 7.0 * F1, 7.0 * F2) / r - 1.0));
        rho.push_back(r);
    }
    const double spread = *std::max_element(rho.begin(), rho.end()) / *std::min_element(rho.begin(), rho.end());
    std::string d;
    for (double r : rho) d += fmt::format(" {:.4f}", r);
    return {spread <= 3.0 && homog <= 1e-8,
            fmt::format("rho over [1e-4, 1e-2]:{}; max/min {:.3f} (<= 3); homogeneity {:.1e} (<= 1e-8)", d, spread, homog)};
}

Result criterion6() {
    auto order = [](const std::function<double(int)>& err, std::vector<int> ns) {
        double prev = 0.0, o = 0.0;
        for (int n : ns) {
            const double e = err(n);
            if (prev > 0.0) o = std::log2(prev / e);
            prev = e;
        }
        return o;
    };
    const double oe = order([](int n) { return mms::elliptic_error(n); }, {33, 65, 129});
    const double os = order([](int n) { return mms::stream_error(n); }, {33, 65, 129});
    const double om = order([](int n) { return mms::march_error(n); }, {17, 33, 65});
    return {oe >= 1.9 && os >= 1.9 && om >= 0.9,
            fmt::format("elliptic {:.3f} (>= 1.9), fourth-order {:.3f} (>= 1.9), march {:.3f} (>= 0.9)", oe, os, om)};
}

Result criterion7() {
    bool ok = true;
    std::string d;
    for (FlowKind k : {FlowKind::shear, FlowKind::strain}) {
        const auto& P = profiles(k);
        GridPolicy pol;
        std::vector<double> dc, vr, a0, a1;
        bool positive = true;
        for (double eps : kStructural) {
            auto g = composer_grid(P, eps, pol.ny_for(eps), pol.Y_max);
            auto f = profile_facts(assemble(P, eps, g), P);
            dc.push_back(f.div_constant);
            vr.push_back(f.v_ratio);
            a0.push_back(f.away0);
            a1.push_back(f.away1);
            positive = positive && f.positive();
        }
        const double w[4] = {worst_pair(dc), worst_pair(vr), worst_pair(a0), worst_pair(a1)};
        ok = ok && positive && *std::max_element(w, w + 4) <= 2.0;
        d += fmt::format("{}: div C {:.3g} (x{:.2f}), V/(delta U) {:.3g} (x{:.2f}), away0 {:.3g} (x{:.2f}), away1 {:.3g} "
                         "(x{:.2f}); ",
                         to_string(k), dc.back(), w[0], vr.back(), w[1], a0.back(), w[2], a1.back(), w[3]);
    }
    return {ok, d + "limit x2 per halving"};
}

Result criterion8() {
    auto rows = ns_rows(FlowKind::shear);
    bool ok = true;
    std::vector<double> s;
    std::string d;
    for (const auto& r : rows) {
        ok = ok && r.converged && r.factor < 1.0 && r.in_ball;
        s.push_back(r.sup_ratio);
        d += fmt::format(" eps {:.2e}: factor {:.2e}, ||U||/eps^(7/8) {:.4f};", r.eps, r.factor, r.sup_ratio);
    }
    const double w = worst_pair(s);
    // zero forcing
    const auto& P = profiles(FlowKind::shear);
    auto g = ns_grid(P.physical_grid->length(), 1e-3);
    LinearizedSolver S(LinearizedProblem::from(assemble(P, 1e-3, g)));
    auto z = picard_solve(S, Field(g), Field(g));
    const bool zero = sup_norm(z.U) == 0.0 && sup_norm(z.V) == 0.0 && sup_norm(z.P) == 0.0;
    return {ok && w <= 2.0 && zero, fmt::format("{} stability x{:.2f} (<= 2); zero forcing -> {}", d, w,
                                                zero ? "exact 0" : "nonzero")};
}

} // namespace

int main() {
    const std::pair<const char*, Result (*)()> all[] = {
        {"1 remainder slope", criterion1},   {"2 theorem ratios", criterion2}, {"3 Oleinik and Blasius", criterion3},
        {"4 Hardy constant", criterion4},    {"5 stability ratio", criterion5}, {"6 manufactured orders", criterion6},
        {"7 structural constants", criterion7}, {"8 Picard contraction", criterion8},
    };
    int failed = 0;
    for (const auto& [name, fn] : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {false, fmt::format("error: {}", e.what())};
        }
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fmt::print("criterion {}: {} | {} [{:.1f} s]\n", name, r.pass ? "PASS" : "FAIL", r.detail, t);
        std::fflush(stdout);
        failed += !r.pass;
    }
    fmt::print("{} of 8 criteria passed\n", 8 - failed);
    return failed ? 1 : 0;
}
