// pbl: boundary-layer expansion and remainder verification driver.

#include "pbl/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>

namespace {

struct Common {
    std::string config, flow, out, eps;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "INI configuration file");
    sub->add_option("--eps", c.eps, "comma-separated viscosities, e.g. 1e-2,1e-2.5 (exponent may be fractional)");
    sub->add_option("--flow", c.flow, "shear | strain | harmonic");
    sub->add_option("--out", c.out, "output directory (overrides PBL_OUT_ROOT and the config)");
    sub->add_option("--seed", c.seed, "seed for the random corpora");
}

int report(const pbl::Pipeline& p) {
    for (const auto& c : p.checks()) fmt::print("{:<26} {}  {}\n", c.name, c.pass ? "PASS" : "FAIL", c.detail);
    fmt::print("output: {}\n", p.out_dir());
    return p.all_passed() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prandtl boundary-layer expansion and Navier-Stokes remainder checks"};
    app.require_subcommand(1, 1);
    Common c;

    using Stage = void (pbl::Pipeline::*)();
    struct Sub {
        const char* name;
        const char* help;
        Stage fn;
        std::vector<double> pbl::RunConfig::*eps;
    };
    const Sub subs[] = {
        {"prandtl", "solve and cache the leading-order layer", &pbl::Pipeline::prandtl, nullptr},
        {"expand", "build the correctors for the cached layer", &pbl::Pipeline::expand, nullptr},
        {"remainder-sweep", "remainder norm versus eps and the structural constants", &pbl::Pipeline::remainder_sweep,
         &pbl::RunConfig::sweep_eps},
        {"ns-verify", "Picard solve of the remainder system", &pbl::Pipeline::ns_verify, &pbl::RunConfig::ns_eps},
        {"probes", "Hardy corpus, stability ratio and estimate probes", &pbl::Pipeline::probes, &pbl::RunConfig::rho_eps},
        {"run", "every stage in order", &pbl::Pipeline::run, &pbl::RunConfig::sweep_eps},
    };
    std::vector<CLI::App*> apps;
    for (const auto& s : subs) {
        auto* a = app.add_subcommand(s.name, s.help);
        add_common(a, c);
        apps.push_back(a);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        pbl::RunConfig cfg = c.config.empty() ? pbl::RunConfig{} : pbl::load_config(c.config);
        if (!c.flow.empty()) cfg.flow = pbl::flow_kind_from_string(c.flow);
        if (c.seed) cfg.seed = *c.seed;
        std::string out = cfg.out_dir;
        if (const char* env = std::getenv(pbl::kOutRootEnv); env && *env) out = env;
        if (!c.out.empty()) out = c.out;
        for (std::size_t k = 0; k < apps.size(); ++k) {
            if (!apps[k]->parsed()) continue;
            if (!c.eps.empty()) {
                if (!subs[k].eps)
                    throw pbl::ConfigError(fmt::format("--eps has no effect on `{}`", subs[k].name));
                cfg.*(subs[k].eps) = pbl::parse_eps_list(c.eps);
            }
            cfg.out_dir = out;
            pbl::Pipeline p(cfg, out);
            std::invoke(subs[k].fn, p);
            return report(p);
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "pbl: error: {}\n", e.what());
        return 1;
    }
    return 1;
}
