#pragma once

/// @file pipeline.hpp
/// @brief Run configuration, cached stages and the report files written by the command line tool.

#include "pbl/composer.hpp"
#include "pbl/errors.hpp"
#include "pbl/euler_base.hpp"
#include "pbl/ns_remainder.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace pbl {

/// "1e-2.5" -> 10^-2.5; plain decimals as usual
double parse_eps(const std::string& s);
/// comma-separated list of parse_eps values
std::vector<double> parse_eps_list(const std::string& s);
std::string format_eps_list(const std::vector<double>& v);

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 14695981039346656037ull);

struct RunConfig {
    int version = 1;
    std::string out_dir = "pbl_out";
    std::uint64_t seed = 1;

    FlowKind flow = FlowKind::shear;
    FlowParams params{0.1, 0.0, 1.0};
    /// "blasius" or a two-column text file (y, U)
    std::string inflow = "blasius";
    ExpansionOptions expansion;

    std::vector<double> sweep_eps{1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683794e-4};
    GridPolicy policy;
    double slope_lo = 1.3, slope_hi = 1.7;
    double truncation_drop = 0.3;
    /// halving series for the structural constants
    std::vector<double> structural_eps{2e-3, 1e-3, 5e-4, 2.5e-4};

    std::vector<double> ns_eps{1e-3, 5e-4, 2.5e-4};
    NSGridOptions ns;
    PicardOptions picard;

    std::vector<double> rho_eps{1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683794e-4, 1e-4};
    int forcing_draws = 20;
    HardyCorpusOptions hardy;
    double hardy_eps = 1e-3;
};

/// key = value sections; unknown sections or keys are errors
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);
/// every setting, defaults included, in the load_config format
std::string resolved_config(const RunConfig& c);

/// hash of (flow, inflow, layer grid): names the cached Prandtl stage
std::string profile_key(const RunConfig& c);

void save_prandtl_stage(const std::string& path, const PrandtlStage& st);
PrandtlStage load_prandtl_stage(const std::string& path);

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Failure inside a named stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// One output directory. Every stage writes its own files and updates manifest.txt.
class Pipeline {
public:
    Pipeline(RunConfig cfg, std::string out_dir);

    const RunConfig& config() const { return cfg_; }
    const std::string& out_dir() const { return out_; }
    const std::vector<Check>& checks() const { return checks_; }
    bool all_passed() const;

    void prandtl();
    void expand();
    void remainder_sweep();
    void ns_verify();
    void probes();
    /// every stage in order; stops at the first stage error (rethrown as StageError)
    void run();

private:
    template <class F>
    void stage(const std::string& name, F&& body);
    PrandtlStage prandtl_cached(bool compute_if_missing);
    const ExpansionProfiles& profiles();
    void require_expand() const;
    void add(Check c);
    void write(const std::string& rel, const std::string& text) const;
    void write_manifest();

    RunConfig cfg_;
    std::string out_;
    std::string key_;
    EulerFlow flow_;
    std::vector<Check> checks_;
    std::map<std::string, std::string> manifest_;
    std::unique_ptr<ExpansionProfiles> prof_;
};

/// environment variable that overrides the configured output root
inline constexpr const char* kOutRootEnv = "PBL_OUT_ROOT";

} // namespace pbl
