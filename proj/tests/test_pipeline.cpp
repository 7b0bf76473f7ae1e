#include "pbl/errors.hpp"
#include "pbl/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pbl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / "pbl_pipeline_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunConfig small_config() {
    RunConfig c;
    c.expansion.layer_nx = 33;
    c.expansion.layer_ny = 401;
    c.expansion.euler_ny = 129;
    return c;
}

} // namespace

TEST(Eps, FractionalExponents) {
    EXPECT_DOUBLE_EQ(parse_eps("1e-2"), 1e-2);
    EXPECT_NEAR(parse_eps("1e-2.5"), std::pow(10.0, -2.5), 1e-18);
    EXPECT_NEAR(parse_eps(" 3e-3.5 "), 3 * std::pow(10.0, -3.5), 1e-18);
    EXPECT_DOUBLE_EQ(parse_eps("0.004"), 0.004);
    for (const char* bad : {"", "abc", "1e", "-1e-2", "0", "1e-2x"}) EXPECT_THROW(parse_eps(bad), ConfigError) << bad;
    auto v = parse_eps_list("1e-2,1e-2.5,1e-3");
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(parse_eps_list(format_eps_list(v)), v);
}

TEST(Hash, KnownValues) {
    EXPECT_EQ(fnv1a(""), 14695981039346656037ull);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Config, ParsesSectionsAndRoundTrips) {
    auto c = parse_config("[run]\nversion = 1\nseed = 9\n[flow]\nkind = strain\nalpha = 0.2\n[sweep]\neps = 1e-2,1e-2.5,1e-3,1e-3.5\n"
                          "[ns]\nnx = 65\n");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.flow, FlowKind::strain);
    EXPECT_DOUBLE_EQ(c.params.alpha, 0.2);
    EXPECT_EQ(c.ns.nx, 65);
    EXPECT_NEAR(c.sweep_eps[3], std::pow(10.0, -3.5), 1e-18);
    auto r = parse_config(resolved_config(c));
    EXPECT_EQ(resolved_config(r), resolved_config(c));
    EXPECT_EQ(r.sweep_eps, c.sweep_eps);
    EXPECT_EQ(r.hardy.xis, c.hardy.xis);
}

TEST(Config, RejectsUnknownAndMalformed) {
    EXPECT_THROW(parse_config("[nope]\na = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[flow]\ncolour = red\n"), ConfigError);
    EXPECT_THROW(parse_config("[ns]\nnx = many\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nversion = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("[flow]\nkind = vortex\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/pbl.ini"), ConfigError);
}

TEST(Config, ProfileKeyTracksTheLayerInputsOnly) {
    RunConfig a;
    RunConfig b = a;
    b.ns.nx = 33;
    b.sweep_eps = {1e-2, 1e-3};
    EXPECT_EQ(profile_key(a), profile_key(b));
    b.params.alpha = 0.3;
    b.flow = FlowKind::strain;
    EXPECT_NE(profile_key(a), profile_key(b));
    RunConfig c = a;
    c.expansion.layer_ny = 401;
    EXPECT_NE(profile_key(a), profile_key(c));
}

TEST(Pipeline, MissingUpstreamStageNamesTheCommand) {
    auto dir = scratch("missing");
    Pipeline p(small_config(), dir.string());
    try {
        p.remainder_sweep();
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "remainder-sweep");
        EXPECT_NE(std::string(e.what()).find("pbl prandtl"), std::string::npos) << e.what();
    }
    EXPECT_TRUE(fs::exists(dir / "resolved_config.ini"));
    EXPECT_NE(slurp(dir / "manifest.txt").find("stage.remainder-sweep = failed"), std::string::npos);
}

TEST(Pipeline, PrandtlStageIsCachedAndDeterministic) {
    auto d1 = scratch("det1"), d2 = scratch("det2");
    {
        Pipeline p(small_config(), d1.string());
        p.prandtl();
        EXPECT_TRUE(p.all_passed());
        ASSERT_FALSE(p.checks().empty());
    }
    {
        Pipeline p(small_config(), d2.string());
        p.prandtl();
    }
    for (const char* f : {"prandtl/wall_shear.csv", "manifest.txt", "resolved_config.ini"})
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    // the cache round trip is exact
    const auto key = profile_key(small_config());
    const auto path = (d1 / "cache" / ("prandtl-" + key + ".bin")).string();
    auto st = load_prandtl_stage(path);
    const auto again = (d1 / "copy.bin").string();
    save_prandtl_stage(again, st);
    EXPECT_EQ(slurp(path), slurp(again));
    EXPECT_GT(st.prandtl.ext.grid->nx(), st.prandtl.grid->nx());
    EXPECT_GT(st.prandtl.m0, 0.0);
    // a second invocation reads the cache
    Pipeline p(small_config(), d1.string());
    p.prandtl();
    EXPECT_EQ(slurp(d1 / "prandtl/wall_shear.csv"), slurp(d2 / "prandtl/wall_shear.csv"));
}

TEST(Pipeline, ExpandRequiresPrandtlAndSweepRejectsShortLists) {
    auto dir = scratch("short");
    RunConfig c = small_config();
    {
        Pipeline p(c, dir.string());
        EXPECT_THROW(p.expand(), StageError);
        p.prandtl();
        p.expand();
        EXPECT_TRUE(fs::exists(dir / "expand" / "wall_traces.csv"));
    }
    c.sweep_eps = {1e-3};
    Pipeline p(c, dir.string());
    EXPECT_THROW(p.remainder_sweep(), StageError);
    EXPECT_NE(slurp(dir / "manifest.txt").find("stage.expand = ok"), std::string::npos);
}

TEST(Pipeline, CorruptCacheIsAnError) {
    auto dir = scratch("corrupt");
    const auto f = (dir / "bad.bin").string();
    {
        std::ofstream os(f, std::ios::binary);
        os << "not a cache";
    }
    EXPECT_THROW(load_prandtl_stage(f), ConfigError);
}
