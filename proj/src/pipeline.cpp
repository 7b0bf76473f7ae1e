#include "pbl/pipeline.hpp"

#include "pbl/blasius.hpp"
#include "pbl/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace pbl {

namespace fs = std::filesystem;

double parse_eps(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ConfigError("empty eps value");
    auto num = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size() || t.empty()) throw ConfigError(fmt::format("malformed eps value '{}'", raw));
        return v;
    };
    double v;
    const auto e = s.find_first_of("eE");
    if (e == std::string::npos) {
        v = num(s);
    } else {
        v = num(s.substr(0, e)) * std::pow(10.0, num(s.substr(e + 1)));
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("eps must be positive, got '{}'", raw));
    return v;
}

std::vector<double> parse_eps_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_eps(item));
    if (out.empty()) throw ConfigError("empty eps list");
    return out;
}

std::string format_eps_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + fmt::format("{:.17g}", v[k]);
    return s;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ------------------------------------------------------------------ config

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"run", {"version", "out_dir", "seed"}},
        {"flow", {"kind", "alpha", "beta", "k"}},
        {"inflow", {"source"}},
        {"layer", {"L", "nx", "ny", "y_max", "margin", "spin_length", "linear_length", "spin_ratio"}},
        {"euler", {"Y_max", "ny", "beta"}},
        {"sweep", {"eps", "ny_ref", "eps_ref", "Y_max", "slope_lo", "slope_hi", "truncation_drop", "structural_eps"}},
        {"ns", {"eps", "nx", "ny", "Y_max", "x_layer", "tol_factor", "max_iter"}},
        {"probes", {"rho_eps", "forcing_draws", "hardy_profiles", "hardy_ny", "hardy_Y_max", "hardy_eps", "hardy_xi"}},
    };
    return s;
}

template <class T>
T get(const ptree& t, const std::string& path, T def) {
    auto v = t.get_optional<std::string>(path);
    if (!v) return def;
    std::istringstream is(*v);
    T out{};
    is >> out;
    if (is.fail() || !is.eof()) throw ConfigError(fmt::format("config: bad value '{}' for {}", *v, path));
    return out;
}

template <>
std::string get<std::string>(const ptree& t, const std::string& path, std::string def) {
    auto v = t.get_optional<std::string>(path);
    return v ? *v : def;
}

std::vector<double> get_list(const ptree& t, const std::string& path, std::vector<double> def) {
    auto v = t.get_optional<std::string>(path);
    return v ? parse_eps_list(*v) : def;
}

std::vector<double> get_plain_list(const ptree& t, const std::string& path, std::vector<double> def) {
    auto v = t.get_optional<std::string>(path);
    if (!v) return def;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        double d;
        is >> d;
        if (is.fail()) throw ConfigError(fmt::format("config: bad list '{}' for {}", *v, path));
        out.push_back(d);
    }
    return out;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    ptree t;
    try {
        std::istringstream is(text);
        boost::property_tree::ini_parser::read_ini(is, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(fmt::format("config: {}", e.message()));
    }
    for (const auto& [sec, body] : t) {
        auto it = schema().find(sec);
        if (it == schema().end()) throw ConfigError(fmt::format("config: unknown section [{}]", sec));
        if (!body.data().empty()) throw ConfigError(fmt::format("config: key '{}' outside a section", sec));
        for (const auto& [key, v] : body)
            if (!it->second.count(key)) throw ConfigError(fmt::format("config: unknown key '{}' in [{}]", key, sec));
    }
    RunConfig c;
    c.version = get(t, "run.version", c.version);
    if (c.version != 1) throw ConfigError(fmt::format("config: schema version {} not supported (expected 1)", c.version));
    c.out_dir = get<std::string>(t, "run.out_dir", c.out_dir);
    c.seed = get(t, "run.seed", c.seed);
    c.flow = flow_kind_from_string(get<std::string>(t, "flow.kind", to_string(c.flow)));
    c.params.alpha = get(t, "flow.alpha", c.params.alpha);
    c.params.beta = get(t, "flow.beta", c.params.beta);
    c.params.k = get(t, "flow.k", c.params.k);
    c.inflow = get<std::string>(t, "inflow.source", c.inflow);
    auto& x = c.expansion;
    x.L = get(t, "layer.L", x.L);
    x.layer_nx = get(t, "layer.nx", x.layer_nx);
    x.layer_ny = get(t, "layer.ny", x.layer_ny);
    x.y_max = get(t, "layer.y_max", x.y_max);
    x.margin = get(t, "layer.margin", x.margin);
    x.spin.length = get(t, "layer.spin_length", x.spin.length);
    x.spin.linear_length = get(t, "layer.linear_length", x.spin.linear_length);
    x.spin.ratio = get(t, "layer.spin_ratio", x.spin.ratio);
    x.Y_max = get(t, "euler.Y_max", x.Y_max);
    x.euler_ny = get(t, "euler.ny", x.euler_ny);
    x.euler_beta = get(t, "euler.beta", x.euler_beta);
    c.sweep_eps = get_list(t, "sweep.eps", c.sweep_eps);
    c.policy.ny_ref = get(t, "sweep.ny_ref", c.policy.ny_ref);
    c.policy.eps_ref = get(t, "sweep.eps_ref", c.policy.eps_ref);
    c.policy.Y_max = get(t, "sweep.Y_max", c.policy.Y_max);
    c.slope_lo = get(t, "sweep.slope_lo", c.slope_lo);
    c.slope_hi = get(t, "sweep.slope_hi", c.slope_hi);
    c.truncation_drop = get(t, "sweep.truncation_drop", c.truncation_drop);
    c.structural_eps = get_list(t, "sweep.structural_eps", c.structural_eps);
    c.ns_eps = get_list(t, "ns.eps", c.ns_eps);
    c.ns.nx = get(t, "ns.nx", c.ns.nx);
    c.ns.ny = get(t, "ns.ny", c.ns.ny);
    c.ns.Y_max = get(t, "ns.Y_max", c.ns.Y_max);
    c.ns.x_layer = get(t, "ns.x_layer", c.ns.x_layer);
    c.picard.tol_factor = get(t, "ns.tol_factor", c.picard.tol_factor);
    c.picard.max_iter = get(t, "ns.max_iter", c.picard.max_iter);
    c.rho_eps = get_list(t, "probes.rho_eps", c.rho_eps);
    c.forcing_draws = get(t, "probes.forcing_draws", c.forcing_draws);
    c.hardy.profiles = get(t, "probes.hardy_profiles", c.hardy.profiles);
    c.hardy.ny = get(t, "probes.hardy_ny", c.hardy.ny);
    c.hardy.Y_max = get(t, "probes.hardy_Y_max", c.hardy.Y_max);
    c.hardy_eps = get(t, "probes.hardy_eps", c.hardy_eps);
    c.hardy.xis = get_plain_list(t, "probes.hardy_xi", c.hardy.xis);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot open config '{}'", path));
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string resolved_config(const RunConfig& c) {
    auto d = [](double v) { return fmt::format("{:.17g}", v); };
    std::string xi;
    for (std::size_t k = 0; k < c.hardy.xis.size(); ++k) xi += (k ? "," : "") + d(c.hardy.xis[k]);
    const auto& x = c.expansion;
    std::string s;
    s += fmt::format("[run]\nversion = {}\nout_dir = {}\nseed = {}\n\n", c.version, c.out_dir, c.seed);
    s += fmt::format("[flow]\nkind = {}\nalpha = {}\nbeta = {}\nk = {}\n\n", to_string(c.flow), d(c.params.alpha),
                     d(c.params.beta), d(c.params.k));
    s += fmt::format("[inflow]\nsource = {}\n\n", c.inflow);
    s += fmt::format("[layer]\nL = {}\nnx = {}\nny = {}\ny_max = {}\nmargin = {}\nspin_length = {}\nlinear_length = {}\n"
                     "spin_ratio = {}\n\n",
                     d(x.L), x.layer_nx, x.layer_ny, d(x.y_max), d(x.margin), d(x.spin.length), d(x.spin.linear_length),
                     d(x.spin.ratio));
    s += fmt::format("[euler]\nY_max = {}\nny = {}\nbeta = {}\n\n", d(x.Y_max), x.euler_ny, d(x.euler_beta));
    s += fmt::format("[sweep]\neps = {}\nny_ref = {}\neps_ref = {}\nY_max = {}\nslope_lo = {}\nslope_hi = {}\n"
                     "truncation_drop = {}\nstructural_eps = {}\n\n",
                     format_eps_list(c.sweep_eps), c.policy.ny_ref, d(c.policy.eps_ref), d(c.policy.Y_max), d(c.slope_lo),
                     d(c.slope_hi), d(c.truncation_drop), format_eps_list(c.structural_eps));
    s += fmt::format("[ns]\neps = {}\nnx = {}\nny = {}\nY_max = {}\nx_layer = {}\ntol_factor = {}\nmax_iter = {}\n\n",
                     format_eps_list(c.ns_eps), c.ns.nx, c.ns.ny, d(c.ns.Y_max), d(c.ns.x_layer),
                     d(c.picard.tol_factor), c.picard.max_iter);
    s += fmt::format("[probes]\nrho_eps = {}\nforcing_draws = {}\nhardy_profiles = {}\nhardy_ny = {}\nhardy_Y_max = {}\n"
                     "hardy_eps = {}\nhardy_xi = {}\n",
                     format_eps_list(c.rho_eps), c.forcing_draws, c.hardy.profiles, c.hardy.ny, d(c.hardy.Y_max),
                     d(c.hardy_eps), xi);
    return s;
}

std::string profile_key(const RunConfig& c) {
    const auto& x = c.expansion;
    std::string src = c.inflow;
    if (c.inflow != "blasius") {
        std::ifstream is(c.inflow, std::ios::binary);
        if (!is) throw ConfigError(fmt::format("inflow: cannot open '{}'", c.inflow));
        std::stringstream ss;
        ss << is.rdbuf();
        src = fmt::format("file:{:016x}", fnv1a(ss.str()));
    }
    const std::string id =
        fmt::format("v1|{}|{:.17g}|{:.17g}|{:.17g}|{}|{:.17g}|{}|{}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}", to_string(c.flow),
                    c.params.alpha, c.params.beta, c.params.k, src, x.L, x.layer_nx, x.layer_ny, x.y_max, x.margin,
                    x.spin.length, x.spin.linear_length, x.spin.ratio);
    return fmt::format("{:016x}", fnv1a(id));
}

// ------------------------------------------------------------------ Prandtl cache

namespace {

constexpr char kMagic[8] = {'P', 'B', 'L', 'P', 'R', 'S', '1', '\n'};

struct Out {
    std::ofstream& os;
    void raw(const void* p, std::size_t n) { os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void f64(double v) { raw(&v, sizeof v); }
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void vec(const std::vector<double>& v) {
        i64(static_cast<std::int64_t>(v.size()));
        raw(v.data(), v.size() * sizeof(double));
    }
    void ivec(const std::vector<int>& v) {
        i64(static_cast<std::int64_t>(v.size()));
        for (int k : v) i64(k);
    }
    void grid(const GridPtr& g) {
        vec(g->x());
        vec(g->y());
        f64(g->y_max());
    }
    void field(const Field& f) { vec(f.values()); }
};

struct In {
    std::ifstream& is;
    void raw(void* p, std::size_t n) {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!is) throw ConfigError("Prandtl cache: truncated file");
    }
    double f64() {
        double v;
        raw(&v, sizeof v);
        return v;
    }
    std::int64_t i64() {
        std::int64_t v;
        raw(&v, sizeof v);
        return v;
    }
    std::vector<double> vec() {
        auto n = i64();
        if (n < 0 || n > (std::int64_t{1} << 32)) throw ConfigError("Prandtl cache: corrupt length");
        std::vector<double> v(static_cast<std::size_t>(n));
        raw(v.data(), v.size() * sizeof(double));
        return v;
    }
    std::vector<int> ivec() {
        auto n = i64();
        if (n < 0 || n > (std::int64_t{1} << 32)) throw ConfigError("Prandtl cache: corrupt length");
        std::vector<int> v(static_cast<std::size_t>(n));
        for (auto& k : v) k = static_cast<int>(i64());
        return v;
    }
    GridPtr grid() {
        auto x = vec();
        auto y = vec();
        double ym = f64();
        return make_grid(std::move(x), std::move(y), ym);
    }
    Field field(const GridPtr& g, const char* label) { return Field(g, vec(), label); }
};

} // namespace

void save_prandtl_stage(const std::string& path, const PrandtlStage& st) {
    fs::create_directories(fs::path(path).parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw ConfigError(fmt::format("cannot write '{}'", tmp));
        Out o{os};
        o.raw(kMagic, sizeof kMagic);
        o.f64(st.margin);
        o.i64(st.col0);
        const PrandtlSolution& p = st.prandtl;
        o.grid(p.grid);
        for (const Field* f : {&p.u0p, &p.v0p, &p.u0b, &p.v0b}) o.field(*f);
        o.vec(p.ue);
        o.vec(p.p0px);
        o.vec(p.wall_shear);
        o.f64(p.m0);
        o.f64(p.y0);
        o.ivec(p.newton_iterations);
        const auto& e = p.ext;
        o.grid(e.grid);
        o.i64(e.offset);
        o.i64(e.linear_start);
        o.grid(e.linear_grid);
        o.f64(e.shift);
        for (const Field* f : {&e.u0p, &e.v0p, &e.u0b, &e.v0b}) o.field(*f);
        o.vec(e.ue);
        o.vec(e.p0px);
        if (!os) throw ConfigError(fmt::format("cannot write '{}'", tmp));
    }
    fs::rename(tmp, path);
}

PrandtlStage load_prandtl_stage(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError(fmt::format("cannot open Prandtl cache '{}'", path));
    In in{is};
    char m[sizeof kMagic];
    in.raw(m, sizeof m);
    if (std::memcmp(m, kMagic, sizeof m) != 0) throw ConfigError(fmt::format("'{}' is not a Prandtl cache", path));
    PrandtlStage st;
    st.margin = in.f64();
    st.col0 = static_cast<int>(in.i64());
    PrandtlSolution& p = st.prandtl;
    p.grid = in.grid();
    p.u0p = in.field(p.grid, "u0p");
    p.v0p = in.field(p.grid, "v0p");
    p.u0b = in.field(p.grid, "u0b");
    p.v0b = in.field(p.grid, "v0b");
    p.ue = in.vec();
    p.p0px = in.vec();
    p.wall_shear = in.vec();
    p.m0 = in.f64();
    p.y0 = in.f64();
    p.newton_iterations = in.ivec();
    auto& e = p.ext;
    e.grid = in.grid();
    e.offset = static_cast<int>(in.i64());
    e.linear_start = static_cast<int>(in.i64());
    e.linear_grid = in.grid();
    e.shift = in.f64();
    e.u0p = in.field(e.grid, "u0p");
    e.v0p = in.field(e.grid, "v0p");
    e.u0b = in.field(e.grid, "u0b");
    e.v0b = in.field(e.grid, "v0b");
    e.ue = in.vec();
    e.p0px = in.vec();
    return st;
}

// ------------------------------------------------------------------ pipeline

namespace {

/// consecutive max/min of a positive sequence
double worst_pair(const std::vector<double>& v) {
    double w = 1.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double a = std::fabs(v[k - 1]), b = std::fabs(v[k]);
        if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
        w = std::max(w, std::max(a, b) / std::min(a, b));
    }
    return w;
}

std::map<std::string, std::string> read_manifest(const fs::path& p) {
    std::map<std::string, std::string> m;
    std::ifstream is(p);
    std::string line;
    while (std::getline(is, line)) {
        auto k = line.find(" = ");
        if (k != std::string::npos) m[line.substr(0, k)] = line.substr(k + 3);
    }
    return m;
}

EulerFlow flow_of(const RunConfig& c) { return make_flow(c.flow, c.params, c.expansion.L, c.expansion.Y_max); }

bool blasius_oracle_applies(const RunConfig& c) {
    return c.flow == FlowKind::shear && c.params.beta == 0.0 && c.inflow == "blasius";
}

} // namespace

Pipeline::Pipeline(RunConfig cfg, std::string out_dir)
    : cfg_(std::move(cfg)), out_(std::move(out_dir)), flow_(flow_of(cfg_)) {
    if (out_.empty()) throw ConfigError("empty output directory");
    fs::create_directories(out_);
    key_ = profile_key(cfg_);
    manifest_ = read_manifest(fs::path(out_) / "manifest.txt");
    manifest_["version"] = "pbl 1";
    manifest_["config_hash"] = fmt::format("{:016x}", fnv1a(resolved_config(cfg_)));
    manifest_["profile_key"] = key_;
    write("resolved_config.ini", resolved_config(cfg_));
    write_manifest();
}

bool Pipeline::all_passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
}

void Pipeline::add(Check c) {
    manifest_["check." + c.name] = fmt::format("{} {}", c.pass ? "pass" : "fail", c.detail);
    checks_.push_back(std::move(c));
}

void Pipeline::write(const std::string& rel, const std::string& text) const {
    const fs::path p = fs::path(out_) / rel;
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError(fmt::format("cannot write '{}'", p.string()));
    os << text;
}

void Pipeline::write_manifest() {
    std::string s;
    for (const auto& [k, v] : manifest_) s += k + " = " + v + "\n";
    write("manifest.txt", s);
}

template <class F>
void Pipeline::stage(const std::string& name, F&& body) {
    try {
        body();
        manifest_["stage." + name] = "ok";
        write_manifest();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        manifest_["stage." + name] = fmt::format("failed: {}", e.what());
        write_manifest();
        throw StageError(name, e.what());
    }
}

PrandtlStage Pipeline::prandtl_cached(bool compute_if_missing) {
    const fs::path p = fs::path(out_) / "cache" / fmt::format("prandtl-{}.bin", key_);
    if (fs::exists(p)) return load_prandtl_stage(p.string());
    if (!compute_if_missing)
        throw ConfigError(fmt::format("no cached Prandtl solution for key {} in '{}'; run `pbl prandtl` first", key_,
                                      out_));
    const auto& x = cfg_.expansion;
    InflowProfile in;
    if (cfg_.inflow == "blasius") {
        in = default_inflow(flow_, x);
    } else {
        in = load_inflow(cfg_.inflow, flow_, make_layer_grid(x.L, x.y_max, x.layer_nx, x.layer_ny)->y());
    }
    auto st = solve_prandtl_stage(flow_, in, x);
    save_prandtl_stage(p.string(), st);
    return st;
}

void Pipeline::require_expand() const {
    const fs::path cache = fs::path(out_) / "cache" / fmt::format("prandtl-{}.bin", key_);
    if (!fs::exists(cache))
        throw ConfigError(fmt::format("no cached Prandtl solution for key {} in '{}'; run `pbl prandtl` first", key_, out_));
    const fs::path p = fs::path(out_) / "expand" / "profile_key.txt";
    std::ifstream is(p);
    std::string k;
    if (!(is >> k) || k != key_)
        throw ConfigError(fmt::format("no expansion for key {} in '{}'; run `pbl expand` first", key_, out_));
}

const ExpansionProfiles& Pipeline::profiles() {
    if (!prof_) prof_ = std::make_unique<ExpansionProfiles>(build_profiles(flow_, prandtl_cached(false), cfg_.expansion));
    return *prof_;
}

void Pipeline::prandtl() {
    stage("prandtl", [&] {
        auto st = prandtl_cached(true);
        const PrandtlSolution& P = st.prandtl;
        const int nxp = cfg_.expansion.layer_nx;
        const bool oracle = blasius_oracle_applies(cfg_);
        const double fpp = blasius().wall_curvature();
        std::string csv = oracle ? "x,wall_shear,blasius\n" : "x,wall_shear\n";
        double worst = 0.0;
        for (int i = 0; i < nxp; ++i) {
            const int w = st.col0 + i;
            const double x = P.grid->x(w) - st.margin;
            csv += fmt::format("{:.10e},{:.10e}", x, P.wall_shear[w]);
            if (oracle) {
                const double ref = fpp / std::sqrt(1.0 + x);
                worst = std::max(worst, std::fabs(P.wall_shear[w] / ref - 1.0));
                csv += fmt::format(",{:.10e}", ref);
            }
            csv += "\n";
        }
        write("prandtl/wall_shear.csv", csv);
        auto ol = check_oleinik(P);
        write("prandtl/oleinik.txt",
              fmt::format("positivity = {}\nwall_shear = {}\nbounds = {}\ndecay = {}\nmin_interior_u = {:.6e}\nm0 = {:.6e}\n"
                          "y0 = {:.6e}\ntail = {:.3e}\nfailure = {}\n",
                          ol.positivity, ol.wall_shear, ol.bounds, ol.decay, ol.min_interior_u, ol.m0, ol.y0, ol.tail,
                          ol.failure));
        add({"oleinik", ol.positivity && ol.wall_shear && ol.m0 > 0.0,
             fmt::format("min u0p = {:.3e}, m0 = {:.4f}", ol.min_interior_u, ol.m0)});
        if (oracle) add({"blasius_wall_shear", worst <= 0.05, fmt::format("max relative error {:.3e} (<= 5%)", worst)});
    });
}

void Pipeline::expand() {
    stage("expand", [&] {
        prandtl_cached(false);
        const ExpansionProfiles& pr = profiles();
        const int k = pr.col0, nxp = pr.physical_grid->nx();
        std::string csv = "x,wall_shear,u1e_wall,v1e_wall,v1b_wall,u2e_wall,v2e_wall,v2b_wall\n";
        for (int i = 0; i < nxp; ++i) {
            const int w = k + i;
            csv += fmt::format("{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}\n",
                               pr.physical_grid->x(i), pr.prandtl.wall_shear[w], pr.traces.U1[w], pr.traces.V1[w],
                               pr.bl1.v_wall[w], pr.traces.U2[w], pr.traces.V2[w], pr.L2.bl2.v_wall[w]);
        }
        write("expand/wall_traces.csv", csv);
        write("expand/corrector_bc.txt",
              fmt::format("c1.s0 = {:.10e}\nc1.sL = {:.10e}\nc1.q0 = {:.10e}\nc1.qL = {:.10e}\nc1.corner_residual0 = {:.3e}\n"
                          "c1.corner_residualL = {:.3e}\nc1.elliptic_residual = {:.3e}\nc2.s0 = {:.10e}\nc2.sL = {:.10e}\n"
                          "c2.corner_residual0 = {:.3e}\nc2.corner_residualL = {:.3e}\nc2.elliptic_residual = {:.3e}\n"
                          "bl1.corner_residual = {:.3e}\nbl2.corner_residual = {:.3e}\nmargin = {:.10e}\n",
                          pr.c1.bc.s0, pr.c1.bc.sL, pr.c1.bc.q0, pr.c1.bc.qL, pr.c1.bc.corner_residual0,
                          pr.c1.bc.corner_residualL, pr.c1.solve.residual, pr.c2.bc.s0, pr.c2.bc.sL,
                          pr.c2.bc.corner_residual0, pr.c2.bc.corner_residualL, pr.c2.solve.residual,
                          pr.bl1.corner_residual, pr.L2.bl2.corner_residual, pr.margin));
        write("expand/profile_key.txt", key_ + "\n");
    });
}

void Pipeline::remainder_sweep() {
    stage("remainder-sweep", [&] {
        require_expand();
        const ExpansionProfiles& pr = profiles();
        auto full = sweep(pr, cfg_.sweep_eps, cfg_.policy, Truncation::full);
        full.slope_lo = cfg_.slope_lo;
        full.slope_hi = cfg_.slope_hi;
        write("remainder_sweep.csv", sweep_csv(full));
        auto trunc = sweep(pr, cfg_.sweep_eps, cfg_.policy, Truncation::drop_order2);
        write("remainder_sweep_truncated.csv", sweep_csv(trunc));
        add({"remainder_slope", full.pass(),
             fmt::format("slope {:.4f} in [{}, {}]", full.slope, cfg_.slope_lo, cfg_.slope_hi)});
        const double drop = full.slope - trunc.slope;
        add({"truncation_drop", drop >= cfg_.truncation_drop,
             fmt::format("full {:.4f} - truncated {:.4f} = {:.4f} (>= {})", full.slope, trunc.slope, drop,
                         cfg_.truncation_drop)});

        std::string csv = "eps,ny,divergence,div_constant,v_ratio,away0,away1,lower_inner,lower_outer,min_interior\n";
        std::vector<double> dc, vr, a0, a1;
        bool positive = true;
        for (double eps : cfg_.structural_eps) {
            auto g = composer_grid(pr, eps, cfg_.policy.ny_for(eps), cfg_.policy.Y_max);
            auto a = assemble(pr, eps, g);
            auto f = profile_facts(a, pr);
            csv += fmt::format("{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n", eps, g->ny(),
                               f.divergence, f.div_constant, f.v_ratio, f.away0, f.away1, f.lower_inner, f.lower_outer,
                               f.min_interior);
            dc.push_back(f.div_constant);
            vr.push_back(f.v_ratio);
            a0.push_back(f.away0);
            a1.push_back(f.away1);
            positive = positive && f.positive();
        }
        write("structural.csv", csv);
        auto drift = [&](const char* name, const std::vector<double>& v) {
            const double w = worst_pair(v);
            add({name, w <= 2.0, fmt::format("worst consecutive ratio {:.3f} (<= 2)", w)});
        };
        drift("divergence_constant", dc);
        drift("v_bound_constant", vr);
        drift("outer_constant_j0", a0);
        drift("outer_constant_j1", a1);
        add({"composite_positive", positive, "U_s > 0 for Y > 0"});

        // field dump at the largest sweep viscosity
        const double eps = cfg_.sweep_eps.front();
        auto g = composer_grid(pr, eps, cfg_.policy.ny_for(eps), cfg_.policy.Y_max);
        auto a = assemble(pr, eps, g);
        auto R = remainder(a);
        std::string dump = "X,Y,U_s,V_s,P_s,R1,R2\n";
        for (int i = 0; i < g->nx(); ++i)
            for (int j = 0; j < g->ny(); ++j)
                dump += fmt::format("{:.8e},{:.8e},{:.10e},{:.10e},{:.10e},{:.6e},{:.6e}\n", g->x(i), g->y(j), a.U.f(i, j),
                                    a.V.f(i, j), a.P(i, j), R.R1(i, j), R.R2(i, j));
        write(fmt::format("fields/composite_eps{:.3e}.csv", eps), dump);
    });
}

void Pipeline::ns_verify() {
    stage("ns-verify", [&] {
        require_expand();
        const ExpansionProfiles& pr = profiles();
        std::string csv = "eps,status,iterates,factor,Z,sup,sup_over_eps78,C1,C2,C0,in_ball,theorem_u,theorem_v\n";
        std::string report;
        std::vector<double> sups, thu, thv;
        bool contract = true;
        double eps0 = 0.0;
        int idx = 0;
        for (double eps : cfg_.ns_eps) {
            auto g = ns_grid(cfg_.expansion.L, eps, cfg_.ns);
            auto a = assemble(pr, eps, g);
            auto R = remainder(a);
            LinearizedSolver S(LinearizedProblem::from(a));
            try {
                auto res = picard_solve(S, R.R1, R.R2, cfg_.picard);
                const auto& st = res.state;
                auto th = theorem_ratios(a, res.U, res.V);
                csv += fmt::format("{:.6e},converged,{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{},{:.6e},{:.6e}\n",
                                   eps, st.iterates, st.factor, st.z.total, st.sup, st.sup_ratio, st.C1, st.C2, st.C0,
                                   st.in_ball ? 1 : 0, th.u, th.v);
                report += fmt::format("eps = {:.4e}: sup|U - u0e - u0b|/sqrt(eps) = {:.6f}, sup|V - v0e|/sqrt(eps) = {:.6f}, "
                                      "||U||_inf/eps^(7/8) = {:.6e}, contraction factor = {:.3e}\n",
                                      eps, th.u, th.v, st.sup_ratio, st.factor);
                write(fmt::format("contraction/eps_{}.csv", idx), contraction_csv(st));
                sups.push_back(st.sup_ratio);
                thu.push_back(th.u);
                thv.push_back(th.v);
                if (eps <= 1e-3 * (1.0 + 1e-12)) contract = contract && st.factor < 1.0 && st.in_ball;
                eps0 = std::max(eps0, eps);
            } catch (const DivergenceError& e) {
                csv += fmt::format("{:.6e},diverged,,,,,,,,,,,\n", eps);
                report += fmt::format("eps = {:.4e}: {}\n", eps, e.what());
                if (eps <= 1e-3 * (1.0 + 1e-12)) contract = false;
            }
            ++idx;
        }
        manifest_["largest_contracting_eps"] = eps0 > 0.0 ? fmt::format("{:.6e}", eps0) : "none";
        write("ns_verify.csv", csv);
        write("ns_verify.txt", report);
        add({"contraction", contract, "Picard factor < 1 and ||U||_Z <= C0 eps^(3/2) for eps <= 1e-3"});
        if (sups.size() >= 2) {
            const double w = worst_pair(sups), wu = worst_pair(thu), wv = worst_pair(thv);
            add({"sup_ratio_stable", w <= 2.0, fmt::format("worst consecutive ratio {:.3f} (<= 2)", w)});
            add({"theorem_ratio_stable", wu <= 2.0 && wv <= 2.0,
                 fmt::format("worst consecutive ratios u {:.3f}, v {:.3f} (<= 2)", wu, wv)});
        }
        // zero forcing
        const double eps = cfg_.ns_eps.front();
        auto g = ns_grid(cfg_.expansion.L, eps, cfg_.ns);
        LinearizedSolver S(LinearizedProblem::from(assemble(pr, eps, g)));
        Field Z(g);
        auto z = picard_solve(S, Z, Z, cfg_.picard);
        const bool zero = z.state.iterates == 1 && sup_norm(z.U) == 0.0 && sup_norm(z.V) == 0.0 && sup_norm(z.P) == 0.0;
        add({"zero_forcing", zero, fmt::format("{} iterate(s), sup |U| = {:.1e}", z.state.iterates, sup_norm(z.U))});
    });
}

void Pipeline::probes() {
    stage("probes", [&] {
        require_expand();
        const ExpansionProfiles& pr = profiles();
        HardyCorpusOptions ho = cfg_.hardy;
        ho.seed = cfg_.seed;
        auto hc = hardy_corpus(pr, cfg_.hardy_eps, ho);
        std::string csv = "xi,C,C_refined,change\n";
        for (const auto& r : hc.rows) csv += fmt::format("{:.4f},{:.8e},{:.8e},{:.4e}\n", r.xi, r.C, r.C_fine, r.change());
        write("probes/hardy.csv", csv);
        add({"hardy_constant", hc.finite() && hc.max_change() < 0.1,
             fmt::format("{} profiles, max change {:.2e} (< 10%)", ho.profiles, hc.max_change())});

        std::string rcsv = "eps,rho,rho_scaled10,homogeneity,basic_C,derivative_C,away_C\n";
        std::vector<double> rhos;
        double homog = 0.0;
        bool finite = true;
        for (double eps : cfg_.rho_eps) {
            auto g = ns_grid(cfg_.expansion.L, eps, cfg_.ns);
            LinearizedSolver S(LinearizedProblem::from(assemble(pr, eps, g)));
            auto [F1, F2] = smooth_forcing(g);
            const double rho = prop_ratio(S, F1, F2);
            const double rho10 = prop_ratio(S, 10.0 * F1, 10.0 * F2);
            const double h = std::fabs(rho10 / rho - 1.0);
            auto sol = S.solve(F1, F2);
            auto pb = lemma_probes(S, sol.Phi, F1, F2);
            rcsv += fmt::format("{:.6e},{:.10e},{:.10e},{:.3e},{:.6e},{:.6e},{:.6e}\n", eps, rho, rho10, h,
                                pb.basic.constant(), pb.derivative.constant(), pb.away.constant());
            rhos.push_back(rho);
            homog = std::max(homog, h);
            for (double c : {pb.basic.constant(), pb.derivative.constant(), pb.away.constant()})
                finite = finite && std::isfinite(c);
        }
        write("probes/prop_ratio.csv", rcsv);
        const double spread = rhos.empty() ? INFINITY
                                           : *std::max_element(rhos.begin(), rhos.end()) /
                                                 *std::min_element(rhos.begin(), rhos.end());
        add({"rho_stable", spread <= 3.0, fmt::format("max/min {:.3f} over the eps list (<= 3)", spread)});
        add({"rho_homogeneous", homog <= 1e-8, fmt::format("max relative change {:.2e} (<= 1e-8)", homog)});
        add({"lemma_constants_finite", finite, "basic, derivative and away constants"});

        // lemma constants across the halving series
        std::string lcsv = "eps,delta,normX,normY,basic_lhs,basic_rhs,derivative_lhs,derivative_rhs,away_lhs,away_rhs\n";
        std::vector<double> cb, cd, ca;
        for (double eps : cfg_.ns_eps) {
            auto g = ns_grid(cfg_.expansion.L, eps, cfg_.ns);
            LinearizedSolver S(LinearizedProblem::from(assemble(pr, eps, g)));
            auto [F1, F2] = smooth_forcing(g);
            auto sol = S.solve(F1, F2);
            auto pb = lemma_probes(S, sol.Phi, F1, F2);
            lcsv += fmt::format("{:.6e},{:.4f},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n", eps, pb.delta,
                                pb.norms.X, pb.norms.Y, pb.basic.lhs, pb.basic.rhs, pb.derivative.lhs, pb.derivative.rhs,
                                pb.away.lhs, pb.away.rhs);
            cb.push_back(pb.basic.constant());
            cd.push_back(pb.derivative.constant());
            ca.push_back(pb.away.constant());
        }
        write("probes/lemma.csv", lcsv);
        if (cb.size() >= 2) {
            const double w = std::max({worst_pair(cb), worst_pair(cd), worst_pair(ca)});
            add({"lemma_constants_stable", w <= 2.0, fmt::format("worst consecutive ratio {:.3f} (<= 2)", w)});
        }

        // random forcing corpus
        const double eps = cfg_.hardy_eps;
        auto g = ns_grid(cfg_.expansion.L, eps, cfg_.ns);
        LinearizedSolver S(LinearizedProblem::from(assemble(pr, eps, g)));
        std::string fcsv = "draw,rho\n";
        double rmax = 0.0;
        for (int d = 0; d < cfg_.forcing_draws; ++d) {
            auto [F1, F2] = random_forcing(g, cfg_.seed * 1000003ull + static_cast<std::uint64_t>(d));
            const double rho = prop_ratio(S, F1, F2);
            rmax = std::max(rmax, rho);
            fcsv += fmt::format("{},{:.10e}\n", d, rho);
        }
        write("probes/random_forcing.csv", fcsv);
        add({"random_forcing_rho", std::isfinite(rmax), fmt::format("max rho {:.4e} over {} draws", rmax, cfg_.forcing_draws)});
    });
}

void Pipeline::run() {
    prandtl();
    expand();
    remainder_sweep();
    ns_verify();
    probes();
    std::string s;
    for (const auto& c : checks_) s += fmt::format("{},{},{}\n", c.name, c.pass ? "pass" : "fail", c.detail);
    write("checks.csv", "check,result,detail\n" + s);
}

} // namespace pbl
