#include "starshift/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>
#include <utility>

#include "json.hpp"

#include "starshift/errors.hpp"
#include "starshift/graph_ops.hpp"
#include "starshift/jost.hpp"
#include "starshift/oracle.hpp"
#include "starshift/spectrum.hpp"
#include "starshift/ssf.hpp"

namespace starshift::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using potentials::EdgePotential;
using potentials::StarGraph;
using cd = std::complex<double>;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw ValidationError("cannot write " + p.string());
}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> tol{
        {"ssf_curve", 0.05},           // high-energy anchor consistency
        {"levinson", 0.02},            // xi(0+) + N + (m-1)/2
        {"eigencount", 1e-6},          // vertex-condition residual at the roots
        {"resonance", 1e-6},           // current conservation on the basis
        {"trace_formula_check", 1e-6}, // formula vs numerical d/dz log D
        {"dispersion_check", 1e-3},    // trace vs xi integral
        {"decay_check", 1e-9},         // slack above the -1.4 slope bound
        {"oracle_compare", 1e-3},      // formula vs grid oracle
        {"rank2", 1e-10}};             // closed form vs 2x2 SVD
    return tol;
}

// signed integral of V over its support (moment() is the absolute moment)
double signed_integral(const EdgePotential& V) {
    const double T = V.truncation_point(1e-12);
    if (!(T > 0.0)) return 0.0;
    auto cuts = V.breakpoints();
    cuts.push_back(0.0);
    cuts.push_back(T);
    std::sort(cuts.begin(), cuts.end());
    constexpr double gx[2] = {0.3399810435848563, 0.8611363115940526};
    constexpr double gw[2] = {0.6521451548625461, 0.3478548451374538};
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = std::clamp(cuts[s], 0.0, T), b = std::clamp(cuts[s + 1], 0.0, T);
        if (!(b > a)) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 0.25)));
        for (int i = 0; i < pieces; ++i) {
            const double p = a + (b - a) * i / pieces, q = a + (b - a) * (i + 1) / pieces;
            const double m = 0.5 * (p + q), r = 0.5 * (q - p);
            for (int j = 0; j < 2; ++j)
                acc += r * gw[j] * (V(m - r * gx[j]) + V(m + r * gx[j]));
        }
    }
    return acc;
}

StarGraph free_like(const StarGraph& g) {
    std::vector<EdgePotential> edges(g.n(), EdgePotential::zero());
    return StarGraph{std::move(edges)};
}

void require_off_spectrum(cd z, const char* task) {
    if (z.imag() == 0.0 && z.real() >= 0.0)
        throw ValidationError(std::string(task) +
                              ": z must lie off the essential spectrum [0, inf)");
}

// ---- config parsing -------------------------------------------------------

[[noreturn]] void schema_fail(const std::string& field, const std::string& what) {
    throw SchemaError("config field '" + field + "': " + what);
}

double need_number(const json& j, const std::string& path) {
    if (!j.is_number()) schema_fail(path, "expected a number");
    return j.get<double>();
}

EdgePotential parse_edge(const json& e, const std::string& path) {
    if (!e.is_object()) schema_fail(path, "expected an object");
    if (!e.contains("type") || !e["type"].is_string())
        schema_fail(path + ".type", "expected a string");
    const std::string type = e["type"].get<std::string>();
    auto num = [&](const char* key) {
        if (!e.contains(key)) schema_fail(path + "." + key, "missing required number");
        return need_number(e[key], path + "." + std::string(key));
    };
    if (type == "zero") return EdgePotential::zero();
    if (type == "square_well") return EdgePotential::square_well(num("depth"), num("width"));
    if (type == "exponential")
        return EdgePotential::exponential(num("amplitude"), num("rate"));
    if (type == "piecewise_linear") {
        if (!e.contains("points") || !e["points"].is_array())
            schema_fail(path + ".points", "expected an array of [x, v] pairs");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < e["points"].size(); ++i) {
            const auto& p = e["points"][i];
            const std::string pp = path + ".points[" + std::to_string(i) + "]";
            if (!p.is_array() || p.size() != 2) schema_fail(pp, "expected an [x, v] pair");
            pts.emplace_back(need_number(p[0], pp + "[0]"), need_number(p[1], pp + "[1]"));
        }
        return EdgePotential::piecewise_linear(std::move(pts));
    }
    if (type == "sampled") {
        if (!e.contains("values") || !e["values"].is_array())
            schema_fail(path + ".values", "expected an array of numbers");
        std::vector<double> vals;
        for (std::size_t i = 0; i < e["values"].size(); ++i)
            vals.push_back(need_number(e["values"][i],
                                       path + ".values[" + std::to_string(i) + "]"));
        return EdgePotential::sampled(num("dx"), std::move(vals));
    }
    if (type == "sampled_csv") {
        if (!e.contains("path") || !e["path"].is_string())
            schema_fail(path + ".path", "expected a string");
        return EdgePotential::sampled_from_csv(e["path"].get<std::string>());
    }
    schema_fail(path + ".type", "unknown potential type '" + type + "'");
}

} // namespace

const std::vector<std::string>& known_tasks() {
    static const std::vector<std::string> names{
        "ssf_curve",       "levinson",         "eigencount", "resonance",
        "trace_formula_check", "dispersion_check", "decay_check", "oracle_compare"};
    return names;
}

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw SchemaError("config root must be an object");
    for (const auto& item : root.items()) {
        const std::string& k = item.key();
        if (k != "graph" && k != "tasks" && k != "tolerances" && k != "output_dir" &&
            k != "seed" && k != "z")
            schema_fail(k, "unknown key");
    }

    RunConfig cfg;
    cfg.tolerances = default_tolerances();

    if (!root.contains("graph") || !root["graph"].is_object())
        schema_fail("graph", "required object");
    const json& gj = root["graph"];
    for (const auto& item : gj.items())
        if (item.key() != "edges" && item.key() != "n")
            schema_fail("graph." + item.key(), "unknown key");
    if (!gj.contains("edges") || !gj["edges"].is_array())
        schema_fail("graph.edges", "required array");
    std::vector<EdgePotential> edges;
    for (std::size_t i = 0; i < gj["edges"].size(); ++i)
        edges.push_back(parse_edge(gj["edges"][i], "graph.edges[" + std::to_string(i) + "]"));
    if (gj.contains("n")) {
        if (!gj["n"].is_number_integer()) schema_fail("graph.n", "expected an integer");
        if (gj["n"].get<long long>() != static_cast<long long>(edges.size()))
            schema_fail("graph.n", "declared edge count " + gj["n"].dump() +
                                       " does not match graph.edges length " +
                                       std::to_string(edges.size()));
    }
    if (edges.size() < 2)
        throw ValidationError("config graph: a star graph requires n >= 2 edges");
    cfg.graph = StarGraph{std::move(edges)};

    if (!root.contains("tasks") || !root["tasks"].is_array() || root["tasks"].empty())
        schema_fail("tasks", "required non-empty array of task names");
    for (std::size_t i = 0; i < root["tasks"].size(); ++i) {
        const auto& t = root["tasks"][i];
        const std::string path = "tasks[" + std::to_string(i) + "]";
        if (!t.is_string()) schema_fail(path, "expected a string");
        const std::string name = t.get<std::string>();
        const auto& known = known_tasks();
        if (std::find(known.begin(), known.end(), name) == known.end())
            schema_fail(path, "unknown task '" + name + "'");
        if (std::find(cfg.tasks.begin(), cfg.tasks.end(), name) != cfg.tasks.end())
            schema_fail(path, "duplicate task '" + name + "'");
        cfg.tasks.push_back(name);
    }

    if (root.contains("tolerances")) {
        if (!root["tolerances"].is_object()) schema_fail("tolerances", "expected an object");
        for (const auto& item : root["tolerances"].items()) {
            const std::string path = "tolerances." + item.key();
            if (!cfg.tolerances.count(item.key())) schema_fail(path, "unknown tolerance key");
            const double v = need_number(item.value(), path);
            if (!(v >= 0.0)) schema_fail(path, "must be non-negative");
            cfg.tolerances[item.key()] = v;
        }
    }

    if (root.contains("output_dir")) {
        if (!root["output_dir"].is_string()) schema_fail("output_dir", "expected a string");
        cfg.output_dir = root["output_dir"].get<std::string>();
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_integer() || root["seed"].get<long long>() < 0)
            schema_fail("seed", "expected a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("z")) {
        const json& zj = root["z"];
        if (zj.is_number()) {
            cfg.z = cd(zj.get<double>(), 0.0);
        } else if (zj.is_object()) {
            for (const auto& item : zj.items())
                if (item.key() != "re" && item.key() != "im")
                    schema_fail("z." + item.key(), "unknown key");
            if (!zj.contains("re")) schema_fail("z.re", "missing required number");
            cfg.z = cd(need_number(zj["re"], "z.re"),
                       zj.contains("im") ? need_number(zj["im"], "z.im") : 0.0);
        } else {
            schema_fail("z", "expected a number or an {re, im} object");
        }
    }
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

// ---- task execution --------------------------------------------------------

namespace {

struct CheckEntry {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string provenance = "formula";
    bool checked = false;
    bool pass = true;
};

struct TaskOutcome {
    std::string task;
    std::string status = "ok";
    std::string message;
    std::vector<CheckEntry> checks;
    json detail = json::object();

    bool passed() const {
        if (status != "ok") return false;
        for (const auto& c : checks)
            if (c.checked && !c.pass) return false;
        return true;
    }
};

struct TaskContext {
    const RunConfig& cfg;
    double tol_scale = 1.0;
    fs::path outdir;

    double tol(const std::string& key) const {
        auto it = cfg.tolerances.find(key);
        const double base =
            it != cfg.tolerances.end() ? it->second : default_tolerances().at(key);
        return base * tol_scale;
    }
};

CheckEntry residual_check(std::string name, double value, double tol, std::string prov) {
    CheckEntry c;
    c.name = std::move(name);
    c.value = value;
    c.tolerance = tol;
    c.provenance = std::move(prov);
    c.checked = true;
    c.pass = value <= tol;
    return c;
}

CheckEntry info_value(std::string name, double value, std::string prov) {
    CheckEntry c;
    c.name = std::move(name);
    c.value = value;
    c.provenance = std::move(prov);
    return c;
}

TaskOutcome task_ssf_curve(const TaskContext& ctx) {
    TaskOutcome out;
    ssf::SsfOptions sopt;
    auto curve = ssf::phase_curve(ctx.cfg.graph, sopt);
    std::string csv = "lambda,k,eta,xi\n";
    for (std::size_t i = 0; i < curve.k.size(); ++i) {
        const double k = curve.k[i], eta = curve.eta[i];
        csv += fmt17(k * k) + "," + fmt17(k) + "," + fmt17(eta) + "," + fmt17(eta / M_PI) +
               "\n";
    }
    write_text(ctx.outdir / "ssf_curve.csv", csv);

    double total = 0.0;
    for (const auto& V : ctx.cfg.graph.edges) total += signed_integral(V);
    const double anchor = curve.eta.back() * curve.k.back();
    const double resid =
        std::abs(anchor - 0.5 * total) / std::max(1.0, std::abs(0.5 * total));
    out.checks.push_back(residual_check("anchor_residual", resid, ctx.tol("ssf_curve"),
                                        "formula"));
    out.checks.push_back(info_value("signed_potential_integral", total, "formula"));
    out.detail["k_points"] = curve.k.size();
    out.detail["k_max"] = curve.k.back();
    return out;
}

TaskOutcome task_levinson(const TaskContext& ctx) {
    TaskOutcome out;
    auto lr = ssf::levinson_check(ctx.cfg.graph);
    std::string csv = "xi0,bound_states,multiplicity,residual\n";
    csv += fmt17(lr.xi0) + "," + std::to_string(lr.bound_states) + "," +
           std::to_string(lr.multiplicity) + "," + fmt17(lr.residual) + "\n";
    write_text(ctx.outdir / "levinson.csv", csv);
    out.checks.push_back(residual_check("levinson_residual", std::abs(lr.residual),
                                        ctx.tol("levinson"), "formula"));
    out.checks.push_back(info_value("xi_zero_plus", lr.xi0, "formula"));
    out.checks.push_back(info_value("bound_states", lr.bound_states, "formula"));
    out.checks.push_back(info_value("resonance_multiplicity", lr.multiplicity, "formula"));
    return out;
}

TaskOutcome task_eigencount(const TaskContext& ctx) {
    TaskOutcome out;
    auto spec = spectrum::count_negative_eigenvalues(ctx.cfg.graph);
    std::string csv = "index,kappa,energy\n";
    for (std::size_t i = 0; i < spec.kappas.size(); ++i)
        csv += std::to_string(i) + "," + fmt17(spec.kappas[i]) + "," +
               fmt17(-spec.kappas[i] * spec.kappas[i]) + "\n";
    write_text(ctx.outdir / "eigencount.csv", csv);

    // residual of the vertex condition at each root, scaled by nearby values
    double resid = 0.0;
    for (double kappa : spec.kappas) {
        auto P_at = [&](double kk) {
            auto d = graph_ops::graph_jost(ctx.cfg.graph,
                                           jost::SpectralParam::from_zeta(cd(0.0, kk)));
            return std::abs(graph_ops::pole_free_sum(d));
        };
        const double delta = std::max(1e-3, 1e-3 * kappa);
        const double den =
            std::max({P_at(kappa + delta), P_at(std::max(kappa - delta, 0.5 * kappa)),
                      1e-300});
        resid = std::max(resid, P_at(kappa) / den);
    }
    out.checks.push_back(residual_check("root_residual", resid, ctx.tol("eigencount"),
                                        "formula"));
    out.checks.push_back(info_value("count", spec.count(), "formula"));
    out.detail["kappas"] = spec.kappas;
    return out;
}

const char* kind_name(spectrum::ZeroEnergyCase k) {
    switch (k) {
    case spectrum::ZeroEnergyCase::GenericNoResonance: return "generic_no_resonance";
    case spectrum::ZeroEnergyCase::SingleZeroNoResonance: return "single_zero_no_resonance";
    case spectrum::ZeroEnergyCase::ResonanceVanishingAtVertex:
        return "resonance_vanishing_at_vertex";
    case spectrum::ZeroEnergyCase::ResonanceNonvanishingAtVertex:
        return "resonance_nonvanishing_at_vertex";
    }
    return "unknown";
}

TaskOutcome task_resonance(const TaskContext& ctx) {
    TaskOutcome out;
    auto zc = spectrum::classify_zero_energy(ctx.cfg.graph);
    std::string csv = "edge,w0,dw0\n";
    for (std::size_t j = 0; j < zc.w0.size(); ++j)
        csv += std::to_string(j) + "," + fmt17(zc.w0[j]) + "," + fmt17(zc.dw0[j]) + "\n";
    write_text(ctx.outdir / "resonance.csv", csv);

    // resonances carry zero net current through the vertex
    double resid = 0.0;
    if (zc.kind == spectrum::ZeroEnergyCase::ResonanceVanishingAtVertex) {
        for (const auto& c : zc.basis) {
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < c.size(); ++j) {
                num += c[j] * zc.dw0[j];
                den += std::abs(c[j] * zc.dw0[j]);
            }
            resid = std::max(resid, std::abs(num) / std::max(den, 1e-300));
        }
    } else if (zc.kind == spectrum::ZeroEnergyCase::ResonanceNonvanishingAtVertex) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < zc.w0.size(); ++j) {
            num += zc.dw0[j] / zc.w0[j];
            den += std::abs(zc.dw0[j] / zc.w0[j]);
        }
        resid = std::abs(num) / std::max(den, 1e-300);
    }
    out.checks.push_back(residual_check("current_conservation", resid,
                                        ctx.tol("resonance"), "formula"));
    out.checks.push_back(info_value("dirichlet_zero_count", zc.M, "formula"));
    out.checks.push_back(info_value("resonance_multiplicity", zc.m, "formula"));
    out.detail["kind"] = kind_name(zc.kind);
    out.detail["k_singular"] = zc.k_singular;
    out.detail["basis"] = zc.basis;
    return out;
}

TaskOutcome task_trace_formula_check(const TaskContext& ctx) {
    TaskOutcome out;
    const cd z = ctx.cfg.z;
    require_off_spectrum(z, "trace_formula_check");
    const cd lhs =
        graph_ops::trace_resolvent_diff_formula(ctx.cfg.graph, jost::SpectralParam::from_z(z));
    const double delta = 1e-3 * std::max(1.0, std::abs(z));
    auto central = [&](double d) {
        const cd Dp = graph_ops::perturbation_determinant(
            ctx.cfg.graph, jost::SpectralParam::from_z(z + d));
        const cd Dm = graph_ops::perturbation_determinant(
            ctx.cfg.graph, jost::SpectralParam::from_z(z - d));
        return std::log(Dp / Dm) / (2.0 * d);
    };
    // Richardson pair removes the delta^2 term of the central difference
    const cd rhs = (4.0 * central(0.5 * delta) - central(delta)) / 3.0;
    const double resid = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));

    std::string csv = "z_re,z_im,lhs_re,lhs_im,rhs_re,rhs_im,residual\n";
    csv += fmt17(z.real()) + "," + fmt17(z.imag()) + "," + fmt17(lhs.real()) + "," +
           fmt17(lhs.imag()) + "," + fmt17(rhs.real()) + "," + fmt17(rhs.imag()) + "," +
           fmt17(resid) + "\n";
    write_text(ctx.outdir / "trace_formula_check.csv", csv);

    out.checks.push_back(residual_check("log_derivative_residual", resid,
                                        ctx.tol("trace_formula_check"), "formula"));
    out.detail["z"] = {{"re", z.real()}, {"im", z.imag()}};
    out.detail["lhs"] = {{"re", lhs.real()}, {"im", lhs.imag()}};
    out.detail["rhs"] = {{"re", rhs.real()}, {"im", rhs.imag()}};
    return out;
}

TaskOutcome task_dispersion_check(const TaskContext& ctx) {
    TaskOutcome out;
    auto dr = ssf::dispersion_check(ctx.cfg.graph, ctx.cfg.z);
    std::string csv = "z_re,z_im,lhs_re,lhs_im,rhs_re,rhs_im,residual\n";
    csv += fmt17(ctx.cfg.z.real()) + "," + fmt17(ctx.cfg.z.imag()) + "," +
           fmt17(dr.lhs.real()) + "," + fmt17(dr.lhs.imag()) + "," + fmt17(dr.rhs.real()) +
           "," + fmt17(dr.rhs.imag()) + "," + fmt17(dr.residual) + "\n";
    write_text(ctx.outdir / "dispersion_check.csv", csv);
    out.checks.push_back(residual_check("dispersion_residual", dr.residual,
                                        ctx.tol("dispersion_check"), "formula"));
    out.detail["lhs"] = {{"re", dr.lhs.real()}, {"im", dr.lhs.imag()}};
    out.detail["rhs"] = {{"re", dr.rhs.real()}, {"im", dr.rhs.imag()}};
    return out;
}

TaskOutcome task_decay_check(const TaskContext& ctx) {
    TaskOutcome out;
    const std::vector<double> ts{16.0, 64.0, 256.0};
    const double L = 4.0, h = 1.0 / 170.0;
    auto d = oracle::discretize(ctx.cfg.graph, L, h);
    auto d0 = oracle::discretize(free_like(ctx.cfg.graph), L, h);
    auto fit = oracle::trace_norm_decay(d, d0, ts);

    std::string csv = "t,trace_norm\n";
    for (std::size_t i = 0; i < fit.t.size(); ++i)
        csv += fmt17(fit.t[i]) + "," + fmt17(fit.norm[i]) + "\n";
    write_text(ctx.outdir / "decay_check.csv", csv);

    const double resid = fit.exact_zero ? 0.0 : std::max(0.0, fit.slope - (-1.4));
    out.checks.push_back(residual_check("slope_margin", resid, ctx.tol("decay_check"),
                                        "oracle"));
    out.checks.push_back(info_value("slope", fit.slope, "oracle"));
    out.detail["exact_zero"] = fit.exact_zero;
    out.detail["grid"] = {{"L", L}, {"h", h}};
    return out;
}

TaskOutcome task_oracle_compare(const TaskContext& ctx) {
    TaskOutcome out;
    const cd z = ctx.cfg.z;
    require_off_spectrum(z, "oracle_compare");
    const auto param = jost::SpectralParam::from_z(z);
    const cd formula_trace = graph_ops::trace_resolvent_diff_formula(ctx.cfg.graph, param);
    const cd formula_det = graph_ops::perturbation_determinant(ctx.cfg.graph, param);

    double trunc = 1.0;
    for (const auto& V : ctx.cfg.graph.edges)
        trunc = std::max(trunc, V.truncation_point(1e-10));
    const double L = std::max(10.0, trunc + 8.0 / param.zeta.imag());
    StarGraph g0 = free_like(ctx.cfg.graph);
    auto tr_at = [&](double h) {
        return oracle::oracle_trace_resolvent_diff(oracle::discretize(ctx.cfg.graph, L, h),
                                                   oracle::discretize(g0, L, h), z);
    };
    auto det_at = [&](double h) {
        return oracle::oracle_determinant(oracle::discretize(g0, L, h), ctx.cfg.graph, z);
    };
    const cd oracle_trace = (4.0 * tr_at(0.01) - tr_at(0.02)) / 3.0;
    const cd oracle_det = (4.0 * det_at(0.01) - det_at(0.02)) / 3.0;
    const double resid_tr =
        std::abs(formula_trace - oracle_trace) / std::max(1.0, std::abs(formula_trace));
    const double resid_det =
        std::abs(formula_det - oracle_det) / std::max(1.0, std::abs(formula_det));

    // seeded rank-two sweep: closed form against the 2x2 SVD route
    std::mt19937_64 rng(ctx.cfg.seed);
    std::normal_distribution<double> nd;
    double resid_rank2 = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 1 + static_cast<int>(rng() % 16);
        std::vector<cd> f(dim), g(dim);
        for (auto& x : f) x = cd(nd(rng), nd(rng));
        for (auto& x : g) x = cd(nd(rng), nd(rng));
        const double a = oracle::rank2_trace_norm(f, g);
        const double b = oracle::rank2_trace_norm_svd(f, g);
        resid_rank2 = std::max(resid_rank2, std::abs(a - b) / std::max(1.0, a));
    }

    std::string csv = "quantity,formula_re,formula_im,oracle_re,oracle_im,residual\n";
    csv += "trace_resolvent_diff," + fmt17(formula_trace.real()) + "," +
           fmt17(formula_trace.imag()) + "," + fmt17(oracle_trace.real()) + "," +
           fmt17(oracle_trace.imag()) + "," + fmt17(resid_tr) + "\n";
    csv += "perturbation_determinant," + fmt17(formula_det.real()) + "," +
           fmt17(formula_det.imag()) + "," + fmt17(oracle_det.real()) + "," +
           fmt17(oracle_det.imag()) + "," + fmt17(resid_det) + "\n";
    write_text(ctx.outdir / "oracle_compare.csv", csv);

    const double tol = ctx.tol("oracle_compare");
    out.checks.push_back(residual_check("trace_residual", resid_tr, tol, "oracle"));
    out.checks.push_back(residual_check("determinant_residual", resid_det, tol, "oracle"));
    out.checks.push_back(residual_check("rank2_residual", resid_rank2, ctx.tol("rank2"),
                                        "oracle"));
    out.detail["z"] = {{"re", z.real()}, {"im", z.imag()}};
    out.detail["grid"] = {{"L", L}, {"h", std::vector<double>{0.02, 0.01}}};
    out.detail["formula_trace"] = {{"re", formula_trace.real()},
                                   {"im", formula_trace.imag()}};
    out.detail["oracle_trace"] = {{"re", oracle_trace.real()}, {"im", oracle_trace.imag()}};
    out.detail["formula_determinant"] = {{"re", formula_det.real()},
                                         {"im", formula_det.imag()}};
    out.detail["oracle_determinant"] = {{"re", oracle_det.real()},
                                        {"im", oracle_det.imag()}};
    return out;
}

json checks_json(const std::vector<CheckEntry>& checks) {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"tolerance", c.tolerance},
                       {"provenance", c.provenance},
                       {"checked", c.checked},
                       {"pass", c.pass}});
    return arr;
}

TaskOutcome run_one(const std::string& name, const TaskContext& ctx) {
    TaskOutcome out;
    try {
        if (name == "ssf_curve") out = task_ssf_curve(ctx);
        else if (name == "levinson") out = task_levinson(ctx);
        else if (name == "eigencount") out = task_eigencount(ctx);
        else if (name == "resonance") out = task_resonance(ctx);
        else if (name == "trace_formula_check") out = task_trace_formula_check(ctx);
        else if (name == "dispersion_check") out = task_dispersion_check(ctx);
        else if (name == "decay_check") out = task_decay_check(ctx);
        else if (name == "oracle_compare") out = task_oracle_compare(ctx);
        else throw ValidationError("unknown task: " + name);
    } catch (const std::exception& e) {
        out = TaskOutcome{};
        out.status = "error";
        out.message = e.what();
    }
    out.task = name;

    json tj;
    tj["task"] = name;
    tj["status"] = out.status;
    if (!out.message.empty()) tj["message"] = out.message;
    tj["pass"] = out.passed();
    tj["checks"] = checks_json(out.checks);
    tj["detail"] = out.detail;
    try {
        write_text(ctx.outdir / (name + ".json"), tj.dump(2) + "\n");
    } catch (...) {
        // the outcome still reaches summary.json; nothing else to do here
    }
    return out;
}

} // namespace

int run(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.tasks.empty()) throw ValidationError("run config lists no tasks");
    if (!(opt.tolerance_scale > 0.0))
        throw ValidationError("--tolerance-scale must be positive");
    const fs::path outdir = opt.output_override.empty() ? fs::path(cfg.output_dir)
                                                        : fs::path(opt.output_override);
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) throw ValidationError("cannot create output directory " + outdir.string());

    TaskContext ctx{cfg, opt.tolerance_scale, outdir};
    std::vector<TaskOutcome> results(cfg.tasks.size());
    unsigned workers = opt.threads ? opt.threads
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = std::max(1u, std::min<unsigned>(workers, cfg.tasks.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cfg.tasks.size();)
            results[i] = run_one(cfg.tasks[i], ctx);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    bool any_error = false, any_fail = false;
    json tasks = json::array();
    for (const auto& r : results) {
        if (r.status != "ok") any_error = true;
        else if (!r.passed()) any_fail = true;
        json tj;
        tj["task"] = r.task;
        tj["status"] = r.status;
        if (!r.message.empty()) tj["message"] = r.message;
        tj["pass"] = r.passed();
        tj["checks"] = checks_json(r.checks);
        tasks.push_back(tj);
        if (opt.verbose)
            std::printf("[%s] %s%s\n", r.task.c_str(),
                        r.status != "ok" ? "error: " : (r.passed() ? "pass" : "FAIL"),
                        r.status != "ok" ? r.message.c_str() : "");
    }
    const int code = any_error ? 1 : (any_fail ? 2 : 0);

    json summary;
    summary["tolerance_scale"] = opt.tolerance_scale;
    summary["seed"] = cfg.seed;
    summary["tasks"] = tasks;
    summary["pass"] = !any_error && !any_fail;
    summary["exit_code"] = code;
    write_text(outdir / "summary.json", summary.dump(2) + "\n");
    return code;
}

} // namespace starshift::cli
