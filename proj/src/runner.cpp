#include "lab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lab/asym.hpp"
#include "lab/builtins.hpp"
#include "lab/crofton.hpp"
#include "lab/curv.hpp"
#include "lab/errors.hpp"
#include "lab/flow.hpp"
#include "lab/parallel.hpp"
#include "lab/poly.hpp"
#include "lab/sample.hpp"

namespace lab {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LabError("cannot write artifact: " + path.string());
    out << body;
}

Family crofton_function(const ExperimentConfig& cfg, const Family& fam, Polynomial* f_out) {
    // The Grassmannian averages apply to a function f through the family
    // F = f(x) - t.
    Term tpos;
    tpos.coef = 1.0;
    tpos.exps.assign(fam.n() + 1, 0);
    tpos.exps[fam.n()] = 1;
    Polynomial f = fam.F() + Polynomial(fam.n(), {tpos});
    if (f.depends_on_t())
        throw ConfigError("crofton requires a family of the form f(x) - t");
    *f_out = f;
    return fam;
}

long long default_budget(const ExperimentConfig& cfg, const std::string& role) {
    if (cfg.budget > 0) return cfg.budget;
    if (role == "profile") return cfg.method == "tracer" ? 400 : 20000;
    return 600;  // band sampling per radius
}

struct Artifacts {
    std::filesystem::path dir;
    std::vector<std::string> names;

    void add(const std::string& name, const std::string& body) {
        write_file(dir / name, body);
        names.push_back(name);
    }
};

void run_profile(const ExperimentConfig& cfg, const Family& fam, Artifacts& art) {
    Method method = (cfg.method == "tracer") ? Method::tracer : Method::thin_shell;
    long long budget = default_budget(cfg, "profile");
    CurvatureProfile prof = profile(fam, cfg.tmin, cfg.tmax, cfg.steps, method, budget,
                                    cfg.ball_radius, cfg.seed);
    std::vector<JumpInterval> jumps = detect_discontinuities(fam, prof, method, budget,
                                                             cfg.ball_radius, cfg.seed,
                                                             cfg.k_sigma);
    std::ostringstream csv;
    csv << "t,K,absK,err,flag\n";
    for (std::size_t i = 0; i < prof.tgrid.size(); ++i)
        csv << fmt(prof.tgrid[i]) << "," << fmt(prof.K[i]) << "," << fmt(prof.absK[i]) << ","
            << fmt(prof.err[i]) << "," << flag_string(prof.flags[i]) << "\n";
    art.add("profile.csv", csv.str());

    std::ostringstream jcsv;
    jcsv << "t_left,t_right\n";
    for (const JumpInterval& j : jumps) jcsv << fmt(j.t_left) << "," << fmt(j.t_right) << "\n";
    art.add("jumps.csv", jcsv.str());
}

void run_acv(const ExperimentConfig& cfg, const Family& fam, Artifacts& art) {
    AcvReport rep = malgrange_profile(fam, cfg.c, cfg.epsilon, cfg.radii,
                                      default_budget(cfg, "acv"), cfg.seed);
    nlohmann::json j;
    j["c"] = rep.c;
    j["epsilon"] = rep.epsilon;
    j["radii"] = rep.radii;
    nlohmann::json mu = nlohmann::json::array();
    for (double v : rep.mu0) {
        if (std::isfinite(v))
            mu.push_back(v);
        else
            mu.push_back(nullptr);  // empty slab marker
    }
    j["mu0"] = mu;
    j["fitted_slope"] = std::isfinite(rep.fitted_slope)
                            ? nlohmann::json(rep.fitted_slope)
                            : nlohmann::json(nullptr);
    j["classification"] = to_string(rep.classification);
    j["undersampled"] = rep.undersampled;
    j["local_minima"] = rep.local_minima;
    art.add("acv_report.json", j.dump(2) + "\n");
}

void run_spherical(const ExperimentConfig& cfg, const Family& fam, Artifacts& art) {
    SphericalnessReport rep = sphericalness_report(fam, cfg.c, cfg.epsilon, cfg.radii,
                                                   default_budget(cfg, "spherical"), cfg.seed);
    nlohmann::json j;
    j["c"] = rep.c;
    j["ec_estimate"] = std::isfinite(rep.ec_estimate) ? nlohmann::json(rep.ec_estimate)
                                                      : nlohmann::json(nullptr);
    j["defect"] = rep.defect;
    j["verdict"] = to_string(rep.verdict);
    art.add("sphericalness_report.json", j.dump(2) + "\n");
}

void run_cloud(const ExperimentConfig& cfg, const Family& fam, Artifacts& art) {
    NormalCloud cloud = limit_normal_cloud(fam, cfg.c, cfg.epsilon, cfg.r_min,
                                           default_budget(cfg, "cloud"), cfg.seed, cfg.grid_h);
    std::ostringstream csv;
    for (int i = 1; i <= fam.n(); ++i) csv << "u" << i << ",";
    for (int i = 1; i <= fam.n(); ++i) csv << "v" << i << ",";
    csv << "radius,tval\n";
    for (const auto& pr : cloud.pairs) {
        for (int i = 0; i < fam.n(); ++i) csv << fmt(pr.u[i]) << ",";
        for (int i = 0; i < fam.n(); ++i) csv << fmt(pr.v[i]) << ",";
        csv << fmt(pr.radius) << "," << fmt(pr.tval) << "\n";
    }
    art.add("normal_cloud.csv", csv.str());

    nlohmann::json j;
    j["c"] = cfg.c;
    j["epsilon"] = cfg.epsilon;
    j["r_min"] = cfg.r_min;
    j["grid_h"] = cloud.grid_h;
    j["occupancy"] = cloud.occupancy;
    j["pairs"] = cloud.pairs.size();
    art.add("cloud_summary.json", j.dump(2) + "\n");
}

void run_flow(const ExperimentConfig& cfg, const Family& fam, Artifacts& art) {
    Eigen::VectorXd x0(fam.n());
    for (int i = 0; i < fam.n(); ++i) x0[i] = cfg.start_x[i];
    auto projected = newton_project(fam, x0, cfg.start_t);
    if (!projected) throw LabError("flow start point does not project onto the level");
    SurfacePoint start = surface_point(fam, *projected);
    FlowTrajectory traj = transport(fam, start, cfg.s_target, cfg.tol);

    std::ostringstream csv;
    csv << "s,";
    for (int i = 1; i <= fam.n(); ++i) csv << "x" << i << ",";
    csv << "t,radius,level\n";
    for (const FlowStep& st : traj.steps) {
        csv << fmt(st.s) << ",";
        for (int i = 0; i < fam.n(); ++i) csv << fmt(st.p.x[i]) << ",";
        csv << fmt(st.p.t) << "," << fmt(st.radius) << "," << fmt(st.level) << "\n";
    }
    art.add("trajectory.csv", csv.str());

    double measured_A = std::numeric_limits<double>::infinity();
    for (const FlowStep& st : traj.steps) {
        try {
            SurfacePoint sp = surface_point(fam, st.p);
            measured_A = std::min(measured_A, st.radius * sp.param_gradient.norm());
        } catch (const LabError&) {
        }
    }
    nlohmann::json j;
    j["status"] = traj.status == FlowStatus::ok ? "ok"
                  : traj.status == FlowStatus::near_critical ? "near_critical"
                  : traj.status == FlowStatus::step_underflow ? "step_underflow"
                                                              : "degenerate_spherical";
    j["steps"] = traj.steps.size();
    j["s_target"] = cfg.s_target;
    j["terminal_level"] = traj.steps.back().level;
    if (std::isfinite(measured_A) && measured_A > 0) {
        j["measured_A"] = measured_A;
        j["gronwall_ok"] = gronwall_check(traj, measured_A);
    } else {
        j["measured_A"] = nullptr;
        j["gronwall_ok"] = nullptr;
    }
    art.add("flow_summary.json", j.dump(2) + "\n");
}

void run_crofton(const ExperimentConfig& cfg, const Family& fam, Artifacts& art) {
    Polynomial f(fam.n());
    crofton_function(cfg, fam, &f);
    std::vector<double> tgrid(cfg.steps);
    for (int i = 0; i < cfg.steps; ++i)
        tgrid[i] = cfg.tmin + (cfg.tmax - cfg.tmin) * i / (cfg.steps - 1);
    EulerAverages avg = average_euler(f, tgrid, cfg.draws, cfg.ball_radius, cfg.seed);

    std::ostringstream csv;
    csv << "t,mean,stderr,failures\n";
    for (std::size_t i = 0; i < avg.tgrid.size(); ++i)
        csv << fmt(avg.tgrid[i]) << "," << fmt(avg.mean[i]) << "," << fmt(avg.stderr_of_mean[i])
            << "," << avg.failures << "\n";
    art.add("crofton.csv", csv.str());
}

}  // namespace

Family family_from_config(const ExperimentConfig& cfg) {
    if (is_builtin(cfg.family)) return make_builtin(cfg.family);
    return Family(parse_polynomial(cfg.family, cfg.nvars));
}

std::string list_builtin_text() {
    std::ostringstream out;
    for (const BuiltinFamily& b : builtin_catalog()) {
        out << b.name << "  (nvars=" << b.nvars << ", degree=" << b.degree << ")\n"
            << "    F = " << b.text << "\n"
            << "    " << b.notes << "\n";
    }
    return out.str();
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    set_worker_count(cfg.workers);
    Family fam = family_from_config(cfg);

    if (cfg.command == "flow" || (cfg.command == "all" && !cfg.start_x.empty())) {
        if (static_cast<int>(cfg.start_x.size()) != fam.n())
            throw ConfigError("start_x must have nvars entries for the flow command");
    }
    if (cfg.command == "flow" && cfg.start_x.empty())
        throw ConfigError("flow requires start_x");
    if (cfg.command == "crofton" || cfg.command == "all") {
        Term tpos;
        tpos.coef = 1.0;
        tpos.exps.assign(fam.n() + 1, 0);
        tpos.exps[fam.n()] = 1;
        bool f_minus_t = !(fam.F() + Polynomial(fam.n(), {tpos})).depends_on_t();
        if (cfg.command == "crofton" && !f_minus_t)
            throw ConfigError("crofton requires a family of the form f(x) - t");
    }

    Artifacts art;
    art.dir = cfg.out_dir;
    std::filesystem::create_directories(art.dir);

    if (cfg.command == "profile" || cfg.command == "all") run_profile(cfg, fam, art);
    if (cfg.command == "acv" || cfg.command == "all") run_acv(cfg, fam, art);
    if (cfg.command == "spherical" || cfg.command == "all") run_spherical(cfg, fam, art);
    if (cfg.command == "cloud" || cfg.command == "all") run_cloud(cfg, fam, art);
    if (cfg.command == "flow" || (cfg.command == "all" && !cfg.start_x.empty()))
        run_flow(cfg, fam, art);
    if (cfg.command == "crofton") run_crofton(cfg, fam, art);
    if (cfg.command == "all") {
        Term tpos;
        tpos.coef = 1.0;
        tpos.exps.assign(fam.n() + 1, 0);
        tpos.exps[fam.n()] = 1;
        if (!(fam.F() + Polynomial(fam.n(), {tpos})).depends_on_t() && fam.n() <= 3)
            run_crofton(cfg, fam, art);
    }

    // Manifest last, so it lists everything that was produced.
    char stamp[64];
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    nlohmann::json manifest;
    manifest["config_hash"] = hash_hex;
    manifest["seed"] = cfg.seed;
    manifest["command"] = cfg.command;
    manifest["version"] = kVersion;
    manifest["workers"] = cfg.workers;
    manifest["artifacts"] = art.names;
    manifest["generated_utc"] = stamp;
    write_file(art.dir / "manifest.json", manifest.dump(2) + "\n");

    RunResult res;
    res.artifacts = art.names;
    res.artifacts.push_back("manifest.json");
    return res;
}

}  // namespace lab
