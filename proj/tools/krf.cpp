// Command-line laboratory for the rotation-invariant Kähler-Ricci flow on
// blow-ups of projective space: class arithmetic, flow runs, estimate
// monitors, and Gromov-Hausdorff collapse certificates.
//
// Exit codes: 0 success, 2 invalid configuration or class, 3 the integrator
// hit the singularity before the stop time, 4 a monitor or validation
// verdict failed.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "krf/cohomology.hpp"
#include "krf/flow.hpp"
#include "krf/io.hpp"
#include "krf/metric_space.hpp"
#include "krf/monitors.hpp"

namespace fs = std::filesystem;
using namespace krf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSingularity = 3;
constexpr int kExitVerdict = 4;

int cmd_singular_time(int m, double h, double e) {
    const KahlerClass c0{m, h, e};
    if (!is_kahler(c0)) {
        std::cerr << "error: class not Kähler (need h > e > 0)\n";
        return kExitConfig;
    }
    const double T = first_singular_time(c0);
    const KahlerClass cT = class_at(c0, T);
    json out;
    out["T"] = T;
    out["scenario"] = to_string(classify(c0));
    out["class_at_T"] = {{"h", cT.h}, {"e", cT.e}};
    std::cout << out.dump() << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, std::string out_dir) {
    const ExperimentConfig cfg = config_from_file(config_path);
    cfg.flow.validate();
    if (out_dir.empty()) out_dir = cfg.out_dir;
    FlowTrajectory traj = run_flow(cfg.flow);
    save_trajectory(traj, out_dir);
    json out;
    out["out_dir"] = out_dir;
    out["snapshots"] = traj.snapshots.size();
    out["t_final"] = traj.snapshots.back().t();
    out["T_predicted"] = traj.T_predicted;
    out["scenario"] = to_string(traj.scenario);
    out["singularity_reached"] = traj.singularity_reached;
    std::cout << out.dump() << "\n";
    return traj.singularity_reached ? kExitSingularity : kExitOk;
}

int cmd_validate_pm(int m, int N, double L, double dt_init, double bound) {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{m, 1.0, 0.0};
    cfg.N = N;
    cfg.L = L;
    cfg.dt_init = dt_init;
    cfg.stop_fraction = 0.2;  // track the homothety up to t = 0.8 / (m+1)
    cfg.validate();
    const FlowTrajectory traj = run_flow(cfg);
    double err = 0.0;
    for (const auto& p : traj.snapshots) {
        const FlowProfile exact = exact_pm_profile(m, p.t(), L, N);
        for (int i = 0; i < N; ++i)
            err = std::max(err, std::fabs(p.phi()[i] - exact.phi()[i]));
    }
    const bool pass = err <= bound;
    json out;
    out["m"] = m;
    out["N"] = N;
    out["t_final"] = traj.snapshots.back().t();
    out["max_error"] = err;
    out["bound"] = bound;
    out["verdict"] = pass ? "pass" : "fail";
    std::cout << out.dump() << "\n";
    return pass ? kExitOk : kExitVerdict;
}

int cmd_monitors(const std::string& traj_dir, const std::string& suite, std::string out_dir) {
    const FlowTrajectory traj = load_trajectory(traj_dir);
    traj.validate();
    if (out_dir.empty()) out_dir = (fs::path(traj_dir) / "monitors").string();

    const DiscretizationSlack slack = calibrate_disc_constants(traj.config);
    std::vector<MonitorReport> reports;
    auto want = [&](const std::string& name) { return suite == "all" || suite == name; };

    if (want("vf_max_principle"))
        for (const auto& V : lifting_catalog(traj.config.c0.m))
            reports.push_back(monitor_vf_max_principle(traj, V));
    if (want("radial_pointwise"))
        reports.push_back(monitor_radial_pointwise(traj, slack.c_radial));
    if (want("schwarz")) reports.push_back(monitor_schwarz(traj, slack.c_schwarz));
    if (want("trace_aubin_yau"))
        reports.push_back(monitor_trace_aubin_yau(traj, slack.c_aubin_yau));
    if (want("volume_bound")) reports.push_back(monitor_volume_bound(traj));
    if (want("metric_bounds")) reports.push_back(monitor_metric_bounds(traj));
    if (want("diam_rate") && traj.scenario == ScenarioKind::CollapseFiber)
        reports.push_back(monitor_diam_rate(traj));

    if (reports.empty()) {
        std::cerr << "error: unknown monitor suite \"" << suite << "\"\n";
        return kExitConfig;
    }

    bool all_pass = true;
    for (const auto& r : reports) {
        atomic_write(fs::path(out_dir) / (r.name + ".json"), report_to_json(r).dump(2) + "\n");
        std::cout << r.name << ": " << r.verdict() << " (C_meas=" << fmt_double(r.measured_constant)
                  << ")\n";
        all_pass = all_pass && r.pass;
    }
    atomic_write(fs::path(out_dir) / "summary.csv", summary_csv(reports));
    return all_pass ? kExitOk : kExitVerdict;
}

int cmd_gh(const std::string& traj_dir, double base_side, int nB, int nF, int n_rho,
           int n_theta, std::string out_dir) {
    const FlowTrajectory traj = load_trajectory(traj_dir);
    traj.validate();
    if (out_dir.empty()) out_dir = (fs::path(traj_dir) / "gh").string();
    const FlatTorus torus{base_side};
    const GHCertificate cert = gh_convergence_certificate(traj, torus, nB, nF, n_rho, n_theta);

    std::ostringstream csv;
    csv << "t,epsilon,fiber_diam,base_diam\n";
    for (std::size_t k = 0; k < cert.report.times.size(); ++k)
        csv << fmt_double(cert.report.times[k]) << "," << fmt_double(cert.report.values[k])
            << "," << fmt_double(cert.fiber_diams[k]) << "," << fmt_double(cert.base_diam)
            << "\n";
    atomic_write(fs::path(out_dir) / "gh.csv", csv.str());

    json j = report_to_json(cert.report);
    j["base_diam"] = cert.base_diam;
    j["fiber_diams"] = cert.fiber_diams;
    atomic_write(fs::path(out_dir) / "certificate.json", j.dump(2) + "\n");
    std::cout << "gh_convergence: " << cert.report.verdict()
              << " (final_eps=" << fmt_double(cert.report.values.back()) << ")\n";
    return cert.report.pass ? kExitOk : kExitVerdict;
}

int cmd_report(const std::string& dir) {
    json bundle;
    bundle["dir"] = dir;
    std::ostringstream csv;
    csv << "source,name,C_meas,verdict\n";
    const fs::path monitors = fs::path(dir) / "monitors";
    if (fs::exists(monitors / "summary.csv")) {
        std::vector<json> rows;
        for (const auto& entry : fs::directory_iterator(monitors)) {
            if (entry.path().extension() != ".json") continue;
            json r = json::parse(read_file(entry.path()));
            csv << "monitor," << r["name"].get<std::string>() << ","
                << fmt_double(r["measured_constant"].get<double>()) << ","
                << r["verdict"].get<std::string>() << "\n";
            rows.push_back(std::move(r));
        }
        std::sort(rows.begin(), rows.end(),
                  [](const json& a, const json& b) { return a["name"] < b["name"]; });
        bundle["monitors"] = rows;
    }
    const fs::path ghdir = fs::path(dir) / "gh";
    if (fs::exists(ghdir / "certificate.json")) {
        json cert = json::parse(read_file(ghdir / "certificate.json"));
        csv << "gh," << cert["name"].get<std::string>() << ","
            << fmt_double(cert["measured_constant"].get<double>()) << ","
            << cert["verdict"].get<std::string>() << "\n";
        bundle["gh"] = std::move(cert);
    }
    if (fs::exists(fs::path(dir) / "meta.json"))
        bundle["trajectory"] = json::parse(read_file(fs::path(dir) / "meta.json"));
    atomic_write(fs::path(dir) / "report.json", bundle.dump(2) + "\n");
    atomic_write(fs::path(dir) / "report.csv", csv.str());
    std::cout << "report written to " << dir << "/report.{json,csv}\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kähler-Ricci flow laboratory on Bl_p P^m"};
    app.require_subcommand(1);

    // singular-time
    int st_m = 2;
    double st_h = 3.0, st_e = 1.0;
    auto* st = app.add_subcommand("singular-time", "class arithmetic: T and scenario");
    st->add_option("--m", st_m, "fiber complex dimension")->required();
    st->add_option("--h", st_h, "hyperplane coefficient")->required();
    st->add_option("--e", st_e, "exceptional coefficient")->required();

    // run
    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "integrate a flow trajectory");
    run->add_option("--config", run_config, "JSON config file")->required();
    run->add_option("--out", run_out, "output directory (default: config out_dir)");

    // validate-pm
    int vp_m = 2, vp_N = 4096;
    double vp_L = 15.0, vp_dt = 1e-4, vp_bound = 1e-3;
    auto* vp = app.add_subcommand("validate-pm", "track the exact homothety on P^m");
    vp->add_option("--m", vp_m);
    vp->add_option("--N", vp_N);
    vp->add_option("--L", vp_L);
    vp->add_option("--dt-init", vp_dt);
    vp->add_option("--bound", vp_bound, "max-norm error bound");

    // monitors
    std::string mon_traj, mon_suite = "all", mon_out;
    auto* mon = app.add_subcommand("monitors", "run estimate monitors over a trajectory");
    mon->add_option("--traj", mon_traj, "trajectory directory")->required();
    mon->add_option("--suite", mon_suite, "all or a single monitor name");
    mon->add_option("--out", mon_out, "output directory (default: <traj>/monitors)");

    // gh
    std::string gh_traj, gh_out;
    double gh_side = 1.0;
    int gh_nB = 9, gh_nF = 24, gh_nrho = 129, gh_ntheta = 33;
    auto* gh = app.add_subcommand("gh", "Gromov-Hausdorff collapse certificate");
    gh->add_option("--traj", gh_traj, "trajectory directory")->required();
    gh->add_option("--base-side", gh_side, "flat torus side");
    gh->add_option("--nB", gh_nB, "base sample count");
    gh->add_option("--nF", gh_nF, "fiber sample count");
    gh->add_option("--n-rho", gh_nrho, "fiber grid rho nodes");
    gh->add_option("--n-theta", gh_ntheta, "fiber grid theta nodes");
    gh->add_option("--out", gh_out, "output directory (default: <traj>/gh)");

    // report
    std::string rep_dir;
    auto* rep = app.add_subcommand("report", "bundle run/monitor/gh outputs");
    rep->add_option("--dir", rep_dir, "trajectory directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (st->parsed()) return cmd_singular_time(st_m, st_h, st_e);
        if (run->parsed()) return cmd_run(run_config, run_out);
        if (vp->parsed()) return cmd_validate_pm(vp_m, vp_N, vp_L, vp_dt, vp_bound);
        if (mon->parsed()) return cmd_monitors(mon_traj, mon_suite, mon_out);
        if (gh->parsed()) return cmd_gh(gh_traj, gh_side, gh_nB, gh_nF, gh_nrho, gh_ntheta, gh_out);
        if (rep->parsed()) return cmd_report(rep_dir);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SingularityReached& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSingularity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
