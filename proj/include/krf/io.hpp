#pragma once

// File formats: profile CSV snapshots, trajectory directories, monitor
// reports (JSON) and summary tables (CSV).  All writes are atomic
// (temp-and-rename) and all doubles are printed with %.17g so identical
// inputs give byte-identical outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "krf/errors.hpp"
#include "krf/flow.hpp"
#include "krf/monitors.hpp"
#include "krf/profile.hpp"

namespace krf {

using json = nlohmann::ordered_json;

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out << content;
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --------------------------------------------------------------------------
// Profile CSV: metadata comment, header, one row per node.

inline std::string profile_to_csv(const FlowProfile& p) {
    std::ostringstream out;
    out << "# m=" << p.m() << ",t=" << fmt_double(p.t()) << ",a=" << fmt_double(p.a())
        << ",b=" << fmt_double(p.b()) << ",L=" << fmt_double(p.L()) << ",N=" << p.N()
        << "\n";
    out << "rho,phi\n";
    for (int i = 0; i < p.N(); ++i)
        out << fmt_double(p.rho(i)) << "," << fmt_double(p.phi()[i]) << "\n";
    return out.str();
}

inline FlowProfile profile_from_csv(const std::string& text, double b0_hint = -1.0) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw ConfigError("profile CSV: missing metadata line");
    int m = 0, N = 0;
    double t = 0, a = 0, b = 0, L = 0;
    {
        std::istringstream meta(line.substr(2));
        std::string kv;
        while (std::getline(meta, kv, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("profile CSV: bad metadata " + kv);
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "m") m = std::stoi(val);
            else if (key == "t") t = std::stod(val);
            else if (key == "a") a = std::stod(val);
            else if (key == "b") b = std::stod(val);
            else if (key == "L") L = std::stod(val);
            else if (key == "N") N = std::stoi(val);
            else throw ConfigError("profile CSV: unknown metadata key " + key);
        }
    }
    if (!std::getline(in, line) || line != "rho,phi")
        throw ConfigError("profile CSV: missing rho,phi header");
    std::vector<double> phi;
    phi.reserve(N);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("profile CSV: bad row " + line);
        phi.push_back(std::stod(line.substr(comma + 1)));
    }
    if (static_cast<int>(phi.size()) != N)
        throw ConfigError("profile CSV: row count does not match N");
    return FlowProfile(m, L, N, std::move(phi), t, a, b, b0_hint > 0 ? b0_hint : b);
}

// --------------------------------------------------------------------------
// FlowConfig / experiment config JSON.

struct ExperimentConfig {
    FlowConfig flow;
    std::uint64_t seed = 1;
    double base_side = 1.0;
    int nB = 9;
    int nF = 24;
    int gh_n_rho = 129;
    int gh_n_theta = 33;
    std::string monitor_suite = "all";
    std::string out_dir = "out";
};

inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["m"] = c.flow.c0.m;
    j["h"] = c.flow.c0.h;
    j["e"] = c.flow.c0.e;
    j["L"] = c.flow.L;
    j["N"] = c.flow.N;
    j["dt_init"] = c.flow.dt_init;
    j["stop_fraction"] = c.flow.stop_fraction;
    j["dt_cap_factor"] = c.flow.dt_cap_factor;
    j["dt_growth"] = c.flow.dt_growth;
    j["newton_tol"] = c.flow.newton_tol;
    j["newton_max_iter"] = c.flow.newton_max_iter;
    j["snapshot_every"] = c.flow.snapshot_every;
    j["seed"] = c.seed;
    j["base_side"] = c.base_side;
    j["nB"] = c.nB;
    j["nF"] = c.nF;
    j["gh_n_rho"] = c.gh_n_rho;
    j["gh_n_theta"] = c.gh_n_theta;
    j["monitor_suite"] = c.monitor_suite;
    j["out_dir"] = c.out_dir;
    return j;
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "m") c.flow.c0.m = it.value().get<int>();
        else if (k == "h") c.flow.c0.h = it.value().get<double>();
        else if (k == "e") c.flow.c0.e = it.value().get<double>();
        else if (k == "L") c.flow.L = it.value().get<double>();
        else if (k == "N") c.flow.N = it.value().get<int>();
        else if (k == "dt_init") c.flow.dt_init = it.value().get<double>();
        else if (k == "stop_fraction") c.flow.stop_fraction = it.value().get<double>();
        else if (k == "dt_cap_factor") c.flow.dt_cap_factor = it.value().get<double>();
        else if (k == "dt_growth") c.flow.dt_growth = it.value().get<double>();
        else if (k == "newton_tol") c.flow.newton_tol = it.value().get<double>();
        else if (k == "newton_max_iter") c.flow.newton_max_iter = it.value().get<int>();
        else if (k == "snapshot_every") c.flow.snapshot_every = it.value().get<int>();
        else if (k == "seed") c.seed = it.value().get<std::uint64_t>();
        else if (k == "base_side") c.base_side = it.value().get<double>();
        else if (k == "nB") c.nB = it.value().get<int>();
        else if (k == "nF") c.nF = it.value().get<int>();
        else if (k == "gh_n_rho") c.gh_n_rho = it.value().get<int>();
        else if (k == "gh_n_theta") c.gh_n_theta = it.value().get<int>();
        else if (k == "monitor_suite") c.monitor_suite = it.value().get<std::string>();
        else if (k == "out_dir") c.out_dir = it.value().get<std::string>();
        else throw ConfigError("config: unknown field \"" + k + "\"");
    }
    return c;
}

inline ExperimentConfig config_from_file(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    return config_from_json(j);
}

// --------------------------------------------------------------------------
// Trajectory directory:
//   meta.json, trajectory.csv, profiles/profile_NNNNNN.csv

inline void save_trajectory(const FlowTrajectory& traj, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "profiles");

    json meta;
    meta["T_predicted"] = traj.T_predicted;
    meta["scenario"] = to_string(traj.scenario);
    meta["singularity_reached"] = traj.singularity_reached;
    meta["n_snapshots"] = traj.snapshots.size();
    ExperimentConfig ec;
    ec.flow = traj.config;
    meta["config"] = config_to_json(ec);
    atomic_write(dir / "meta.json", meta.dump(2) + "\n");

    std::ostringstream series;
    series << "t,a,b,sup_phi,sup_phiprime,fiber_diam\n";
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const auto& p = traj.snapshots[k];
        double sup_phi = 0, sup_dphi = 0;
        for (int i = 0; i < p.N(); ++i) {
            sup_phi = std::max(sup_phi, p.phi()[i]);
            sup_dphi = std::max(sup_dphi, p.phi_prime()[i]);
        }
        series << fmt_double(p.t()) << "," << fmt_double(p.a()) << "," << fmt_double(p.b())
               << "," << fmt_double(sup_phi) << "," << fmt_double(sup_dphi) << ","
               << fmt_double(fiber_diam_upper(p)) << "\n";
        char name[40];
        std::snprintf(name, sizeof name, "profile_%06zu.csv", k);
        atomic_write(dir / "profiles" / name, profile_to_csv(p));
    }
    atomic_write(dir / "trajectory.csv", series.str());
}

inline FlowTrajectory load_trajectory(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    json meta;
    try {
        meta = json::parse(read_file(dir / "meta.json"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("meta.json: " + std::string(e.what()));
    }
    FlowTrajectory traj;
    traj.T_predicted = meta.at("T_predicted").get<double>();
    traj.singularity_reached = meta.value("singularity_reached", false);
    const std::string sc = meta.at("scenario").get<std::string>();
    if (sc == "ContractExceptional") traj.scenario = ScenarioKind::ContractExceptional;
    else if (sc == "CollapseFiber") traj.scenario = ScenarioKind::CollapseFiber;
    else if (sc == "OtherBoundary") traj.scenario = ScenarioKind::OtherBoundary;
    else throw ConfigError("meta.json: unknown scenario " + sc);
    traj.config = config_from_json(meta.at("config")).flow;

    const std::size_t n = meta.at("n_snapshots").get<std::size_t>();
    double b0 = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        char name[40];
        std::snprintf(name, sizeof name, "profile_%06zu.csv", k);
        FlowProfile p = profile_from_csv(read_file(dir / "profiles" / name), b0);
        if (k == 0) b0 = p.b();
        traj.snapshots.push_back(std::move(p));
    }
    if (traj.snapshots.empty()) throw ConfigError("trajectory: no snapshots in " + dir.string());
    return traj;
}

// --------------------------------------------------------------------------
// Monitor reports.

inline json report_to_json(const MonitorReport& r) {
    json j;
    j["name"] = r.name;
    j["paper_tag"] = r.paper_tag;
    j["verdict"] = r.verdict();
    j["measured_constant"] = r.measured_constant;
    j["tolerance"] = r.tolerance;
    j["detail"] = r.detail;
    j["times"] = r.times;
    j["values"] = r.values;
    return j;
}

inline std::string summary_csv(const std::vector<MonitorReport>& reports) {
    std::ostringstream out;
    out << "monitor,paper_tag,C_meas,verdict\n";
    for (const auto& r : reports)
        out << r.name << "," << r.paper_tag << "," << fmt_double(r.measured_constant) << ","
            << r.verdict() << "\n";
    return out.str();
}

}  // namespace krf
