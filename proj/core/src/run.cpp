#include "mqcavity/run.hpp"

#include <cstdio>
#include <filesystem>
#include <ostream>

#include <nlohmann/json.hpp>

#include "mqcavity/io.hpp"

namespace mqc {

ExperimentResult execute(const RunConfig& cfg, RunDiagnostics* diag)
{
    const auto& p = cfg.system;
    const std::string& e = cfg.experiment;
    if (e == "spectrum") return filterSpectrum(p, cfg.g_f_sweep);
    if (e == "qubit-spectrum") return qubitFilterSpectrum(p, cfg.nu_sweep, cfg.qubit_mode);
    if (e == "iswap") return runISwap(p, cfg.iswap, diag);
    if (e == "hold-sweep") return holdSweep(p, cfg.hold, diag);
    if (e == "ramp-sweep") return rampSweep(p, cfg.ramp, diag);
    if (e == "contour") return loadingContour(p, cfg.ramp, diag);
    if (e == "probe") return probeScan(p, cfg.probe, diag);
    if (e == "ramsey") return ramseyRun(p, cfg.ramsey, diag);
    if (e == "stark") return starkSweep(p, cfg.stark, diag);
    if (e == "evolve") return evolveRun(p, cfg.evolve, diag);
    throw ConfigError("unknown experiment \"" + e + "\"");
}

std::string summaryLine(const ExperimentResult& r)
{
    std::string s = r.kind + ":";
    for (const auto& [k, v] : r.summary) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        s += " " + k + "=" + buf;
    }
    return s;
}

std::string outputPath(const RunConfig& cfg, const std::string& table)
{
    return cfg.output + table + ".csv";
}

namespace {

std::string metaJson(const RunConfig& cfg, const ExperimentResult& r, const Table& t)
{
    using json = nlohmann::json;
    json m;
    m["tool"] = "mqcavity";
    m["version"] = toolVersion();
    m["config"] = json::parse(configToJson(cfg));
    m["table"] = t.name;
    json s = json::object();
    for (const auto& [k, v] : r.summary) s[k] = v;
    m["summary"] = s;
    if (cfg.experiment == "contour")
        m["notes"] = json::array({"axes are ramp time (ns) x evolution time (ns); n_q1 is sampled on that grid"});
    return m.dump(2) + "\n";
}

void ensureParent(const std::string& prefix)
{
    namespace fs = std::filesystem;
    fs::path dir = fs::path(prefix + "x").parent_path();
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

} // namespace

int runExperiment(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        ExperimentResult r = execute(cfg);
        ensureParent(cfg.output);
        for (const auto& t : r.tables) writeCsv(t, outputPath(cfg, t.name), metaJson(cfg, r, t));
        out << summaryLine(r) << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }
}

} // namespace mqc
