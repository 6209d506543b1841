// mqcavity: run one experiment from a JSON config and write CSV tables.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mqcavity/io.hpp"
#include "mqcavity/run.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Multimode cavity qubit simulator"};
    app.set_version_flag("--version", mqc::toolVersion());

    std::string tag, config_path, out_prefix, losses;
    int threads = 0;
    app.add_option("experiment", tag, "Experiment tag")->required()->check(CLI::IsMember(mqc::kExperimentTags));
    app.add_option("--config,-c", config_path, "JSON config file")->required();
    app.add_option("--out,-o", out_prefix, "Output path prefix (overrides config)");
    app.add_option("--losses", losses, "Include dissipation")->check(CLI::IsMember({"on", "off"}));
    app.add_option("--threads,-j", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : mqc::kExitConfig;
    }

    mqc::RunConfig cfg;
    try {
        cfg = mqc::loadConfig(config_path);
        if (cfg.experiment != tag)
            throw mqc::ConfigError("config is for experiment \"" + cfg.experiment + "\", not \"" + tag + "\"");
        if (!out_prefix.empty()) cfg.output = out_prefix;
        if (!losses.empty()) cfg.losses = losses == "on";
        if (threads > 0) cfg.threads = threads;
        cfg.resolve();
    } catch (const mqc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return mqc::kExitConfig;
    }
    return mqc::runExperiment(cfg, std::cout, std::cerr);
}
