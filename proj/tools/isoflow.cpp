#include "isoflow/config.hpp"
#include "isoflow/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"isoflow: heat flow, exit time and spectra on isoparametric tubes"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
    std::string config_path;
    std::string out_dir;
    int refine = 0;
    run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
    run_cmd->add_option("--refine", refine, "Double all grid resolutions k times")->check(CLI::Range(0, 6));

    CLI11_PARSE(app, argc, argv);

    std::ifstream in(config_path, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    const auto parsed = isoflow::parse_config(text.str());
    if (!parsed.config) {
        for (const auto& e : parsed.errors)
            std::cerr << config_path << ":" << e.line << ": error: " << e.message << "\n";
        return 2;
    }
    isoflow::RunConfig config = isoflow::refined(*parsed.config, refine);
    if (!out_dir.empty()) config.output_dir = out_dir;
    return isoflow::run(config, std::cout);
}
