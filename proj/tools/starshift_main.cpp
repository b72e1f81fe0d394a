#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "starshift/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spectral shift / scattering quantities on star graphs"};
    std::string config_path;
    starshift::cli::RunOptions opt;
    app.add_option("-c,--config", config_path, "run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("-o,--output", opt.output_override,
                   "output directory (overrides the config)");
    app.add_option("--tolerance-scale", opt.tolerance_scale,
                   "multiply every check tolerance by this factor");
    app.add_option("--threads", opt.threads,
                   "worker threads (0 = hardware concurrency)");
    app.add_flag("-v,--verbose", opt.verbose, "print per-task results");
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = starshift::cli::parse_config(config_path);
        return starshift::cli::run(cfg, opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
