// zxc <subcommand> --config <path> [--seed N] [--workers K] [--out DIR]
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "zxc/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Self-intersection limit laws for Z-periodic Lorentz gases"};
    app.require_subcommand(1);
    std::string config;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
    for (const std::string& name : zxc::subcommands()) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", config, "run config file")->required();
        sc->add_option("--seed", seed, "master seed (overrides the config)");
        sc->add_option("--workers", workers, "worker threads (default: ZXC_WORKERS or all cores)");
        sc->add_option("--out", out, "output directory (overrides output_dir)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    std::string sub = app.get_subcommands().front()->get_name();
    auto* sc = app.get_subcommand(sub);

    zxc::RunConfig cfg;
    try {
        cfg = zxc::load_config(config);
    } catch (const zxc::Error& e) {
        std::cerr << nlohmann::json{{"kind", e.kind()}, {"message", e.what()}, {"exit_status", 2}}.dump() << "\n";
        return 2;
    }
    zxc::RunOptions opt;
    if (sc->count("--seed")) opt.seed = seed;
    opt.workers = workers;
    if (sc->count("--out")) opt.out = out;
    int status = zxc::run(sub, cfg, opt);
    std::cout << sub << ": " << (status == 0 ? "pass" : status == 1 ? "fail" : "invalid") << "\n";
    return status;
}
