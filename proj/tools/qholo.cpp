#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <utility>
#include <string>

#include "qholo/runner.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> n;
    std::optional<int> threads;
    std::optional<double> tolerance_scale;
};

void add_common(CLI::App* app, CliOptions& o) {
    app->add_option("--config", o.config_path, "experiment config file (key = value lines)");
    app->add_option("--preset", o.preset, "named preset: fig1 or recon2d");
    app->add_option("--out", o.out_dir, "output directory (default: $QHOLO_OUT or ./qholo_out)");
    app->add_option("--seed", o.seed, "Monte Carlo seed override");
    app->add_option("--n", o.n, "Monte Carlo event count override");
    app->add_option("--threads", o.threads, "worker thread cap (results are independent of it)");
    app->add_option("--tolerance-scale", o.tolerance_scale, "scales oracle-check tolerances");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale simulator of bucket-detected coincidence holography\n"
                 "Without --config/--preset the fig1 preset is used; run any\n"
                 "subcommand and read manifest.json for the full default config.\n"
                 "Config keys are documented in README.md."};
    app.require_subcommand(1);

    const std::pair<const char*, const char*> subs[] = {
        {"simulate", "bucket-marginal hologram of the configured scene"},
        {"decompose", "direct / scattered / interference split of the hologram"},
        {"reconstruct", "back-propagate the hologram to candidate depth planes"},
        {"montecarlo", "sample photoevent pairs and histogram the bucket marginal"},
        {"oracle-check", "dense-quadrature identity battery (exit 3 on failure)"}};
    CliOptions opt;
    for (const auto& [name, blurb] : subs) {
        auto* sub = app.add_subcommand(name, blurb);
        add_common(sub, opt);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        qholo::ExperimentConfig cfg;
        if (!opt.config_path.empty() && !opt.preset.empty()) {
            std::fprintf(stderr, "error: --config and --preset are mutually exclusive\n");
            return qholo::kExitValidation;
        }
        if (!opt.config_path.empty())
            cfg = qholo::load_config(opt.config_path);
        else if (!opt.preset.empty())
            cfg = qholo::preset_config(opt.preset);
        else
            cfg = qholo::preset_config("fig1");

        if (opt.seed) cfg.mc_seed = *opt.seed;
        if (opt.n) cfg.mc_n = *opt.n;
        if (opt.threads) cfg.threads = std::max(1, *opt.threads);
        if (opt.tolerance_scale) cfg.tolerance_scale = *opt.tolerance_scale;

        std::string out = opt.out_dir;
        if (out.empty() && !cfg.out_dir.empty()) out = cfg.out_dir;
        if (out.empty()) {
            if (const char* env = std::getenv("QHOLO_OUT")) out = env;
        }
        if (out.empty()) out = "qholo_out";

        const qholo::RunOutcome res = qholo::run_subcommand(sub, cfg, out);
        if (res.exit_code == qholo::kExitOk)
            std::fprintf(stdout, "%s: %s -> %s\n", sub.c_str(), res.message.c_str(),
                         out.c_str());
        else
            std::fprintf(stderr, "%s failed (%d): %s\n", sub.c_str(), res.exit_code,
                         res.message.c_str());
        return res.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return qholo::kExitValidation;
    }
}
