// hklab: run heat-kernel comparability experiments from declarative configs.
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric error.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "hklab/hklab.hpp"

namespace fs = std::filesystem;

namespace {

int cache_ls(const std::string& dir) {
    if (!fs::exists(dir)) {
        std::printf("cache %s: empty\n", dir.c_str());
        return 0;
    }
    std::uintmax_t total = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::printf("%12ju  %s\n", static_cast<std::uintmax_t>(e.file_size()),
                    e.path().filename().string().c_str());
        total += e.file_size();
    }
    std::printf("total %ju bytes\n", total);
    return 0;
}

int cache_clear(const std::string& dir) {
    if (!fs::exists(dir)) return 0;
    std::uintmax_t n = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".bin") {
            fs::remove(e.path());
            ++n;
        }
    std::printf("removed %ju cached grids\n", n);
    return 0;
}

int run_with(const std::string& config_path,
             std::optional<hklab::ExperimentKind> forced_kind) {
    auto cfg = hklab::load_config(config_path);
    if (forced_kind) cfg.experiment = *forced_kind;
    return hklab::run_experiment(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat-kernel envelope laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the experiment declared in a config file");
    run->add_option("config", config_path, "config file")->required();

    auto* audit = app.add_subcommand("audit-scaling", "index audits for the configured model");
    audit->add_option("config", config_path, "config file")->required();

    auto* ktable = app.add_subcommand("killing-table", "emit the C(p) table for the config");
    ktable->add_option("config", config_path, "config file")->required();

    std::string cache_dir = "hklab-cache";
    auto* cache = app.add_subcommand("cache", "inspect or clear the grid cache");
    cache->require_subcommand(1);
    auto* ls = cache->add_subcommand("ls", "list cached grids");
    ls->add_option("--dir", cache_dir, "cache directory");
    auto* clear = cache->add_subcommand("clear", "remove cached grids");
    clear->add_option("--dir", cache_dir, "cache directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_with(config_path, std::nullopt);
        if (audit->parsed()) return run_with(config_path, hklab::ExperimentKind::ScalingAudit);
        if (ktable->parsed())
            return run_with(config_path, hklab::ExperimentKind::KillingConstantTable);
        if (ls->parsed()) return cache_ls(cache_dir);
        if (clear->parsed()) return cache_clear(cache_dir);
    } catch (const hklab::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const hklab::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
