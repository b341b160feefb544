#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "intrinsic/suites.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> jobs;
    std::optional<double> tolerance_scale;
    bool csv = false;
};

intrinsic::SuiteConfig resolve(const Overrides& o) {
    intrinsic::SuiteConfig cfg =
        o.config_path.empty() ? intrinsic::SuiteConfig{} : intrinsic::load_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.tolerance_scale) {
        if (!(*o.tolerance_scale > 0.0)) throw intrinsic::ConfigError("--tolerance-scale must be positive");
        cfg.tolerance_scale = *o.tolerance_scale;
    }
    if (o.csv) cfg.write_csv = true;
    return cfg;
}

int verify(const std::string& target, const Overrides& o) {
    intrinsic::SuiteConfig cfg = resolve(o);
    std::vector<std::string> suites;
    if (target == "all") {
        suites = intrinsic::suite_names();
    } else {
        const auto& names = intrinsic::suite_names();
        if (std::find(names.begin(), names.end(), target) == names.end()) {
            std::cerr << "unknown suite '" << target << "' (see list-suites)\n";
            return 2;
        }
        suites = {target};
    }
    std::filesystem::create_directories(cfg.out_dir);
    int code = 0;
    for (const std::string& name : suites) {
        intrinsic::Report rep = intrinsic::run_suite(name, cfg);
        rep.print_table(std::cout);
        std::cout << "\n";
        rep.write_json((std::filesystem::path(cfg.out_dir) / (name + ".json")).string());
        code = std::max(code, rep.exit_code());
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical verification of intrinsic-dimensional functional inequalities"};
    app.require_subcommand(1);

    Overrides o;
    std::string target;
    auto* v = app.add_subcommand("verify", "run a suite (or all) and write <out-dir>/<suite>.json");
    v->add_option("suite", target, "suite name or 'all'")->required();
    v->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    v->add_option("--seed", o.seed, "master seed");
    v->add_option("--out-dir", o.out_dir, "directory for JSON and CSV output");
    v->add_option("--jobs", o.jobs, "worker threads (0 = hardware concurrency)");
    v->add_option("--tolerance-scale", o.tolerance_scale, "multiplies every tolerance");
    v->add_flag("--csv", o.csv, "also write CSV dumps (kernels, envelopes, paths)");

    auto* ls = app.add_subcommand("list-suites", "print the available suites");
    auto* dd = app.add_subcommand("dump-defaults", "print the default config as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ls) {
            for (const std::string& s : intrinsic::suite_names())
                std::cout << s << "  " << intrinsic::suite_description(s) << "\n";
            return 0;
        }
        if (*dd) {
            std::cout << intrinsic::default_config_json().dump(2) << "\n";
            return 0;
        }
        return verify(target, o);
    } catch (const intrinsic::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
