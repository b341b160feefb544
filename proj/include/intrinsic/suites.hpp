#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "intrinsic/report.hpp"

namespace intrinsic {

struct SpaceSpec {
    int dim = 3;
    double curvature = -1.0;
};

/// Radial test function on a space form, centered at the origin and evaluated at a
/// point `distance` away from it.
struct RadialCase {
    std::string profile = "bump";  // bump | gaussian | constant
    double amplitude = 2.0;
    double rate = 1.5;
    double distance = 0.0;
};

struct SuiteConfig {
    double T = 0.5;
    double h = 1e-3;
    int paths = 100000;
    int quadrature_points = 40;
    std::uint64_t seed = 1;
    double tolerance_scale = 1.0;
    int cases = -1;              // size of each random battery; −1 keeps the suite default
    bool empty_battery = false;  // run no checks at all
    std::vector<SpaceSpec> spaces;   // overrides the default curved spaces when non-empty
    std::vector<RadialCase> radial;  // overrides the default radial battery when non-empty

    // Run environment; not part of the numeric identity of a run.
    unsigned jobs = 0;
    std::string out_dir = ".";
    bool write_csv = false;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a config object; unknown keys and wrong types raise ConfigError.
SuiteConfig parse_config(const nlohmann::json& j);
SuiteConfig load_config(const std::string& path);
/// Numeric fields only (the run environment is left out so reports stay comparable).
nlohmann::ordered_json config_to_json(const SuiteConfig& cfg);
/// Every field with its default, as accepted by parse_config.
nlohmann::ordered_json default_config_json();

const std::vector<std::string>& suite_names();
std::string suite_description(const std::string& name);

/// Drops the v/m matrices shared between suites in this process.
void clear_caches();

/// Runs one named suite; module errors become fail records and the suite continues.
Report run_suite(const std::string& name, const SuiteConfig& cfg);

Report run_flat_local_lsi(const SuiteConfig& cfg);
Report run_spaceform_lsi(const SuiteConfig& cfg);
Report run_hamilton(const SuiteConfig& cfg);
Report run_nge_curved(const SuiteConfig& cfg);
Report run_part1(const SuiteConfig& cfg);
Report run_tensorization(const SuiteConfig& cfg);
Report run_riccati_core(const SuiteConfig& cfg);
Report run_stochastic_validation(const SuiteConfig& cfg);

}  // namespace intrinsic
