#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "buck/harness.hpp"
#include "buck/neural.hpp"
#include "buck/plant.hpp"
#include "buck/smc.hpp"

namespace buck {

struct AdaptiveConfig {
    double gamma = 1e3;
    double projection_factor = 10.0;
    bool cold_start = false;
};

struct DatasetConfig {
    double sample_interval_s = 1e-5;
    double exclude_initial_s = 0.2e-3;
    double duration_s = 0.02;
    double step_time_s = 0.01;
};

struct CompareConfig {
    double duration_s = 0.06;
    double event_time_s = 0.03;
};

struct PathConfig {
    std::string model;
    std::string dataset;
    std::string out;
    std::string history;
    std::string svg_dir;
};

/// Everything a CLI command needs, parsed from one JSON document.
///
/// Sections: converter, smc, adaptive, scenario, train, dataset, compare, paths, seed.
/// Unknown keys are rejected. Command-line flags override values read here.
struct RunConfig {
    ConverterParams converter;
    SmcConfig smc;
    AdaptiveConfig adaptive;
    Scenario scenario;  // scenario.params mirrors converter
    TrainConfig train;
    Activation activation = Activation::relu;
    std::vector<std::size_t> layer_sizes{2, 3, 3, 1};
    DatasetConfig dataset;
    CompareConfig compare;
    PathConfig paths;
    std::uint64_t seed = 42;

    /// Propagates the shared seed and converter into the dependent sections.
    void sync();
    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace buck
