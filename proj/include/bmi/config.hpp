#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bmi/behavior.hpp"
#include "bmi/cnn.hpp"
#include "bmi/indicators.hpp"
#include "bmi/simulator.hpp"

namespace bmi {

// Default appliance parameter table. Powers and durations are operator
// configuration, not constants of the method, so they live here and in the
// config file rather than inside the simulator.
std::vector<ApplianceModel> default_appliances();
std::vector<std::pair<Appliance, std::vector<double>>> default_tendencies();

// Every tunable of the pipeline, loaded from a flat key=value file.
// Unknown keys are rejected; CLI --set overrides reuse the same key names.
struct RunConfig {
    // stream handling
    std::int64_t cadence_s = 10;
    std::int64_t gap_tolerance_s = 30;
    std::int64_t highpass_w = 300;
    int segment_len = 60;
    int stride = 30;
    std::int64_t scale_w = 3000;
    int pad_s = 0;
    int max_combo = 3;
    int composite_rounds = 44;    // exemplar rotations when synthesizing combos
    int background_per_day = 8;   // idle slices harvested per simulated day

    std::uint64_t seed = 42;

    // network and training
    int cnn_kernels = 16;
    int cnn_kernel_len = 5;
    int cnn_pool = 2;
    int cnn_hidden1 = 64;
    int cnn_hidden2 = 32;
    Hyperparameters hp;  // learning-rate/momentum/decay schedule values
    // Floor of 0.7: genuine activations classify near certainty, while the
    // close calls are windows catching an unusual overlap of cycles, and a
    // wrong guess there invents appliances that were never on.
    double confidence_floor = 0.7;
    std::array<double, 3> split_ratios{0.7, 0.15, 0.15};
    bool parallel_kernels = false;

    // behavior and anomaly
    std::vector<ObservationWindow> windows = default_windows();
    int learning_days = 14;
    double z_threshold = 3.0;
    int amber_min_outliers = 1;
    int red_days = 7;
    double min_support = 0.3;
    double min_confidence = 0.6;
    double drift_threshold = 0.3;

    EquivalisationScale weights;

    // simulation
    std::string sim_pid = "home-001";
    int sim_days = 30;
    std::int64_t sim_base_day = 18519;
    Scenario sim_scenario;
    std::int64_t sim_noise_floor_w = 80;
    std::vector<ApplianceModel> sim_appliances = default_appliances();
    std::vector<std::pair<Appliance, std::vector<double>>> sim_tendencies = default_tendencies();

    // service
    std::string data_dir = "data";
    std::string host = "127.0.0.1";
    int port = 8080;

    HouseholdProfile profile() const;  // assembled from the sim_* fields
};

// Applies "key = value" lines from the stream onto cfg. Blank lines and
// #-comments are skipped. Throws ConfigError on unknown keys or bad values.
void apply_config(std::istream& source, RunConfig& cfg);

// Single override, same grammar as one file line.
void apply_override(const std::string& key, const std::string& value, RunConfig& cfg);

// Cross-field range checks; throws ConfigError.
void validate_config(const RunConfig& cfg);

// Reads, applies onto defaults, validates.
RunConfig load_config_file(const std::string& path);

// The documented key set with current values, one "key = value" per line.
// load(dump(cfg)) reproduces cfg; used by `report` and for sample configs.
std::string dump_config(const RunConfig& cfg);

}  // namespace bmi
