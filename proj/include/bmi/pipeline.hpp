#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bmi/anomaly.hpp"
#include "bmi/behavior.hpp"
#include "bmi/cnn.hpp"
#include "bmi/config.hpp"
#include "bmi/core.hpp"
#include "bmi/persist.hpp"
#include "bmi/preprocess.hpp"

namespace bmi {

// The three operating modes plus the simulator front door. Every mode is a
// pure function of (config, files under paths.data_dir) and reruns to
// byte-identical outputs; failures are tagged with the stage that raised
// them ("stage <name>: ...").

struct SimulateOutcome {
    std::string pid;
    int days = 0;
    std::size_t readings = 0;
    std::size_t annotations = 0;
};

// Synthesizes the configured household and writes readings/<pid>.csv and
// annotations/<pid>.csv under the data directory.
SimulateOutcome mode_simulate(const RunConfig& cfg);

struct DeviceTrainingOutcome {
    std::vector<ApplianceClass> classes;
    std::size_t train_segments = 0;
    std::size_t validation_segments = 0;
    std::size_t test_segments = 0;
    TrainHistory history;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
};

// Readings + annotations for every metered household -> signatures ->
// composites -> dataset -> trained network. Writes checkpoint.bin and
// metrics.json (per-class precision/recall on the held-out test split).
DeviceTrainingOutcome mode_device_training(const RunConfig& cfg);

struct BaselineOutcome {
    std::string pid;
    std::int64_t first_day = 0;
    std::int64_t last_day = 0;
    std::size_t events = 0;
};

// Detects events over each household's stream and learns the routine
// baseline from the first learning_days days. Writes baselines/<pid>.json
// and vectors/<pid>.json.
std::vector<BaselineOutcome> mode_behavioural_training(const RunConfig& cfg);

struct PredictionOutcome {
    std::string pid;
    std::vector<BehaviorVector> vectors;       // post-baseline days, densified
    std::vector<TrafficLightStatus> statuses;  // one per post-baseline day, chronological
    std::vector<AlertRecord> alerts;           // transitions only
};

// Scores every day after the baseline period for each household with a
// baseline. Writes statuses/<pid>.json and alerts/<pid>.json and extends
// vectors/<pid>.json past the baseline.
std::vector<PredictionOutcome> mode_prediction(const RunConfig& cfg);

// Single-household core of prediction mode: detect -> assign -> zscore ->
// traffic light, one status per day strictly after baseline.last_day.
PredictionOutcome predict_days(const NetworkModel& model, const RoutineBaseline& baseline,
                               const ValidatedStream& stream, const RunConfig& cfg);

// Behavior vectors -> rule sets before/after the baseline boundary, pooled
// over the given households; either side may come out empty.
struct RegionRules {
    std::vector<AssociationRule> before;
    std::vector<AssociationRule> after;
};
RegionRules mine_region_rules(const DataLayout& layout, const std::vector<std::string>& pids,
                              const RunConfig& cfg);

// regions.csv pids belonging to region_id (file order).
std::vector<std::string> region_members(const DataLayout& layout, const std::string& region_id);

// Latest persisted status per pid; pids lacking one are skipped.
std::vector<TrafficLightStatus> latest_statuses(const DataLayout& layout,
                                                const std::vector<std::string>& pids);

}  // namespace bmi
