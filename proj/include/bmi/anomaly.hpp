#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "bmi/behavior.hpp"
#include "bmi/core.hpp"

namespace bmi {

// One scored (appliance, window) cell of a day. A degenerate baseline cell
// (std 0) scores z = +infinity when the observed count deviates at all.
struct AnomalyScore {
    std::string pid;
    std::int64_t day = 0;
    Appliance appliance = Appliance::Kettle;
    std::size_t window = 0;
    int observed = 0;
    double z = 0.0;
    bool is_outlier = false;
};

enum class Status : std::uint8_t { Green = 0, Amber = 1, Red = 2 };

std::string_view status_name(Status s);

struct TrafficLightStatus {
    std::string pid;
    std::int64_t day = 0;
    Status status = Status::Green;
    int consecutive_anomalous_days = 0;
    std::vector<AnomalyScore> reasons;  // today's outlier cells
};

struct AssociationRule {
    std::vector<std::string> antecedent;  // sorted, non-empty
    std::vector<std::string> consequent;  // sorted, non-empty, disjoint
    double support = 0.0;                 // of antecedent ∪ consequent
    double confidence = 0.0;
    double lift = 0.0;
};

struct RuleDrift {
    std::vector<std::string> antecedent;
    std::vector<std::string> consequent;
    double support_before = 0.0;
    double support_after = 0.0;
};

struct RegionSummary {
    std::string region_id;
    std::size_t households = 0;
    std::array<std::size_t, 3> histogram{0, 0, 0};  // green, amber, red
    std::vector<RuleDrift> drifted_rules;
};

// Scores every (appliance, window) cell of the day against the baseline.
// Cells come out in appliance-then-window order. Throws BaselineMissing
// when the baseline belongs to another household or lacks the grid.
std::vector<AnomalyScore> zscore_day(const BehaviorVector& vector,
                                     const RoutineBaseline& baseline, double z_threshold = 3.0);

// Advances the status machine by one day. A quiet day resets to Green;
// anomalous days escalate Amber, then Red once the streak reaches red_days.
TrafficLightStatus update_traffic_light(const TrafficLightStatus& prev, const std::string& pid,
                                        std::int64_t day, const std::vector<AnomalyScore>& today,
                                        int amber_min_outliers = 1, int red_days = 7);

// One transaction per behavior vector; item "Appliance@window" present iff
// the cell count is positive. Empty transactions are retained.
std::vector<std::set<std::string>> transactions_from_vectors(
    const std::vector<BehaviorVector>& vectors, const std::vector<ObservationWindow>& windows);

// Levelwise Apriori: every frequent itemset (support >= min_support), then
// every split A -> F\A with confidence >= min_confidence. Sorted by
// (support desc, confidence desc, antecedent/consequent lexicographic).
std::vector<AssociationRule> mine_rules(const std::vector<std::set<std::string>>& transactions,
                                        double min_support, double min_confidence);

// Status histogram plus rules whose support moved by at least
// drift_threshold between the two rule sets. Throws EmptyRegion.
RegionSummary region_aggregate(const std::string& region_id,
                               const std::vector<TrafficLightStatus>& statuses,
                               const std::vector<AssociationRule>& rules_before,
                               const std::vector<AssociationRule>& rules_after,
                               double drift_threshold);

}  // namespace bmi
