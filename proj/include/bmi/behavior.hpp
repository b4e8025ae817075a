#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bmi/core.hpp"

namespace bmi {

// Named time-of-day interval, half-open [start_hour, end_hour) in [0,24].
struct ObservationWindow {
    std::string name;
    double start_hour = 0.0;
    double end_hour = 24.0;

    bool contains(double hour) const { return hour >= start_hour && hour < end_hour; }
    bool operator==(const ObservationWindow&) const = default;
};

// The 7 default windows partitioning the day.
std::vector<ObservationWindow> default_windows();

// A valid window set partitions [0,24): sorted, contiguous, no overlap, no gap.
bool windows_valid(const std::vector<ObservationWindow>& windows);

// Index of the window containing the hour; windows must be valid.
std::size_t window_of_hour(const std::vector<ObservationWindow>& windows, double hour);

// Per-household, per-day appliance usage features.
struct BehaviorVector {
    std::string pid;
    std::int64_t day = 0;  // day index since epoch (UTC)
    // counts[appliance][window index] = number of events starting there
    std::map<Appliance, std::vector<int>> counts;
    // fractional start hours of each event, per appliance
    std::map<Appliance, std::vector<double>> event_hours;

    int count(Appliance a, std::size_t window) const {
        auto it = counts.find(a);
        return it == counts.end() ? 0 : it->second[window];
    }
};

struct BaselineCell {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

// Circular statistics of event start hours (period 24 h).
struct HourStats {
    std::size_t events = 0;
    double circular_mean_hour = 0.0;  // undefined when events == 0
    double circular_std_hours = 0.0;
};

// Routine reference learned over the baseline period.
struct RoutineBaseline {
    std::string pid;
    std::vector<ObservationWindow> windows;
    // cells[appliance][window index]; covers the full appliance/window grid
    std::map<Appliance, std::vector<BaselineCell>> cells;
    std::map<Appliance, HourStats> hour_stats;
    int learning_days = 0;
    std::int64_t first_day = 0;
    std::int64_t last_day = 0;

    const BaselineCell& cell(Appliance a, std::size_t window) const {
        return cells.at(a)[window];
    }
};

// Buckets events into per-(pid, day) vectors by event START time; an event
// spanning midnight belongs to its start date. Throws InvalidWindowSet.
std::vector<BehaviorVector> assign_detections(const std::vector<DetectionEvent>& events,
                                              const std::vector<ObservationWindow>& windows);

// Fills day gaps: returns one vector per day in [first_day, last_day] for
// the pid, inserting all-zero vectors for days without events.
std::vector<BehaviorVector> densify_days(const std::vector<BehaviorVector>& vectors,
                                         std::int64_t first_day, std::int64_t last_day,
                                         const std::string& pid,
                                         const std::vector<ObservationWindow>& windows);

// Per-cell mean/std over daily counts plus circular hour statistics.
// Requires at least learning_days distinct days, else InsufficientHistory.
RoutineBaseline learn_baseline(const std::vector<BehaviorVector>& vectors,
                               const std::vector<ObservationWindow>& windows,
                               int learning_days);

// cell (a,h) = fraction of the `days` horizon on which appliance a had at
// least one event starting in hour h. Rows: kAllAppliances order, 24 columns.
std::vector<std::array<double, 24>> device_hour_correlation(
    const std::vector<DetectionEvent>& events, int days);

}  // namespace bmi
