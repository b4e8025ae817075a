#include "bmi/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "bmi/errors.hpp"
#include "bmi/time_util.hpp"

namespace bmi {

std::vector<ObservationWindow> default_windows() {
    return {
        {"night", 0.0, 6.0},         {"early_morning", 6.0, 9.0}, {"late_morning", 9.0, 12.0},
        {"midday", 12.0, 14.0},      {"afternoon", 14.0, 17.0},   {"evening", 17.0, 20.0},
        {"late_evening", 20.0, 24.0},
    };
}

bool windows_valid(const std::vector<ObservationWindow>& windows) {
    if (windows.empty()) return false;
    if (windows.front().start_hour != 0.0) return false;
    if (windows.back().end_hour != 24.0) return false;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!(windows[i].start_hour < windows[i].end_hour)) return false;
        if (i > 0 && windows[i].start_hour != windows[i - 1].end_hour) return false;
    }
    return true;
}

std::size_t window_of_hour(const std::vector<ObservationWindow>& windows, double hour) {
    for (std::size_t i = 0; i < windows.size(); ++i)
        if (windows[i].contains(hour)) return i;
    // hour == 24.0 can only come from a rounding artifact; clamp to last.
    return windows.size() - 1;
}

static BehaviorVector zero_vector(const std::string& pid, std::int64_t day,
                                  std::size_t n_windows) {
    BehaviorVector v;
    v.pid = pid;
    v.day = day;
    for (Appliance a : kAllAppliances) {
        v.counts[a].assign(n_windows, 0);
        v.event_hours[a] = {};
    }
    return v;
}

std::vector<BehaviorVector> assign_detections(const std::vector<DetectionEvent>& events,
                                              const std::vector<ObservationWindow>& windows) {
    if (!windows_valid(windows))
        throw InvalidWindowSet("observation windows must partition [0,24) with no gap or overlap");
    std::map<std::pair<std::string, std::int64_t>, BehaviorVector> by_key;
    for (const DetectionEvent& e : events) {
        std::int64_t day = day_index(e.start_ts);
        auto key = std::make_pair(e.pid, day);
        auto it = by_key.find(key);
        if (it == by_key.end())
            it = by_key.emplace(key, zero_vector(e.pid, day, windows.size())).first;
        double hour = hour_of_day(e.start_ts);
        std::size_t w = window_of_hour(windows, hour);
        for (Appliance a : e.appliances) {
            it->second.counts[a][w] += 1;
            it->second.event_hours[a].push_back(hour);
        }
    }
    std::vector<BehaviorVector> out;
    out.reserve(by_key.size());
    for (auto& [key, v] : by_key) out.push_back(std::move(v));
    return out;
}

std::vector<BehaviorVector> densify_days(const std::vector<BehaviorVector>& vectors,
                                         std::int64_t first_day, std::int64_t last_day,
                                         const std::string& pid,
                                         const std::vector<ObservationWindow>& windows) {
    std::map<std::int64_t, const BehaviorVector*> by_day;
    for (const BehaviorVector& v : vectors)
        if (v.pid == pid) by_day[v.day] = &v;
    std::vector<BehaviorVector> out;
    for (std::int64_t d = first_day; d <= last_day; ++d) {
        auto it = by_day.find(d);
        if (it != by_day.end())
            out.push_back(*it->second);
        else
            out.push_back(zero_vector(pid, d, windows.size()));
    }
    return out;
}

static HourStats circular_hour_stats(const std::vector<double>& hours) {
    HourStats s;
    s.events = hours.size();
    if (hours.empty()) return s;
    double sx = 0.0, sy = 0.0;
    const double k = 2.0 * std::numbers::pi / 24.0;
    for (double h : hours) {
        sx += std::cos(h * k);
        sy += std::sin(h * k);
    }
    double n = static_cast<double>(hours.size());
    double mean_angle = std::atan2(sy / n, sx / n);
    double mean_hour = mean_angle / k;
    if (mean_hour < 0.0) mean_hour += 24.0;
    s.circular_mean_hour = mean_hour;
    double r = std::sqrt(sx * sx + sy * sy) / n;
    r = std::min(1.0, std::max(0.0, r));
    // circular std in hours; r == 0 gives the flat-distribution ceiling
    double cstd = (r > 0.0) ? std::sqrt(-2.0 * std::log(r)) : std::sqrt(2.0 * std::log(1e12));
    s.circular_std_hours = cstd / k;
    return s;
}

RoutineBaseline learn_baseline(const std::vector<BehaviorVector>& vectors,
                               const std::vector<ObservationWindow>& windows,
                               int learning_days) {
    if (!windows_valid(windows))
        throw InvalidWindowSet("observation windows must partition [0,24) with no gap or overlap");
    std::set<std::int64_t> days;
    std::string pid;
    for (const BehaviorVector& v : vectors) {
        if (pid.empty()) pid = v.pid;
        else if (v.pid != pid)
            throw MixedMeter("behavior vectors mix households " + pid + " and " + v.pid);
        days.insert(v.day);
    }
    if (static_cast<int>(days.size()) < learning_days)
        throw InsufficientHistory("household " + pid + " has " + std::to_string(days.size()) +
                                  " distinct days, need " + std::to_string(learning_days));

    RoutineBaseline b;
    b.pid = pid;
    b.windows = windows;
    b.learning_days = static_cast<int>(days.size());
    b.first_day = *days.begin();
    b.last_day = *days.rbegin();

    const double n = static_cast<double>(days.size());
    for (Appliance a : kAllAppliances) {
        std::vector<BaselineCell> cells(windows.size());
        for (std::size_t w = 0; w < windows.size(); ++w) {
            double sum = 0.0, sumsq = 0.0;
            for (const BehaviorVector& v : vectors) {
                double c = static_cast<double>(v.count(a, w));
                sum += c;
                sumsq += c * c;
            }
            double mean = sum / n;
            double var = sumsq / n - mean * mean;
            cells[w].mean = mean;
            cells[w].stddev = std::sqrt(std::max(0.0, var));
        }
        b.cells[a] = std::move(cells);
        std::vector<double> hours;
        for (const BehaviorVector& v : vectors) {
            auto it = v.event_hours.find(a);
            if (it != v.event_hours.end())
                hours.insert(hours.end(), it->second.begin(), it->second.end());
        }
        b.hour_stats[a] = circular_hour_stats(hours);
    }
    return b;
}

std::vector<std::array<double, 24>> device_hour_correlation(
    const std::vector<DetectionEvent>& events, int days) {
    std::vector<std::array<double, 24>> grid(kAllAppliances.size());
    for (auto& row : grid) row.fill(0.0);
    if (days <= 0) return grid;
    // distinct (day, hour) pairs per appliance
    std::map<Appliance, std::set<std::pair<std::int64_t, int>>> seen;
    for (const DetectionEvent& e : events) {
        std::int64_t day = day_index(e.start_ts);
        int hour = static_cast<int>(hour_of_day(e.start_ts));
        for (Appliance a : e.appliances) seen[a].insert({day, hour});
    }
    for (std::size_t ai = 0; ai < kAllAppliances.size(); ++ai) {
        auto it = seen.find(kAllAppliances[ai]);
        if (it == seen.end()) continue;
        std::array<int, 24> day_counts{};
        for (const auto& [day, hour] : it->second) day_counts[hour] += 1;
        for (int h = 0; h < 24; ++h)
            grid[ai][h] = std::min(1.0, static_cast<double>(day_counts[h]) / days);
    }
    return grid;
}

}  // namespace bmi
