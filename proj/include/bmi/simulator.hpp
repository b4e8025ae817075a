#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bmi/behavior.hpp"
#include "bmi/core.hpp"

namespace bmi {

// One simulated appliance. Type1 runs a single plateau of power_w for
// duration_s; Type2 runs the `states` plateaus in order; Type3 is a bounded
// random walk in (0, power_w]; Type4 draws power_w constantly.
struct ApplianceModel {
    Appliance appliance = Appliance::Kettle;
    DeviceType device_type = DeviceType::Type1;
    std::int64_t power_w = 0;
    std::int64_t duration_s = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> states;  // Type2: (power_w, duration_s)
    double jitter = 0.0;                                        // relative, in [0, 0.2]
};

// Throws Error when the model violates its invariants.
void validate_model(const ApplianceModel& model, int cadence_s = 10);

struct HouseholdProfile {
    std::string pid;
    std::vector<ApplianceModel> appliances;
    std::vector<ObservationWindow> windows;
    // expected daily activation count per (appliance, window index)
    std::map<Appliance, std::vector<double>> usage_tendencies;
    std::int64_t noise_floor_w = 80;  // always-on Type4 draw
    std::uint64_t seed = 0;

    double tendency(Appliance a, std::size_t window) const {
        auto it = usage_tendencies.find(a);
        if (it == usage_tendencies.end() || window >= it->second.size()) return 0.0;
        return it->second[window];
    }
};

enum class ScenarioKind {
    Normal,
    NightUsage,             // extra kettle activations in 00:00-05:00
    ConsumptionDip,         // removes a magnitude fraction of oven/washing-machine runs
    SelfDisconnect,         // everything reads 0 from onset
    ApplianceSubstitution,  // oven runs become microwave runs
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::Normal;
    int onset_day = 0;       // relative to the start of the simulated horizon
    double magnitude = 0.0;  // removal fraction / night activation count
};

struct ScheduledActivation {
    std::size_t appliance_idx = 0;  // index into HouseholdProfile::appliances
    std::int64_t start_ts = 0;
};

struct SynthesisResult {
    ValidatedStream stream;
    std::vector<Annotation> annotations;
    // full-horizon per-appliance component streams, indexed by Appliance value
    std::array<std::vector<std::int64_t>, kAllAppliances.size()> components;
    std::vector<std::int64_t> noise;  // the always-on floor
    std::int64_t base_ts = 0;
    int cadence_s = 10;
};

// One run of the appliance at the metering cadence. Jitter perturbs each
// sample by at most the relative fraction, rounded to whole watts; Type4
// ignores jitter (constant-rate by definition).
std::vector<std::int64_t> appliance_waveform(const ApplianceModel& model, std::uint64_t seed,
                                             int cadence_s = 10);

// Activations for one absolute day. Counts per (appliance, window) are
// Poisson draws around the tendencies; start times uniform in the window,
// aligned to the cadence grid. Deterministic in (profile, day_index, seed).
std::vector<ScheduledActivation> schedule_day(const HouseholdProfile& profile,
                                              std::int64_t day_index, std::uint64_t seed,
                                              int cadence_s = 10);

// Applies the scenario transformation to one day's schedule (the caller
// decides whether the day is past onset). Normal is the identity.
std::vector<ScheduledActivation> inject_scenario(std::vector<ScheduledActivation> schedule,
                                                 const Scenario& scenario,
                                                 const HouseholdProfile& profile,
                                                 std::int64_t day_index, std::uint64_t seed,
                                                 int cadence_s = 10);

// Full horizon: aggregate[t] = noise[t] + sum of component streams at t,
// with integer equality. Overlapping runs of one appliance merge into the
// earlier run. base_day is the absolute day index of simulated day 0.
SynthesisResult synthesize(const HouseholdProfile& profile, int days, const Scenario& scenario,
                           std::uint64_t seed, std::int64_t base_day = 18519,
                           int cadence_s = 10);

}  // namespace bmi
