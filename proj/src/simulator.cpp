#include "bmi/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "bmi/errors.hpp"
#include "bmi/rng.hpp"
#include "bmi/time_util.hpp"

namespace bmi {

namespace {

// Substream tags keep the per-purpose RNG draws independent.
constexpr std::uint64_t kTagSchedule = 0x5343484544ULL;
constexpr std::uint64_t kTagWaveform = 0x5741564546ULL;
constexpr std::uint64_t kTagScenario = 0x5343454e41ULL;

std::int64_t jittered(std::int64_t base, double jitter, Rng& rng) {
    if (jitter <= 0.0) return base;
    double u = rng.uniform(-1.0, 1.0);
    auto w = static_cast<std::int64_t>(std::llround(static_cast<double>(base) * (1.0 + jitter * u)));
    return std::max<std::int64_t>(w, 0);
}

std::int64_t align_down(std::int64_t ts, int cadence_s) {
    return (ts / cadence_s) * cadence_s;
}

}  // namespace

void validate_model(const ApplianceModel& model, int cadence_s) {
    if (model.power_w <= 0) throw Error("appliance power must be positive");
    if (model.jitter < 0.0 || model.jitter > 0.2)
        throw Error("appliance jitter must be in [0, 0.2]");
    if (model.device_type == DeviceType::Type2) {
        if (model.states.size() < 2) throw Error("multi-state appliance needs at least 2 states");
        for (const auto& [p, d] : model.states) {
            if (p < 0) throw Error("state power must be non-negative");
            if (d < cadence_s) throw Error("state duration must cover at least one sample");
        }
    } else {
        if (model.duration_s < cadence_s)
            throw Error("appliance duration must cover at least one sample");
    }
}

std::vector<std::int64_t> appliance_waveform(const ApplianceModel& model, std::uint64_t seed,
                                             int cadence_s) {
    validate_model(model, cadence_s);
    Rng rng(mix_seed(seed, kTagWaveform));
    std::vector<std::int64_t> out;
    switch (model.device_type) {
        case DeviceType::Type1: {
            std::size_t n = static_cast<std::size_t>(model.duration_s / cadence_s);
            out.reserve(n);
            for (std::size_t i = 0; i < n; ++i) out.push_back(jittered(model.power_w, model.jitter, rng));
            break;
        }
        case DeviceType::Type2: {
            for (const auto& [p, d] : model.states) {
                std::size_t n = static_cast<std::size_t>(d / cadence_s);
                for (std::size_t i = 0; i < n; ++i) out.push_back(jittered(p, model.jitter, rng));
            }
            break;
        }
        case DeviceType::Type3: {
            // bounded random walk in (0, power_w]
            std::size_t n = static_cast<std::size_t>(model.duration_s / cadence_s);
            double v = static_cast<double>(model.power_w) / 2.0;
            double step = static_cast<double>(model.power_w) * 0.05;
            for (std::size_t i = 0; i < n; ++i) {
                v += step * rng.uniform(-1.0, 1.0);
                v = std::min(static_cast<double>(model.power_w), std::max(1.0, v));
                out.push_back(std::llround(v));
            }
            break;
        }
        case DeviceType::Type4: {
            std::size_t n = static_cast<std::size_t>(model.duration_s / cadence_s);
            out.assign(n, model.power_w);
            break;
        }
    }
    return out;
}

std::vector<ScheduledActivation> schedule_day(const HouseholdProfile& profile,
                                              std::int64_t day_index, std::uint64_t seed,
                                              int cadence_s) {
    if (!windows_valid(profile.windows))
        throw InvalidWindowSet("household profile windows must partition [0,24)");
    Rng rng(mix_seed(mix_seed(seed, kTagSchedule), static_cast<std::uint64_t>(day_index)));
    std::int64_t day_ts = day_start(day_index);
    std::vector<ScheduledActivation> out;
    for (std::size_t ai = 0; ai < profile.appliances.size(); ++ai) {
        Appliance a = profile.appliances[ai].appliance;
        for (std::size_t w = 0; w < profile.windows.size(); ++w) {
            double tendency = profile.tendency(a, w);
            if (tendency <= 0.0) continue;
            // Stochastic rounding: floor(t) runs plus one more with the
            // fractional probability. Mean equals the tendency and the count
            // never strays more than one run from it, which is how settled
            // routines actually vary; an unbounded draw would make every
            // quiet household trip its own baseline sooner or later.
            double whole = 0.0;
            double frac = std::modf(tendency, &whole);
            int count = static_cast<int>(whole) + (rng.uniform() < frac ? 1 : 0);
            const ObservationWindow& win = profile.windows[w];
            for (int k = 0; k < count; ++k) {
                double hour = rng.uniform(win.start_hour, win.end_hour);
                std::int64_t off = align_down(static_cast<std::int64_t>(hour * 3600.0), cadence_s);
                out.push_back({ai, day_ts + off});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const ScheduledActivation& l, const ScheduledActivation& r) {
        return l.start_ts != r.start_ts ? l.start_ts < r.start_ts : l.appliance_idx < r.appliance_idx;
    });
    return out;
}

std::vector<ScheduledActivation> inject_scenario(std::vector<ScheduledActivation> schedule,
                                                 const Scenario& scenario,
                                                 const HouseholdProfile& profile,
                                                 std::int64_t day_index, std::uint64_t seed,
                                                 int cadence_s) {
    auto find_appliance = [&](Appliance a) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < profile.appliances.size(); ++i)
            if (profile.appliances[i].appliance == a) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    Rng rng(mix_seed(mix_seed(seed, kTagScenario), static_cast<std::uint64_t>(day_index)));
    switch (scenario.kind) {
        case ScenarioKind::Normal:
            return schedule;
        case ScenarioKind::NightUsage: {
            std::ptrdiff_t kettle = find_appliance(Appliance::Kettle);
            if (kettle < 0) return schedule;
            int n = std::max(1, static_cast<int>(std::llround(scenario.magnitude)));
            // evenly spaced across 00:00-05:00, bounded jitter keeps runs apart
            std::int64_t interval = 5 * 3600 / n;
            std::int64_t day_ts = day_start(day_index);
            for (int i = 0; i < n; ++i) {
                std::int64_t center = i * interval + interval / 2;
                std::int64_t jit = static_cast<std::int64_t>(
                    rng.uniform(-static_cast<double>(interval) / 8.0,
                                static_cast<double>(interval) / 8.0));
                schedule.push_back(
                    {static_cast<std::size_t>(kettle), day_ts + align_down(center + jit, cadence_s)});
            }
            break;
        }
        case ScenarioKind::ConsumptionDip: {
            std::erase_if(schedule, [&](const ScheduledActivation& s) {
                Appliance a = profile.appliances[s.appliance_idx].appliance;
                if (a != Appliance::Oven && a != Appliance::WashingMachine) return false;
                return rng.uniform() < scenario.magnitude;
            });
            break;
        }
        case ScenarioKind::SelfDisconnect:
            return {};
        case ScenarioKind::ApplianceSubstitution: {
            std::ptrdiff_t micro = find_appliance(Appliance::Microwave);
            std::vector<ScheduledActivation> out;
            out.reserve(schedule.size());
            for (const ScheduledActivation& s : schedule) {
                if (profile.appliances[s.appliance_idx].appliance == Appliance::Oven) {
                    if (micro >= 0) out.push_back({static_cast<std::size_t>(micro), s.start_ts});
                } else {
                    out.push_back(s);
                }
            }
            schedule = std::move(out);
            break;
        }
    }
    std::sort(schedule.begin(), schedule.end(),
              [](const ScheduledActivation& l, const ScheduledActivation& r) {
                  return l.start_ts != r.start_ts ? l.start_ts < r.start_ts
                                                  : l.appliance_idx < r.appliance_idx;
              });
    return schedule;
}

SynthesisResult synthesize(const HouseholdProfile& profile, int days, const Scenario& scenario,
                           std::uint64_t seed, std::int64_t base_day, int cadence_s) {
    if (days < 1) throw Error("simulation horizon must be at least one day");
    for (const ApplianceModel& m : profile.appliances) validate_model(m, cadence_s);

    const std::int64_t base_ts = day_start(base_day);
    const std::size_t per_day = static_cast<std::size_t>(kSecondsPerDay / cadence_s);
    const std::size_t total = per_day * static_cast<std::size_t>(days);

    std::vector<ScheduledActivation> all;
    for (int d = 0; d < days; ++d) {
        std::int64_t abs_day = base_day + d;
        auto sched = schedule_day(profile, abs_day, seed, cadence_s);
        if (d >= scenario.onset_day)
            sched = inject_scenario(std::move(sched), scenario, profile, abs_day, seed, cadence_s);
        all.insert(all.end(), sched.begin(), sched.end());
    }

    // A physical appliance runs once at a time: a run starting inside an
    // earlier run of the same appliance is absorbed into it.
    std::stable_sort(all.begin(), all.end(),
                     [](const ScheduledActivation& l, const ScheduledActivation& r) {
                         return l.start_ts < r.start_ts;
                     });
    std::array<std::int64_t, kAllAppliances.size()> busy_until{};
    busy_until.fill(INT64_MIN);

    SynthesisResult res;
    res.base_ts = base_ts;
    res.cadence_s = cadence_s;
    for (auto& c : res.components) c.assign(total, 0);
    res.noise.assign(total, profile.noise_floor_w);

    for (const ScheduledActivation& act : all) {
        const ApplianceModel& model = profile.appliances[act.appliance_idx];
        std::size_t a = static_cast<std::size_t>(model.appliance);
        if (act.start_ts < busy_until[a]) continue;
        auto wf = appliance_waveform(
            model, mix_seed(mix_seed(seed, static_cast<std::uint64_t>(act.start_ts)),
                            static_cast<std::uint64_t>(a)),
            cadence_s);
        if (wf.empty()) continue;
        std::int64_t end_ts = act.start_ts + static_cast<std::int64_t>(wf.size()) * cadence_s;
        busy_until[a] = end_ts;
        for (std::size_t u = 0; u < wf.size(); ++u) {
            std::int64_t idx = (act.start_ts - base_ts) / cadence_s + static_cast<std::int64_t>(u);
            if (idx >= 0 && idx < static_cast<std::int64_t>(total))
                res.components[a][static_cast<std::size_t>(idx)] = wf[u];
        }
        res.annotations.push_back({profile.pid, model.appliance, true, act.start_ts});
        res.annotations.push_back({profile.pid, model.appliance, false, end_ts});
    }

    if (scenario.kind == ScenarioKind::SelfDisconnect && scenario.onset_day < days) {
        std::size_t cut = per_day * static_cast<std::size_t>(std::max(scenario.onset_day, 0));
        for (std::size_t i = cut; i < total; ++i) {
            res.noise[i] = 0;
            for (auto& c : res.components) c[i] = 0;
        }
    }

    res.stream.pid = profile.pid;
    res.stream.cadence_s = cadence_s;
    res.stream.readings.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::int64_t w = res.noise[i];
        for (const auto& c : res.components) w += c[i];
        res.stream.readings.push_back(
            {profile.pid, base_ts + static_cast<std::int64_t>(i) * cadence_s, w});
    }

    std::stable_sort(res.annotations.begin(), res.annotations.end(),
                     [](const Annotation& l, const Annotation& r) {
                         if (l.ts != r.ts) return l.ts < r.ts;
                         return l.on && !r.on;  // on before off at the same instant
                     });
    return res;
}

}  // namespace bmi
