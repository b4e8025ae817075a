#include "bmi/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "bmi/errors.hpp"
#include "bmi/indicators.hpp"
#include "bmi/kernels.hpp"
#include "bmi/rng.hpp"
#include "bmi/time_util.hpp"
#include "json.hpp"

namespace bmi {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Tags errors with the pipeline stage that raised them. Input problems keep
// their input-error nature (exit code 1); everything else becomes StageError.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const InputError& e) {
        throw InputError(std::string("stage ") + name + ": " + e.what());
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

struct ActivationInterval {
    Appliance appliance = Appliance::Kettle;
    std::int64_t on = 0;
    std::int64_t off = 0;  // exclusive
};

// Mirrors the pairing done during signature extraction, so interval n here
// carries activation id n. Lenient about orphans; extraction validates first.
std::vector<ActivationInterval> paired_intervals(const std::vector<Annotation>& annotations) {
    std::vector<Annotation> anns = annotations;
    std::stable_sort(anns.begin(), anns.end(), [](const Annotation& l, const Annotation& r) {
        if (l.ts != r.ts) return l.ts < r.ts;
        return !l.on && r.on;
    });
    std::vector<ActivationInterval> out;
    std::map<Appliance, std::int64_t> open;
    for (const Annotation& a : anns) {
        if (a.on) {
            open.emplace(a.appliance, a.ts);
        } else if (auto it = open.find(a.appliance); it != open.end()) {
            out.push_back({a.appliance, it->second, a.ts});
            open.erase(it);
        }
    }
    return out;
}

// Activation ids whose interval overlaps a different appliance's interval.
// Those aggregate slices contain two devices and would mislabel a singleton.
std::set<std::int64_t> overlapping_ids(const std::vector<ActivationInterval>& intervals) {
    std::vector<std::size_t> order(intervals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return intervals[l].on < intervals[r].on;
    });
    std::set<std::int64_t> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& a = intervals[order[i]];
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const auto& b = intervals[order[j]];
            if (b.on >= a.off) break;
            if (b.appliance != a.appliance) {
                out.insert(static_cast<std::int64_t>(order[i]));
                out.insert(static_cast<std::int64_t>(order[j]));
            }
        }
    }
    return out;
}

// Idle slices of exactly L contiguous samples, floor-subtracted like the
// extracted signatures, evenly thinned to per_day slices per simulated day.
std::vector<LabeledSignature> background_slices(const ValidatedStream& stream,
                                                const std::vector<ActivationInterval>& intervals,
                                                int L, int per_day) {
    const auto& rs = stream.readings;
    if (per_day <= 0 || static_cast<int>(rs.size()) < L) return {};

    std::vector<char> busy(rs.size(), 0);
    for (const auto& iv : intervals) {
        auto it = std::lower_bound(rs.begin(), rs.end(), iv.on,
                                   [](const MeterReading& r, std::int64_t ts) { return r.ts < ts; });
        for (; it != rs.end() && it->ts < iv.off; ++it)
            busy[static_cast<std::size_t>(it - rs.begin())] = 1;
    }

    std::vector<double> idle;
    for (std::size_t i = 0; i < rs.size(); ++i)
        if (!busy[i]) idle.push_back(static_cast<double>(rs[i].watts));
    if (idle.empty()) return {};
    const double floor_w = median(std::move(idle));

    std::vector<std::size_t> candidates;
    const auto len = static_cast<std::size_t>(L);
    for (std::size_t i = 0; i + len <= rs.size(); i += len) {
        if (rs[i + len - 1].ts - rs[i].ts != static_cast<std::int64_t>(len - 1) * stream.cadence_s)
            continue;  // spans a cadence gap
        bool clean = true;
        for (std::size_t k = i; k < i + len && clean; ++k) clean = !busy[k];
        if (clean) candidates.push_back(i);
    }
    if (candidates.empty()) return {};

    const std::int64_t days = day_index(rs.back().ts) - day_index(rs.front().ts) + 1;
    const auto want = static_cast<std::size_t>(per_day) * static_cast<std::size_t>(days);
    std::vector<std::size_t> picks;
    if (candidates.size() <= want) {
        picks = candidates;
    } else {
        for (std::size_t j = 0; j < want; ++j)
            picks.push_back(candidates[j * candidates.size() / want]);
    }

    std::vector<LabeledSignature> out;
    for (std::size_t start : picks) {
        LabeledSignature sig;
        sig.label = ApplianceClass::background();
        sig.source = SignatureSource::Segmented;
        sig.pid = stream.pid;
        sig.samples.reserve(len);
        for (std::size_t k = start; k < start + len; ++k)
            sig.samples.push_back(std::max(0.0, static_cast<double>(rs[k].watts) - floor_w));
        out.push_back(std::move(sig));
    }
    return out;
}

constexpr std::uint64_t kTagPool = 0x504f4f4c;       // per-class pool shuffle
constexpr std::uint64_t kTagPoolSplit = 0x44534554;   // per-pool framing seed
constexpr std::uint64_t kTagComposite = 0x434f4d50;   // per-pool exemplar draws

// Splits signatures into train/validation/test pools class by class with a
// seeded shuffle, so every class lands in every pool at the global ratios.
std::array<std::vector<LabeledSignature>, 3> stratified_pools(std::vector<LabeledSignature> sigs,
                                                              const RunConfig& cfg) {
    std::map<ApplianceClass, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < sigs.size(); ++i) by_class[sigs[i].label].push_back(i);

    std::array<std::vector<LabeledSignature>, 3> pools;
    for (auto& [cls, idxs] : by_class) {
        Rng rng(mix_seed(mix_seed(cfg.seed, kTagPool), cls.bits()));
        for (std::size_t i = idxs.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(idxs[i - 1], idxs[j]);
        }
        const std::size_t n = idxs.size();
        const auto n_train = static_cast<std::size_t>(
            std::floor(cfg.split_ratios[0] * static_cast<double>(n)));
        const auto n_val = static_cast<std::size_t>(
            std::floor(cfg.split_ratios[1] * static_cast<double>(n)));
        for (std::size_t r = 0; r < n; ++r) {
            const int p = r < n_train ? 0 : (r < n_train + n_val ? 1 : 2);
            pools[static_cast<std::size_t>(p)].push_back(std::move(sigs[idxs[r]]));
        }
    }
    return pools;
}

// Composite class examples for one pool: every round rebuilds each
// device-combination mask from freshly drawn exemplars, truncated so full
// combos fit the input frame, at the three alignments. Drawing per mask
// rather than per round decorrelates the exemplar pairings, which is what
// makes the composite classes generalize instead of being memorized.
std::vector<LabeledSignature> rotated_composites(const std::vector<LabeledSignature>& pool,
                                                 int rounds, std::uint64_t seed,
                                                 const RunConfig& cfg) {
    std::map<ApplianceClass, std::vector<const LabeledSignature*>> by_class;
    for (const auto& s : pool)
        if (s.label.is_singleton()) by_class[s.label].push_back(&s);

    std::vector<LabeledSignature> out;
    if (by_class.size() < 2 || rounds <= 0 || cfg.max_combo < 2) return out;
    const auto cap = static_cast<std::size_t>(std::max(1, cfg.segment_len / 2));

    std::vector<ApplianceClass> classes;
    classes.reserve(by_class.size());
    for (const auto& [cls, list] : by_class) classes.push_back(cls);
    std::vector<std::vector<std::size_t>> masks;
    for (std::uint32_t bits = 1; bits < (1u << classes.size()); ++bits) {
        const int members = std::popcount(bits);
        if (members < 2 || members > cfg.max_combo) continue;
        std::vector<std::size_t> mask;
        for (std::size_t c = 0; c < classes.size(); ++c)
            if (bits & (1u << c)) mask.push_back(c);
        masks.push_back(std::move(mask));
    }

    Rng rng(mix_seed(seed, kTagComposite));
    for (int r = 0; r < rounds; ++r) {
        for (const auto& mask : masks) {
            std::vector<LabeledSignature> exemplars;
            std::uint8_t want = 0;
            for (std::size_t c : mask) {
                const auto& list = by_class[classes[c]];
                auto pick = static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(list.size()) - 1));
                LabeledSignature e = *list[pick];
                // Keep the onset half: that is where a cycle identifies
                // itself. Mid-cycle slices were tried here and cost twenty
                // points of accuracy, because bare plateaus only differ by
                // amplitude and summed amplitudes do not decompose reliably.
                if (e.samples.size() > cap) e.samples.resize(cap);
                exemplars.push_back(std::move(e));
                want |= classes[c].bits();
            }
            // composite_signatures also emits the sub-combinations of its
            // input; only the full mask carries the fresh exemplar draw.
            for (auto& combo : composite_signatures(exemplars, cfg.max_combo))
                if (combo.label.bits() == want) out.push_back(std::move(combo));
        }
    }
    return out;
}

ValidatedStream load_stream(const DataLayout& layout, const std::string& pid,
                            const RunConfig& cfg) {
    auto readings = parse_reading_string(read_text(layout.readings_csv(pid)));
    if (readings.empty()) throw EmptyStream("no readings for household " + pid);
    return normalize_stream(readings, cfg.cadence_s, cfg.gap_tolerance_s);
}

// Classification inputs must look like the training signatures: activation
// watts riding on zero, not on the household noise floor. Samples the
// activity gate calls idle estimate that floor, and subtracting it keeps
// sub-gate appliance states (a 250 W wash phase) that a plain high-pass
// would erase.
ValidatedStream floor_subtracted(const ValidatedStream& stream, std::int64_t gate_w) {
    std::vector<double> idle;
    for (const auto& r : stream.readings)
        if (r.watts < gate_w) idle.push_back(static_cast<double>(r.watts));
    const auto floor_w =
        idle.empty() ? std::int64_t{0} : std::llround(median(std::move(idle)));
    ValidatedStream out = stream;
    for (auto& r : out.readings) r.watts = std::max<std::int64_t>(0, r.watts - floor_w);
    return out;
}

NetworkModel load_model_or_throw(const DataLayout& layout) {
    const fs::path path = layout.checkpoint_bin();
    if (!fs::exists(path)) throw MissingModel("no model checkpoint at " + path.string());
    return load_checkpoint(path.string());
}

// Classification windows advance by half their length, so a real activation
// is always seen by at least two overlapping windows. A detection confined
// to a single window is an edge artifact, not an appliance.
std::vector<DetectionEvent> corroborated(std::vector<DetectionEvent> events,
                                         const NetworkModel& model, std::int64_t cadence_s) {
    const std::int64_t single = static_cast<std::int64_t>(model.input_len) * cadence_s;
    std::erase_if(events,
                  [&](const DetectionEvent& e) { return e.end_ts - e.start_ts <= single; });
    return events;
}

// A detection span starts at the first classification window, up to a whole
// window before the appliance actually switched on, which can file an event
// under the previous observation window. The first sample over a tenth of
// the span's peak marks the real onset.
void refine_onsets(std::vector<DetectionEvent>& events, const ValidatedStream& stream) {
    const auto& r = stream.readings;
    auto by_ts = [](const MeterReading& m, std::int64_t ts) { return m.ts < ts; };
    for (DetectionEvent& e : events) {
        auto lo = std::lower_bound(r.begin(), r.end(), e.start_ts, by_ts);
        auto hi = std::lower_bound(lo, r.end(), e.end_ts, by_ts);
        std::int64_t peak = 0;
        for (auto it = lo; it != hi; ++it) peak = std::max(peak, it->watts);
        // The gate is capped so an overlapping second appliance cannot raise
        // it past the quietest opening phase a cycle can have.
        const std::int64_t gate = std::clamp<std::int64_t>(peak / 10, 50, 200);
        auto first = hi;
        for (auto it = lo; it != hi; ++it) {
            if (it->watts >= gate) {
                first = it;
                break;
            }
        }
        if (first == hi) continue;
        // The span start is quantized to the classification stride and a low
        // confidence opening window may have been dropped entirely, so the
        // switch-on can precede the span. Walk back while the load holds.
        while (first != r.begin() && std::prev(first)->watts >= gate) --first;
        e.start_ts = first->ts;
    }
}

}  // namespace

SimulateOutcome mode_simulate(const RunConfig& cfg) {
    DataLayout layout(cfg.data_dir);
    layout.ensure_tree();
    const HouseholdProfile profile = cfg.profile();
    SynthesisResult result = synthesize(profile, cfg.sim_days, cfg.sim_scenario, cfg.seed,
                                        cfg.sim_base_day, static_cast<int>(cfg.cadence_s));
    write_text_atomic(layout.readings_csv(cfg.sim_pid), serialize_readings(result.stream.readings));
    std::string annos;
    {
        std::ostringstream tmp;
        serialize_annotations(result.annotations, tmp);
        annos = std::move(tmp).str();
    }
    write_text_atomic(layout.annotations_csv(cfg.sim_pid), annos);
    return {cfg.sim_pid, cfg.sim_days, result.stream.readings.size(), result.annotations.size()};
}

DeviceTrainingOutcome mode_device_training(const RunConfig& cfg) {
    kernels::set_parallel(cfg.parallel_kernels);
    DataLayout layout(cfg.data_dir);
    layout.ensure_tree();

    const auto pids = layout.metered_households();
    if (pids.empty())
        throw InputError("stage load_readings: no readings under " + layout.root().string());

    std::vector<LabeledSignature> sigs;
    std::int64_t id_offset = 0;
    for (const std::string& pid : pids) {
        ValidatedStream stream = stage("load_readings", [&] { return load_stream(layout, pid, cfg); });
        auto annos = stage("extract_signatures", [&] {
            return parse_annotation_string(read_text(layout.annotations_csv(pid)));
        });
        auto extracted = stage("extract_signatures",
                               [&] { return extract_signatures(stream, annos, cfg.pad_s); });
        const auto intervals = paired_intervals(annos);
        const auto contaminated = overlapping_ids(intervals);
        for (auto& s : extracted) {
            const bool clean = std::none_of(
                s.activation_ids.begin(), s.activation_ids.end(),
                [&](std::int64_t id) { return contaminated.count(id) != 0; });
            if (!clean) continue;  // slice contains a second appliance
            for (auto& id : s.activation_ids) id += id_offset;
            sigs.push_back(std::move(s));
        }
        id_offset += static_cast<std::int64_t>(intervals.size());

        auto background = stage("harvest_background", [&] {
            return background_slices(stream, intervals, cfg.segment_len, cfg.background_per_day);
        });
        sigs.insert(sigs.end(), std::make_move_iterator(background.begin()),
                    std::make_move_iterator(background.end()));
    }

    auto pools = stratified_pools(std::move(sigs), cfg);
    std::array<int, 3> pool_rounds{};
    pool_rounds[0] = static_cast<int>(
        std::floor(cfg.split_ratios[0] * static_cast<double>(cfg.composite_rounds)));
    pool_rounds[1] = static_cast<int>(
        std::floor(cfg.split_ratios[1] * static_cast<double>(cfg.composite_rounds)));
    pool_rounds[2] = cfg.composite_rounds - pool_rounds[0] - pool_rounds[1];
    for (std::size_t p = 0; p < pools.size(); ++p) {
        auto combos = stage("composite_signatures", [&] {
            return rotated_composites(pools[p], pool_rounds[p], mix_seed(cfg.seed, kTagComposite + p),
                                      cfg);
        });
        pools[p].insert(pools[p].end(), std::make_move_iterator(combos.begin()),
                        std::make_move_iterator(combos.end()));
    }

    DatasetSplit ds;
    ds.ratios = cfg.split_ratios;
    ds.seed = cfg.seed;
    std::set<ApplianceClass> class_set;
    for (std::size_t p = 0; p < pools.size(); ++p) {
        if (pools[p].empty()) continue;
        std::array<double, 3> one{0.0, 0.0, 0.0};
        one[p] = 1.0;
        DatasetSplit part = stage("build_dataset", [&] {
            return build_dataset(pools[p], cfg.segment_len, cfg.scale_w, one,
                                 mix_seed(cfg.seed, kTagPoolSplit + p));
        });
        class_set.insert(part.classes.begin(), part.classes.end());
        if (p == 0) ds.train = std::move(part.train);
        if (p == 1) ds.validation = std::move(part.validation);
        if (p == 2) ds.test = std::move(part.test);
    }
    ds.classes.assign(class_set.begin(), class_set.end());

    Hyperparameters hp = cfg.hp;
    hp.seed = cfg.seed;
    NetworkModel model = stage("train", [&] {
        NetworkModel m = make_model(cfg.segment_len, cfg.cnn_pool, cfg.cnn_kernels,
                                    cfg.cnn_kernel_len, cfg.cnn_hidden1, cfg.cnn_hidden2,
                                    ds.classes, hp);
        m.scale_w = cfg.scale_w;
        return m;
    });
    TrainHistory history = stage("train", [&] { return train(model, ds); });

    double test_loss = 0.0, test_acc = 0.0;
    if (!ds.test.empty()) std::tie(test_loss, test_acc) = evaluate(model, ds.test);

    // per-class precision/recall on the held-out split
    struct Tally {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    };
    std::map<std::string, Tally> tallies;
    std::map<std::string, std::map<std::string, std::size_t>> confusion;
    for (const ApplianceClass& c : model.classes) tallies[c.name()];
    for (const Segment& seg : ds.test) {
        const auto [pred, conf] = classify_segment(model, seg);
        (void)conf;
        const ApplianceClass actual = *seg.label;
        tallies[actual.name()].support += 1;
        if (pred == actual) {
            tallies[actual.name()].tp += 1;
        } else {
            tallies[pred.name()].fp += 1;
            tallies[actual.name()].fn += 1;
            confusion[actual.name()][pred.name()] += 1;
        }
    }

    stage("save_checkpoint", [&] {
        save_checkpoint(model, layout.checkpoint_bin().string());
        return 0;
    });

    json metrics;
    {
        json classes = json::array();
        for (const ApplianceClass& c : model.classes) classes.push_back(c.name());
        metrics["classes"] = std::move(classes);
        metrics["dataset"] = {{"test", ds.test.size()},
                              {"train", ds.train.size()},
                              {"validation", ds.validation.size()}};
        json epochs = json::array();
        for (const EpochStats& e : history) {
            epochs.push_back({{"train_accuracy", e.train_accuracy},
                              {"train_loss", e.train_loss},
                              {"validation_accuracy", e.validation_accuracy},
                              {"validation_loss", e.validation_loss}});
        }
        metrics["epochs"] = std::move(epochs);
        json per_class;
        for (const auto& [name, t] : tallies) {
            const double precision =
                t.tp + t.fp ? static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp) : 0.0;
            const double recall =
                t.tp + t.fn ? static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn) : 0.0;
            per_class[name] = {{"precision", precision}, {"recall", recall}, {"support", t.support}};
        }
        metrics["per_class"] = std::move(per_class);
        json confused;  // sparse: only misclassified (actual, predicted) pairs
        for (const auto& [actual, preds] : confusion) {
            json row;
            for (const auto& [pred, n] : preds) row[pred] = n;
            confused[actual] = std::move(row);
        }
        metrics["confusion"] = std::move(confused);
        metrics["test"] = {{"accuracy", test_acc}, {"loss", test_loss}};
    }
    stage("write_metrics", [&] {
        write_text_atomic(layout.metrics_json(), metrics.dump(2) + "\n");
        return 0;
    });

    DeviceTrainingOutcome out;
    out.classes = model.classes;
    out.train_segments = ds.train.size();
    out.validation_segments = ds.validation.size();
    out.test_segments = ds.test.size();
    out.history = std::move(history);
    out.test_accuracy = test_acc;
    out.test_loss = test_loss;
    return out;
}

std::vector<BaselineOutcome> mode_behavioural_training(const RunConfig& cfg) {
    kernels::set_parallel(cfg.parallel_kernels);
    DataLayout layout(cfg.data_dir);
    layout.ensure_tree();
    const NetworkModel model = load_model_or_throw(layout);

    const auto pids = layout.metered_households();
    if (pids.empty()) throw InputError("no readings under " + layout.root().string());

    std::vector<BaselineOutcome> out;
    for (const std::string& pid : pids) {
        const ValidatedStream stream = load_stream(layout, pid, cfg);
        const ValidatedStream prepared = floor_subtracted(stream, cfg.highpass_w);
        auto events = corroborated(detect_events(model, prepared, cfg.confidence_floor), model,
                                   stream.cadence_s);
        refine_onsets(events, prepared);
        const auto vectors = assign_detections(events, cfg.windows);

        const std::int64_t first_day = day_index(stream.readings.front().ts);
        const std::int64_t last_day = day_index(stream.readings.back().ts);
        const std::int64_t have = last_day - first_day + 1;
        if (have < cfg.learning_days)
            throw InsufficientHistory("household " + pid + " spans " + std::to_string(have) +
                                      " days, baseline needs " + std::to_string(cfg.learning_days));

        const std::int64_t window_last = first_day + cfg.learning_days - 1;
        std::vector<BehaviorVector> in_window;
        for (const auto& v : vectors)
            if (v.day <= window_last) in_window.push_back(v);
        const auto dense = densify_days(in_window, first_day, window_last, pid, cfg.windows);
        const RoutineBaseline baseline = learn_baseline(dense, cfg.windows, cfg.learning_days);
        write_text_atomic(layout.baseline_json(pid), serialize_baseline(baseline));

        const auto all_dense = densify_days(vectors, first_day, last_day, pid, cfg.windows);
        write_text_atomic(layout.vectors_json(pid), serialize_vectors(all_dense));

        out.push_back({pid, baseline.first_day, baseline.last_day, events.size()});
    }
    return out;
}

PredictionOutcome predict_days(const NetworkModel& model, const RoutineBaseline& baseline,
                               const ValidatedStream& stream, const RunConfig& cfg) {
    PredictionOutcome out;
    out.pid = baseline.pid;
    if (stream.readings.empty()) return out;

    const ValidatedStream prepared = floor_subtracted(stream, cfg.highpass_w);
    auto events = corroborated(detect_events(model, prepared, cfg.confidence_floor), model,
                               stream.cadence_s);
    refine_onsets(events, prepared);
    // the learned grid is authoritative for bucketing, not the live config
    const auto vectors = assign_detections(events, baseline.windows);

    const std::int64_t last_stream_day = day_index(stream.readings.back().ts);
    if (last_stream_day <= baseline.last_day) return out;

    std::vector<BehaviorVector> fresh;
    for (const auto& v : vectors)
        if (v.day > baseline.last_day) fresh.push_back(v);
    out.vectors = densify_days(fresh, baseline.last_day + 1, last_stream_day, stream.pid,
                               baseline.windows);

    TrafficLightStatus prev;
    prev.pid = stream.pid;
    prev.day = baseline.last_day;
    for (const auto& v : out.vectors) {
        const auto scores = zscore_day(v, baseline, cfg.z_threshold);
        TrafficLightStatus cur = update_traffic_light(prev, stream.pid, v.day, scores,
                                                      cfg.amber_min_outliers, cfg.red_days);
        if (cur.status != prev.status) {
            AlertRecord alert;
            alert.pid = stream.pid;
            alert.ts = day_start(v.day);
            alert.day = v.day;
            alert.status = cur.status;
            alert.previous_status = prev.status;
            alert.reasons = cur.reasons;
            out.alerts.push_back(std::move(alert));
        }
        out.statuses.push_back(cur);
        prev = std::move(cur);
    }
    return out;
}

std::vector<PredictionOutcome> mode_prediction(const RunConfig& cfg) {
    kernels::set_parallel(cfg.parallel_kernels);
    DataLayout layout(cfg.data_dir);
    layout.ensure_tree();
    const NetworkModel model = load_model_or_throw(layout);

    const auto pids = layout.metered_households();
    if (pids.empty()) throw InputError("no readings under " + layout.root().string());

    std::vector<PredictionOutcome> out;
    for (const std::string& pid : pids) {
        if (!fs::exists(layout.baseline_json(pid)))
            throw MissingBaseline("no baseline for household " + pid);
        const RoutineBaseline baseline = deserialize_baseline(read_text(layout.baseline_json(pid)));
        const ValidatedStream stream = load_stream(layout, pid, cfg);
        PredictionOutcome po = predict_days(model, baseline, stream, cfg);

        std::vector<BehaviorVector> merged;
        if (fs::exists(layout.vectors_json(pid))) {
            for (auto& v : deserialize_vectors(read_text(layout.vectors_json(pid))))
                if (v.day <= baseline.last_day) merged.push_back(std::move(v));
        }
        merged.insert(merged.end(), po.vectors.begin(), po.vectors.end());
        write_text_atomic(layout.vectors_json(pid), serialize_vectors(merged));
        write_text_atomic(layout.statuses_json(pid), serialize_statuses(po.statuses));
        write_text_atomic(layout.alerts_json(pid), serialize_alerts(po.alerts));

        out.push_back(std::move(po));
    }
    return out;
}

RegionRules mine_region_rules(const DataLayout& layout, const std::vector<std::string>& pids,
                              const RunConfig& cfg) {
    std::vector<std::set<std::string>> before, after;
    for (const std::string& pid : pids) {
        if (!fs::exists(layout.vectors_json(pid))) continue;
        const auto vectors = deserialize_vectors(read_text(layout.vectors_json(pid)));

        std::int64_t cutoff = std::numeric_limits<std::int64_t>::max();
        std::vector<ObservationWindow> windows = cfg.windows;
        if (fs::exists(layout.baseline_json(pid))) {
            const auto baseline = deserialize_baseline(read_text(layout.baseline_json(pid)));
            cutoff = baseline.last_day;
            windows = baseline.windows;
        }

        std::vector<BehaviorVector> pre, post;
        for (const auto& v : vectors) (v.day <= cutoff ? pre : post).push_back(v);
        for (auto& t : transactions_from_vectors(pre, windows)) before.push_back(std::move(t));
        for (auto& t : transactions_from_vectors(post, windows)) after.push_back(std::move(t));
    }
    RegionRules rules;
    rules.before = mine_rules(before, cfg.min_support, cfg.min_confidence);
    rules.after = mine_rules(after, cfg.min_support, cfg.min_confidence);
    return rules;
}

std::vector<std::string> region_members(const DataLayout& layout, const std::string& region_id) {
    std::vector<std::string> out;
    if (!fs::exists(layout.regions_csv())) return out;
    for (const auto& [pid, region] : parse_regions_string(read_text(layout.regions_csv())))
        if (region == region_id) out.push_back(pid);
    return out;
}

std::vector<TrafficLightStatus> latest_statuses(const DataLayout& layout,
                                                const std::vector<std::string>& pids) {
    std::vector<TrafficLightStatus> out;
    for (const std::string& pid : pids) {
        if (!fs::exists(layout.statuses_json(pid))) continue;
        auto statuses = deserialize_statuses(read_text(layout.statuses_json(pid)));
        if (!statuses.empty()) out.push_back(std::move(statuses.back()));
    }
    return out;
}

}  // namespace bmi
