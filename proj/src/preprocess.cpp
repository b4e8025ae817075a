#include "bmi/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "bmi/errors.hpp"
#include "bmi/rng.hpp"

namespace bmi {

namespace {
constexpr std::uint64_t kTagSplit = 0x53504c4954ULL;
constexpr std::uint64_t kTagFrame = 0x4652414d45ULL;
}  // namespace

std::size_t DatasetSplit::class_index(ApplianceClass c) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), c);
    if (it == classes.end() || !(*it == c))
        throw Error("class " + c.name() + " not in dataset label table");
    return static_cast<std::size_t>(it - classes.begin());
}

ValidatedStream highpass_filter(const ValidatedStream& stream, std::int64_t threshold_w) {
    if (threshold_w < 0) throw Error("highpass threshold must be non-negative");
    ValidatedStream out = stream;
    for (MeterReading& r : out.readings)
        if (r.watts < threshold_w) r.watts = 0;
    return out;
}

std::int64_t calibrate_threshold(const ValidatedStream& stream, double quantile) {
    if (stream.readings.empty()) throw EmptyStream("cannot calibrate a threshold on no readings");
    if (!(quantile > 0.0 && quantile < 1.0)) throw Error("quantile must lie in (0,1)");
    std::vector<std::int64_t> watts;
    watts.reserve(stream.readings.size());
    for (const MeterReading& r : stream.readings) watts.push_back(r.watts);
    std::sort(watts.begin(), watts.end());
    // nearest-rank: the ceil(q*N)-th smallest value
    auto n = static_cast<double>(watts.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(quantile * n));
    rank = std::max<std::size_t>(rank, 1);
    rank = std::min(rank, watts.size());
    return watts[rank - 1];
}

namespace {

// Median with even-count mean; values need not be pre-sorted.
double median_of(std::vector<std::int64_t> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return static_cast<double>(v[n / 2]);
    return (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

}  // namespace

std::vector<LabeledSignature> extract_signatures(const ValidatedStream& stream,
                                                 const std::vector<Annotation>& annotations,
                                                 int pad_s) {
    if (pad_s < 0) throw Error("annotation pad must be non-negative");
    const auto& readings = stream.readings;
    const int cadence = stream.cadence_s;

    std::vector<Annotation> anns = annotations;
    // off first at equal timestamps, so back-to-back runs pair correctly
    std::stable_sort(anns.begin(), anns.end(), [](const Annotation& l, const Annotation& r) {
        if (l.ts != r.ts) return l.ts < r.ts;
        return !l.on && r.on;
    });

    struct Pair {
        Appliance appliance;
        std::int64_t on = 0, off = 0;
    };
    std::vector<Pair> pairs;
    std::map<Appliance, std::int64_t> open;
    for (const Annotation& a : anns) {
        if (a.on) {
            if (open.count(a.appliance))
                throw UnpairedAnnotation("second 'on' for " + std::string(appliance_name(a.appliance)) +
                                         " at ts " + std::to_string(a.ts) +
                                         " while a run is open");
            open[a.appliance] = a.ts;
        } else {
            auto it = open.find(a.appliance);
            if (it == open.end())
                throw UnpairedAnnotation("'off' for " + std::string(appliance_name(a.appliance)) + " at ts " +
                                         std::to_string(a.ts) + " with no open run");
            pairs.push_back({a.appliance, it->second, a.ts});
            open.erase(it);
        }
    }
    if (!open.empty())
        throw UnpairedAnnotation("'on' for " + std::string(appliance_name(open.begin()->first)) + " at ts " +
                                 std::to_string(open.begin()->second) + " never closed");

    if (readings.empty()) return {};
    const std::int64_t t0 = readings.front().ts;
    // sample index by timestamp; -1 marks positions inside gaps
    auto index_of = [&](std::int64_t ts) -> std::ptrdiff_t {
        if (ts < t0 || (ts - t0) % cadence != 0) return -1;
        return (ts - t0) / cadence;
    };
    const std::int64_t tN = readings.back().ts;
    std::vector<std::ptrdiff_t> pos(static_cast<std::size_t>((tN - t0) / cadence) + 1, -1);
    for (std::size_t i = 0; i < readings.size(); ++i) {
        std::ptrdiff_t p = index_of(readings[i].ts);
        if (p >= 0 && p < static_cast<std::ptrdiff_t>(pos.size()))
            pos[static_cast<std::size_t>(p)] = static_cast<std::ptrdiff_t>(i);
    }

    // noise floor: median of samples outside every [on, off) interval
    std::vector<char> busy(readings.size(), 0);
    for (const Pair& p : pairs) {
        for (std::int64_t ts = std::max(p.on, t0); ts < p.off; ts += cadence) {
            std::ptrdiff_t gi = index_of(ts);
            if (gi < 0 || gi >= static_cast<std::ptrdiff_t>(pos.size())) continue;
            std::ptrdiff_t ri = pos[static_cast<std::size_t>(gi)];
            if (ri >= 0) busy[static_cast<std::size_t>(ri)] = 1;
        }
    }
    std::vector<std::int64_t> idle;
    for (std::size_t i = 0; i < readings.size(); ++i)
        if (!busy[i]) idle.push_back(readings[i].watts);
    const double floor_w = median_of(std::move(idle));

    std::vector<LabeledSignature> out;
    std::int64_t next_id = 0;
    for (const Pair& p : pairs) {
        std::int64_t lo = std::max(p.on - pad_s, t0);
        std::int64_t hi = std::min(p.off + pad_s, tN);
        lo = ((lo - t0 + cadence - 1) / cadence) * cadence + t0;  // round up to grid
        hi = ((hi - t0) / cadence) * cadence + t0;                // round down to grid
        std::int64_t id = next_id++;
        if (lo > hi) continue;
        LabeledSignature sig;
        sig.label = ApplianceClass::from_members({p.appliance});
        sig.source = SignatureSource::Extracted;
        sig.pid = stream.pid;
        sig.activation_ids = {id};
        bool complete = true;
        for (std::int64_t ts = lo; ts <= hi; ts += cadence) {
            std::ptrdiff_t gi = index_of(ts);
            std::ptrdiff_t ri = (gi >= 0 && gi < static_cast<std::ptrdiff_t>(pos.size()))
                                    ? pos[static_cast<std::size_t>(gi)]
                                    : -1;
            if (ri < 0) {
                complete = false;  // falls in a recorded gap
                break;
            }
            double v = static_cast<double>(readings[static_cast<std::size_t>(ri)].watts) - floor_w;
            sig.samples.push_back(std::max(0.0, v));
        }
        if (complete && !sig.samples.empty()) out.push_back(std::move(sig));
    }
    return out;
}

std::vector<LabeledSignature> composite_signatures(
    const std::vector<LabeledSignature>& singletons, int max_combo) {
    if (max_combo < 2) throw Error("max_combo must be at least 2");
    std::map<std::uint8_t, const LabeledSignature*> exemplar;
    for (const LabeledSignature& s : singletons) {
        if (!s.label.is_singleton())
            throw Error("composite_signatures expects singleton-labeled inputs");
        exemplar.emplace(s.label.bits(), &s);  // first per class wins
    }

    std::vector<LabeledSignature> out;
    for (std::uint8_t mask = 1; mask < (1u << kAllAppliances.size()); ++mask) {
        int size = std::popcount(static_cast<unsigned>(mask));
        if (size < 2 || size > max_combo) continue;
        std::vector<const LabeledSignature*> parts;
        bool have_all = true;
        for (std::size_t b = 0; b < kAllAppliances.size(); ++b) {
            if (!(mask & (1u << b))) continue;
            auto it = exemplar.find(static_cast<std::uint8_t>(1u << b));
            if (it == exemplar.end()) {
                have_all = false;
                break;
            }
            parts.push_back(it->second);
        }
        if (!have_all) continue;

        // alignment 0: full overlap; 1: half overlap; 2: staggered
        for (int align = 0; align < 3; ++align) {
            std::vector<std::size_t> offsets(parts.size(), 0);
            for (std::size_t i = 1; i < parts.size(); ++i) {
                std::size_t prev_len = parts[i - 1]->samples.size();
                switch (align) {
                    case 0: offsets[i] = offsets[i - 1]; break;
                    case 1: offsets[i] = offsets[i - 1] + prev_len / 2; break;
                    default: offsets[i] = offsets[i - 1] + prev_len - prev_len / 4; break;
                }
            }
            std::size_t total = 0;
            for (std::size_t i = 0; i < parts.size(); ++i)
                total = std::max(total, offsets[i] + parts[i]->samples.size());
            LabeledSignature sig;
            sig.label = *ApplianceClass::from_bits(mask);
            sig.source = SignatureSource::Composited;
            sig.pid = parts.front()->pid;
            sig.samples.assign(total, 0.0);
            for (std::size_t i = 0; i < parts.size(); ++i) {
                for (std::size_t u = 0; u < parts[i]->samples.size(); ++u)
                    sig.samples[offsets[i] + u] += parts[i]->samples[u];
                sig.activation_ids.insert(sig.activation_ids.end(),
                                          parts[i]->activation_ids.begin(),
                                          parts[i]->activation_ids.end());
            }
            std::sort(sig.activation_ids.begin(), sig.activation_ids.end());
            sig.activation_ids.erase(
                std::unique(sig.activation_ids.begin(), sig.activation_ids.end()),
                sig.activation_ids.end());
            out.push_back(std::move(sig));
        }
    }
    return out;
}

std::vector<Segment> segment_windows(const ValidatedStream& stream, int L, int stride) {
    if (L < 1 || stride < 1) throw Error("segment length and stride must be positive");
    const auto& r = stream.readings;
    const auto n = static_cast<std::ptrdiff_t>(r.size());
    if (n < L)
        throw StreamTooShort("stream has " + std::to_string(n) + " samples, need at least " +
                             std::to_string(L));
    // break_before[i] = 1 when the step from reading i-1 to i is not one cadence
    std::vector<int> break_prefix(r.size() + 1, 0);
    for (std::size_t i = 1; i < r.size(); ++i) {
        bool brk = (r[i].ts - r[i - 1].ts) != stream.cadence_s;
        break_prefix[i + 1] = break_prefix[i] + (brk ? 1 : 0);
    }
    std::vector<Segment> out;
    for (std::ptrdiff_t s = 0; s + L <= n; s += stride) {
        // breaks inside (s, s+L)
        if (break_prefix[static_cast<std::size_t>(s + L)] -
                break_prefix[static_cast<std::size_t>(s + 1)] >
            0)
            continue;
        Segment seg;
        seg.pid = stream.pid;
        seg.start_ts = r[static_cast<std::size_t>(s)].ts;
        seg.samples.reserve(static_cast<std::size_t>(L));
        for (std::ptrdiff_t i = s; i < s + L; ++i)
            seg.samples.push_back(static_cast<double>(r[static_cast<std::size_t>(i)].watts));
        out.push_back(std::move(seg));
    }
    return out;
}

DatasetSplit build_dataset(const std::vector<LabeledSignature>& signatures, int L,
                           std::int64_t scale_w, std::array<double, 3> ratios,
                           std::uint64_t seed) {
    if (signatures.empty()) throw Error("cannot build a dataset from no signatures");
    if (L < 1) throw Error("frame length must be positive");
    if (scale_w <= 0) throw Error("scale watts must be positive");
    double rsum = ratios[0] + ratios[1] + ratios[2];
    if (ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0 || std::abs(rsum - 1.0) > 1e-9)
        throw Error("split ratios must be non-negative and sum to 1");

    DatasetSplit ds;
    ds.ratios = ratios;
    ds.seed = seed;

    std::set<std::uint8_t> label_bits;
    for (const LabeledSignature& s : signatures) label_bits.insert(s.label.bits());
    for (std::uint8_t b : label_bits) ds.classes.push_back(*ApplianceClass::from_bits(b));

    // split assignment per activation id: seeded shuffle, then ratio cut
    std::vector<std::int64_t> ids;
    for (const LabeledSignature& s : signatures)
        ids.insert(ids.end(), s.activation_ids.begin(), s.activation_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    Rng split_rng(mix_seed(seed, kTagSplit));
    for (std::size_t i = ids.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(
            split_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(ids[i - 1], ids[j]);
    }
    std::size_t n_train = static_cast<std::size_t>(ratios[0] * static_cast<double>(ids.size()));
    std::size_t n_val = static_cast<std::size_t>(ratios[1] * static_cast<double>(ids.size()));
    std::map<std::int64_t, int> split_of;  // 0 train, 1 validation, 2 test
    for (std::size_t i = 0; i < ids.size(); ++i)
        split_of[ids[i]] = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);

    for (std::size_t si = 0; si < signatures.size(); ++si) {
        const LabeledSignature& s = signatures[si];
        if (s.samples.empty()) continue;
        int split;
        if (s.activation_ids.empty()) {
            split = static_cast<int>(split_rng.uniform_int(0, 99)) <
                            static_cast<int>(ratios[0] * 100)
                        ? 0
                        : (static_cast<int>(split_rng.uniform_int(0, 99)) <
                                   static_cast<int>(ratios[1] * 100 /
                                                    std::max(1e-12, 1.0 - ratios[0]))
                               ? 1
                               : 2);
        } else {
            split = split_of[s.activation_ids.front()];
            bool straddles = false;
            for (std::int64_t id : s.activation_ids)
                if (split_of[id] != split) straddles = true;
            if (straddles) continue;  // cannot place without leaking an activation
        }

        Rng frame_rng(mix_seed(mix_seed(seed, kTagFrame), static_cast<std::uint64_t>(si)));
        const auto len = static_cast<std::ptrdiff_t>(s.samples.size());
        const double inv = 1.0 / static_cast<double>(scale_w);
        // Partial views are only label-safe for single appliances: hiding part
        // of a composite can hide a whole member, leaving the label wrong.
        const bool edge_views = split == 0 && s.label.is_singleton();
        // A long run holds several frames of distinct phases; one crop would
        // leave most of them unseen, so long signatures yield several crops.
        const std::ptrdiff_t n_crops = std::clamp<std::ptrdiff_t>(len / L, 1, 4);
        for (std::ptrdiff_t crop = 0; crop < n_crops; ++crop) {
            Segment seg;
            seg.pid = s.pid;
            seg.start_ts = 0;
            seg.label = s.label;
            seg.samples.assign(static_cast<std::size_t>(L), 0.0);
            if (len >= L) {
                // Training crops of single appliances may run off either end of
                // the signature so onset and tail views (zeros on one side) are
                // represented; held-out crops always come from inside.
                std::ptrdiff_t start;
                if (edge_views) {
                    start = frame_rng.uniform_int(-static_cast<std::int64_t>(L / 2),
                                                  static_cast<std::int64_t>(len - L + L / 2));
                } else {
                    start = len == L ? 0
                                     : frame_rng.uniform_int(0, static_cast<std::int64_t>(len - L));
                }
                for (std::ptrdiff_t i = 0; i < L; ++i) {
                    std::ptrdiff_t u = start + i;
                    if (u >= 0 && u < len)
                        seg.samples[static_cast<std::size_t>(i)] =
                            s.samples[static_cast<std::size_t>(u)] * inv;
                }
            } else {
                // Placement may hang over either frame edge, so partial
                // activations appear in training. Single-appliance training
                // frames hide up to half the signature, matching what a
                // half-overlap slider sees at event edges; other frames stay
                // near-complete.
                std::ptrdiff_t slack = edge_views ? len / 2 : len / 4;
                std::ptrdiff_t offset = frame_rng.uniform_int(
                    -static_cast<std::int64_t>(slack), static_cast<std::int64_t>(L - len + slack));
                for (std::ptrdiff_t u = 0; u < len; ++u) {
                    std::ptrdiff_t i = offset + u;
                    if (i >= 0 && i < L)
                        seg.samples[static_cast<std::size_t>(i)] =
                            s.samples[static_cast<std::size_t>(u)] * inv;
                }
            }
            switch (split) {
                case 0: ds.train.push_back(std::move(seg)); break;
                case 1: ds.validation.push_back(std::move(seg)); break;
                default: ds.test.push_back(std::move(seg)); break;
            }
        }
    }
    return ds;
}

}  // namespace bmi
