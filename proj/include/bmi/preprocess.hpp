#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bmi/core.hpp"

namespace bmi {

enum class SignatureSource : std::uint8_t { Extracted, Composited, Segmented };

// A labeled watt sequence used to build training data. activation_ids track
// which physical activations the samples derive from, so dataset splitting
// can keep every activation inside a single split.
struct LabeledSignature {
    ApplianceClass label;
    std::vector<double> samples;
    SignatureSource source = SignatureSource::Extracted;
    std::string pid;
    std::vector<std::int64_t> activation_ids;
};

// Fixed-length network input frame. Samples are raw watts when cut from a
// stream by segment_windows, and scale-normalized inside a DatasetSplit.
struct Segment {
    std::string pid;
    std::int64_t start_ts = 0;
    std::vector<double> samples;
    std::optional<ApplianceClass> label;
};

struct DatasetSplit {
    std::vector<Segment> train;
    std::vector<Segment> validation;
    std::vector<Segment> test;
    // softmax index -> class, ascending by bitmask
    std::vector<ApplianceClass> classes;
    std::array<double, 3> ratios{0.7, 0.15, 0.15};
    std::uint64_t seed = 0;

    std::size_t class_index(ApplianceClass c) const;  // throws Error if absent
};

// Zeroes every sample strictly below threshold_w; timestamps and gaps kept.
ValidatedStream highpass_filter(const ValidatedStream& stream, std::int64_t threshold_w = 300);

// Nearest-rank quantile of the watt values (rounded up to whole watts),
// for per-household noise thresholds. quantile must lie in (0,1).
std::int64_t calibrate_threshold(const ValidatedStream& stream, double quantile);

// Cuts one signature per on/off pair: samples over [on-pad, off+pad]
// (inclusive, clamped to the stream), idle-period median subtracted,
// clamped at 0. Pairs overlapping a recorded gap are skipped.
std::vector<LabeledSignature> extract_signatures(const ValidatedStream& stream,
                                                 const std::vector<Annotation>& annotations,
                                                 int pad_s = 0);

// Element-wise sums of one exemplar per class (the first seen per class),
// for every class subset of size 2..max_combo, at three offset alignments
// (full overlap, half overlap, staggered).
std::vector<LabeledSignature> composite_signatures(
    const std::vector<LabeledSignature>& singletons, int max_combo = 3);

// Sliding raw-watt windows of length L every `stride` samples; windows
// containing a cadence break are dropped. Throws StreamTooShort.
std::vector<Segment> segment_windows(const ValidatedStream& stream, int L, int stride);

// Frames every signature to length L (seeded placement/crop), divides by
// scale_w, and partitions by activation identity with the given ratios.
DatasetSplit build_dataset(const std::vector<LabeledSignature>& signatures, int L,
                           std::int64_t scale_w, std::array<double, 3> ratios,
                           std::uint64_t seed);

}  // namespace bmi
