#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bmi/anomaly.hpp"
#include "bmi/behavior.hpp"
#include "bmi/core.hpp"

namespace bmi {

// One machine-to-machine alert. Emitted only when a household's status
// changes, never for a day that repeats the previous status.
struct AlertRecord {
    std::string pid;
    std::int64_t ts = 0;   // unix seconds, start of the day that transitioned
    std::int64_t day = 0;  // day index of that day
    Status status = Status::Green;
    Status previous_status = Status::Green;
    std::vector<AnomalyScore> reasons;  // the outlier cells behind the change
};

std::optional<Status> status_from_name(std::string_view name);

// Pipeline state lives in plain files under one root directory:
//   readings/<pid>.csv      annotations/<pid>.csv
//   baselines/<pid>.json    vectors/<pid>.json
//   statuses/<pid>.json     alerts/<pid>.json
//   checkpoint.bin  metrics.json  regions.csv  population.csv
class DataLayout {
public:
    explicit DataLayout(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }

    std::filesystem::path readings_csv(const std::string& pid) const;
    std::filesystem::path annotations_csv(const std::string& pid) const;
    std::filesystem::path baseline_json(const std::string& pid) const;
    std::filesystem::path vectors_json(const std::string& pid) const;
    std::filesystem::path statuses_json(const std::string& pid) const;
    std::filesystem::path alerts_json(const std::string& pid) const;
    std::filesystem::path checkpoint_bin() const { return root_ / "checkpoint.bin"; }
    std::filesystem::path metrics_json() const { return root_ / "metrics.json"; }
    std::filesystem::path regions_csv() const { return root_ / "regions.csv"; }
    std::filesystem::path population_csv() const { return root_ / "population.csv"; }

    void ensure_tree() const;  // creates the root and its subdirectories

    // Sorted pids deduced from file names; empty when the directory is absent.
    std::vector<std::string> metered_households() const;   // readings/*.csv
    std::vector<std::string> tracked_households() const;   // statuses/*.json

private:
    std::filesystem::path root_;
};

// Whole-file snapshot publication: writes "<path>.tmp", then renames over
// path, so concurrent readers see either the old or the new bytes.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

// Throws InputError when the file cannot be opened.
std::string read_text(const std::filesystem::path& path);

// JSON snapshots. Serialization is byte-deterministic (sorted keys, shortest
// round-trip numbers); infinite z-scores travel as the string "inf".
std::string serialize_baseline(const RoutineBaseline& baseline);
RoutineBaseline deserialize_baseline(const std::string& text);

std::string serialize_vectors(const std::vector<BehaviorVector>& vectors);
std::vector<BehaviorVector> deserialize_vectors(const std::string& text);

std::string serialize_statuses(const std::vector<TrafficLightStatus>& statuses);
std::vector<TrafficLightStatus> deserialize_statuses(const std::string& text);

std::string serialize_alerts(const std::vector<AlertRecord>& alerts);
std::vector<AlertRecord> deserialize_alerts(const std::string& text);

std::string serialize_rules(const std::vector<AssociationRule>& rules);
std::vector<AssociationRule> deserialize_rules(const std::string& text);

// regions.csv: "pid,region_id" per line, same conventions as the other CSV
// inputs (LF or CRLF, blank lines skipped, MalformedLine with line number).
std::vector<std::pair<std::string, std::string>> parse_regions(std::istream& source);
std::vector<std::pair<std::string, std::string>> parse_regions_string(const std::string& text);
std::string serialize_regions(const std::vector<std::pair<std::string, std::string>>& regions);

}  // namespace bmi
