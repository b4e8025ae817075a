#include "bmi/persist.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "bmi/errors.hpp"
#include "json.hpp"
#include "json_convert.hpp"

namespace bmi {

namespace fs = std::filesystem;
using nlohmann::json;
using detail::appliance_from;
using detail::rule_from_json;
using detail::rule_to_json;
using detail::score_from_json;
using detail::score_to_json;
using detail::status_from;
using detail::status_from_json;
using detail::status_to_json;
using detail::windows_from_json;
using detail::windows_to_json;

namespace {

template <typename Fn>
auto guarded(const char* kind, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed ") + kind + " file: " + e.what());
    }
}

std::vector<std::string> stems_in(const fs::path& dir, std::string_view ext) {
    std::vector<std::string> out;
    std::error_code ec;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
        if (!it->is_regular_file()) continue;
        const fs::path& p = it->path();
        if (p.extension() == ext) out.push_back(p.stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::optional<Status> status_from_name(std::string_view name) {
    if (name == "green") return Status::Green;
    if (name == "amber") return Status::Amber;
    if (name == "red") return Status::Red;
    return std::nullopt;
}

fs::path DataLayout::readings_csv(const std::string& pid) const {
    return root_ / "readings" / (pid + ".csv");
}
fs::path DataLayout::annotations_csv(const std::string& pid) const {
    return root_ / "annotations" / (pid + ".csv");
}
fs::path DataLayout::baseline_json(const std::string& pid) const {
    return root_ / "baselines" / (pid + ".json");
}
fs::path DataLayout::vectors_json(const std::string& pid) const {
    return root_ / "vectors" / (pid + ".json");
}
fs::path DataLayout::statuses_json(const std::string& pid) const {
    return root_ / "statuses" / (pid + ".json");
}
fs::path DataLayout::alerts_json(const std::string& pid) const {
    return root_ / "alerts" / (pid + ".json");
}

void DataLayout::ensure_tree() const {
    for (const char* sub : {"readings", "annotations", "baselines", "vectors", "statuses", "alerts"})
        fs::create_directories(root_ / sub);
}

std::vector<std::string> DataLayout::metered_households() const {
    return stems_in(root_ / "readings", ".csv");
}

std::vector<std::string> DataLayout::tracked_households() const {
    return stems_in(root_ / "statuses", ".json");
}

void write_text_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

std::string serialize_baseline(const RoutineBaseline& baseline) {
    json j;
    json cells;
    for (const auto& [a, row] : baseline.cells) {
        json arr = json::array();
        for (const auto& c : row) {
            json cj;
            cj["mean"] = c.mean;
            cj["stddev"] = c.stddev;
            arr.push_back(std::move(cj));
        }
        cells[std::string(appliance_name(a))] = std::move(arr);
    }
    j["cells"] = std::move(cells);
    j["first_day"] = baseline.first_day;
    json hours;
    for (const auto& [a, h] : baseline.hour_stats) {
        json hj;
        hj["circular_mean_hour"] = h.circular_mean_hour;
        hj["circular_std_hours"] = h.circular_std_hours;
        hj["events"] = h.events;
        hours[std::string(appliance_name(a))] = std::move(hj);
    }
    j["hour_stats"] = std::move(hours);
    j["last_day"] = baseline.last_day;
    j["learning_days"] = baseline.learning_days;
    j["pid"] = baseline.pid;
    j["windows"] = windows_to_json(baseline.windows);
    return j.dump(2) + "\n";
}

RoutineBaseline deserialize_baseline(const std::string& text) {
    return guarded("baseline", [&] {
        json j = json::parse(text);
        RoutineBaseline b;
        b.pid = j.at("pid").get<std::string>();
        b.windows = windows_from_json(j.at("windows"));
        b.learning_days = j.at("learning_days").get<int>();
        b.first_day = j.at("first_day").get<std::int64_t>();
        b.last_day = j.at("last_day").get<std::int64_t>();
        for (const auto& [name, arr] : j.at("cells").items()) {
            auto a = appliance_from_name(name);
            if (!a) throw InputError("unknown appliance: " + name);
            std::vector<BaselineCell> row;
            for (const auto& cj : arr)
                row.push_back({cj.at("mean").get<double>(), cj.at("stddev").get<double>()});
            b.cells[*a] = std::move(row);
        }
        for (const auto& [name, hj] : j.at("hour_stats").items()) {
            auto a = appliance_from_name(name);
            if (!a) throw InputError("unknown appliance: " + name);
            HourStats h;
            h.events = hj.at("events").get<std::size_t>();
            h.circular_mean_hour = hj.at("circular_mean_hour").get<double>();
            h.circular_std_hours = hj.at("circular_std_hours").get<double>();
            b.hour_stats[*a] = h;
        }
        return b;
    });
}

std::string serialize_vectors(const std::vector<BehaviorVector>& vectors) {
    json arr = json::array();
    for (const auto& v : vectors) {
        json j;
        json counts;
        for (const auto& [a, row] : v.counts) counts[std::string(appliance_name(a))] = row;
        j["counts"] = std::move(counts);
        j["day"] = v.day;
        json hours;
        for (const auto& [a, hs] : v.event_hours) hours[std::string(appliance_name(a))] = hs;
        j["event_hours"] = std::move(hours);
        j["pid"] = v.pid;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<BehaviorVector> deserialize_vectors(const std::string& text) {
    return guarded("vectors", [&] {
        std::vector<BehaviorVector> out;
        for (const auto& j : json::parse(text)) {
            BehaviorVector v;
            v.pid = j.at("pid").get<std::string>();
            v.day = j.at("day").get<std::int64_t>();
            for (const auto& [name, row] : j.at("counts").items()) {
                auto a = appliance_from_name(name);
                if (!a) throw InputError("unknown appliance: " + name);
                v.counts[*a] = row.get<std::vector<int>>();
            }
            for (const auto& [name, hs] : j.at("event_hours").items()) {
                auto a = appliance_from_name(name);
                if (!a) throw InputError("unknown appliance: " + name);
                v.event_hours[*a] = hs.get<std::vector<double>>();
            }
            out.push_back(std::move(v));
        }
        return out;
    });
}

std::string serialize_statuses(const std::vector<TrafficLightStatus>& statuses) {
    json arr = json::array();
    for (const auto& s : statuses) arr.push_back(status_to_json(s));
    return arr.dump(2) + "\n";
}

std::vector<TrafficLightStatus> deserialize_statuses(const std::string& text) {
    return guarded("statuses", [&] {
        std::vector<TrafficLightStatus> out;
        for (const auto& j : json::parse(text)) out.push_back(status_from_json(j));
        return out;
    });
}

std::string serialize_alerts(const std::vector<AlertRecord>& alerts) {
    json arr = json::array();
    for (const auto& a : alerts) {
        json j;
        j["day"] = a.day;
        j["pid"] = a.pid;
        j["previous_status"] = status_name(a.previous_status);
        json reasons = json::array();
        for (const auto& r : a.reasons) reasons.push_back(score_to_json(r));
        j["reasons"] = std::move(reasons);
        j["status"] = status_name(a.status);
        j["ts"] = a.ts;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<AlertRecord> deserialize_alerts(const std::string& text) {
    return guarded("alerts", [&] {
        std::vector<AlertRecord> out;
        for (const auto& j : json::parse(text)) {
            AlertRecord a;
            a.pid = j.at("pid").get<std::string>();
            a.ts = j.at("ts").get<std::int64_t>();
            a.day = j.at("day").get<std::int64_t>();
            a.status = status_from(j.at("status"));
            a.previous_status = status_from(j.at("previous_status"));
            for (const auto& r : j.at("reasons")) a.reasons.push_back(score_from_json(r));
            out.push_back(std::move(a));
        }
        return out;
    });
}

std::string serialize_rules(const std::vector<AssociationRule>& rules) {
    json arr = json::array();
    for (const auto& r : rules) arr.push_back(rule_to_json(r));
    return arr.dump(2) + "\n";
}

std::vector<AssociationRule> deserialize_rules(const std::string& text) {
    return guarded("rules", [&] {
        std::vector<AssociationRule> out;
        for (const auto& j : json::parse(text)) out.push_back(rule_from_json(j));
        return out;
    });
}

std::vector<std::pair<std::string, std::string>> parse_regions(std::istream& source) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw MalformedLine(line_no, line);
        std::string pid = line.substr(0, comma);
        std::string region = line.substr(comma + 1);
        if (pid.empty() || region.empty()) throw MalformedLine(line_no, line);
        out.emplace_back(std::move(pid), std::move(region));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_regions_string(const std::string& text) {
    std::istringstream in(text);
    return parse_regions(in);
}

std::string serialize_regions(const std::vector<std::pair<std::string, std::string>>& regions) {
    std::string out;
    for (const auto& [pid, region] : regions) {
        out += pid;
        out += ',';
        out += region;
        out += '\n';
    }
    return out;
}

}  // namespace bmi
