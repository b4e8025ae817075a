#include "bmi/core.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "bmi/time_util.hpp"

namespace bmi {

namespace {

constexpr std::array<std::string_view, 5> kApplianceNames = {
    "Kettle", "Microwave", "WashingMachine", "Oven", "Toaster"};

// Strict decimal integer, optional leading '-'. Rejects empty and trailing junk.
bool parse_int(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// Accepts a trailing CR so files written on Windows still parse.
std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

std::string_view appliance_name(Appliance a) {
    return kApplianceNames[static_cast<std::size_t>(a)];
}

std::optional<Appliance> appliance_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kApplianceNames.size(); ++i) {
        if (kApplianceNames[i] == name) return static_cast<Appliance>(i);
    }
    return std::nullopt;
}

DeviceType device_type_of(Appliance a) {
    switch (a) {
        case Appliance::Kettle:
        case Appliance::Microwave:
        case Appliance::Toaster:
            return DeviceType::Type1;
        case Appliance::WashingMachine:
        case Appliance::Oven:
            return DeviceType::Type2;
    }
    return DeviceType::Type1;
}

ApplianceClass ApplianceClass::from_members(const std::vector<Appliance>& members) {
    ApplianceClass c;
    for (Appliance a : members) c = c.with(a);
    return c;
}

std::optional<ApplianceClass> ApplianceClass::from_bits(std::uint8_t bits) {
    if (bits > 0x1f) return std::nullopt;
    ApplianceClass c;
    c.bits_ = bits;
    return c;
}

bool ApplianceClass::is_singleton() const { return std::popcount(bits_) == 1; }

int ApplianceClass::size() const { return std::popcount(bits_); }

std::vector<Appliance> ApplianceClass::members() const {
    std::vector<Appliance> out;
    for (Appliance a : kAllAppliances) {
        if (contains(a)) out.push_back(a);
    }
    return out;
}

std::string ApplianceClass::name() const {
    if (is_background()) return "Background";
    std::string out;
    for (Appliance a : members()) {
        if (!out.empty()) out += '+';
        out += appliance_name(a);
    }
    return out;
}

std::optional<ApplianceClass> ApplianceClass::from_name(std::string_view name) {
    if (name == "Background") return background();
    ApplianceClass c;
    std::size_t start = 0;
    while (start <= name.size()) {
        std::size_t plus = name.find('+', start);
        std::string_view part = plus == std::string_view::npos
                                    ? name.substr(start)
                                    : name.substr(start, plus - start);
        auto a = appliance_from_name(part);
        if (!a) return std::nullopt;
        c = c.with(*a);
        if (plus == std::string_view::npos) break;
        start = plus + 1;
    }
    return c;
}

std::vector<MeterReading> parse_reading_stream(std::istream& source) {
    std::vector<MeterReading> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view v = strip_cr(line);
        if (v.empty()) continue;
        auto fields = split_fields(v);
        std::int64_t ts = 0;
        std::int64_t watts = 0;
        if (fields.size() != 3 || fields[0].empty() || !parse_int(fields[1], ts) ||
            !parse_int(fields[2], watts) || ts < 0 || watts < 0) {
            throw MalformedLine(line_no, std::string(v));
        }
        out.push_back(MeterReading{std::string(fields[0]), ts, watts});
    }
    return out;
}

std::vector<MeterReading> parse_reading_string(const std::string& text) {
    std::istringstream in(text);
    return parse_reading_stream(in);
}

void serialize_readings(const std::vector<MeterReading>& readings, std::ostream& out) {
    for (const auto& r : readings) {
        out << r.pid << ',' << r.ts << ',' << r.watts << '\n';
    }
}

std::string serialize_readings(const std::vector<MeterReading>& readings) {
    std::ostringstream out;
    serialize_readings(readings, out);
    return out.str();
}

std::vector<Annotation> parse_annotations(std::istream& source) {
    std::vector<Annotation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view v = strip_cr(line);
        if (v.empty()) continue;
        auto fields = split_fields(v);
        std::int64_t ts = 0;
        if (fields.size() != 4 || fields[0].empty() || !parse_int(fields[3], ts) || ts < 0) {
            throw MalformedLine(line_no, std::string(v));
        }
        auto appliance = appliance_from_name(fields[1]);
        bool on = fields[2] == "on";
        if (!appliance || (!on && fields[2] != "off")) {
            throw MalformedLine(line_no, std::string(v));
        }
        out.push_back(Annotation{std::string(fields[0]), *appliance, on, ts});
    }
    return out;
}

std::vector<Annotation> parse_annotation_string(const std::string& text) {
    std::istringstream in(text);
    return parse_annotations(in);
}

void serialize_annotations(const std::vector<Annotation>& annotations, std::ostream& out) {
    for (const auto& a : annotations) {
        out << a.pid << ',' << appliance_name(a.appliance) << ','
            << (a.on ? "on" : "off") << ',' << a.ts << '\n';
    }
}

ValidatedStream normalize_stream(const std::vector<MeterReading>& readings,
                                 std::int64_t cadence_s, std::int64_t gap_tolerance_s) {
    ValidatedStream out;
    out.cadence_s = cadence_s;
    if (readings.empty()) return out;

    out.pid = readings.front().pid;
    for (const auto& r : readings) {
        if (r.pid != out.pid) {
            throw MixedMeter("normalize_stream: mixed pids '" + out.pid + "' and '" +
                             r.pid + "'");
        }
    }

    std::vector<MeterReading> sorted = readings;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const MeterReading& a, const MeterReading& b) { return a.ts < b.ts; });

    // Duplicate timestamps: last value in input order wins (CAD retransmission).
    out.readings.reserve(sorted.size());
    for (const auto& r : sorted) {
        if (!out.readings.empty() && out.readings.back().ts == r.ts) {
            out.readings.back() = r;
        } else {
            out.readings.push_back(r);
        }
    }

    for (std::size_t i = 1; i < out.readings.size(); ++i) {
        const std::int64_t prev = out.readings[i - 1].ts;
        const std::int64_t cur = out.readings[i].ts;
        if (cur - prev > gap_tolerance_s) out.gaps.emplace_back(prev, cur);
    }
    return out;
}

std::string iso_date(std::int64_t day) {
    const CivilDate c = civil_from_day(day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

bool parse_iso_date(const std::string& s, std::int64_t& day_out) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    std::int64_t y = 0;
    std::int64_t m = 0;
    std::int64_t d = 0;
    auto num = [](std::string_view v, std::int64_t& out) {
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        return ec == std::errc{} && p == v.data() + v.size();
    };
    if (!num(std::string_view(s).substr(0, 4), y) ||
        !num(std::string_view(s).substr(5, 2), m) ||
        !num(std::string_view(s).substr(8, 2), d)) {
        return false;
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) return false;
    day_out = day_from_civil(static_cast<int>(y), static_cast<unsigned>(m),
                             static_cast<unsigned>(d));
    return true;
}

}  // namespace bmi
