#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bmi/errors.hpp"

namespace bmi {

// The five ADL appliances detectable from 10-second aggregate readings.
enum class Appliance : std::uint8_t {
    Kettle = 0,
    Microwave = 1,
    WashingMachine = 2,
    Oven = 3,
    Toaster = 4,
};

inline constexpr std::array<Appliance, 5> kAllAppliances = {
    Appliance::Kettle, Appliance::Microwave, Appliance::WashingMachine,
    Appliance::Oven, Appliance::Toaster};

std::string_view appliance_name(Appliance a);
std::optional<Appliance> appliance_from_name(std::string_view name);

// On/off, multi-state, continuously variable, always-on.
enum class DeviceType : std::uint8_t { Type1 = 1, Type2 = 2, Type3 = 3, Type4 = 4 };

DeviceType device_type_of(Appliance a);

// Classification label: a canonical (duplicate-free, order-free) subset of
// the five appliances encoded as a bitmask. Empty set = Background.
class ApplianceClass {
public:
    constexpr ApplianceClass() = default;
    constexpr explicit ApplianceClass(Appliance a)
        : bits_(static_cast<std::uint8_t>(1u << static_cast<unsigned>(a))) {}

    static constexpr ApplianceClass background() { return ApplianceClass{}; }
    static ApplianceClass from_members(const std::vector<Appliance>& members);
    // Accepts any mask over the five appliance bits; returns nullopt above 0x1f.
    static std::optional<ApplianceClass> from_bits(std::uint8_t bits);

    bool is_background() const { return bits_ == 0; }
    bool is_singleton() const;
    bool contains(Appliance a) const {
        return bits_ & (1u << static_cast<unsigned>(a));
    }
    int size() const;
    std::uint8_t bits() const { return bits_; }

    // Members in canonical (ascending enum) order.
    std::vector<Appliance> members() const;

    // "Background", "Kettle", "Kettle+Toaster", ... members in canonical order.
    std::string name() const;
    static std::optional<ApplianceClass> from_name(std::string_view name);

    ApplianceClass with(Appliance a) const {
        ApplianceClass c = *this;
        c.bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(a));
        return c;
    }

    auto operator<=>(const ApplianceClass&) const = default;

private:
    std::uint8_t bits_ = 0;
};

// One 10-second aggregated power sample from the CAD payload.
struct MeterReading {
    std::string pid;    // meter identifier, non-empty
    std::int64_t ts;    // unix seconds, >= 0
    std::int64_t watts; // aggregated active power, >= 0

    bool operator==(const MeterReading&) const = default;
};

// Time-ordered, de-duplicated readings of a single meter plus the cadence
// gaps found during validation. Gaps are recorded, never interpolated.
struct ValidatedStream {
    std::string pid;
    std::vector<MeterReading> readings;                          // strictly increasing ts
    std::vector<std::pair<std::int64_t, std::int64_t>> gaps;     // (last ts before, first ts after)
    std::int64_t cadence_s = 10;
};

// A classified appliance activation interval.
struct DetectionEvent {
    std::string pid;
    std::set<Appliance> appliances;  // non-empty, singletons after decode
    std::int64_t start_ts = 0;
    std::int64_t end_ts = 0;         // exclusive, > start_ts
    double confidence = 0.0;         // in [0,1]
};

// Annotation row: ground-truth on/off marks used for signature extraction.
struct Annotation {
    std::string pid;
    Appliance appliance;
    bool on;          // action: on/off
    std::int64_t ts;

    bool operator==(const Annotation&) const = default;
};

// --- readings format: UTF-8, LF-terminated "pid,ts,watts" lines, no header ---

// Every well-formed line yields one reading, order preserved. Throws
// MalformedLine (with line number) on wrong field count, non-integer
// fields, negative watts, negative ts, or empty pid.
std::vector<MeterReading> parse_reading_stream(std::istream& source);
std::vector<MeterReading> parse_reading_string(const std::string& text);

void serialize_readings(const std::vector<MeterReading>& readings, std::ostream& out);
std::string serialize_readings(const std::vector<MeterReading>& readings);

// --- annotation format: "pid,appliance,action,ts", action in {on,off} ---

std::vector<Annotation> parse_annotations(std::istream& source);
std::vector<Annotation> parse_annotation_string(const std::string& text);
void serialize_annotations(const std::vector<Annotation>& annotations, std::ostream& out);

// Sorts by ts (stable), collapses duplicate timestamps to the last value in
// input order, and records every inter-sample interval > gap_tolerance_s.
// Throws MixedMeter when readings carry more than one pid.
ValidatedStream normalize_stream(const std::vector<MeterReading>& readings,
                                 std::int64_t cadence_s, std::int64_t gap_tolerance_s);

}  // namespace bmi
