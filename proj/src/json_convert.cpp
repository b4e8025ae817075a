#include "json_convert.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bmi/errors.hpp"
#include "bmi/persist.hpp"

namespace bmi::detail {

using nlohmann::json;

json score_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from(const json& j) {
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw InputError("unexpected numeric string: " + s);
    }
    return j.get<double>();
}

Appliance appliance_from(const json& j) {
    auto a = appliance_from_name(j.get_ref<const std::string&>());
    if (!a) throw InputError("unknown appliance: " + j.get<std::string>());
    return *a;
}

Status status_from(const json& j) {
    auto s = status_from_name(j.get_ref<const std::string&>());
    if (!s) throw InputError("unknown status: " + j.get<std::string>());
    return *s;
}

json score_to_json(const AnomalyScore& s) {
    json j;
    j["appliance"] = appliance_name(s.appliance);
    j["day"] = s.day;
    j["is_outlier"] = s.is_outlier;
    j["observed"] = s.observed;
    j["pid"] = s.pid;
    j["window"] = s.window;
    j["z"] = score_number(s.z);
    return j;
}

AnomalyScore score_from_json(const json& j) {
    AnomalyScore s;
    s.pid = j.at("pid").get<std::string>();
    s.day = j.at("day").get<std::int64_t>();
    s.appliance = appliance_from(j.at("appliance"));
    s.window = j.at("window").get<std::size_t>();
    s.observed = j.at("observed").get<int>();
    s.z = number_from(j.at("z"));
    s.is_outlier = j.at("is_outlier").get<bool>();
    return s;
}

json windows_to_json(const std::vector<ObservationWindow>& windows) {
    json arr = json::array();
    for (const auto& w : windows) {
        json j;
        j["end_hour"] = w.end_hour;
        j["name"] = w.name;
        j["start_hour"] = w.start_hour;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<ObservationWindow> windows_from_json(const json& arr) {
    std::vector<ObservationWindow> out;
    for (const auto& j : arr) {
        ObservationWindow w;
        w.name = j.at("name").get<std::string>();
        w.start_hour = j.at("start_hour").get<double>();
        w.end_hour = j.at("end_hour").get<double>();
        out.push_back(std::move(w));
    }
    return out;
}

json status_to_json(const TrafficLightStatus& s) {
    json j;
    j["consecutive_anomalous_days"] = s.consecutive_anomalous_days;
    j["day"] = s.day;
    j["pid"] = s.pid;
    json reasons = json::array();
    for (const auto& r : s.reasons) reasons.push_back(score_to_json(r));
    j["reasons"] = std::move(reasons);
    j["status"] = status_name(s.status);
    return j;
}

TrafficLightStatus status_from_json(const json& j) {
    TrafficLightStatus s;
    s.pid = j.at("pid").get<std::string>();
    s.day = j.at("day").get<std::int64_t>();
    s.status = status_from(j.at("status"));
    s.consecutive_anomalous_days = j.at("consecutive_anomalous_days").get<int>();
    for (const auto& r : j.at("reasons")) s.reasons.push_back(score_from_json(r));
    return s;
}

json rule_to_json(const AssociationRule& r) {
    json j;
    j["antecedent"] = r.antecedent;
    j["confidence"] = r.confidence;
    j["consequent"] = r.consequent;
    j["lift"] = r.lift;
    j["support"] = r.support;
    return j;
}

AssociationRule rule_from_json(const json& j) {
    AssociationRule r;
    r.antecedent = j.at("antecedent").get<std::vector<std::string>>();
    r.consequent = j.at("consequent").get<std::vector<std::string>>();
    r.support = j.at("support").get<double>();
    r.confidence = j.at("confidence").get<double>();
    r.lift = j.at("lift").get<double>();
    return r;
}

}  // namespace bmi::detail
