#pragma once

// Internal JSON representations shared by the persistence layer and the
// HTTP endpoint, so files on disk and response bodies stay one format.

#include "bmi/anomaly.hpp"
#include "bmi/behavior.hpp"
#include "bmi/core.hpp"
#include "json.hpp"

namespace bmi::detail {

// JSON has no infinity literal, so infinite scores travel as strings.
nlohmann::json score_number(double v);
double number_from(const nlohmann::json& j);

Appliance appliance_from(const nlohmann::json& j);
Status status_from(const nlohmann::json& j);

nlohmann::json score_to_json(const AnomalyScore& s);
AnomalyScore score_from_json(const nlohmann::json& j);

nlohmann::json status_to_json(const TrafficLightStatus& s);
TrafficLightStatus status_from_json(const nlohmann::json& j);

nlohmann::json rule_to_json(const AssociationRule& r);
AssociationRule rule_from_json(const nlohmann::json& j);

nlohmann::json windows_to_json(const std::vector<ObservationWindow>& windows);
std::vector<ObservationWindow> windows_from_json(const nlohmann::json& arr);

}  // namespace bmi::detail
