#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bmi/anomaly.hpp"

namespace bmi {

struct HouseholdEconomics {
    std::string pid;
    double income_bhc = 0.0;  // currency per year, before housing costs
    double income_ahc = 0.0;  // after housing costs
    double fuel_cost = 0.0;   // modelled annual fuel spend
    int occupants = 1;
};

struct IndicatorVerdict {
    std::string pid;
    bool ten_percent_poor = false;
    double ratio = 0.0;  // fuel_cost / income_bhc
    bool lihc_poor = false;
    double fuel_threshold = 0.0;    // equivalised median fuel cost
    double income_threshold = 0.0;  // 0.6 * median equivalised AHC + own equivalised fuel
};

// Household-size weights: 1 occupant = 1.0, 2 = 1.5, +0.3 per extra.
struct EquivalisationScale {
    double single = 1.0;
    double couple = 1.5;
    double per_extra = 0.3;

    double weight(int occupants) const;
};

struct TenPercentResult {
    double ratio = 0.0;
    bool fuel_poor = false;  // strictly more than 10% of BHC income on fuel
};

// Throws ZeroIncome when income_bhc is not positive.
TenPercentResult ten_percent(const HouseholdEconomics& econ);

// Low Income High Cost over the whole population: fuel poor iff the
// equivalised fuel cost exceeds the population median AND equivalised AHC
// income falls below 60% of its median plus the household's own
// equivalised fuel cost. Fills only the LIHC fields of each verdict.
std::vector<IndicatorVerdict> lihc(const std::vector<HouseholdEconomics>& population,
                                   const EquivalisationScale& scale = {});

// Both indicators in one pass (ten_percent + lihc fields populated).
std::vector<IndicatorVerdict> evaluate_indicators(
    const std::vector<HouseholdEconomics>& population, const EquivalisationScale& scale = {});

struct Confusion {
    std::size_t both = 0;            // indicator poor and status Red
    std::size_t indicator_only = 0;  // poor, not Red
    std::size_t status_only = 0;     // Red, not poor
    std::size_t neither = 0;

    std::size_t total() const { return both + indicator_only + status_only + neither; }
    double agreement() const {
        std::size_t n = total();
        return n == 0 ? 0.0 : static_cast<double>(both + neither) / static_cast<double>(n);
    }
};

struct AgreementReport {
    Confusion ten_percent;
    Confusion lihc;
};

// Confusion counts between each indicator verdict and status == Red.
// Throws PidMismatch unless verdicts and statuses cover the same pids.
AgreementReport compare(const std::vector<IndicatorVerdict>& verdicts,
                        const std::vector<TrafficLightStatus>& statuses);

// Population CSV: "pid,income_bhc,income_ahc,fuel_cost,occupants" lines.
std::vector<HouseholdEconomics> parse_population(std::istream& source);
std::vector<HouseholdEconomics> parse_population_string(const std::string& text);

// Even-sized inputs average the two central values.
double median(std::vector<double> values);

}  // namespace bmi
