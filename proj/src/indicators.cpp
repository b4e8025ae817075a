#include "bmi/indicators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include "bmi/errors.hpp"

namespace bmi {

double EquivalisationScale::weight(int occupants) const {
    if (occupants < 1) throw Error("household must have at least one occupant");
    if (occupants == 1) return single;
    return couple + per_extra * static_cast<double>(occupants - 2);
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error("median of an empty list");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

TenPercentResult ten_percent(const HouseholdEconomics& econ) {
    if (!(econ.income_bhc > 0.0))
        throw ZeroIncome("household " + econ.pid + " has no before-housing-costs income");
    TenPercentResult r;
    r.ratio = econ.fuel_cost / econ.income_bhc;
    r.fuel_poor = r.ratio > 0.10;
    return r;
}

std::vector<IndicatorVerdict> lihc(const std::vector<HouseholdEconomics>& population,
                                   const EquivalisationScale& scale) {
    if (population.empty()) throw EmptyPopulation("LIHC needs at least one household");
    std::vector<double> equiv_fuel(population.size());
    std::vector<double> equiv_ahc(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        double w = scale.weight(population[i].occupants);
        equiv_fuel[i] = population[i].fuel_cost / w;
        equiv_ahc[i] = population[i].income_ahc / w;
    }
    const double fuel_threshold = median(equiv_fuel);
    const double income_median = median(equiv_ahc);

    std::vector<IndicatorVerdict> out(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        IndicatorVerdict& v = out[i];
        v.pid = population[i].pid;
        v.fuel_threshold = fuel_threshold;
        v.income_threshold = 0.6 * income_median + equiv_fuel[i];
        v.lihc_poor = equiv_fuel[i] > fuel_threshold && equiv_ahc[i] < v.income_threshold;
    }
    return out;
}

std::vector<IndicatorVerdict> evaluate_indicators(
    const std::vector<HouseholdEconomics>& population, const EquivalisationScale& scale) {
    std::vector<IndicatorVerdict> out = lihc(population, scale);
    for (std::size_t i = 0; i < population.size(); ++i) {
        TenPercentResult tp = ten_percent(population[i]);
        out[i].ratio = tp.ratio;
        out[i].ten_percent_poor = tp.fuel_poor;
    }
    return out;
}

AgreementReport compare(const std::vector<IndicatorVerdict>& verdicts,
                        const std::vector<TrafficLightStatus>& statuses) {
    std::map<std::string, bool> red;
    for (const TrafficLightStatus& s : statuses) red[s.pid] = (s.status == Status::Red);
    if (red.size() != statuses.size())
        throw PidMismatch("duplicate household in status list");
    if (verdicts.size() != red.size())
        throw PidMismatch("indicator verdicts cover " + std::to_string(verdicts.size()) +
                          " households, statuses cover " + std::to_string(red.size()));

    AgreementReport rep;
    for (const IndicatorVerdict& v : verdicts) {
        auto it = red.find(v.pid);
        if (it == red.end())
            throw PidMismatch("household " + v.pid + " has an indicator verdict but no status");
        auto tally = [&](Confusion& c, bool poor) {
            if (poor && it->second) c.both += 1;
            else if (poor) c.indicator_only += 1;
            else if (it->second) c.status_only += 1;
            else c.neither += 1;
        };
        tally(rep.ten_percent, v.ten_percent_poor);
        tally(rep.lihc, v.lihc_poor);
    }
    return rep;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

bool parse_money(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && std::isfinite(out) && out >= 0.0;
}

bool parse_count(const std::string& s, int& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && out >= 1;
}

}  // namespace

std::vector<HouseholdEconomics> parse_population(std::istream& source) {
    std::vector<HouseholdEconomics> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv(line);
        HouseholdEconomics h;
        if (f.size() != 5 || f[0].empty() || !parse_money(f[1], h.income_bhc) ||
            !parse_money(f[2], h.income_ahc) || !parse_money(f[3], h.fuel_cost) ||
            !parse_count(f[4], h.occupants))
            throw MalformedLine(line_no, line);
        h.pid = f[0];
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<HouseholdEconomics> parse_population_string(const std::string& text) {
    std::istringstream ss(text);
    return parse_population(ss);
}

}  // namespace bmi
