#include "bmi/anomaly.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "bmi/errors.hpp"

namespace bmi {

std::string_view status_name(Status s) {
    switch (s) {
        case Status::Green: return "green";
        case Status::Amber: return "amber";
        default: return "red";
    }
}

std::vector<AnomalyScore> zscore_day(const BehaviorVector& vector,
                                     const RoutineBaseline& baseline, double z_threshold) {
    if (!baseline.pid.empty() && baseline.pid != vector.pid)
        throw BaselineMissing("baseline belongs to " + baseline.pid + ", scoring " + vector.pid);
    if (baseline.windows.empty())
        throw BaselineMissing("baseline for " + vector.pid + " has no observation windows");

    std::vector<AnomalyScore> out;
    out.reserve(kAllAppliances.size() * baseline.windows.size());
    for (Appliance a : kAllAppliances) {
        auto it = baseline.cells.find(a);
        if (it == baseline.cells.end() || it->second.size() != baseline.windows.size())
            throw BaselineMissing("baseline for " + vector.pid + " lacks cells for " +
                                  std::string(appliance_name(a)));
        for (std::size_t w = 0; w < baseline.windows.size(); ++w) {
            const BaselineCell& cell = it->second[w];
            AnomalyScore s;
            s.pid = vector.pid;
            s.day = vector.day;
            s.appliance = a;
            s.window = w;
            s.observed = vector.count(a, w);
            double obs = static_cast<double>(s.observed);
            if (cell.stddev > 0.0) {
                s.z = (obs - cell.mean) / cell.stddev;
            } else if (obs == cell.mean) {
                s.z = 0.0;
            } else {
                s.z = std::numeric_limits<double>::infinity();
            }
            s.is_outlier = std::abs(s.z) > z_threshold;
            out.push_back(std::move(s));
        }
    }
    return out;
}

TrafficLightStatus update_traffic_light(const TrafficLightStatus& prev, const std::string& pid,
                                        std::int64_t day, const std::vector<AnomalyScore>& today,
                                        int amber_min_outliers, int red_days) {
    if (amber_min_outliers < 1) throw Error("amber_min_outliers must be at least 1");
    if (red_days < 1) throw Error("red_days must be at least 1");

    TrafficLightStatus st;
    st.pid = pid;
    st.day = day;
    int outliers = 0;
    for (const AnomalyScore& s : today) {
        if (s.is_outlier) {
            ++outliers;
            st.reasons.push_back(s);
        }
    }
    if (outliers < amber_min_outliers) {
        st.status = Status::Green;
        st.consecutive_anomalous_days = 0;
    } else {
        st.consecutive_anomalous_days = prev.consecutive_anomalous_days + 1;
        st.status = st.consecutive_anomalous_days >= red_days ? Status::Red : Status::Amber;
    }
    return st;
}

std::vector<std::set<std::string>> transactions_from_vectors(
    const std::vector<BehaviorVector>& vectors, const std::vector<ObservationWindow>& windows) {
    std::vector<std::set<std::string>> out;
    out.reserve(vectors.size());
    for (const BehaviorVector& v : vectors) {
        std::set<std::string> t;
        for (Appliance a : kAllAppliances) {
            for (std::size_t w = 0; w < windows.size(); ++w) {
                if (v.count(a, w) > 0)
                    t.insert(std::string(appliance_name(a)) + "@" + windows[w].name);
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

using Mask = std::uint64_t;

// Lexicographically ordered item list for a mask, given the id->item table.
std::vector<std::string> items_of(Mask m, const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (m & (Mask{1} << i)) out.push_back(items[i]);
    return out;
}

}  // namespace

std::vector<AssociationRule> mine_rules(const std::vector<std::set<std::string>>& transactions,
                                        double min_support, double min_confidence) {
    if (!(min_support > 0.0 && min_support <= 1.0))
        throw Error("min_support must lie in (0,1]");
    if (!(min_confidence > 0.0 && min_confidence <= 1.0))
        throw Error("min_confidence must lie in (0,1]");
    if (transactions.empty()) return {};

    // items sorted so masks enumerate in lexicographic item order
    std::vector<std::string> items;
    {
        std::set<std::string> s;
        for (const auto& t : transactions) s.insert(t.begin(), t.end());
        items.assign(s.begin(), s.end());
    }
    if (items.size() > 63) throw Error("rule mining supports at most 63 distinct items");

    std::map<std::string, std::size_t> id;
    for (std::size_t i = 0; i < items.size(); ++i) id[items[i]] = i;
    std::vector<Mask> tmasks;
    tmasks.reserve(transactions.size());
    for (const auto& t : transactions) {
        Mask m = 0;
        for (const std::string& item : t) m |= Mask{1} << id[item];
        tmasks.push_back(m);
    }
    const double n = static_cast<double>(tmasks.size());
    auto support_of = [&](Mask s) {
        std::size_t c = 0;
        for (Mask t : tmasks)
            if ((t & s) == s) ++c;
        return static_cast<double>(c) / n;
    };

    // levelwise frequent-set discovery
    std::map<Mask, double> support;
    std::vector<Mask> level;
    for (std::size_t i = 0; i < items.size(); ++i) {
        Mask m = Mask{1} << i;
        double s = support_of(m);
        if (s >= min_support) {
            support[m] = s;
            level.push_back(m);
        }
    }
    std::vector<Mask> frequent = level;
    while (!level.empty()) {
        std::set<Mask> candidates;
        for (std::size_t a = 0; a < level.size(); ++a) {
            for (std::size_t b = a + 1; b < level.size(); ++b) {
                Mask u = level[a] | level[b];
                if (std::popcount(u) !=
                    std::popcount(level[a]) + 1)
                    continue;
                // anti-monotone prune: all one-smaller subsets must be frequent
                bool ok = true;
                for (std::size_t i = 0; i < items.size() && ok; ++i) {
                    Mask bit = Mask{1} << i;
                    if ((u & bit) && !support.count(u & ~bit)) ok = false;
                }
                if (ok) candidates.insert(u);
            }
        }
        level.clear();
        for (Mask c : candidates) {
            double s = support_of(c);
            if (s >= min_support) {
                support[c] = s;
                level.push_back(c);
                frequent.push_back(c);
            }
        }
    }

    std::vector<AssociationRule> rules;
    for (Mask f : frequent) {
        if (std::popcount(f) < 2) continue;
        // every non-empty proper submask of f as antecedent
        for (Mask a = (f - 1) & f; a != 0; a = (a - 1) & f) {
            Mask c = f & ~a;
            double conf = support[f] / support[a];
            if (conf < min_confidence) continue;
            AssociationRule r;
            r.antecedent = items_of(a, items);
            r.consequent = items_of(c, items);
            r.support = support[f];
            r.confidence = conf;
            r.lift = conf / support[c];
            rules.push_back(std::move(r));
        }
    }
    std::sort(rules.begin(), rules.end(), [](const AssociationRule& l, const AssociationRule& r) {
        if (l.support != r.support) return l.support > r.support;
        if (l.confidence != r.confidence) return l.confidence > r.confidence;
        if (l.antecedent != r.antecedent) return l.antecedent < r.antecedent;
        return l.consequent < r.consequent;
    });
    return rules;
}

RegionSummary region_aggregate(const std::string& region_id,
                               const std::vector<TrafficLightStatus>& statuses,
                               const std::vector<AssociationRule>& rules_before,
                               const std::vector<AssociationRule>& rules_after,
                               double drift_threshold) {
    if (statuses.empty()) throw EmptyRegion("region " + region_id + " has no households");
    RegionSummary rs;
    rs.region_id = region_id;
    rs.households = statuses.size();
    for (const TrafficLightStatus& s : statuses)
        rs.histogram[static_cast<std::size_t>(s.status)] += 1;

    using Key = std::pair<std::vector<std::string>, std::vector<std::string>>;
    std::map<Key, std::pair<double, double>> by_rule;  // (before, after)
    for (const AssociationRule& r : rules_before)
        by_rule[{r.antecedent, r.consequent}].first = r.support;
    for (const AssociationRule& r : rules_after)
        by_rule[{r.antecedent, r.consequent}].second = r.support;
    for (const auto& [key, sup] : by_rule) {
        if (std::abs(sup.second - sup.first) >= drift_threshold) {
            RuleDrift d;
            d.antecedent = key.first;
            d.consequent = key.second;
            d.support_before = sup.first;
            d.support_after = sup.second;
            rs.drifted_rules.push_back(std::move(d));
        }
    }
    std::sort(rs.drifted_rules.begin(), rs.drifted_rules.end(),
              [](const RuleDrift& l, const RuleDrift& r) {
                  double dl = std::abs(l.support_after - l.support_before);
                  double dr = std::abs(r.support_after - r.support_before);
                  if (dl != dr) return dl > dr;
                  if (l.antecedent != r.antecedent) return l.antecedent < r.antecedent;
                  return l.consequent < r.consequent;
              });
    return rs;
}

}  // namespace bmi
