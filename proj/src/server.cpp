#include "bmi/server.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bmi/errors.hpp"
#include "bmi/persist.hpp"
#include "bmi/pipeline.hpp"
#include "bmi/time_util.hpp"
#include "httplib.h"
#include "json.hpp"
#include "json_convert.hpp"

namespace bmi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
    send_json(res, json{{"error", msg}}, status);
}

std::optional<TrafficLightStatus> latest_status(const DataLayout& layout, const std::string& pid) {
    fs::path path = layout.statuses_json(pid);
    if (!fs::exists(path)) return std::nullopt;
    auto statuses = deserialize_statuses(read_text(path));
    if (statuses.empty()) return std::nullopt;
    return statuses.back();
}

// Day bounds accept either a raw day index or an ISO date.
std::int64_t day_param(const std::string& raw, const char* name) {
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec == std::errc() && end == raw.data() + raw.size()) return v;
    if (parse_iso_date(raw, v)) return v;
    throw InputError(std::string("bad ") + name + " parameter: " + raw);
}

}  // namespace

struct AlertService::Impl {
    RunConfig cfg;
    DataLayout layout;
    httplib::Server svr;
    std::thread worker;
    std::mutex ingest_mu;

    explicit Impl(RunConfig c) : cfg(std::move(c)), layout(cfg.data_dir) { register_routes(); }

    ~Impl() { shutdown(); }

    void shutdown() {
        svr.stop();
        if (worker.joinable()) worker.join();
    }

    // Maps thrown errors onto the HTTP contract so handlers can stay plain.
    template <typename Fn>
    httplib::Server::Handler guard(Fn fn) {
        return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const InputError& e) {
                send_error(res, 400, e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            }
        };
    }

    void register_routes() {
        svr.Get("/v1/households", guard([this](const httplib::Request&, httplib::Response& res) {
            households(res);
        }));
        svr.Get(R"(/v1/households/([^/]+)/status)",
                guard([this](const httplib::Request& req, httplib::Response& res) {
                    household_status(req.matches[1], res);
                }));
        svr.Get(R"(/v1/households/([^/]+)/anomalies)",
                guard([this](const httplib::Request& req, httplib::Response& res) {
                    household_anomalies(req, res);
                }));
        svr.Get(R"(/v1/regions/([^/]+)/summary)",
                guard([this](const httplib::Request& req, httplib::Response& res) {
                    region_summary(req.matches[1], res);
                }));
        svr.Post("/v1/ingest", guard([this](const httplib::Request& req, httplib::Response& res) {
            ingest(req.body, res);
        }));
    }

    void households(httplib::Response& res) {
        std::set<std::string> ids;
        for (auto& pid : layout.metered_households()) ids.insert(std::move(pid));
        for (auto& pid : layout.tracked_households()) ids.insert(std::move(pid));
        json arr = json::array();
        for (const auto& pid : ids) {
            json j;
            j["pid"] = pid;
            if (auto s = latest_status(layout, pid)) {
                j["day"] = s->day;
                j["status"] = status_name(s->status);
            } else {
                j["status"] = "none";
            }
            arr.push_back(std::move(j));
        }
        send_json(res, arr);
    }

    void household_status(const std::string& pid, httplib::Response& res) {
        auto s = latest_status(layout, pid);
        if (!s) {
            send_error(res, 404, "unknown household: " + pid);
            return;
        }
        send_json(res, detail::status_to_json(*s));
    }

    void household_anomalies(const httplib::Request& req, httplib::Response& res) {
        const std::string& pid = req.matches[1];
        fs::path path = layout.statuses_json(pid);
        if (!fs::exists(path)) {
            send_error(res, 404, "unknown household: " + pid);
            return;
        }
        std::int64_t from = std::numeric_limits<std::int64_t>::min();
        std::int64_t to = std::numeric_limits<std::int64_t>::max();
        if (req.has_param("from")) from = day_param(req.get_param_value("from"), "from");
        if (req.has_param("to")) to = day_param(req.get_param_value("to"), "to");
        json arr = json::array();
        for (const auto& status : deserialize_statuses(read_text(path))) {
            if (status.day < from || status.day > to) continue;
            for (const auto& score : status.reasons) arr.push_back(detail::score_to_json(score));
        }
        send_json(res, arr);
    }

    void region_summary(const std::string& region_id, httplib::Response& res) {
        auto members = region_members(layout, region_id);
        if (members.empty()) {
            send_error(res, 404, "unknown region: " + region_id);
            return;
        }
        auto statuses = latest_statuses(layout, members);
        RegionSummary summary;
        try {
            auto rules = mine_region_rules(layout, members, cfg);
            summary = region_aggregate(region_id, statuses, rules.before, rules.after,
                                       cfg.drift_threshold);
        } catch (const EmptyRegion& e) {
            send_error(res, 404, e.what());
            return;
        }
        json j;
        json drifted = json::array();
        for (const auto& d : summary.drifted_rules) {
            json dj;
            dj["antecedent"] = d.antecedent;
            dj["consequent"] = d.consequent;
            dj["support_after"] = d.support_after;
            dj["support_before"] = d.support_before;
            drifted.push_back(std::move(dj));
        }
        j["drifted_rules"] = std::move(drifted);
        j["histogram"] = {{"amber", summary.histogram[1]},
                          {"green", summary.histogram[0]},
                          {"red", summary.histogram[2]}};
        j["households"] = summary.households;
        j["region_id"] = summary.region_id;
        send_json(res, j);
    }

    void ingest(const std::string& body, httplib::Response& res) {
        auto readings = parse_reading_string(body);
        if (readings.empty()) throw InputError("empty ingest batch");
        std::map<std::string, std::vector<MeterReading>> by_pid;
        for (auto& r : readings) by_pid[r.pid].push_back(std::move(r));

        std::lock_guard<std::mutex> lock(ingest_mu);
        layout.ensure_tree();
        json pids = json::array();
        for (const auto& [pid, batch] : by_pid) {
            fs::path path = layout.readings_csv(pid);
            std::string text;
            if (fs::exists(path)) {
                text = read_text(path);
                if (!text.empty() && text.back() != '\n') text += '\n';
            }
            text += serialize_readings(batch);
            write_text_atomic(path, text);
            pids.push_back(pid);
        }
        json j;
        j["accepted"] = readings.size();
        j["households"] = std::move(pids);
        send_json(res, j);
    }
};

AlertService::AlertService(RunConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

AlertService::~AlertService() = default;

int AlertService::start() {
    Impl& s = *impl_;
    int port = s.cfg.port;
    if (port == 0) {
        port = s.svr.bind_to_any_port(s.cfg.host);
        if (port < 0) throw Error("cannot bind " + s.cfg.host);
    } else if (!s.svr.bind_to_port(s.cfg.host, port)) {
        throw Error("cannot bind " + s.cfg.host + ":" + std::to_string(port));
    }
    s.worker = std::thread([&s] { s.svr.listen_after_bind(); });
    s.svr.wait_until_ready();
    return port;
}

bool AlertService::run() {
    Impl& s = *impl_;
    return s.svr.listen(s.cfg.host, s.cfg.port);
}

void AlertService::stop() { impl_->shutdown(); }

}  // namespace bmi
