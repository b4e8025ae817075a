#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bmi/config.hpp"
#include "bmi/errors.hpp"
#include "bmi/indicators.hpp"
#include "bmi/persist.hpp"
#include "bmi/pipeline.hpp"
#include "bmi/server.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

volatile std::sig_atomic_t g_stop = 0;
void request_stop(int) { g_stop = 1; }

bmi::RunConfig build_config(const std::string& path, const std::vector<std::string>& overrides) {
    bmi::RunConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw bmi::ConfigError("cannot open config file: " + path);
        bmi::apply_config(in, cfg);
    }
    for (const auto& kv : overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw bmi::ConfigError("bad --set, expected key=value: " + kv);
        bmi::apply_override(kv.substr(0, eq), kv.substr(eq + 1), cfg);
    }
    bmi::validate_config(cfg);
    return cfg;
}

void run_simulate(const bmi::RunConfig& cfg) {
    auto out = bmi::mode_simulate(cfg);
    std::cout << "simulated " << out.pid << ": " << out.days << " days, " << out.readings
              << " readings, " << out.annotations << " annotations\n"
              << "files under " << cfg.data_dir << "\n";
}

void run_train_devices(const bmi::RunConfig& cfg) {
    auto out = bmi::mode_device_training(cfg);
    std::cout << "dataset: " << out.train_segments << " train, " << out.validation_segments
              << " validation, " << out.test_segments << " test across " << out.classes.size()
              << " classes\n";
    std::cout << std::fixed << std::setprecision(4);
    for (std::size_t e = 0; e < out.history.size(); ++e) {
        const auto& s = out.history[e];
        std::cout << "epoch " << (e + 1) << ": train loss " << s.train_loss << " acc "
                  << s.train_accuracy << ", validation loss " << s.validation_loss << " acc "
                  << s.validation_accuracy << "\n";
    }
    std::cout << "test accuracy " << out.test_accuracy << ", loss " << out.test_loss << "\n"
              << "checkpoint written to "
              << bmi::DataLayout(cfg.data_dir).checkpoint_bin().string() << "\n";
}

void run_learn_baseline(const bmi::RunConfig& cfg) {
    for (const auto& out : bmi::mode_behavioural_training(cfg)) {
        std::cout << "baseline for " << out.pid << ": days " << out.first_day << ".."
                  << out.last_day << ", " << out.events << " events\n";
    }
}

void run_predict(const bmi::RunConfig& cfg) {
    for (const auto& out : bmi::mode_prediction(cfg)) {
        std::cout << out.pid << ": " << out.statuses.size() << " days scored";
        if (!out.statuses.empty())
            std::cout << ", latest " << bmi::status_name(out.statuses.back().status);
        std::cout << ", " << out.alerts.size() << " alerts\n";
        for (const auto& a : out.alerts) {
            std::cout << "  alert day " << a.day << ": " << bmi::status_name(a.previous_status)
                      << " -> " << bmi::status_name(a.status) << " (" << a.reasons.size()
                      << " outlier cells)\n";
        }
    }
}

void run_indicators(const bmi::RunConfig& cfg) {
    bmi::DataLayout layout(cfg.data_dir);
    auto population = bmi::parse_population_string(bmi::read_text(layout.population_csv()));
    auto verdicts = bmi::evaluate_indicators(population, cfg.weights);
    std::cout << std::fixed << std::setprecision(3);
    for (const auto& v : verdicts) {
        std::cout << v.pid << ": fuel/income " << v.ratio << ", ten-percent "
                  << (v.ten_percent_poor ? "poor" : "not poor") << ", lihc "
                  << (v.lihc_poor ? "poor" : "not poor") << "\n";
    }

    std::vector<std::string> pids;
    for (const auto& v : verdicts) pids.push_back(v.pid);
    auto statuses = bmi::latest_statuses(layout, pids);
    if (statuses.size() != verdicts.size()) {
        std::cout << "no full status coverage; skipping agreement report\n";
        return;
    }
    auto report = bmi::compare(verdicts, statuses);
    auto show = [](const char* name, const bmi::Confusion& c) {
        std::cout << name << " vs red status: both " << c.both << ", indicator only "
                  << c.indicator_only << ", status only " << c.status_only << ", neither "
                  << c.neither << " (agreement " << c.agreement() << ")\n";
    };
    show("ten-percent", report.ten_percent);
    show("lihc", report.lihc);
}

void run_serve(const bmi::RunConfig& cfg) {
    bmi::AlertService service(cfg);
    int port = service.start();
    std::cout << "listening on " << cfg.host << ":" << port << "\n" << std::flush;
    std::signal(SIGINT, request_stop);
    std::signal(SIGTERM, request_stop);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    std::cout << "stopped\n";
}

void run_report(const bmi::RunConfig& cfg) {
    bmi::DataLayout layout(cfg.data_dir);
    std::cout << std::fixed << std::setprecision(3);

    if (fs::exists(layout.metrics_json())) {
        auto metrics = nlohmann::json::parse(bmi::read_text(layout.metrics_json()));
        std::cout << "device model: " << metrics.at("classes").size() << " classes, test accuracy "
                  << metrics.at("test").at("accuracy").get<double>() << ", loss "
                  << metrics.at("test").at("loss").get<double>() << "\n";
    } else {
        std::cout << "device model: not trained\n";
    }

    auto tracked = layout.tracked_households();
    if (tracked.empty()) std::cout << "households: none tracked\n";
    for (const auto& pid : tracked) {
        auto statuses = bmi::deserialize_statuses(bmi::read_text(layout.statuses_json(pid)));
        std::cout << pid << ": ";
        if (statuses.empty()) {
            std::cout << "no status yet\n";
            continue;
        }
        const auto& last = statuses.back();
        std::cout << bmi::status_name(last.status) << " on day " << last.day << " ("
                  << last.consecutive_anomalous_days << " anomalous days running";
        fs::path alerts_path = layout.alerts_json(pid);
        if (fs::exists(alerts_path)) {
            auto alerts = bmi::deserialize_alerts(bmi::read_text(alerts_path));
            std::cout << ", " << alerts.size() << " alerts";
        }
        std::cout << ")\n";
    }

    if (!fs::exists(layout.regions_csv())) return;
    std::map<std::string, std::vector<std::string>> regions;
    for (auto& [pid, region] : bmi::parse_regions_string(bmi::read_text(layout.regions_csv())))
        regions[region].push_back(pid);
    for (const auto& [region_id, members] : regions) {
        auto statuses = bmi::latest_statuses(layout, members);
        std::cout << "region " << region_id << ": " << members.size() << " households";
        if (statuses.empty()) {
            std::cout << ", no statuses yet\n";
            continue;
        }
        auto rules = bmi::mine_region_rules(layout, members, cfg);
        auto summary = bmi::region_aggregate(region_id, statuses, rules.before, rules.after,
                                             cfg.drift_threshold);
        std::cout << ", green " << summary.histogram[0] << " amber " << summary.histogram[1]
                  << " red " << summary.histogram[2] << ", drifted rules "
                  << summary.drifted_rules.size() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"household load disaggregation and routine monitoring"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "key = value configuration file");
    app.add_option("-s,--set", overrides, "override one configuration key (key=value)")
        ->type_size(1);

    auto add_mode = [&](const char* name, const char* desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->fallthrough();
        return sub;
    };
    CLI::App* simulate = add_mode("simulate", "synthesize a household and write its files");
    CLI::App* train = add_mode("train-devices", "train the appliance classifier");
    CLI::App* baseline = add_mode("learn-baseline", "learn routine baselines from history");
    CLI::App* predict = add_mode("predict", "score post-baseline days and emit alerts");
    CLI::App* indicators = add_mode("indicators", "fuel-poverty indicators over population.csv");
    CLI::App* serve = add_mode("serve", "serve the monitoring endpoint");
    CLI::App* report = add_mode("report", "summarize persisted pipeline state");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        bmi::RunConfig cfg = build_config(config_path, overrides);
        if (simulate->parsed()) run_simulate(cfg);
        if (train->parsed()) run_train_devices(cfg);
        if (baseline->parsed()) run_learn_baseline(cfg);
        if (predict->parsed()) run_predict(cfg);
        if (indicators->parsed()) run_indicators(cfg);
        if (serve->parsed()) run_serve(cfg);
        if (report->parsed()) run_report(cfg);
    } catch (const bmi::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
