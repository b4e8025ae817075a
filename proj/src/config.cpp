#include "bmi/config.hpp"

#include <algorithm>
#include <charconv>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>

#include "bmi/errors.hpp"

namespace bmi {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

std::int64_t to_i64(const std::string& key, const std::string& value) {
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || p != value.data() + value.size()) bad_value(key, value, "an integer");
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    std::int64_t v = to_i64(key, value);
    if (v < INT_MIN || v > INT_MAX) bad_value(key, value, "an integer");
    return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || p != value.data() + value.size())
        bad_value(key, value, "an unsigned integer");
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || p != value.data() + value.size() || !std::isfinite(out))
        bad_value(key, value, "a finite number");
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "true or false");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        parts.push_back(trim(std::string_view(s).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& part : split(value, ',')) out.push_back(to_double(key, part));
    return out;
}

// "name:start-end,name:start-end,..."; an empty value restores the defaults.
std::vector<ObservationWindow> to_windows(const std::string& key, const std::string& value) {
    if (value.empty()) return default_windows();
    std::vector<ObservationWindow> out;
    for (const auto& part : split(value, ',')) {
        std::size_t colon = part.find(':');
        std::size_t dash = part.find('-', colon == std::string::npos ? 0 : colon + 1);
        if (colon == std::string::npos || dash == std::string::npos || colon == 0)
            bad_value(key, part, "name:start-end");
        ObservationWindow w;
        w.name = trim(std::string_view(part).substr(0, colon));
        w.start_hour = to_double(key, trim(std::string_view(part).substr(colon + 1, dash - colon - 1)));
        w.end_hour = to_double(key, trim(std::string_view(part).substr(dash + 1)));
        out.push_back(std::move(w));
    }
    return out;
}

// "power:duration,power:duration,..."
std::vector<std::pair<std::int64_t, std::int64_t>> to_states(const std::string& key,
                                                             const std::string& value) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (const auto& part : split(value, ',')) {
        std::size_t colon = part.find(':');
        if (colon == std::string::npos) bad_value(key, part, "power:duration");
        out.emplace_back(to_i64(key, trim(std::string_view(part).substr(0, colon))),
                         to_i64(key, trim(std::string_view(part).substr(colon + 1))));
    }
    return out;
}

ScenarioKind to_scenario(const std::string& key, const std::string& value) {
    if (value == "normal") return ScenarioKind::Normal;
    if (value == "night_usage") return ScenarioKind::NightUsage;
    if (value == "consumption_dip") return ScenarioKind::ConsumptionDip;
    if (value == "self_disconnect") return ScenarioKind::SelfDisconnect;
    if (value == "appliance_substitution") return ScenarioKind::ApplianceSubstitution;
    bad_value(key, value, "a scenario name");
}

const char* scenario_key(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Normal: return "normal";
        case ScenarioKind::NightUsage: return "night_usage";
        case ScenarioKind::ConsumptionDip: return "consumption_dip";
        case ScenarioKind::SelfDisconnect: return "self_disconnect";
        case ScenarioKind::ApplianceSubstitution: return "appliance_substitution";
    }
    return "normal";
}

// Lowercase appliance spellings used inside config keys.
std::optional<Appliance> appliance_key(std::string_view token) {
    if (token == "kettle") return Appliance::Kettle;
    if (token == "microwave") return Appliance::Microwave;
    if (token == "washingmachine") return Appliance::WashingMachine;
    if (token == "oven") return Appliance::Oven;
    if (token == "toaster") return Appliance::Toaster;
    return std::nullopt;
}

const char* appliance_key_name(Appliance a) {
    switch (a) {
        case Appliance::Kettle: return "kettle";
        case Appliance::Microwave: return "microwave";
        case Appliance::WashingMachine: return "washingmachine";
        case Appliance::Oven: return "oven";
        case Appliance::Toaster: return "toaster";
    }
    return "kettle";
}

ApplianceModel& model_for(RunConfig& cfg, Appliance a) {
    for (auto& m : cfg.sim_appliances)
        if (m.appliance == a) return m;
    ApplianceModel m;
    m.appliance = a;
    m.device_type = device_type_of(a);
    return cfg.sim_appliances.emplace_back(std::move(m));
}

std::vector<double>& tendency_for(RunConfig& cfg, Appliance a) {
    for (auto& [app, t] : cfg.sim_tendencies)
        if (app == a) return t;
    return cfg.sim_tendencies.emplace_back(a, std::vector<double>{}).second;
}

// Shortest form that round-trips through from_chars.
std::string fmt(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
        if (back == v) break;
    }
    return buf;
}

std::string fmt(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ',';
        out += fmt(vs[i]);
    }
    return out;
}

// True when the appliance-scoped key was recognized and applied.
bool apply_appliance_key(Appliance a, const std::string& field, const std::string& key,
                         const std::string& value, RunConfig& cfg) {
    if (field == "power_w") {
        model_for(cfg, a).power_w = to_i64(key, value);
    } else if (field == "duration_s") {
        model_for(cfg, a).duration_s = to_i64(key, value);
    } else if (field == "states") {
        model_for(cfg, a).states = to_states(key, value);
    } else if (field == "jitter") {
        model_for(cfg, a).jitter = to_double(key, value);
    } else if (field == "tendency") {
        tendency_for(cfg, a) = to_double_list(key, value);
    } else {
        return false;
    }
    return true;
}

}  // namespace

std::vector<ApplianceModel> default_appliances() {
    std::vector<ApplianceModel> out;
    auto add1 = [&](Appliance a, std::int64_t power_w, std::int64_t duration_s) {
        ApplianceModel m;
        m.appliance = a;
        m.device_type = DeviceType::Type1;
        m.power_w = power_w;
        m.duration_s = duration_s;
        m.jitter = 0.05;
        out.push_back(std::move(m));
    };
    auto add2 = [&](Appliance a, std::vector<std::pair<std::int64_t, std::int64_t>> states) {
        ApplianceModel m;
        m.appliance = a;
        m.device_type = DeviceType::Type2;
        m.power_w = 0;
        for (const auto& [p, d] : states) m.power_w = std::max(m.power_w, p);
        m.states = std::move(states);
        m.jitter = 0.05;
        out.push_back(std::move(m));
    };
    add1(Appliance::Kettle, 2800, 150);
    add1(Appliance::Microwave, 1200, 90);
    // fill/tumble precedes heating, as real cycles do
    add2(Appliance::WashingMachine, {{250, 120}, {2000, 780}, {300, 1800}, {500, 600}});
    add2(Appliance::Oven, {{2500, 600}, {1400, 1800}});
    add1(Appliance::Toaster, 1100, 180);
    return out;
}

std::vector<std::pair<Appliance, std::vector<double>>> default_tendencies() {
    // Rows follow the seven default windows; night is zero so unattended
    // overnight activity is genuinely out of routine. Active cells keep a
    // 0.5 fractional part so a two-week baseline almost surely sees both
    // sides of each cell's count range.
    return {
        {Appliance::Kettle, {0, 1.5, 0.5, 0.5, 0.5, 0.5, 0.5}},
        {Appliance::Microwave, {0, 0.5, 0, 0.5, 0, 0.5, 0.5}},
        {Appliance::WashingMachine, {0, 0, 0.5, 0, 0.5, 0.5, 0}},
        {Appliance::Oven, {0, 0, 0, 0.5, 0, 0.5, 0}},
        {Appliance::Toaster, {0, 0.5, 0.5, 0, 0, 0.5, 0}},
    };
}

HouseholdProfile RunConfig::profile() const {
    HouseholdProfile p;
    p.pid = sim_pid;
    p.appliances = sim_appliances;
    p.windows = windows;
    for (const auto& [a, t] : sim_tendencies) p.usage_tendencies[a] = t;
    p.noise_floor_w = sim_noise_floor_w;
    p.seed = seed;
    return p;
}

void apply_override(const std::string& raw_key, const std::string& raw_value, RunConfig& cfg) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key.empty()) throw ConfigError("empty key");

    if (key.starts_with("sim.")) {
        std::size_t dot = key.find('.', 4);
        if (dot != std::string::npos) {
            if (auto a = appliance_key(std::string_view(key).substr(4, dot - 4))) {
                if (apply_appliance_key(*a, key.substr(dot + 1), key, value, cfg)) return;
                throw ConfigError("unknown key: " + key);
            }
        }
    }

    if (key == "cadence_s") cfg.cadence_s = to_i64(key, value);
    else if (key == "gap_tolerance_s") cfg.gap_tolerance_s = to_i64(key, value);
    else if (key == "highpass_w") cfg.highpass_w = to_i64(key, value);
    else if (key == "segment_len") cfg.segment_len = to_int(key, value);
    else if (key == "stride") cfg.stride = to_int(key, value);
    else if (key == "scale_w") cfg.scale_w = to_i64(key, value);
    else if (key == "seed") { cfg.seed = to_u64(key, value); cfg.hp.seed = cfg.seed; }
    else if (key == "preprocess.pad_s") cfg.pad_s = to_int(key, value);
    else if (key == "preprocess.max_combo") cfg.max_combo = to_int(key, value);
    else if (key == "preprocess.composite_rounds") cfg.composite_rounds = to_int(key, value);
    else if (key == "preprocess.background_per_day") cfg.background_per_day = to_int(key, value);
    else if (key == "cnn.kernels") cfg.cnn_kernels = to_int(key, value);
    else if (key == "cnn.kernel_len") cfg.cnn_kernel_len = to_int(key, value);
    else if (key == "cnn.pool") cfg.cnn_pool = to_int(key, value);
    else if (key == "cnn.hidden1") cfg.cnn_hidden1 = to_int(key, value);
    else if (key == "cnn.hidden2") cfg.cnn_hidden2 = to_int(key, value);
    else if (key == "cnn.learning_rate") cfg.hp.learning_rate = to_double(key, value);
    else if (key == "cnn.rate_annealing") cfg.hp.rate_annealing = to_double(key, value);
    else if (key == "cnn.rate_decay") cfg.hp.rate_decay = to_double(key, value);
    else if (key == "cnn.momentum_start") cfg.hp.momentum_start = to_double(key, value);
    else if (key == "cnn.momentum_ramp") cfg.hp.momentum_ramp = to_double(key, value);
    else if (key == "cnn.momentum_stable") cfg.hp.momentum_stable = to_double(key, value);
    else if (key == "cnn.weight_decay") cfg.hp.weight_decay = to_double(key, value);
    else if (key == "cnn.adam_beta1") cfg.hp.adam_beta1 = to_double(key, value);
    else if (key == "cnn.adam_beta2") cfg.hp.adam_beta2 = to_double(key, value);
    else if (key == "cnn.adam_epsilon") cfg.hp.adam_epsilon = to_double(key, value);
    else if (key == "cnn.epochs") cfg.hp.epochs = to_int(key, value);
    else if (key == "cnn.batch_size") cfg.hp.batch_size = to_int(key, value);
    else if (key == "cnn.confidence_floor") cfg.confidence_floor = to_double(key, value);
    else if (key == "cnn.train_ratio") cfg.split_ratios[0] = to_double(key, value);
    else if (key == "cnn.validation_ratio") cfg.split_ratios[1] = to_double(key, value);
    else if (key == "cnn.test_ratio") cfg.split_ratios[2] = to_double(key, value);
    else if (key == "cnn.parallel") cfg.parallel_kernels = to_bool(key, value);
    else if (key == "windows.set") cfg.windows = to_windows(key, value);
    else if (key == "baseline.learning_days") cfg.learning_days = to_int(key, value);
    else if (key == "anomaly.z_threshold") cfg.z_threshold = to_double(key, value);
    else if (key == "anomaly.amber_min_outliers") cfg.amber_min_outliers = to_int(key, value);
    else if (key == "anomaly.red_days") cfg.red_days = to_int(key, value);
    else if (key == "rules.min_support") cfg.min_support = to_double(key, value);
    else if (key == "rules.min_confidence") cfg.min_confidence = to_double(key, value);
    else if (key == "rules.drift_threshold") cfg.drift_threshold = to_double(key, value);
    else if (key == "indicators.weights") {
        auto ws = to_double_list(key, value);
        if (ws.size() != 3) bad_value(key, value, "three comma-separated weights");
        cfg.weights.single = ws[0];
        cfg.weights.couple = ws[1];
        cfg.weights.per_extra = ws[2];
    }
    else if (key == "paths.data_dir") cfg.data_dir = value;
    else if (key == "server.host") cfg.host = value;
    else if (key == "server.port") cfg.port = to_int(key, value);
    else if (key == "sim.pid") cfg.sim_pid = value;
    else if (key == "sim.days") cfg.sim_days = to_int(key, value);
    else if (key == "sim.base_day") cfg.sim_base_day = to_i64(key, value);
    else if (key == "sim.noise_floor_w") cfg.sim_noise_floor_w = to_i64(key, value);
    else if (key == "sim.scenario") cfg.sim_scenario.kind = to_scenario(key, value);
    else if (key == "sim.scenario.onset_day") cfg.sim_scenario.onset_day = to_int(key, value);
    else if (key == "sim.scenario.magnitude") cfg.sim_scenario.magnitude = to_double(key, value);
    else throw ConfigError("unknown key: " + key);
}

void apply_config(std::istream& source, RunConfig& cfg) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        try {
            apply_override(body.substr(0, eq), body.substr(eq + 1), cfg);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void validate_config(const RunConfig& cfg) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    require(cfg.cadence_s > 0, "cadence_s must be positive");
    require(cfg.gap_tolerance_s >= cfg.cadence_s, "gap_tolerance_s must be >= cadence_s");
    require(cfg.highpass_w >= 0, "highpass_w must be non-negative");
    require(cfg.segment_len >= 1, "segment_len must be positive");
    require(cfg.stride >= 1, "stride must be positive");
    require(cfg.scale_w > 0, "scale_w must be positive");
    require(cfg.pad_s >= 0, "preprocess.pad_s must be non-negative");
    require(cfg.max_combo >= 1 && cfg.max_combo <= int(kAllAppliances.size()),
            "preprocess.max_combo must be between 1 and 5");
    require(cfg.composite_rounds >= 0, "preprocess.composite_rounds must be non-negative");
    require(cfg.background_per_day >= 0, "preprocess.background_per_day must be non-negative");
    require(cfg.cnn_kernels >= 1, "cnn.kernels must be positive");
    require(cfg.cnn_kernel_len >= 1, "cnn.kernel_len must be positive");
    require(cfg.cnn_kernel_len <= cfg.segment_len, "cnn.kernel_len must not exceed segment_len");
    require(cfg.cnn_pool >= 1, "cnn.pool must be positive");
    require(cfg.cnn_hidden1 >= 1 && cfg.cnn_hidden2 >= 1, "hidden widths must be positive");
    require(cfg.hp.learning_rate > 0, "cnn.learning_rate must be positive");
    require(cfg.hp.rate_annealing >= 0, "cnn.rate_annealing must be non-negative");
    require(cfg.hp.rate_decay > 0, "cnn.rate_decay must be positive");
    require(cfg.hp.momentum_start >= 0 && cfg.hp.momentum_start < 1,
            "cnn.momentum_start must be in [0, 1)");
    require(cfg.hp.momentum_stable >= 0 && cfg.hp.momentum_stable < 1,
            "cnn.momentum_stable must be in [0, 1)");
    require(cfg.hp.momentum_ramp > 0, "cnn.momentum_ramp must be positive");
    require(cfg.hp.weight_decay >= 0, "cnn.weight_decay must be non-negative");
    require(cfg.hp.adam_beta1 >= 0 && cfg.hp.adam_beta1 < 1, "cnn.adam_beta1 must be in [0, 1)");
    require(cfg.hp.adam_beta2 >= 0 && cfg.hp.adam_beta2 < 1, "cnn.adam_beta2 must be in [0, 1)");
    require(cfg.hp.adam_epsilon > 0, "cnn.adam_epsilon must be positive");
    require(cfg.hp.epochs >= 0, "cnn.epochs must be non-negative");
    require(cfg.hp.batch_size >= 1, "cnn.batch_size must be positive");
    require(cfg.confidence_floor >= 0 && cfg.confidence_floor <= 1,
            "cnn.confidence_floor must be in [0, 1]");
    double ratio_sum = 0;
    for (double r : cfg.split_ratios) {
        require(r >= 0, "split ratios must be non-negative");
        ratio_sum += r;
    }
    require(std::abs(ratio_sum - 1.0) <= 1e-9, "split ratios must sum to 1");
    require(windows_valid(cfg.windows), "windows.set must cover 0-24 contiguously");
    require(cfg.learning_days >= 1, "baseline.learning_days must be positive");
    require(cfg.z_threshold > 0, "anomaly.z_threshold must be positive");
    require(cfg.amber_min_outliers >= 1, "anomaly.amber_min_outliers must be positive");
    require(cfg.red_days >= 1, "anomaly.red_days must be positive");
    require(cfg.min_support > 0 && cfg.min_support <= 1, "rules.min_support must be in (0, 1]");
    require(cfg.min_confidence > 0 && cfg.min_confidence <= 1,
            "rules.min_confidence must be in (0, 1]");
    require(cfg.drift_threshold >= 0, "rules.drift_threshold must be non-negative");
    require(cfg.weights.single > 0 && cfg.weights.couple > 0 && cfg.weights.per_extra >= 0,
            "indicators.weights must be positive");
    require(!cfg.data_dir.empty(), "paths.data_dir must be non-empty");
    require(!cfg.host.empty(), "server.host must be non-empty");
    require(cfg.port >= 1 && cfg.port <= 65535, "server.port must be a valid port");
    require(!cfg.sim_pid.empty(), "sim.pid must be non-empty");
    require(cfg.sim_days >= 1, "sim.days must be positive");
    require(cfg.sim_base_day >= 0, "sim.base_day must be non-negative");
    require(cfg.sim_noise_floor_w >= 0, "sim.noise_floor_w must be non-negative");
    require(cfg.sim_scenario.onset_day >= 0, "sim.scenario.onset_day must be non-negative");
    require(cfg.sim_scenario.magnitude >= 0, "sim.scenario.magnitude must be non-negative");
    for (const auto& m : cfg.sim_appliances) {
        try {
            validate_model(m, static_cast<int>(cfg.cadence_s));
        } catch (const Error& e) {
            throw ConfigError(std::string("sim.") + appliance_key_name(m.appliance) + ": " +
                              e.what());
        }
    }
    for (const auto& [a, t] : cfg.sim_tendencies) {
        if (t.size() != cfg.windows.size())
            throw ConfigError(std::string("sim.") + appliance_key_name(a) +
                              ".tendency: needs one value per observation window");
        for (double v : t)
            require(v >= 0, "tendencies must be non-negative");
    }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    apply_config(in, cfg);
    validate_config(cfg);
    return cfg;
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto kv = [&](const char* key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    kv("cadence_s", std::to_string(cfg.cadence_s));
    kv("gap_tolerance_s", std::to_string(cfg.gap_tolerance_s));
    kv("highpass_w", std::to_string(cfg.highpass_w));
    kv("segment_len", std::to_string(cfg.segment_len));
    kv("stride", std::to_string(cfg.stride));
    kv("scale_w", std::to_string(cfg.scale_w));
    kv("seed", std::to_string(cfg.seed));
    kv("preprocess.pad_s", std::to_string(cfg.pad_s));
    kv("preprocess.max_combo", std::to_string(cfg.max_combo));
    kv("preprocess.composite_rounds", std::to_string(cfg.composite_rounds));
    kv("preprocess.background_per_day", std::to_string(cfg.background_per_day));
    kv("cnn.kernels", std::to_string(cfg.cnn_kernels));
    kv("cnn.kernel_len", std::to_string(cfg.cnn_kernel_len));
    kv("cnn.pool", std::to_string(cfg.cnn_pool));
    kv("cnn.hidden1", std::to_string(cfg.cnn_hidden1));
    kv("cnn.hidden2", std::to_string(cfg.cnn_hidden2));
    kv("cnn.learning_rate", fmt(cfg.hp.learning_rate));
    kv("cnn.rate_annealing", fmt(cfg.hp.rate_annealing));
    kv("cnn.rate_decay", fmt(cfg.hp.rate_decay));
    kv("cnn.momentum_start", fmt(cfg.hp.momentum_start));
    kv("cnn.momentum_ramp", fmt(cfg.hp.momentum_ramp));
    kv("cnn.momentum_stable", fmt(cfg.hp.momentum_stable));
    kv("cnn.weight_decay", fmt(cfg.hp.weight_decay));
    kv("cnn.adam_beta1", fmt(cfg.hp.adam_beta1));
    kv("cnn.adam_beta2", fmt(cfg.hp.adam_beta2));
    kv("cnn.adam_epsilon", fmt(cfg.hp.adam_epsilon));
    kv("cnn.epochs", std::to_string(cfg.hp.epochs));
    kv("cnn.batch_size", std::to_string(cfg.hp.batch_size));
    kv("cnn.confidence_floor", fmt(cfg.confidence_floor));
    kv("cnn.train_ratio", fmt(cfg.split_ratios[0]));
    kv("cnn.validation_ratio", fmt(cfg.split_ratios[1]));
    kv("cnn.test_ratio", fmt(cfg.split_ratios[2]));
    kv("cnn.parallel", cfg.parallel_kernels ? "true" : "false");
    {
        std::string ws;
        for (std::size_t i = 0; i < cfg.windows.size(); ++i) {
            if (i) ws += ',';
            ws += cfg.windows[i].name + ":" + fmt(cfg.windows[i].start_hour) + "-" +
                  fmt(cfg.windows[i].end_hour);
        }
        kv("windows.set", ws);
    }
    kv("baseline.learning_days", std::to_string(cfg.learning_days));
    kv("anomaly.z_threshold", fmt(cfg.z_threshold));
    kv("anomaly.amber_min_outliers", std::to_string(cfg.amber_min_outliers));
    kv("anomaly.red_days", std::to_string(cfg.red_days));
    kv("rules.min_support", fmt(cfg.min_support));
    kv("rules.min_confidence", fmt(cfg.min_confidence));
    kv("rules.drift_threshold", fmt(cfg.drift_threshold));
    kv("indicators.weights",
       fmt(cfg.weights.single) + "," + fmt(cfg.weights.couple) + "," + fmt(cfg.weights.per_extra));
    kv("paths.data_dir", cfg.data_dir);
    kv("server.host", cfg.host);
    kv("server.port", std::to_string(cfg.port));
    kv("sim.pid", cfg.sim_pid);
    kv("sim.days", std::to_string(cfg.sim_days));
    kv("sim.base_day", std::to_string(cfg.sim_base_day));
    kv("sim.noise_floor_w", std::to_string(cfg.sim_noise_floor_w));
    kv("sim.scenario", scenario_key(cfg.sim_scenario.kind));
    kv("sim.scenario.onset_day", std::to_string(cfg.sim_scenario.onset_day));
    kv("sim.scenario.magnitude", fmt(cfg.sim_scenario.magnitude));
    for (const auto& m : cfg.sim_appliances) {
        std::string prefix = std::string("sim.") + appliance_key_name(m.appliance) + ".";
        kv((prefix + "power_w").c_str(), std::to_string(m.power_w));
        kv((prefix + "duration_s").c_str(), std::to_string(m.duration_s));
        if (!m.states.empty()) {
            std::string states;
            for (std::size_t i = 0; i < m.states.size(); ++i) {
                if (i) states += ',';
                states += std::to_string(m.states[i].first) + ":" +
                          std::to_string(m.states[i].second);
            }
            kv((prefix + "states").c_str(), states);
        }
        kv((prefix + "jitter").c_str(), fmt(m.jitter));
    }
    for (const auto& [a, t] : cfg.sim_tendencies)
        kv((std::string("sim.") + appliance_key_name(a) + ".tendency").c_str(), fmt(t));
    return out.str();
}

}  // namespace bmi
