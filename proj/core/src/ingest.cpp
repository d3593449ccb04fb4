#include "cci/ingest.hpp"

#include "cci/error.hpp"
#include "cci/io.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

namespace cci::ingest {

namespace fs = std::filesystem;

fs::path cache_path(const fs::path& cache_dir, const std::string& series_id, const MonthWindow& window) {
    return cache_dir / series_id / (window.first.str() + "_" + window.last.str() + ".json");
}

TimeSeries parse_observations(const std::string& json_body, const std::string& series_id) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_body);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, series_id + ": invalid JSON response: " + e.what());
    }
    if (!doc.contains("observations") || !doc["observations"].is_array()) {
        fail(ErrorKind::ParseError, series_id + ": response lacks an observations array");
    }
    std::vector<double> values;
    std::optional<MonthStamp> start;
    std::optional<MonthStamp> last;
    std::vector<std::string> missing;
    for (const auto& obs : doc["observations"]) {
        if (!obs.contains("date") || !obs.contains("value") || !obs["date"].is_string() || !obs["value"].is_string()) {
            fail(ErrorKind::ParseError, series_id + ": observation without string date/value");
        }
        const MonthStamp m = MonthStamp::parse(obs["date"].get<std::string>());
        if (last && months_between(*last, m) != 1) {
            if (months_between(*last, m) < 1) fail(ErrorKind::ParseError, series_id + ": observations out of order at " + m.str());
            for (long k = 1; k < months_between(*last, m); ++k) missing.push_back(last->plus(k).str());
        }
        if (!start) start = m;
        last = m;
        const std::string v = obs["value"].get<std::string>();
        if (v == ".") {
            missing.push_back(m.str());
            values.push_back(0.0);
            continue;
        }
        try {
            std::size_t used = 0;
            values.push_back(std::stod(v, &used));
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, series_id + ": bad value '" + v + "' at " + m.str());
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
        fail(ErrorKind::GapError, series_id + ": missing observations " + list);
    }
    if (!start) fail(ErrorKind::GapError, series_id + ": no observations returned");
    return {*start, std::move(values), series_id};
}

namespace {

struct BaseUrl {
    std::string scheme_host_port;
    std::string path_prefix;
};

BaseUrl split_base(const std::string& base) {
    const auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos) fail(ErrorKind::ConfigError, "api_base '" + base + "' lacks a scheme");
    const auto path_start = base.find('/', scheme_end + 3);
    BaseUrl u;
    u.scheme_host_port = base.substr(0, path_start);
    u.path_prefix = path_start == std::string::npos ? "" : base.substr(path_start);
    while (!u.path_prefix.empty() && u.path_prefix.back() == '/') u.path_prefix.pop_back();
    return u;
}

bool transient(int status) { return status == 429 || status >= 500; }

TimeSeries covering(const TimeSeries& s, const MonthWindow& window, const std::string& series_id) {
    if (window.first < s.start() || s.end() < window.last) {
        fail(ErrorKind::GapError, series_id + ": observations " + s.start().str() + ".." + s.end().str() +
                                      " do not cover " + window.first.str() + ".." + window.last.str());
    }
    return s.slice(window);
}

}  // namespace

TimeSeries fetch_remote(const std::string& series_id, const MonthWindow& window, const FetchOptions& options) {
    if (series_id.empty()) fail(ErrorKind::InvalidArgument, "empty series id");
    const fs::path cached = options.cache_dir.empty() ? fs::path{} : cache_path(options.cache_dir, series_id, window);
    if (options.offline) {
        if (cached.empty() || !fs::exists(cached)) {
            fail(ErrorKind::IoError, "offline mode: no cached response for " + series_id + " at " +
                                         (cached.empty() ? std::string("<no cache dir>") : cached.string()));
        }
        return covering(parse_observations(io::read_file(cached), series_id), window, series_id);
    }

    std::string key = options.api_key;
    if (key.empty()) {
        if (const char* env = std::getenv(kApiKeyEnv)) key = env;
    }
    if (key.empty()) fail(ErrorKind::AuthError, std::string("no API key (set ") + kApiKeyEnv + ")");

    const BaseUrl base = split_base(options.api_base);
    httplib::Client client(base.scheme_host_port);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    const httplib::Params params{{"series_id", series_id},
                                 {"api_key", key},
                                 {"observation_start", window.first.str() + "-01"},
                                 {"observation_end", window.last.str() + "-01"},
                                 {"file_type", "json"}};
    const std::string path = base.path_prefix + "/series/observations";

    auto delay = options.backoff;
    std::string last_error;
    const int attempts = std::max(1, options.attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Get(path, params, httplib::Headers{});
        if (res && res->status == 200) {
            TimeSeries s = covering(parse_observations(res->body, series_id), window, series_id);
            if (!cached.empty()) io::write_file_atomic(cached, res->body);
            return s;
        }
        if (res && (res->status == 401 || res->status == 403)) {
            fail(ErrorKind::AuthError, series_id + ": HTTP " + std::to_string(res->status));
        }
        if (res) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
            if (!transient(res->status)) break;
        } else {
            last_error = "connection failed: " + httplib::to_string(res.error());
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
    fail(ErrorKind::HttpError, series_id + ": " + last_error);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Transform t) noexcept {
    switch (t) {
        case Transform::None: return "none";
        case Transform::PctChange: return "pct_change";
        case Transform::Yoy: return "yoy";
        case Transform::Standardize: return "standardize";
    }
    return "none";
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

[[noreturn]] void config_fail(const std::string& key, std::size_t line, const std::string& what) {
    fail(ErrorKind::ConfigError, "'" + key + "' (line " + std::to_string(line) + "): " + what);
}

long parse_int(const std::string& key, const std::string& v, std::size_t line) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        config_fail(key, line, "expected an integer, got '" + v + "'");
    }
}

double parse_real(const std::string& key, const std::string& v, std::size_t line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        config_fail(key, line, "expected a number, got '" + v + "'");
    }
}

MonthStamp parse_month(const std::string& key, const std::string& v, std::size_t line) {
    try {
        return MonthStamp::parse(v);
    } catch (const Error&) {
        config_fail(key, line, "bad month '" + v + "'");
    }
}

SeriesSource parse_source(const std::string& value, std::size_t line) {
    std::istringstream in(value);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.size() < 3) config_fail("source", line, "expected '<name> <local_csv|remote_api> <locator> [options]'");
    SeriesSource s;
    s.name = tok[0];
    if (tok[1] == "local_csv") {
        s.kind = SourceKind::LocalCsv;
    } else if (tok[1] == "remote_api") {
        s.kind = SourceKind::RemoteApi;
    } else {
        config_fail("source", line, "unknown kind '" + tok[1] + "'");
    }
    s.locator = tok[2];
    for (std::size_t i = 3; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string::npos) config_fail("source", line, "option '" + tok[i] + "' is not key=value");
        const std::string k = tok[i].substr(0, eq);
        const std::string v = tok[i].substr(eq + 1);
        if (k == "transform") {
            if (v == "none") s.transform = Transform::None;
            else if (v == "pct_change") s.transform = Transform::PctChange;
            else if (v == "yoy") s.transform = Transform::Yoy;
            else if (v == "standardize") s.transform = Transform::Standardize;
            else config_fail("transform", line, "unknown transform '" + v + "'");
        } else if (k == "adjust") {
            if (v == "true") s.seasonal_adjust = true;
            else if (v == "false") s.seasonal_adjust = false;
            else config_fail("adjust", line, "expected true/false");
        } else {
            config_fail(k, line, "unknown source option");
        }
    }
    return s;
}

}  // namespace

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    std::set<std::string> seen;
    std::set<std::string> names;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) config_fail(line, lineno, "expected 'key: value'");
        const std::string key = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 1));
        if (key != "source" && !seen.insert(key).second) config_fail(key, lineno, "given more than once");
        if (value.empty()) config_fail(key, lineno, "missing value");

        if (key == "source") {
            SeriesSource s = parse_source(value, lineno);
            if (!names.insert(s.name).second) config_fail("source", lineno, "duplicate source name '" + s.name + "'");
            cfg.sources.push_back(std::move(s));
        } else if (key == "window") {
            std::istringstream w(value);
            std::string a;
            std::string b;
            w >> a >> b;
            if (a.empty() || b.empty()) config_fail(key, lineno, "expected 'YYYY-MM YYYY-MM'");
            MonthWindow win{parse_month(key, a, lineno), parse_month(key, b, lineno)};
            if (!(win.first < win.last)) config_fail(key, lineno, "start must precede end");
            cfg.window = win;
        } else if (key == "lags") {
            cfg.var_lags = static_cast<int>(parse_int(key, value, lineno));
            if (cfg.var_lags < 1) config_fail(key, lineno, "must be at least 1");
        } else if (key == "horizon") {
            cfg.horizon = static_cast<int>(parse_int(key, value, lineno));
            if (cfg.horizon < 0) config_fail(key, lineno, "must be non-negative");
        } else if (key == "level") {
            cfg.level = parse_real(key, value, lineno);
            if (!(cfg.level > 0.0 && cfg.level < 1.0)) config_fail(key, lineno, "must lie in (0,1)");
        } else if (key == "reps") {
            cfg.reps = static_cast<int>(parse_int(key, value, lineno));
            if (cfg.reps < 100) config_fail(key, lineno, "must be at least 100");
        } else if (key == "block_len") {
            if (value == "auto") {
                cfg.block_len = 0;
            } else {
                cfg.block_len = static_cast<int>(parse_int(key, value, lineno));
                if (cfg.block_len < 1) config_fail(key, lineno, "must be positive or 'auto'");
            }
        } else if (key == "seed") {
            const long s = parse_int(key, value, lineno);
            if (s < 0) config_fail(key, lineno, "must be non-negative");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "order") {
            if (value == "adjust_then_transform") cfg.order = StepOrder::AdjustThenTransform;
            else if (value == "transform_then_adjust") cfg.order = StepOrder::TransformThenAdjust;
            else config_fail(key, lineno, "expected adjust_then_transform or transform_then_adjust");
        } else if (key == "instrument") {
            cfg.instrument = value;
        } else {
            config_fail(key, lineno, "unknown key");
        }
    }
    if (cfg.sources.empty()) config_fail("source", lineno, "at least one source is required");
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) fail(ErrorKind::IoError, "config " + path.string() + " not found");
    return parse_config(io::read_file(path), path.parent_path());
}

TimeSeries prepare_series(const TimeSeries& raw, const SeriesSource& source, StepOrder order) {
    auto transform = [&](const TimeSeries& s) {
        switch (source.transform) {
            case Transform::None: return s;
            case Transform::PctChange: return pct_change(s);
            case Transform::Yoy: return yoy_growth(s);
            case Transform::Standardize: return standardize(s);
        }
        return s;
    };
    TimeSeries s = raw.renamed(source.name);
    if (order == StepOrder::AdjustThenTransform) {
        if (source.seasonal_adjust) s = seasonal_adjust(s);
        return transform(s);
    }
    s = transform(s);
    return source.seasonal_adjust ? seasonal_adjust(s) : s;
}

SeriesPanel assemble_panel(const RunConfig& config, const FetchOptions& fetch) {
    std::vector<TimeSeries> prepared;
    for (const auto& src : config.sources) {
        TimeSeries raw = [&] {
            if (src.kind == SourceKind::LocalCsv) {
                fs::path p = src.locator;
                if (p.is_relative() && !config.base_dir.empty()) p = config.base_dir / p;
                return io::load_csv(p);
            }
            if (!config.window) fail(ErrorKind::ConfigError, "'window' is required for remote sources");
            // Pull a year of history before the window so growth rates cover it.
            const MonthWindow w{config.window->first.plus(-13), config.window->last};
            return fetch_remote(src.locator, w, fetch);
        }();
        prepared.push_back(prepare_series(raw, src, config.order));
    }
    SeriesPanel panel = align(prepared);
    if (!config.window) return panel;
    const MonthWindow w{std::max(panel.window().first, config.window->first),
                        std::min(panel.window().last, config.window->last)};
    if (months_between(w.first, w.last) < 1) fail(ErrorKind::EmptyOverlap, "data do not cover the configured window");
    std::vector<TimeSeries> cut;
    for (const auto& s : panel.series()) cut.push_back(s.slice(w));
    return SeriesPanel(std::move(cut));
}

}  // namespace cci::ingest
