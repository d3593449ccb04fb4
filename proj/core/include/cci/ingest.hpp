#pragma once

#include "cci/series.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cci::ingest {

// ---------------------------------------------------------------------------
// Remote observations client (FRED-compatible endpoint)

struct FetchOptions {
    std::string api_base = "https://api.stlouisfed.org/fred";
    std::string api_key;  // falls back to $FRED_API_KEY
    std::filesystem::path cache_dir;  // empty disables caching
    bool offline = false;             // read the cache only
    int attempts = 3;
    std::chrono::milliseconds backoff{200};  // doubled after each transient failure
    std::chrono::seconds timeout{20};
};

inline constexpr const char* kApiKeyEnv = "FRED_API_KEY";

/// `cache/<series_id>/<start>_<end>.json`
[[nodiscard]] std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const std::string& series_id,
                                               const MonthWindow& window);

/// Maps an observations JSON document onto a monthly series. Values of "."
/// raise GapError.
[[nodiscard]] TimeSeries parse_observations(const std::string& json_body, const std::string& series_id);

/// GET <api_base>/series/observations?series_id=..&observation_start=..&observation_end=..&file_type=json
/// Retries 429/5xx/connection failures with exponential backoff; 401/403 raise AuthError.
[[nodiscard]] TimeSeries fetch_remote(const std::string& series_id, const MonthWindow& window,
                                      const FetchOptions& options = {});

// ---------------------------------------------------------------------------
// Run configuration

enum class SourceKind { LocalCsv, RemoteApi };
enum class Transform { None, PctChange, Yoy, Standardize };
enum class StepOrder { AdjustThenTransform, TransformThenAdjust };

struct SeriesSource {
    std::string name;
    SourceKind kind = SourceKind::LocalCsv;
    std::string locator;  // path or remote series id
    Transform transform = Transform::None;
    bool seasonal_adjust = false;
};

struct RunConfig {
    std::vector<SeriesSource> sources;
    std::optional<MonthWindow> window;
    int var_lags = 6;
    int horizon = 12;
    double level = 0.68;
    int reps = 1000;
    int block_len = 0;  // 0 = rule-of-thumb length
    std::uint64_t seed = 20240101;
    StepOrder order = StepOrder::AdjustThenTransform;
    std::string instrument;  // optional path to the instrument CSV
    std::filesystem::path base_dir;  // relative locators resolve here
};

/// Line-oriented `key: value` format; '#' starts a comment. Throws ConfigError naming the key.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

[[nodiscard]] std::string_view to_string(Transform t) noexcept;

/// Applies the source's adjustment and transform in the configured order.
[[nodiscard]] TimeSeries prepare_series(const TimeSeries& raw, const SeriesSource& source, StepOrder order);

/// Loads every source (local or remote), prepares it, aligns, and trims to the
/// configured window.
[[nodiscard]] SeriesPanel assemble_panel(const RunConfig& config, const FetchOptions& fetch = {});

}  // namespace cci::ingest
