#pragma once

#include "cci/series.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cci::t90 {

inline const MonthWindow kDefaultReference{MonthStamp{1961, 1}, MonthStamp{1990, 12}};
inline constexpr double kBaselineExceedance = 10.0;

/// Monthly temperatures (deg C) at one grid point.
struct GridSeries {
    std::string grid_id;
    TimeSeries monthly_temps;
    MonthWindow reference_window = kDefaultReference;
    double weight = 1.0;

    /// Reference window inside the series span, >= 20 reference observations
    /// for every calendar month. Throws InvalidArgument / TooFewReferenceObs.
    void validate() const;
};

/// (temp - reference month mean) / reference month standard deviation (n-1).
[[nodiscard]] TimeSeries standardized_anomaly(const GridSeries& grid);

struct Exceedance {
    TimeSeries indicator;  // 100 when the anomaly exceeds the threshold, else 0
    double threshold = 0.0;
    double reference_mean = 0.0;
};

/// Threshold = linear-interpolation 90th percentile of the reference-window anomalies.
[[nodiscard]] Exceedance grid_exceedance(const TimeSeries& anomalies, const MonthWindow& reference_window,
                                         double percentile = 0.9);

struct T90Series {
    TimeSeries t90;             // percentage-point change vs. the 10% baseline
    TimeSeries raw_frequency;   // cross-grid exceedance frequency, percent
};

/// Averages exceedance series over grids (optionally weighted) and subtracts the baseline.
[[nodiscard]] T90Series aggregate_t90(std::span<const TimeSeries> per_grid, std::span<const double> weights = {});

struct T90Options {
    bool weighted = false;
    double percentile = 0.9;
};

/// Full three-step pipeline over several grids.
[[nodiscard]] T90Series build_t90(std::span<const GridSeries> grids, const T90Options& options = {});

/// Manifest CSV `grid_id,path[,weight]`; relative paths resolve against the manifest directory.
[[nodiscard]] std::vector<GridSeries> load_manifest(const std::filesystem::path& manifest,
                                                    const MonthWindow& reference = kDefaultReference);

}  // namespace cci::t90
