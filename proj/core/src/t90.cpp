#include "cci/t90.hpp"

#include "cci/error.hpp"
#include "cci/io.hpp"
#include "cci/stats.hpp"

#include <array>
#include <cmath>
#include <fstream>

namespace cci::t90 {

void GridSeries::validate() const {
    const auto& ref = reference_window;
    if (ref.last < ref.first || ref.first < monthly_temps.start() || monthly_temps.end() < ref.last) {
        fail(ErrorKind::InvalidArgument, "grid '" + grid_id + "': reference window " + ref.first.str() + ".." +
                                             ref.last.str() + " outside the series span");
    }
    std::array<int, 12> count{};
    for (long k = 0; k < static_cast<long>(ref.length()); ++k) ++count[ref.first.plus(k).month - 1];
    for (int m = 0; m < 12; ++m) {
        if (count[m] < 20) {
            fail(ErrorKind::TooFewReferenceObs, "grid '" + grid_id + "': only " + std::to_string(count[m]) +
                                                    " reference observations for month " + std::to_string(m + 1));
        }
    }
}

TimeSeries standardized_anomaly(const GridSeries& grid) {
    grid.validate();
    const auto& s = grid.monthly_temps;
    std::array<double, 12> sum{};
    std::array<double, 12> sq{};
    std::array<int, 12> count{};
    for (std::size_t t = 0; t < s.size(); ++t) {
        const MonthStamp m = s.month_at(t);
        if (grid.reference_window.contains(m)) {
            sum[m.month - 1] += s[t];
            ++count[m.month - 1];
        }
    }
    std::array<double, 12> mean{};
    for (int m = 0; m < 12; ++m) mean[m] = sum[m] / count[m];
    for (std::size_t t = 0; t < s.size(); ++t) {
        const MonthStamp m = s.month_at(t);
        if (grid.reference_window.contains(m)) {
            const double d = s[t] - mean[m.month - 1];
            sq[m.month - 1] += d * d;
        }
    }
    std::array<double, 12> sd{};
    for (int m = 0; m < 12; ++m) {
        sd[m] = std::sqrt(sq[m] / (count[m] - 1));
        if (!(sd[m] > 1e-12 * std::max(1.0, std::abs(mean[m])))) {
            fail(ErrorKind::ZeroVariance, "grid '" + grid.grid_id + "': reference temperatures for month " +
                                              std::to_string(m + 1) + " are constant");
        }
    }
    std::vector<double> out(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) {
        const int m = s.month_at(t).month - 1;
        out[t] = (s[t] - mean[m]) / sd[m];
    }
    return {s.start(), std::move(out), grid.grid_id};
}

Exceedance grid_exceedance(const TimeSeries& anomalies, const MonthWindow& reference_window, double percentile) {
    std::vector<double> ref;
    for (std::size_t t = 0; t < anomalies.size(); ++t) {
        if (reference_window.contains(anomalies.month_at(t))) ref.push_back(anomalies[t]);
    }
    if (ref.size() < 100) {
        fail(ErrorKind::TooFewReferenceObs,
             "'" + anomalies.name() + "' has " + std::to_string(ref.size()) + " reference observations (need 100)");
    }
    Exceedance e{anomalies, stats::quantile(ref, percentile), 0.0};
    std::vector<double> ind(anomalies.size());
    double ref_sum = 0.0;
    for (std::size_t t = 0; t < anomalies.size(); ++t) {
        ind[t] = anomalies[t] > e.threshold ? 100.0 : 0.0;
        if (reference_window.contains(anomalies.month_at(t))) ref_sum += ind[t];
    }
    e.reference_mean = ref_sum / static_cast<double>(ref.size());
    e.indicator = TimeSeries(anomalies.start(), std::move(ind), anomalies.name());
    return e;
}

T90Series aggregate_t90(std::span<const TimeSeries> per_grid, std::span<const double> weights) {
    if (per_grid.empty()) fail(ErrorKind::InvalidArgument, "aggregate_t90 needs at least one grid");
    if (!weights.empty() && weights.size() != per_grid.size()) {
        fail(ErrorKind::LengthMismatch, "one weight per grid required");
    }
    MonthStamp first = per_grid.front().start();
    MonthStamp last = per_grid.front().end();
    for (const auto& g : per_grid) {
        first = std::max(first, g.start());
        last = std::min(last, g.end());
    }
    if (last < first) fail(ErrorKind::EmptyOverlap, "grid series do not overlap");
    const MonthWindow window{first, last};
    double wsum = 0.0;
    for (std::size_t g = 0; g < per_grid.size(); ++g) {
        const double w = weights.empty() ? 1.0 : weights[g];
        if (!(w >= 0.0)) fail(ErrorKind::InvalidArgument, "grid weights must be non-negative");
        wsum += w;
    }
    if (!(wsum > 0.0)) fail(ErrorKind::InvalidArgument, "grid weights sum to zero");
    std::vector<double> freq(window.length(), 0.0);
    for (std::size_t g = 0; g < per_grid.size(); ++g) {
        const double w = (weights.empty() ? 1.0 : weights[g]) / wsum;
        const TimeSeries cut = per_grid[g].slice(window);
        for (std::size_t t = 0; t < freq.size(); ++t) freq[t] += w * cut[t];
    }
    std::vector<double> change(freq.size());
    for (std::size_t t = 0; t < freq.size(); ++t) change[t] = freq[t] - kBaselineExceedance;
    return {TimeSeries(first, std::move(change), "t90"), TimeSeries(first, std::move(freq), "t90_frequency")};
}

T90Series build_t90(std::span<const GridSeries> grids, const T90Options& options) {
    if (grids.empty()) fail(ErrorKind::InvalidArgument, "no grids supplied");
    std::vector<TimeSeries> exceed;
    std::vector<double> weights;
    for (const auto& g : grids) {
        exceed.push_back(grid_exceedance(standardized_anomaly(g), g.reference_window, options.percentile).indicator);
        weights.push_back(g.weight);
    }
    if (options.weighted) return aggregate_t90(exceed, weights);
    return aggregate_t90(exceed);
}

std::vector<GridSeries> load_manifest(const std::filesystem::path& manifest, const MonthWindow& reference) {
    std::ifstream in(manifest);
    if (!in) fail(ErrorKind::IoError, "cannot open " + manifest.string());
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(ErrorKind::InvalidArgument, manifest.string() + " is empty");
    const auto header = io::split_csv_line(line);
    if (header.size() < 2 || header[0] != "grid_id" || header[1] != "path") {
        fail(ErrorKind::ParseError, manifest.string() + ":1: header must be 'grid_id,path[,weight]'");
    }
    std::vector<GridSeries> grids;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = io::split_csv_line(line);
        if (cells.size() < 2) fail(ErrorKind::ParseError, manifest.string() + ":" + std::to_string(lineno) + ": expected grid_id,path");
        std::filesystem::path p = cells[1];
        if (p.is_relative()) p = manifest.parent_path() / p;
        double w = 1.0;
        if (cells.size() >= 3 && !cells[2].empty()) {
            try {
                w = std::stod(cells[2]);
            } catch (const std::exception&) {
                fail(ErrorKind::ParseError, manifest.string() + ":" + std::to_string(lineno) + ": bad weight");
            }
        }
        const SeriesPanel temps = io::load_panel_csv(p);
        if (temps.width() != 1) fail(ErrorKind::ParseError, p.string() + ": expected 'date,temp_c'");
        grids.push_back({cells[0], temps.series().front().renamed(cells[0]), reference, w});
    }
    if (grids.empty()) fail(ErrorKind::InvalidArgument, manifest.string() + " lists no grids");
    return grids;
}

}  // namespace cci::t90
