#include "cci/series.hpp"

#include "cci/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace cci {

MonthStamp::MonthStamp(int y, int m) : year(y), month(m) {
    if (m < 1 || m > 12) {
        fail(ErrorKind::InvalidArgument, "month " + std::to_string(m) + " outside 1..12");
    }
}

MonthStamp MonthStamp::from_ordinal(long ordinal) {
    long y = ordinal / 12;
    long m = ordinal % 12;
    if (m < 0) {
        m += 12;
        --y;
    }
    return {static_cast<int>(y), static_cast<int>(m + 1)};
}

std::string MonthStamp::str() const {
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d", year, month);
    return buf.data();
}

MonthStamp MonthStamp::parse(std::string_view text) {
    auto bad = [&] { fail(ErrorKind::ParseError, "malformed date '" + std::string(text) + "'"); };
    if (text.size() != 7 && text.size() != 10) bad();
    if (text[4] != '-') bad();
    int y = 0;
    int m = 0;
    auto [py, ey] = std::from_chars(text.data(), text.data() + 4, y);
    auto [pm, em] = std::from_chars(text.data() + 5, text.data() + 7, m);
    if (ey != std::errc{} || py != text.data() + 4 || em != std::errc{} || pm != text.data() + 7) bad();
    if (m < 1 || m > 12) bad();
    if (text.size() == 10) {
        int d = 0;
        auto [pd, ed] = std::from_chars(text.data() + 8, text.data() + 10, d);
        if (text[7] != '-' || ed != std::errc{} || pd != text.data() + 10 || d < 1 || d > 31) bad();
    }
    return {y, m};
}

// ---------------------------------------------------------------------------

TimeSeries::TimeSeries(MonthStamp start, std::vector<double> values, std::string name)
    : start_(start), values_(std::move(values)), name_(std::move(name)) {
    if (values_.empty()) fail(ErrorKind::InvalidArgument, "series '" + name_ + "' is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            fail(ErrorKind::InvalidArgument,
                 "series '" + name_ + "' has a non-finite value at " + month_at(i).str());
        }
    }
}

TimeSeries TimeSeries::renamed(std::string name) const { return {start_, values_, std::move(name)}; }

TimeSeries TimeSeries::slice(const MonthWindow& window) const {
    if (window.first < start_ || end() < window.last || window.last < window.first) {
        fail(ErrorKind::InvalidArgument, "slice " + window.first.str() + ".." + window.last.str() +
                                             " outside series '" + name_ + "'");
    }
    const auto offset = static_cast<std::size_t>(months_between(start_, window.first));
    std::vector<double> out(values_.begin() + static_cast<std::ptrdiff_t>(offset),
                            values_.begin() + static_cast<std::ptrdiff_t>(offset + window.length()));
    return {window.first, std::move(out), name_};
}

Eigen::VectorXd TimeSeries::to_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

// ---------------------------------------------------------------------------

SeriesPanel::SeriesPanel(std::vector<TimeSeries> series) : series_(std::move(series)) {
    if (series_.empty()) fail(ErrorKind::InvalidArgument, "panel needs at least one series");
    window_ = series_.front().window();
    for (const auto& s : series_) {
        if (!(s.window() == window_)) {
            fail(ErrorKind::LengthMismatch, "panel member '" + s.name() + "' does not cover " +
                                                 window_.first.str() + ".." + window_.last.str());
        }
    }
}

std::vector<std::string> SeriesPanel::names() const {
    std::vector<std::string> out;
    out.reserve(series_.size());
    for (const auto& s : series_) out.push_back(s.name());
    return out;
}

Eigen::MatrixXd SeriesPanel::matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(length()), static_cast<Eigen::Index>(width()));
    for (std::size_t j = 0; j < series_.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = series_[j].to_vector();
    return m;
}

SeriesPanel SeriesPanel::from_matrix(MonthStamp start, const Eigen::MatrixXd& data,
                                     const std::vector<std::string>& names) {
    if (static_cast<std::size_t>(data.cols()) != names.size()) {
        fail(ErrorKind::InvalidArgument, "column/name count mismatch");
    }
    std::vector<TimeSeries> cols;
    cols.reserve(names.size());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        std::vector<double> v(data.col(j).data(), data.col(j).data() + data.rows());
        cols.emplace_back(start, std::move(v), names[static_cast<std::size_t>(j)]);
    }
    return SeriesPanel(std::move(cols));
}

// ---------------------------------------------------------------------------

SeriesPanel align(std::span<const TimeSeries> series) {
    if (series.empty()) fail(ErrorKind::InvalidArgument, "align needs at least one series");
    MonthStamp first = series.front().start();
    MonthStamp last = series.front().end();
    for (const auto& s : series) {
        first = std::max(first, s.start());
        last = std::min(last, s.end());
    }
    if (months_between(first, last) < 1) {
        fail(ErrorKind::EmptyOverlap, "series share fewer than two months");
    }
    const MonthWindow window{first, last};
    std::vector<TimeSeries> trimmed;
    trimmed.reserve(series.size());
    for (const auto& s : series) trimmed.push_back(s.slice(window));
    return SeriesPanel(std::move(trimmed));
}

namespace {

void require_positive(const TimeSeries& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0.0)) {
            fail(ErrorKind::NonPositiveLevel,
                 "series '" + s.name() + "' has level " + std::to_string(s[i]) + " at " + s.month_at(i).str());
        }
    }
}

TimeSeries growth(const TimeSeries& s, std::size_t lag) {
    require_positive(s);
    std::vector<double> out(s.size() - lag);
    for (std::size_t t = lag; t < s.size(); ++t) out[t - lag] = 100.0 * (s[t] - s[t - lag]) / s[t - lag];
    return {s.start().plus(static_cast<long>(lag)), std::move(out), s.name()};
}

}  // namespace

TimeSeries pct_change(const TimeSeries& s) {
    if (s.size() < 2) fail(ErrorKind::TooShort, "pct_change needs at least 2 observations");
    return growth(s, 1);
}

TimeSeries yoy_growth(const TimeSeries& s) {
    if (s.size() < 13) fail(ErrorKind::TooShort, "yoy_growth needs at least 13 observations");
    return growth(s, 12);
}

TimeSeries standardize(const TimeSeries& s) {
    if (s.size() < 2) fail(ErrorKind::TooShort, "standardize needs at least 2 observations");
    const auto& v = s.values();
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(mean))) {
        fail(ErrorKind::ZeroVariance, "series '" + s.name() + "' has zero variance");
    }
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [&](double x) { return (x - mean) / sd; });
    return {s.start(), std::move(out), s.name()};
}

TimeSeries seasonal_adjust(const TimeSeries& s) {
    if (s.size() < 24) fail(ErrorKind::TooShort, "seasonal_adjust needs at least 24 observations");
    std::array<double, 12> sum{};
    std::array<int, 12> count{};
    double grand = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const int m = s.month_at(t).month - 1;
        sum[m] += s[t];
        ++count[m];
        grand += s[t];
    }
    grand /= static_cast<double>(s.size());
    std::vector<double> out(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) {
        const int m = s.month_at(t).month - 1;
        out[t] = s[t] - sum[m] / count[m] + grand;
    }
    return {s.start(), std::move(out), s.name()};
}

}  // namespace cci
