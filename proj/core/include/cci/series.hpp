#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cci {

/// Calendar month. Ordering is (year, month) lexicographic.
struct MonthStamp {
    int year = 2000;
    int month = 1;

    constexpr MonthStamp() = default;
    MonthStamp(int y, int m);

    /// Months since year 0, used for arithmetic.
    [[nodiscard]] constexpr long ordinal() const noexcept { return static_cast<long>(year) * 12 + (month - 1); }
    [[nodiscard]] static MonthStamp from_ordinal(long ordinal);
    [[nodiscard]] MonthStamp plus(long months) const { return from_ordinal(ordinal() + months); }

    /// "YYYY-MM"
    [[nodiscard]] std::string str() const;
    /// Accepts "YYYY-MM" and "YYYY-MM-DD" (day ignored). Throws ParseError.
    [[nodiscard]] static MonthStamp parse(std::string_view text);

    friend constexpr auto operator<=>(const MonthStamp&, const MonthStamp&) = default;
};

/// Signed month distance b - a.
[[nodiscard]] inline long months_between(const MonthStamp& a, const MonthStamp& b) noexcept {
    return b.ordinal() - a.ordinal();
}

struct MonthWindow {
    MonthStamp first;
    MonthStamp last;

    [[nodiscard]] std::size_t length() const noexcept {
        return static_cast<std::size_t>(months_between(first, last) + 1);
    }
    [[nodiscard]] bool contains(const MonthStamp& m) const noexcept { return first <= m && m <= last; }
    friend bool operator==(const MonthWindow&, const MonthWindow&) = default;
};

/// Gap-free monthly series with finite values.
class TimeSeries {
public:
    TimeSeries(MonthStamp start, std::vector<double> values, std::string name = {});

    [[nodiscard]] const MonthStamp& start() const noexcept { return start_; }
    [[nodiscard]] MonthStamp end() const { return start_.plus(static_cast<long>(values_.size()) - 1); }
    [[nodiscard]] MonthWindow window() const { return {start_, end()}; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] MonthStamp month_at(std::size_t i) const { return start_.plus(static_cast<long>(i)); }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    [[nodiscard]] TimeSeries renamed(std::string name) const;
    /// Sub-series covering `window`, which must lie inside this series.
    [[nodiscard]] TimeSeries slice(const MonthWindow& window) const;
    [[nodiscard]] Eigen::VectorXd to_vector() const;

private:
    MonthStamp start_;
    std::vector<double> values_;
    std::string name_;
};

/// Equal-length series sharing one calendar window.
class SeriesPanel {
public:
    explicit SeriesPanel(std::vector<TimeSeries> series);

    [[nodiscard]] const std::vector<TimeSeries>& series() const noexcept { return series_; }
    [[nodiscard]] const MonthWindow& window() const noexcept { return window_; }
    [[nodiscard]] std::size_t length() const noexcept { return window_.length(); }
    [[nodiscard]] std::size_t width() const noexcept { return series_.size(); }
    [[nodiscard]] std::vector<std::string> names() const;
    /// T x n data matrix, columns in series order.
    [[nodiscard]] Eigen::MatrixXd matrix() const;

    [[nodiscard]] static SeriesPanel from_matrix(MonthStamp start, const Eigen::MatrixXd& data,
                                                 const std::vector<std::string>& names);

private:
    std::vector<TimeSeries> series_;
    MonthWindow window_;
};

/// Trims every series to the common calendar window. Throws EmptyOverlap when
/// the intersection holds fewer than two months.
[[nodiscard]] SeriesPanel align(std::span<const TimeSeries> series);

/// 100 * (x_t - x_{t-1}) / x_{t-1}
[[nodiscard]] TimeSeries pct_change(const TimeSeries& s);
/// 100 * (x_t - x_{t-12}) / x_{t-12}
[[nodiscard]] TimeSeries yoy_growth(const TimeSeries& s);
/// Sample mean 0, sample standard deviation (n-1) 1.
[[nodiscard]] TimeSeries standardize(const TimeSeries& s);
/// Month-of-year dummy demeaning with the grand mean added back.
[[nodiscard]] TimeSeries seasonal_adjust(const TimeSeries& s);

}  // namespace cci
