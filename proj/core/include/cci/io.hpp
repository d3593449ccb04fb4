#pragma once

#include "cci/series.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cci::io {

/// Shortest round-trip decimal representation; bit-stable across runs.
[[nodiscard]] std::string format_double(double value);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
[[nodiscard]] std::vector<std::string> split_csv_line(std::string_view line);
/// Quotes a field when it contains a comma, quote or leading/trailing space.
[[nodiscard]] std::string quote_csv_field(std::string_view field);

/// Reads `date,value[,name]`. Throws ParseError (with line number) or GapError.
[[nodiscard]] TimeSeries load_csv(const std::filesystem::path& path);
[[nodiscard]] TimeSeries parse_series_csv(std::istream& in, const std::string& source = "<stream>");
void write_csv(const TimeSeries& series, const std::filesystem::path& path);
void write_csv(const TimeSeries& series, std::ostream& out);

/// Wide layout `date,<name1>,<name2>,...`; every row must be filled.
[[nodiscard]] SeriesPanel load_panel_csv(const std::filesystem::path& path);
[[nodiscard]] SeriesPanel parse_panel_csv(std::istream& in, const std::string& source = "<stream>");
void write_panel_csv(const SeriesPanel& panel, const std::filesystem::path& path);

/// Series with optional missing entries (empty, ".", "NA" or "NaN" cells).
/// Missing values are stored as quiet NaN; the calendar must still be gap-free.
struct SparseSeries {
    MonthStamp start;
    std::vector<double> values;
    std::string name;

    [[nodiscard]] std::size_t missing() const;
};
[[nodiscard]] SparseSeries load_sparse_csv(const std::filesystem::path& path);

/// Writes `text` to `path` through a sibling temporary and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace cci::io
