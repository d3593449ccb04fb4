#include "cci/io.hpp"

#include "cci/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cci::io {

namespace fs = std::filesystem;

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) fail(ErrorKind::NumericalFailure, "cannot format value");
    return {buf.data(), ptr};
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string quote_csv_field(std::string_view field) {
    const bool needs = field.find_first_of(",\"\n") != std::string_view::npos ||
                       (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
    fail(ErrorKind::ParseError, source + ":" + std::to_string(line) + ": " + what);
}

double parse_value(std::string_view cell, const std::string& source, std::size_t line) {
    cell = trim(cell);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        parse_fail(source, line, "bad numeric value '" + std::string(cell) + "'");
    }
    return v;
}

bool is_missing_cell(std::string_view cell) {
    cell = trim(cell);
    return cell.empty() || cell == "." || cell == "NA" || cell == "NaN" || cell == "nan";
}

MonthStamp parse_date(std::string_view cell, const std::string& source, std::size_t line) {
    try {
        return MonthStamp::parse(trim(cell));
    } catch (const Error&) {
        parse_fail(source, line, "malformed date '" + std::string(trim(cell)) + "'");
    }
}

/// Tracks calendar continuity across rows.
class MonthCursor {
public:
    explicit MonthCursor(std::string source) : source_(std::move(source)) {}

    void next(const MonthStamp& m, std::size_t line) {
        if (have_) {
            const long step = months_between(last_, m);
            if (step <= 0) parse_fail(source_, line, "dates not strictly ascending at " + m.str());
            if (step > 1) {
                std::string missing;
                for (long k = 1; k < step; ++k) {
                    if (!missing.empty()) missing += ", ";
                    missing += last_.plus(k).str();
                }
                fail(ErrorKind::GapError, source_ + ": missing months " + missing);
            }
        } else {
            start_ = m;
            have_ = true;
        }
        last_ = m;
    }
    [[nodiscard]] const MonthStamp& start() const { return start_; }
    [[nodiscard]] bool seen() const { return have_; }

private:
    std::string source_;
    MonthStamp start_;
    MonthStamp last_;
    bool have_ = false;
};

std::ifstream open_or_fail(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
    return in;
}

}  // namespace

TimeSeries parse_series_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) parse_fail(source, 1, "missing header");
    ++lineno;
    const auto header = split_csv_line(line);
    if (header.size() < 2 || trim(header[0]) != "date" || trim(header[1]) != "value") {
        parse_fail(source, lineno, "header must be 'date,value[,name]'");
    }
    const bool has_name = header.size() >= 3;
    MonthCursor cursor(source);
    std::vector<double> values;
    std::string name;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 2) parse_fail(source, lineno, "expected at least 2 fields");
        const MonthStamp m = parse_date(cells[0], source, lineno);
        const double v = parse_value(cells[1], source, lineno);
        cursor.next(m, lineno);
        values.push_back(v);
        if (has_name && name.empty() && cells.size() >= 3) name = std::string(trim(cells[2]));
    }
    if (!cursor.seen()) parse_fail(source, lineno, "no observations");
    return {cursor.start(), std::move(values), std::move(name)};
}

TimeSeries load_csv(const fs::path& path) {
    auto in = open_or_fail(path);
    TimeSeries s = parse_series_csv(in, path.string());
    if (s.name().empty()) return s.renamed(path.stem().string());
    return s;
}

void write_csv(const TimeSeries& series, std::ostream& out) {
    const bool named = !series.name().empty();
    out << (named ? "date,value,name\n" : "date,value\n");
    const std::string quoted = quote_csv_field(series.name());
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << series.month_at(t).str() << ',' << format_double(series[t]);
        if (named) out << ',' << quoted;
        out << '\n';
    }
}

void write_csv(const TimeSeries& series, const fs::path& path) {
    std::ostringstream os;
    write_csv(series, os);
    write_file_atomic(path, os.str());
}

SeriesPanel parse_panel_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) parse_fail(source, 1, "missing header");
    ++lineno;
    const auto header = split_csv_line(line);
    if (header.size() < 2 || trim(header[0]) != "date") parse_fail(source, lineno, "header must start with 'date'");
    const std::size_t n = header.size() - 1;
    MonthCursor cursor(source);
    std::vector<std::vector<double>> cols(n);
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != n + 1) {
            parse_fail(source, lineno, "expected " + std::to_string(n + 1) + " fields, got " +
                                           std::to_string(cells.size()));
        }
        cursor.next(parse_date(cells[0], source, lineno), lineno);
        for (std::size_t j = 0; j < n; ++j) cols[j].push_back(parse_value(cells[j + 1], source, lineno));
    }
    if (!cursor.seen()) parse_fail(source, lineno, "no observations");
    std::vector<TimeSeries> series;
    series.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        series.emplace_back(cursor.start(), std::move(cols[j]), std::string(trim(header[j + 1])));
    }
    return SeriesPanel(std::move(series));
}

SeriesPanel load_panel_csv(const fs::path& path) {
    auto in = open_or_fail(path);
    return parse_panel_csv(in, path.string());
}

void write_panel_csv(const SeriesPanel& panel, const fs::path& path) {
    std::ostringstream os;
    os << "date";
    for (const auto& s : panel.series()) os << ',' << quote_csv_field(s.name());
    os << '\n';
    for (std::size_t t = 0; t < panel.length(); ++t) {
        os << panel.window().first.plus(static_cast<long>(t)).str();
        for (const auto& s : panel.series()) os << ',' << format_double(s[t]);
        os << '\n';
    }
    write_file_atomic(path, os.str());
}

std::size_t SparseSeries::missing() const {
    std::size_t k = 0;
    for (double v : values) k += std::isnan(v) ? 1 : 0;
    return k;
}

SparseSeries load_sparse_csv(const fs::path& path) {
    auto in = open_or_fail(path);
    const std::string source = path.string();
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) parse_fail(source, 1, "missing header");
    ++lineno;
    const auto header = split_csv_line(line);
    if (header.size() < 2 || trim(header[0]) != "date") parse_fail(source, lineno, "header must start with 'date'");
    MonthCursor cursor(source);
    SparseSeries out;
    out.name = header.size() >= 3 ? std::string() : path.stem().string();
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 2) parse_fail(source, lineno, "expected at least 2 fields");
        cursor.next(parse_date(cells[0], source, lineno), lineno);
        out.values.push_back(is_missing_cell(cells[1]) ? std::numeric_limits<double>::quiet_NaN()
                                                       : parse_value(cells[1], source, lineno));
        if (out.name.empty() && cells.size() >= 3) out.name = std::string(trim(cells[2]));
    }
    if (!cursor.seen()) parse_fail(source, lineno, "no observations");
    out.start = cursor.start();
    if (out.name.empty()) out.name = path.stem().string();
    return out;
}

void write_file_atomic(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::IoError, "cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) fail(ErrorKind::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace cci::io
