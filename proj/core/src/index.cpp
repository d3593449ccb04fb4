#include "cci/index.hpp"

#include "cci/error.hpp"
#include "cci/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace cci::index {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool parse_bool(std::string_view s, bool& out) {
    const std::string v = lower(s);
    if (v == "true" || v == "1" || v == "yes") {
        out = true;
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v.empty()) {
        out = false;
        return true;
    }
    return false;
}

std::string trimmed(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

QueryVocabulary::QueryVocabulary(std::vector<QueryTerm> terms, std::string_view expected_benchmark)
    : terms_(std::move(terms)) {
    if (terms_.empty()) fail(ErrorKind::InvalidArgument, "vocabulary is empty");
    std::set<std::string> seen;
    std::size_t benchmarks = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (t.text.empty()) fail(ErrorKind::InvalidArgument, "vocabulary term with empty text");
        if (t.category < 1 || t.category > 7) {
            fail(ErrorKind::InvalidArgument, "term '" + t.text + "' has category " + std::to_string(t.category));
        }
        if (!seen.insert(t.text).second) fail(ErrorKind::InvalidArgument, "duplicate term '" + t.text + "'");
        if (t.is_benchmark) {
            benchmark_ = i;
            ++benchmarks;
        }
    }
    if (benchmarks != 1) {
        fail(ErrorKind::InvalidArgument, "vocabulary must flag exactly one benchmark, found " + std::to_string(benchmarks));
    }
    if (!expected_benchmark.empty() && !lower(benchmark().text).starts_with(lower(expected_benchmark))) {
        fail(ErrorKind::InvalidArgument,
             "benchmark '" + benchmark().text + "' does not match '" + std::string(expected_benchmark) + "'");
    }
}

std::vector<QueryTerm> QueryVocabulary::non_benchmark_terms() const {
    std::vector<QueryTerm> out;
    std::copy_if(terms_.begin(), terms_.end(), std::back_inserter(out), [](const auto& t) { return !t.is_benchmark; });
    return out;
}

const QueryTerm* QueryVocabulary::find(std::string_view text) const {
    auto it = std::find_if(terms_.begin(), terms_.end(), [&](const auto& t) { return t.text == text; });
    return it == terms_.end() ? nullptr : &*it;
}

QueryVocabulary load_vocabulary(const std::filesystem::path& path, std::string_view expected_benchmark) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(ErrorKind::ParseError, path.string() + ":1: missing header");
    const auto header = io::split_csv_line(line);
    if (header.size() != 3 || trimmed(header[0]) != "term" || trimmed(header[1]) != "category" ||
        trimmed(header[2]) != "is_benchmark") {
        fail(ErrorKind::ParseError, path.string() + ":1: header must be 'term,category,is_benchmark'");
    }
    std::vector<QueryTerm> terms;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        const auto cells = io::split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
        if (cells.size() != 3) fail(ErrorKind::ParseError, where + "expected 3 fields");
        QueryTerm t;
        t.text = trimmed(cells[0]);
        try {
            std::size_t used = 0;
            t.category = std::stoi(cells[1], &used);
            if (trimmed(cells[1].substr(used)).size() != 0) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, where + "bad category '" + cells[1] + "'");
        }
        if (!parse_bool(trimmed(cells[2]), t.is_benchmark)) {
            fail(ErrorKind::ParseError, where + "bad is_benchmark '" + cells[2] + "'");
        }
        terms.push_back(std::move(t));
    }
    return QueryVocabulary(std::move(terms), expected_benchmark);
}

// ---------------------------------------------------------------------------

QueryGroup::QueryGroup(int id, std::vector<QueryTerm> members, std::vector<TimeSeries> series)
    : id_(id), members_(std::move(members)), series_(std::move(series)) {
    const std::string tag = "group " + std::to_string(id_);
    if (members_.size() < 2 || members_.size() > kMaxGroupSize) {
        fail(ErrorKind::InvalidArgument, tag + " has " + std::to_string(members_.size()) + " members (allowed 2..5)");
    }
    if (series_.size() != members_.size()) fail(ErrorKind::InvalidArgument, tag + ": one series per member required");
    const auto n_bench = std::count_if(members_.begin(), members_.end(), [](const auto& t) { return t.is_benchmark; });
    if (n_bench != 1) fail(ErrorKind::InvalidArgument, tag + " must contain the benchmark exactly once");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (!seen.insert(members_[i].text).second) {
            fail(ErrorKind::InvalidArgument, tag + " repeats term '" + members_[i].text + "'");
        }
        if (!(series_[i].window() == series_.front().window())) {
            fail(ErrorKind::InvalidArgument, tag + ": member series do not share one window");
        }
        for (double v : series_[i].values()) {
            if (v < 0.0) fail(ErrorKind::InvalidArgument, tag + ": negative search volume for '" + members_[i].text + "'");
        }
    }
}

const TimeSeries& QueryGroup::benchmark_series() const {
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (members_[i].is_benchmark) return series_[i];
    }
    fail(ErrorKind::InvalidArgument, "group without benchmark");
}

void QueryGroup::check_trends_scale() const {
    bool peak = false;
    for (std::size_t i = 0; i < series_.size(); ++i) {
        for (double v : series_[i].values()) {
            if (v > 100.0) {
                fail(ErrorKind::InvalidArgument,
                     "group " + std::to_string(id_) + ": value above 100 for '" + members_[i].text + "'");
            }
            peak = peak || v == 100.0;
        }
    }
    if (!peak) fail(ErrorKind::InvalidArgument, "group " + std::to_string(id_) + " has no value equal to 100");
}

QueryGroup QueryGroup::sliced(const MonthWindow& window) const {
    std::vector<TimeSeries> cut;
    cut.reserve(series_.size());
    for (const auto& s : series_) cut.push_back(s.slice(window));
    return {id_, members_, std::move(cut)};
}

QueryGroup load_group_csv(const std::filesystem::path& path, int id, const QueryVocabulary& vocab) {
    const SeriesPanel panel = io::load_panel_csv(path);
    std::vector<QueryTerm> members;
    for (const auto& s : panel.series()) {
        const QueryTerm* t = vocab.find(s.name());
        if (t == nullptr) {
            fail(ErrorKind::MissingTerm, path.string() + ": column '" + s.name() + "' is not a vocabulary term");
        }
        members.push_back(*t);
    }
    QueryGroup g(id, std::move(members), panel.series());
    g.check_trends_scale();
    return g;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<QueryTerm>> partition_vocabulary(const QueryVocabulary& vocab, std::size_t max_group_size) {
    if (max_group_size < 2) fail(ErrorKind::InvalidArgument, "max_group_size must be at least 2");
    auto terms = vocab.non_benchmark_terms();
    std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.category < b.category; });
    const std::size_t per_group = max_group_size - 1;
    std::vector<std::vector<QueryTerm>> groups;
    for (std::size_t i = 0; i < terms.size();) {
        std::vector<QueryTerm> g{vocab.benchmark()};
        const int cat = terms[i].category;
        while (i < terms.size() && terms[i].category == cat && g.size() - 1 < per_group) g.push_back(terms[i++]);
        groups.push_back(std::move(g));
    }
    return groups;
}

std::vector<TermFi> rescale_group(const QueryGroup& group) {
    const auto& bench = group.benchmark_series().values();
    const double peak = *std::max_element(bench.begin(), bench.end());
    if (!(peak > 0.0)) {
        fail(ErrorKind::DegenerateBenchmark, "benchmark series of group " + std::to_string(group.id()) + " is all zeros");
    }
    std::vector<TermFi> out;
    for (std::size_t i = 0; i < group.members().size(); ++i) {
        const auto& term = group.members()[i];
        if (term.is_benchmark) continue;
        const auto& s = group.series()[i];
        std::vector<double> fi(s.size());
        std::transform(s.values().begin(), s.values().end(), fi.begin(), [&](double v) { return 100.0 * v / peak; });
        out.push_back({term, TimeSeries(s.start(), std::move(fi), term.text)});
    }
    return out;
}

ConcernIndex aggregate_index(std::span<const TermFi> fi) {
    if (fi.empty()) fail(ErrorKind::InvalidArgument, "aggregate_index needs at least one term");
    std::vector<TermFi> sorted(fi.begin(), fi.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.term.text < b.term.text; });
    const MonthWindow window = sorted.front().fi.window();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0 && sorted[i].term.text == sorted[i - 1].term.text) {
            fail(ErrorKind::InvalidArgument, "term '" + sorted[i].term.text + "' appears more than once");
        }
        if (!(sorted[i].fi.window() == window)) {
            fail(ErrorKind::InvalidArgument, "FI series for '" + sorted[i].term.text + "' is not aligned");
        }
    }
    const std::size_t len = window.length();
    std::vector<double> raw(len, 0.0);
    ConcernIndex out{TimeSeries(window.first, std::vector<double>(len, 0.0), "cci"), {}, {}, {}};
    double grand = 0.0;
    std::map<int, double> by_cat;
    for (const auto& item : sorted) {
        double total = 0.0;
        for (std::size_t t = 0; t < len; ++t) {
            raw[t] += item.fi[t];
            total += item.fi[t];
        }
        out.term_totals[item.term.text] = total;
        by_cat[item.term.category] += total;
        grand += total;
    }
    const double peak = *std::max_element(raw.begin(), raw.end());
    if (!(peak > 0.0)) fail(ErrorKind::AllZero, "aggregated index is identically zero");
    for (double& v : raw) v = v / peak * 100.0;
    out.index = TimeSeries(window.first, std::move(raw), "cci");
    for (const auto& [cat, total] : by_cat) out.category_shares[cat] = total / grand;
    out.per_term = std::move(sorted);
    return out;
}

ConcernIndex build_cci(const QueryVocabulary& vocab, std::span<const QueryGroup> groups, const BuildOptions& options) {
    if (groups.empty()) fail(ErrorKind::MissingTerm, "no group data supplied");
    std::set<std::string> covered;
    MonthStamp first = groups.front().window().first;
    MonthStamp last = groups.front().window().last;
    for (const auto& g : groups) {
        for (const auto& m : g.members()) {
            const QueryTerm* known = vocab.find(m.text);
            if (known == nullptr || known->is_benchmark != m.is_benchmark) {
                fail(ErrorKind::InvalidArgument, "group " + std::to_string(g.id()) + " term '" + m.text +
                                                     "' does not match the vocabulary");
            }
            if (!m.is_benchmark && !covered.insert(m.text).second) {
                fail(ErrorKind::InvalidArgument, "term '" + m.text + "' appears in more than one group");
            }
        }
        first = std::max(first, g.window().first);
        last = std::min(last, g.window().last);
    }
    for (const auto& t : vocab.non_benchmark_terms()) {
        if (!covered.contains(t.text)) fail(ErrorKind::MissingTerm, "no group data for term '" + t.text + "'");
    }
    if (months_between(first, last) < 1) fail(ErrorKind::EmptyOverlap, "group windows share fewer than two months");
    const MonthWindow window{first, last};

    std::vector<TermFi> fi;
    for (const auto& g : groups) {
        auto part = rescale_group(g.sliced(window));
        fi.insert(fi.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    ConcernIndex out = aggregate_index(fi);
    if (options.seasonal_adjust) {
        TimeSeries adjusted = seasonal_adjust(out.index);
        if (options.renormalize_after_adjust) {
            std::vector<double> v = adjusted.values();
            const double peak = *std::max_element(v.begin(), v.end());
            if (!(peak > 0.0)) fail(ErrorKind::AllZero, "seasonally adjusted index has no positive value");
            for (double& x : v) x = x / peak * 100.0;
            adjusted = TimeSeries(adjusted.start(), std::move(v), "cci");
        }
        out.index = std::move(adjusted);
    }
    return out;
}

std::string sidecar_json(const ConcernIndex& index) {
    nlohmann::ordered_json j;
    j["window"] = {{"start", index.index.start().str()}, {"end", index.index.end().str()}};
    nlohmann::ordered_json shares = nlohmann::ordered_json::object();
    for (const auto& [cat, share] : index.category_shares) shares[std::to_string(cat)] = share;
    j["category_shares"] = shares;
    nlohmann::ordered_json totals = nlohmann::ordered_json::object();
    for (const auto& [term, total] : index.term_totals) totals[term] = total;
    j["term_totals"] = totals;
    return j.dump(2) + "\n";
}

}  // namespace cci::index
