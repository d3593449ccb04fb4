#pragma once

#include "cci/series.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cci::index {

/// One search query. `text` keeps the Trends syntax (`-exclusion`, `+union`)
/// verbatim; it is the term's identity.
struct QueryTerm {
    std::string text;
    int category = 1;  // 1..7
    bool is_benchmark = false;

    friend bool operator==(const QueryTerm&, const QueryTerm&) = default;
};

class QueryVocabulary {
public:
    /// Throws InvalidArgument unless exactly one term is the benchmark, texts
    /// are unique, categories lie in 1..7, and the benchmark text starts with
    /// `expected_benchmark` (case-insensitive; empty disables the check).
    explicit QueryVocabulary(std::vector<QueryTerm> terms, std::string_view expected_benchmark = "natural gas");

    [[nodiscard]] const std::vector<QueryTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] const QueryTerm& benchmark() const noexcept { return terms_[benchmark_]; }
    [[nodiscard]] std::vector<QueryTerm> non_benchmark_terms() const;
    [[nodiscard]] const QueryTerm* find(std::string_view text) const;

private:
    std::vector<QueryTerm> terms_;
    std::size_t benchmark_ = 0;
};

/// CSV `term,category,is_benchmark`.
[[nodiscard]] QueryVocabulary load_vocabulary(const std::filesystem::path& path,
                                              std::string_view expected_benchmark = "natural gas");

inline constexpr std::size_t kMaxGroupSize = 5;

/// Benchmark-anchored comparison group as exported from Trends.
///
/// Construction checks the structural invariants: 2..5 members, the
/// benchmark among them, one series per member on a shared window, no
/// negative values. The [0,100] / peak-at-100 export normalization is checked
/// separately by `check_trends_scale`, so rescaled copies of a group remain
/// valid inputs to the arithmetic.
class QueryGroup {
public:
    QueryGroup(int id, std::vector<QueryTerm> members, std::vector<TimeSeries> series);

    [[nodiscard]] int id() const noexcept { return id_; }
    [[nodiscard]] const std::vector<QueryTerm>& members() const noexcept { return members_; }
    [[nodiscard]] const std::vector<TimeSeries>& series() const noexcept { return series_; }
    [[nodiscard]] const TimeSeries& benchmark_series() const;
    [[nodiscard]] MonthWindow window() const { return series_.front().window(); }

    /// Throws InvalidArgument when a value leaves [0,100] or no value equals 100.
    void check_trends_scale() const;
    /// Copy restricted to `window`.
    [[nodiscard]] QueryGroup sliced(const MonthWindow& window) const;

private:
    int id_;
    std::vector<QueryTerm> members_;
    std::vector<TimeSeries> series_;
};

/// Reads a wide CSV `date,<term1>,<term2>,...`; column headers are matched
/// against the vocabulary. Unknown columns raise MissingTerm.
[[nodiscard]] QueryGroup load_group_csv(const std::filesystem::path& path, int id, const QueryVocabulary& vocab);

/// Benchmark-rescaled series of one non-benchmark term.
struct TermFi {
    QueryTerm term;
    TimeSeries fi;
};

struct ConcernIndex {
    TimeSeries index;              // max exactly 100
    std::vector<TermFi> per_term;  // sorted by term text
    std::map<int, double> category_shares;
    std::map<std::string, double> term_totals;
};

/// Groups non-benchmark terms by category (ascending, stable within a category)
/// and fills each group with up to `max_group_size - 1` of them plus the benchmark,
/// which is placed first.
[[nodiscard]] std::vector<std::vector<QueryTerm>> partition_vocabulary(const QueryVocabulary& vocab,
                                                                       std::size_t max_group_size = kMaxGroupSize);

/// FI_i(t) = 100 * S_i(t) / max_t S_benchmark(t) for every non-benchmark member.
[[nodiscard]] std::vector<TermFi> rescale_group(const QueryGroup& group);

/// Sums FI series and normalizes the sum to a maximum of 100.
[[nodiscard]] ConcernIndex aggregate_index(std::span<const TermFi> fi);

struct BuildOptions {
    bool seasonal_adjust = false;
    bool renormalize_after_adjust = true;
};

/// align -> rescale_group per group -> aggregate_index -> optional seasonal adjustment.
[[nodiscard]] ConcernIndex build_cci(const QueryVocabulary& vocab, std::span<const QueryGroup> groups,
                                     const BuildOptions& options = {});

/// JSON sidecar with category shares and per-term totals.
[[nodiscard]] std::string sidecar_json(const ConcernIndex& index);

}  // namespace cci::index
