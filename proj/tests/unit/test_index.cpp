#include "check.hpp"

#include "cci/index.hpp"
#include "cci/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

using namespace cci::index;
using cci::ErrorKind;
using cci::MonthStamp;
using cci::TimeSeries;

namespace {

const QueryTerm kBench{"natural gas", 4, true};

QueryVocabulary small_vocab(int terms_per_cat, int cats) {
    std::vector<QueryTerm> t{kBench};
    for (int c = 1; c <= cats; ++c) {
        for (int i = 0; i < terms_per_cat; ++i) t.push_back({"term " + std::to_string(c) + "." + std::to_string(i), c, false});
    }
    return QueryVocabulary(t);
}

TimeSeries ts(std::vector<double> v, const std::string& name, MonthStamp start = {2010, 1}) {
    return {start, std::move(v), name};
}

std::vector<std::string> split_plain(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
}

}  // namespace

TEST_SUITE("index") {

TEST_CASE("vocabulary invariants") {
    CHECK_KIND(QueryVocabulary({{"a", 1, false}}), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryVocabulary({kBench, {"a", 1, false}, {"a", 2, false}}), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryVocabulary({kBench, {"a", 8, false}}), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryVocabulary({kBench, {"b", 0, false}}), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryVocabulary({kBench, {"oil", 4, true}}), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryVocabulary({{"crude oil", 4, true}, {"a", 1, false}}), ErrorKind::InvalidArgument);
    const QueryVocabulary v({kBench, {"a", 1, false}});
    CHECK(v.benchmark().text == "natural gas");
    CHECK(v.find("a") != nullptr);
    CHECK(v.find("b") == nullptr);
}

TEST_CASE("shipped vocabulary") {
    const auto v = load_vocabulary(testing::fixture("vocabulary.csv"));
    std::map<int, int> per_cat;
    for (const auto& t : v.terms()) ++per_cat[t.category];
    CHECK(v.terms().size() == 107);
    CHECK(per_cat == std::map<int, int>{{1, 8}, {2, 11}, {3, 20}, {4, 18}, {5, 11}, {6, 12}, {7, 27}});
    CHECK(v.benchmark().category == 4);
    CHECK(v.benchmark().text.rfind("Natural gas", 0) == 0);
}

TEST_CASE("partition_vocabulary") {
    SUBCASE("ceiling division within one category") {
        const auto groups = partition_vocabulary(small_vocab(9, 1), 5);
        REQUIRE(groups.size() == 3);
        CHECK(groups[0].size() == 5);
        CHECK(groups[1].size() == 5);
        CHECK(groups[2].size() == 2);
        for (const auto& g : groups) CHECK(g.front().is_benchmark);
    }
    SUBCASE("minimal group") {
        const auto groups = partition_vocabulary(QueryVocabulary({kBench, {"x", 2, false}}), 5);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].size() == 2);
    }
    SUBCASE("shipped fixture, brute-force count") {
        const auto v = load_vocabulary(testing::fixture("vocabulary.csv"));
        const auto groups = partition_vocabulary(v, 5);
        std::map<std::string, int> seen;
        int prev_cat = 0;
        for (const auto& g : groups) {
            CHECK(g.size() <= 5);
            CHECK(g.size() >= 2);
            int benches = 0;
            int cat = -1;
            for (const auto& t : g) {
                if (t.is_benchmark) {
                    ++benches;
                    continue;
                }
                if (cat == -1) cat = t.category;
                CHECK(t.category == cat);
                ++seen[t.text];
            }
            CHECK(benches == 1);
            CHECK(cat >= prev_cat);
            prev_cat = cat;
        }
        CHECK(seen.size() == v.terms().size() - 1);
        for (const auto& [text, n] : seen) CHECK(n == 1);
    }
    CHECK_KIND(partition_vocabulary(small_vocab(2, 1), 1), ErrorKind::InvalidArgument);
}

TEST_CASE("group structure") {
    const QueryTerm a{"a", 1, false};
    CHECK_KIND(QueryGroup(1, {kBench}, {ts({1, 2}, "natural gas")}), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryGroup(1, {a, {"b", 1, false}}, {ts({1, 2}, "a"), ts({1, 2}, "b")}), ErrorKind::InvalidArgument);
    std::vector<QueryTerm> six{kBench};
    std::vector<TimeSeries> six_s{ts({1, 2}, "nb")};
    for (int i = 0; i < 5; ++i) {
        six.push_back({"t" + std::to_string(i), 1, false});
        six_s.push_back(ts({1, 2}, "t"));
    }
    CHECK_KIND(QueryGroup(1, six, six_s), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryGroup(1, {kBench, a}, {ts({1, 2}, "nb"), ts({1, 2}, "a", {2010, 2})}), ErrorKind::InvalidArgument);
    CHECK_KIND(QueryGroup(1, {kBench, a}, {ts({1, 2}, "nb"), ts({1, -2}, "a")}), ErrorKind::InvalidArgument);

    const QueryGroup ok(1, {kBench, a}, {ts({50, 20}, "nb"), ts({100, 40}, "a")});
    CHECK_NOTHROW(ok.check_trends_scale());
    const QueryGroup no_peak(1, {kBench, a}, {ts({50, 20}, "nb"), ts({90, 40}, "a")});
    CHECK_KIND(no_peak.check_trends_scale(), ErrorKind::InvalidArgument);
    const QueryGroup over(1, {kBench, a}, {ts({50, 100}, "nb"), ts({120, 40}, "a")});
    CHECK_KIND(over.check_trends_scale(), ErrorKind::InvalidArgument);
}

TEST_CASE("rescale_group") {
    const QueryTerm blizzard{"blizzard", 1, false};
    SUBCASE("term at 100 while the benchmark peaks at 50") {
        const QueryGroup g(1, {kBench, blizzard}, {ts({50, 30, 10}, "nb"), ts({100, 20, 0}, "blizzard")});
        const auto fi = rescale_group(g);
        REQUIRE(fi.size() == 1);
        CHECK(fi[0].fi[0] == 200.0);
        CHECK(fi[0].fi[1] == 40.0);
        CHECK(fi[0].term.text == "blizzard");
    }
    SUBCASE("unit scaling") {
        const QueryGroup g(1, {kBench, blizzard}, {ts({100, 60}, "nb"), ts({20, 40}, "blizzard")});
        const auto fi = rescale_group(g);
        CHECK(fi[0].fi.values() == std::vector<double>{20, 40});
    }
    SUBCASE("degenerate benchmark") {
        const QueryGroup g(1, {blizzard, kBench}, {ts({100, 60}, "blizzard"), ts({0, 0}, "nb")});
        CHECK_KIND(rescale_group(g), ErrorKind::DegenerateBenchmark);
    }
}

TEST_CASE("aggregate_index") {
    SUBCASE("single term self-normalizes") {
        const std::vector<TermFi> fi{{{"a", 1, false}, ts({10, 20, 40}, "a")}};
        const auto idx = aggregate_index(fi);
        CHECK(idx.index.values() == std::vector<double>{25, 50, 100});
        CHECK(idx.category_shares.at(1) == 1.0);
    }
    SUBCASE("two identical terms") {
        const std::vector<TermFi> fi{{{"a", 1, false}, ts({10, 20, 40}, "a")}, {{"b", 2, false}, ts({10, 20, 40}, "b")}};
        const auto idx = aggregate_index(fi);
        CHECK(idx.index.values() == std::vector<double>{25, 50, 100});
        CHECK(idx.category_shares.at(1) == doctest::Approx(0.5));
        CHECK(idx.term_totals.at("b") == 70.0);
    }
    SUBCASE("all zero") {
        const std::vector<TermFi> fi{{{"a", 1, false}, ts({0, 0}, "a")}};
        CHECK_KIND(aggregate_index(fi), ErrorKind::AllZero);
    }
    SUBCASE("duplicates and misalignment") {
        const std::vector<TermFi> dup{{{"a", 1, false}, ts({1, 2}, "a")}, {{"a", 1, false}, ts({1, 2}, "a")}};
        CHECK_KIND(aggregate_index(dup), ErrorKind::InvalidArgument);
        const std::vector<TermFi> mis{{{"a", 1, false}, ts({1, 2}, "a")}, {{"b", 1, false}, ts({1, 2}, "b", {2011, 1})}};
        CHECK_KIND(aggregate_index(mis), ErrorKind::InvalidArgument);
    }
}

TEST_CASE("fixture index matches an independent recomputation") {
    const auto vocab = load_vocabulary(testing::fixture("vocabulary.csv"));
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(testing::fixture("groups"))) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<QueryGroup> groups;
    for (std::size_t i = 0; i < files.size(); ++i) groups.push_back(load_group_csv(files[i], static_cast<int>(i + 1), vocab));
    const auto idx = build_cci(vocab, groups);

    // Oracle: plain parsing, per-group benchmark maxima, direct sums.
    std::vector<double> raw;
    std::map<int, double> cat_total;
    double grand = 0.0;
    for (const auto& f : files) {
        std::ifstream in(f);
        std::string line;
        std::getline(in, line);
        const auto header = split_plain(line);
        std::vector<std::vector<double>> cols(header.size() - 1);
        while (std::getline(in, line)) {
            const auto cells = split_plain(line);
            for (std::size_t j = 1; j < cells.size(); ++j) cols[j - 1].push_back(std::stod(cells[j]));
        }
        std::size_t bench_col = 0;
        for (std::size_t j = 1; j < header.size(); ++j) {
            if (vocab.find(header[j])->is_benchmark) bench_col = j - 1;
        }
        const double bmax = *std::max_element(cols[bench_col].begin(), cols[bench_col].end());
        if (raw.empty()) raw.assign(cols[0].size(), 0.0);
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (j == bench_col) continue;
            const int cat = vocab.find(header[j + 1])->category;
            for (std::size_t t = 0; t < raw.size(); ++t) {
                const double fi = 100.0 * cols[j][t] / bmax;
                raw[t] += fi;
                cat_total[cat] += fi;
                grand += fi;
            }
        }
    }
    const double peak = *std::max_element(raw.begin(), raw.end());
    REQUIRE(idx.index.size() == raw.size());
    for (std::size_t t = 0; t < raw.size(); ++t) CHECK(idx.index[t] == doctest::Approx(100.0 * raw[t] / peak).epsilon(1e-12));
    CHECK(*std::max_element(idx.index.values().begin(), idx.index.values().end()) == 100.0);
    CHECK(*std::min_element(idx.index.values().begin(), idx.index.values().end()) >= 0.0);
    double share_sum = 0.0;
    for (const auto& [c, s] : idx.category_shares) {
        CHECK(s == doctest::Approx(cat_total[c] / grand).epsilon(1e-12));
        share_sum += s;
    }
    CHECK(std::abs(share_sum - 1.0) < 1e-9);
    CHECK(idx.per_term.size() == vocab.terms().size() - 1);
}

TEST_CASE("build_cci behaviour") {
    const QueryVocabulary vocab({kBench, {"a", 1, false}, {"b", 1, false}, {"c", 2, false}});
    const auto bench = ts({40, 50, 30, 20}, "nb");
    const QueryGroup g1(1, {kBench, {"a", 1, false}, {"b", 1, false}}, {bench, ts({10, 20, 30, 100}, "a"), ts({5, 5, 5, 5}, "b")});
    const QueryGroup g2(2, {kBench, {"c", 2, false}}, {ts({100, 80, 60, 40}, "nb"), ts({10, 0, 0, 10}, "c")});

    SUBCASE("every term equal to its benchmark gives a flat 100") {
        const QueryGroup f1(1, {kBench, {"a", 1, false}, {"b", 1, false}}, {bench, bench.renamed("a"), bench.renamed("b")});
        const QueryGroup f2(2, {kBench, {"c", 2, false}}, {bench, bench.renamed("c")});
        const std::vector<QueryGroup> gs{f1, f2};
        // FI of each term is 100 * bench / max(bench), so the index tracks the benchmark shape
        const auto idx = build_cci(vocab, gs);
        CHECK(idx.index.values() == std::vector<double>{80, 100, 60, 40});
        const auto flat = ts({50, 50, 50, 50}, "nb");
        const QueryGroup c1(1, {kBench, {"a", 1, false}, {"b", 1, false}}, {flat, flat.renamed("a"), flat.renamed("b")});
        const QueryGroup c2(2, {kBench, {"c", 2, false}}, {flat, flat.renamed("c")});
        const std::vector<QueryGroup> cs{c1, c2};
        CHECK(build_cci(vocab, cs).index.values() == std::vector<double>(4, 100.0));
    }
    SUBCASE("missing term") {
        const std::vector<QueryGroup> gs{g1};
        const auto msg = [&] {
            try {
                (void)build_cci(vocab, gs);
            } catch (const cci::Error& e) {
                CHECK(e.kind() == ErrorKind::MissingTerm);
                return std::string(e.what());
            }
            return std::string();
        }();
        CHECK(msg.find("'c'") != std::string::npos);
    }
    SUBCASE("removing a group changes shares, not the peak") {
        const QueryVocabulary only_ab({kBench, {"a", 1, false}, {"b", 1, false}});
        const std::vector<QueryGroup> both{g1, g2};
        const std::vector<QueryGroup> one{g1};
        const auto full = build_cci(vocab, both);
        const auto part = build_cci(only_ab, one);
        CHECK(full.category_shares.size() == 2);
        CHECK(part.category_shares.size() == 1);
        CHECK(*std::max_element(part.index.values().begin(), part.index.values().end()) == 100.0);
    }
    SUBCASE("a spike month becomes the peak") {
        std::vector<double> spike(4, 10.0);
        spike[2] = 100.0;
        const QueryGroup s1(1, {kBench, {"a", 1, false}, {"b", 1, false}}, {bench, ts(spike, "a"), ts({5, 5, 5, 5}, "b")});
        const std::vector<QueryGroup> gs{s1, g2};
        const auto idx = build_cci(vocab, gs);
        // argmax of raw sums: 100*(a+b)/50 + 100*c/100
        std::vector<double> raw(4);
        for (int t = 0; t < 4; ++t) raw[static_cast<std::size_t>(t)] = 2.0 * (spike[static_cast<std::size_t>(t)] + 5.0) + (t == 0 || t == 3 ? 10.0 : 0.0);
        const auto want = std::max_element(raw.begin(), raw.end()) - raw.begin();
        const auto got = std::max_element(idx.index.values().begin(), idx.index.values().end()) - idx.index.values().begin();
        CHECK(got == want);
        CHECK(want == 2);
    }
    SUBCASE("groups are cut to their common window") {
        const QueryGroup late(2, {kBench, {"c", 2, false}}, {ts({100, 80, 60}, "nb", {2010, 2}), ts({10, 0, 0}, "c", {2010, 2})});
        const std::vector<QueryGroup> gs{g1, late};
        const auto idx = build_cci(vocab, gs);
        CHECK(idx.index.start() == MonthStamp{2010, 2});
        CHECK(idx.index.size() == 3);
    }
    SUBCASE("a term in two groups is rejected") {
        const QueryGroup dup(3, {kBench, {"a", 1, false}}, {bench, ts({1, 1, 1, 1}, "a")});
        const std::vector<QueryGroup> gs{g1, g2, dup};
        CHECK_KIND(build_cci(vocab, gs), ErrorKind::InvalidArgument);
    }
}

TEST_CASE("index properties") {
    const auto vocab = small_vocab(6, 3);  // 18 terms, 3 categories
    const auto parts = partition_vocabulary(vocab, 5);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t T = 30;
    std::vector<QueryGroup> groups;
    for (std::size_t gi = 0; gi < parts.size(); ++gi) {
        std::vector<std::vector<double>> raw(parts[gi].size(), std::vector<double>(T));
        for (auto& col : raw) {
            for (auto& v : col) v = u(rng);
        }
        double peak = 0.0;
        for (const auto& col : raw) peak = std::max(peak, *std::max_element(col.begin(), col.end()));
        std::vector<TimeSeries> series;
        for (std::size_t j = 0; j < raw.size(); ++j) {
            for (auto& v : raw[j]) v = std::round(100.0 * v / peak);
            series.push_back(ts(raw[j], parts[gi][j].text));
        }
        groups.emplace_back(static_cast<int>(gi + 1), parts[gi], series);
        groups.back().check_trends_scale();
    }
    const auto base = build_cci(vocab, groups);

    SUBCASE("scale invariance") {
        for (double c : {0.1, 3.0, 117.0}) {
            std::vector<QueryGroup> scaled;
            for (const auto& g : groups) {
                std::vector<TimeSeries> s;
                for (const auto& x : g.series()) {
                    std::vector<double> v = x.values();
                    for (auto& e : v) e *= c;
                    s.push_back(ts(v, x.name()));
                }
                scaled.emplace_back(g.id(), g.members(), s);
            }
            const auto idx = build_cci(vocab, scaled);
            for (std::size_t t = 0; t < T; ++t) CHECK(std::abs(idx.index[t] - base.index[t]) < 1e-9);
        }
    }
    SUBCASE("permutation invariance") {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<QueryGroup> shuffled;
            for (const auto& g : groups) {
                std::vector<std::size_t> order(g.members().size());
                std::iota(order.begin(), order.end(), 0);
                std::shuffle(order.begin(), order.end(), rng);
                std::vector<QueryTerm> m;
                std::vector<TimeSeries> s;
                for (auto k : order) {
                    m.push_back(g.members()[k]);
                    s.push_back(g.series()[k]);
                }
                shuffled.emplace_back(g.id(), m, s);
            }
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            const auto idx = build_cci(vocab, shuffled);
            for (std::size_t t = 0; t < T; ++t) CHECK(std::abs(idx.index[t] - base.index[t]) < 1e-9);
            for (const auto& [c, s] : base.category_shares) CHECK(std::abs(idx.category_shares.at(c) - s) < 1e-12);
        }
    }
    SUBCASE("monotonicity of the raw sum") {
        auto fi = std::vector<TermFi>();
        for (const auto& g : groups) {
            auto part = rescale_group(g);
            fi.insert(fi.end(), part.begin(), part.end());
        }
        const auto before = aggregate_index(fi);
        const double peak_before = before.term_totals.size() > 0 ? 0.0 : 0.0;
        (void)peak_before;
        std::vector<double> raw_before(T, 0.0);
        for (const auto& f : fi) {
            for (std::size_t t = 0; t < T; ++t) raw_before[t] += f.fi[t];
        }
        std::vector<double> bumped = fi[3].fi.values();
        bumped[7] += 5.0;
        fi[3].fi = ts(bumped, fi[3].fi.name());
        std::vector<double> raw_after(T, 0.0);
        for (const auto& f : fi) {
            for (std::size_t t = 0; t < T; ++t) raw_after[t] += f.fi[t];
        }
        const auto after = aggregate_index(fi);
        // index * peak / 100 recovers the raw sum
        const double pb = *std::max_element(raw_before.begin(), raw_before.end());
        const double pa = *std::max_element(raw_after.begin(), raw_after.end());
        CHECK(after.index[7] * pa / 100.0 >= before.index[7] * pb / 100.0);
        for (std::size_t t = 0; t < T; ++t) {
            if (t != 7) CHECK(after.index[t] * pa / 100.0 == doctest::Approx(before.index[t] * pb / 100.0));
        }
    }
    SUBCASE("the benchmark contributes to no sum") {
        // Changing the benchmark anywhere except its peak leaves every FI untouched.
        std::vector<QueryGroup> changed;
        for (const auto& g : groups) {
            std::vector<TimeSeries> s;
            for (std::size_t j = 0; j < g.members().size(); ++j) {
                if (!g.members()[j].is_benchmark) {
                    s.push_back(g.series()[j]);
                    continue;
                }
                std::vector<double> v = g.series()[j].values();
                const auto peak_at = std::max_element(v.begin(), v.end()) - v.begin();
                for (std::size_t t = 0; t < v.size(); ++t) {
                    if (static_cast<std::ptrdiff_t>(t) != peak_at) v[t] = 0.0;
                }
                s.push_back(ts(v, g.series()[j].name()));
            }
            changed.emplace_back(g.id(), g.members(), s);
        }
        const auto idx = build_cci(vocab, changed);
        CHECK(idx.index.values() == base.index.values());
        CHECK(idx.term_totals.count("natural gas") == 0);
    }
}

TEST_CASE("seasonally adjusted index") {
    const auto vocab = load_vocabulary(testing::fixture("vocabulary.csv"));
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(testing::fixture("groups"))) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<QueryGroup> groups;
    for (std::size_t i = 0; i < files.size(); ++i) groups.push_back(load_group_csv(files[i], static_cast<int>(i + 1), vocab));
    const auto idx = build_cci(vocab, groups, BuildOptions{true, true});
    CHECK(*std::max_element(idx.index.values().begin(), idx.index.values().end()) == 100.0);
    // month dummies explain nothing after adjustment
    std::vector<double> x = idx.index.values();
    double means[12] = {};
    int counts[12] = {};
    for (std::size_t t = 0; t < x.size(); ++t) {
        means[idx.index.month_at(t).month - 1] += x[t];
        ++counts[idx.index.month_at(t).month - 1];
    }
    for (int m = 1; m < 12; ++m) CHECK(means[m] / counts[m] == doctest::Approx(means[0] / counts[0]).epsilon(1e-9));
}

TEST_CASE("sidecar json") {
    const std::vector<TermFi> fi{{{"a", 1, false}, ts({10, 20, 40}, "a")}, {{"b", 3, false}, ts({30, 0, 0}, "b")}};
    const auto json = sidecar_json(aggregate_index(fi));
    CHECK(json.find("\"category_shares\"") != std::string::npos);
    CHECK(json.find("\"1\": 0.7") != std::string::npos);
    CHECK(json.find("\"term_totals\"") != std::string::npos);
}

TEST_CASE("group files") {
    testing::TempDir dir;
    const auto vocab = load_vocabulary(testing::fixture("vocabulary.csv"));
    std::ofstream(dir / "g.csv") << "date,Natural gas -propane -down -up -hub -spot -future -shock -price -heating -piedmont -fracking,unknown term\n"
                                    "2010-01,100,3\n2010-02,50,4\n";
    CHECK_KIND(load_group_csv(dir / "g.csv", 1, vocab), ErrorKind::MissingTerm);
    const auto g = load_group_csv(testing::fixture("groups/group_01.csv"), 1, vocab);
    CHECK(g.members().front().is_benchmark);
    CHECK(g.members().size() == 5);
}

}  // TEST_SUITE
