#include "check.hpp"
#include "oracles.hpp"
#include "process.hpp"

#include "cci/io.hpp"
#include "cci/t90.hpp"

#include <doctest.h>

#include <json.hpp>

using testing::fixture;
using testing::run_cli;
using testing::slurp;

namespace fs = std::filesystem;

TEST_CASE("version and help") {
    const auto v = run_cli({"--version"});
    CHECK(v.exit_code == 0);
    CHECK(v.output.find("cci 0.3.0") != std::string::npos);
    const auto h = run_cli({"--help"});
    CHECK(h.exit_code == 0);
    for (const char* sub : {"build-index", "compare", "estimate", "t90", "simulate"}) CHECK(h.output.find(sub) != std::string::npos);
    CHECK(run_cli({"estimate", "--help"}).exit_code == 0);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli({"frobnicate"}).exit_code == 2);
    CHECK(run_cli({"compare", "--panel", fixture("compare/indices.csv").string()}).exit_code == 2);
    testing::TempDir dir;
    CHECK(run_cli({"compare", "--panel", fixture("compare/indices.csv").string(), "--out", dir.path().string(), "--lags", "x"})
              .exit_code == 2);
}

TEST_CASE("build-index") {
    testing::TempDir dir;
    SUBCASE("writes the index and shares") {
        const auto r = run_cli({"build-index", "--vocab", fixture("vocabulary.csv").string(), "--groups",
                                fixture("groups").string(), "--out", (dir / "cci.csv").string()});
        REQUIRE(r.exit_code == 0);
        const auto idx = cci::io::load_csv(dir / "cci.csv");
        CHECK(idx.size() == 240);
        CHECK(*std::max_element(idx.values().begin(), idx.values().end()) == 100.0);
        const auto side = nlohmann::json::parse(slurp(dir / "cci.json"));
        double total = 0.0;
        for (const auto& [k, v] : side["category_shares"].items()) total += v.get<double>();
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
    SUBCASE("seasonal adjustment removes month effects") {
        const auto r = run_cli({"build-index", "--vocab", fixture("vocabulary.csv").string(), "--groups",
                                fixture("groups").string(), "--out", (dir / "sa.csv").string(), "--adjust"});
        REQUIRE(r.exit_code == 0);
        const auto idx = cci::io::load_csv(dir / "sa.csv");
        CHECK(oracle::month_dummy_r2(idx.values(), idx.start().month) < 1e-12);
        CHECK(*std::max_element(idx.values().begin(), idx.values().end()) == 100.0);
    }
    SUBCASE("a missing group file names the absent term") {
        fs::create_directories(dir / "groups");
        for (const auto& e : fs::directory_iterator(fixture("groups"))) {
            if (e.path().filename() != "group_03.csv") fs::copy_file(e.path(), dir / "groups" / e.path().filename());
        }
        // the first non-benchmark column of the dropped file
        const std::string header = slurp(fixture("groups/group_03.csv")).substr(0, slurp(fixture("groups/group_03.csv")).find('\n'));
        const auto cells = cci::io::split_csv_line(header);
        const auto r = run_cli({"build-index", "--vocab", fixture("vocabulary.csv").string(), "--groups",
                                (dir / "groups").string(), "--out", (dir / "x.csv").string()});
        CHECK(r.exit_code == 3);
        CHECK(r.output.find("MissingTerm") != std::string::npos);
        bool named = false;
        for (std::size_t i = 2; i < cells.size(); ++i) named = named || r.output.find(cells[i]) != std::string::npos;
        CHECK(named);
        CHECK_FALSE(fs::exists(dir / "x.csv"));
    }
}

TEST_CASE("compare") {
    testing::TempDir dir;
    const auto r = run_cli({"compare", "--panel", fixture("compare/indices.csv").string(), "--lags", "4", "--out", dir.path().string()});
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("radius < 1: true") != std::string::npos);
    const std::string granger = slurp(dir / "granger.csv");
    CHECK(granger.rfind("dependent,excluded,chi_sq,df,prob\n", 0) == 0);
    CHECK(granger.find("news,All,") != std::string::npos);
    const auto pca = nlohmann::json::parse(slurp(dir / "pca.json"));
    CHECK(pca.contains("explained"));

    testing::TempDir pair;
    const auto p = run_cli({"compare", "--panel", fixture("compare/pair_r071.csv").string(), "--lags", "2", "--out", pair.path().string()});
    REQUIRE(p.exit_code == 0);
    CHECK(p.output.find("PCA first-component share: 0.855") != std::string::npos);
}

TEST_CASE("estimate") {
    testing::TempDir a;
    testing::TempDir b;
    const auto run = [](const fs::path& out) {
        return run_cli({"estimate", "--panel", fixture("macro/panel.csv").string(), "--instrument",
                        fixture("macro/instrument.csv").string(), "--reps", "200", "--threads", "1", "--out", out.string()});
    };
    const auto ra = run(a.path());
    REQUIRE(ra.exit_code == 0);
    const auto rb = run(b.path());
    REQUIRE(rb.exit_code == 0);
    for (const char* name : {"irf_cci.csv", "irf_cons.csv", "irf_infl.csv", "irf_rate.csv", "irf_unemp.csv", "irf_panel.svg", "summary.json"}) {
        CHECK(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const std::string irf = slurp(a / "irf_cons.csv");
    CHECK(irf.rfind("horizon,point,lower,upper\n", 0) == 0);
    CHECK(std::count(irf.begin(), irf.end(), '\n') == 14);
    CHECK(slurp(a / "irf_panel.svg").find("<svg") != std::string::npos);

    SUBCASE("weak instrument exits with 4") {
        testing::TempDir w;
        const auto r = run_cli({"estimate", "--panel", fixture("macro_weak/panel.csv").string(), "--instrument",
                                fixture("macro_weak/instrument.csv").string(), "--reps", "100", "--out", w.path().string()});
        CHECK(r.exit_code == 4);
        CHECK(r.output.find("IrrelevantInstrument") != std::string::npos);
    }
    SUBCASE("configuration file") {
        testing::TempDir c;
        const auto r = run_cli({"estimate", "--config", fixture("macro/run_config.txt").string(), "--reps", "100",
                                "--out", c.path().string()});
        CHECK(r.exit_code == 0);
        const auto summary = nlohmann::json::parse(slurp(c / "summary.json"));
        CHECK(summary.dump().find("2000-02") != std::string::npos);
    }
}

TEST_CASE("t90") {
    testing::TempDir dir;
    SUBCASE("empty manifest exits with 2") {
        const auto r = run_cli({"t90", "--manifest", fixture("grids/empty_manifest.csv").string(), "--out", (dir / "t.csv").string()});
        CHECK(r.exit_code == 2);
    }
    SUBCASE("two grids average by hand") {
        std::ofstream(dir / "two.csv") << "grid_id,path\ng01," << fixture("grids/g01.csv").string() << "\ng02,"
                                       << fixture("grids/g02.csv").string() << "\n";
        const auto r = run_cli({"t90", "--manifest", (dir / "two.csv").string(), "--out", (dir / "t.csv").string()});
        REQUIRE(r.exit_code == 0);
        const auto t = cci::io::load_csv(dir / "t.csv");
        const auto grids = cci::t90::load_manifest(fixture("grids/manifest.csv"));
        const auto e0 = cci::t90::grid_exceedance(cci::t90::standardized_anomaly(grids[0]), cci::t90::kDefaultReference).indicator;
        const auto e1 = cci::t90::grid_exceedance(cci::t90::standardized_anomaly(grids[1]), cci::t90::kDefaultReference).indicator;
        REQUIRE(t.size() == e0.size());
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == doctest::Approx((e0[i] + e1[i]) / 2.0 - 10.0));
    }
    SUBCASE("reference-window frequency") {
        const auto r = run_cli({"t90", "--manifest", fixture("grids/manifest.csv").string(), "--out", (dir / "t.csv").string()});
        REQUIRE(r.exit_code == 0);
        CHECK(r.output.find("reference-window exceedance frequency 10.00%") != std::string::npos);
    }
}

TEST_CASE("simulate") {
    testing::TempDir dir;
    const auto r = run_cli({"simulate", "--preset", "bivariate", "--T", "250", "--reps", "100", "--threads", "1", "--out",
                            (dir / "mc.json").string(), "--write-data", (dir / "data").string()});
    REQUIRE(r.exit_code == 0);
    const auto mc = nlohmann::json::parse(slurp(dir / "mc.json"));
    CHECK(mc["reps"] == 100);
    CHECK(fs::exists(dir / "data" / "panel.csv"));
    CHECK(fs::exists(dir / "data" / "instrument.csv"));
    const auto bad = run_cli({"simulate", "--dgp", fixture("dgp/missing.json").string(), "--reps", "0"});
    CHECK(bad.exit_code != 0);
}
