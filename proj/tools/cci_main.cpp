#include "svg_plot.hpp"

#include "cci/error.hpp"
#include "cci/index.hpp"
#include "cci/ingest.hpp"
#include "cci/io.hpp"
#include "cci/proxy_svar.hpp"
#include "cci/series.hpp"
#include "cci/simlab.hpp"
#include "cci/t90.hpp"
#include "cci/var.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef CCI_VERSION
#define CCI_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) cci::fail(cci::ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::string file_stem_for(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out.empty() ? "series" : out;
}

cci::MonthWindow parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) cci::fail(cci::ErrorKind::InvalidArgument, "window must be FIRST:LAST, got '" + text + "'");
    return {cci::MonthStamp::parse(text.substr(0, colon)), cci::MonthStamp::parse(text.substr(colon + 1))};
}

// ---------------------------------------------------------------------------
// build-index

struct BuildIndexArgs {
    fs::path vocab;
    fs::path groups;
    fs::path out;
    fs::path shares;
    bool adjust = false;
};

int run_build_index(const BuildIndexArgs& a) {
    using namespace cci::index;
    const QueryVocabulary vocab = load_vocabulary(a.vocab);
    if (!fs::is_directory(a.groups)) cci::fail(cci::ErrorKind::IoError, a.groups.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.groups)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<QueryGroup> groups;
    int id = 0;
    for (const auto& f : files) groups.push_back(load_group_csv(f, ++id, vocab));

    const ConcernIndex cci = build_cci(vocab, groups, BuildOptions{a.adjust, true});
    cci::io::write_csv(cci.index, a.out);
    const fs::path shares = a.shares.empty() ? fs::path(a.out).replace_extension(".json") : a.shares;
    cci::io::write_file_atomic(shares, sidecar_json(cci));

    const auto& v = cci.index.values();
    const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    std::cout << "index " << cci.index.start().str() << ".." << cci.index.end().str() << " (" << v.size()
              << " months) from " << groups.size() << " groups, " << cci.per_term.size() << " terms\n";
    std::cout << "peak 100 at " << cci.index.month_at(peak).str() << (a.adjust ? " (seasonally adjusted)" : "") << "\n";
    std::cout << "category shares:";
    for (const auto& [c, s] : cci.category_shares) std::cout << ' ' << c << '=' << fixed(s, 4);
    std::cout << "\nwrote " << a.out.string() << " and " << shares.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
    fs::path panel;
    int lags = 13;
    fs::path out;
    bool robust = false;
    int lb_order = 0;
};

int run_compare(const CompareArgs& a) {
    using namespace cci::var;
    const cci::SeriesPanel panel = cci::io::load_panel_csv(a.panel);
    const VarModel model = estimate_var(panel, VarSpec{a.lags, true});
    const StabilityReport st = stability(model);
    const auto cov = a.robust ? CovarianceKind::HeteroskedasticRobust : CovarianceKind::Homoskedastic;
    const auto table = granger_table(model, cov);
    const PcaResult pc = pca(panel, true);
    const int lb = a.lb_order > 0 ? a.lb_order : a.lags + 12;
    const auto lbq = residual_autocorr_test(model, lb);
    const Eigen::MatrixXd shocks = shock_correlation(model);
    ensure_dir(a.out);

    std::ostringstream csv;
    csv << "dependent,excluded,chi_sq,df,prob\n";
    for (const auto& g : table) {
        std::string excl;
        for (std::size_t i = 0; i < g.excluded.size(); ++i) excl += (i ? "+" : "") + g.excluded[i];
        csv << cci::io::quote_csv_field(g.dependent) << ',' << cci::io::quote_csv_field(excl) << ','
            << cci::io::format_double(g.wald_stat) << ',' << g.df << ',' << cci::io::format_double(g.p_value) << '\n';
    }
    cci::io::write_file_atomic(a.out / "granger.csv", csv.str());

    json pj;
    pj["names"] = panel.names();
    pj["standardized"] = true;
    pj["correlation"] = to_json(correlation(panel.matrix()));
    pj["eigenvalues"] = to_json(pc.eigenvalues);
    pj["explained"] = to_json(pc.explained);
    pj["loadings"] = to_json(pc.loadings);
    cci::io::write_file_atomic(a.out / "pca.json", pj.dump(2) + "\n");

    json dj;
    dj["window"] = {panel.window().first.str(), panel.window().last.str()};
    dj["lags"] = a.lags;
    dj["effective_obs"] = model.effective_obs();
    dj["spectral_radius"] = st.spectral_radius;
    dj["stable"] = st.stable;
    json lj = json::array();
    for (const auto& q : lbq) {
        lj.push_back({{"order", q.order}, {"q", q.statistic}, {"df", q.df}, {"prob", q.p_value}, {"df_adjusted", q.df_adjusted}});
    }
    dj["portmanteau"] = lj;
    dj["shock_correlation"] = to_json(shocks);
    cci::io::write_file_atomic(a.out / "diagnostics.json", dj.dump(2) + "\n");

    std::cout << "VAR(" << a.lags << ") on " << panel.width() << " series, " << model.effective_obs()
              << " effective observations\n";
    std::cout << "spectral radius " << fixed(st.spectral_radius, 4) << "\n";
    std::cout << "radius < 1: " << (st.stable ? "true" : "false") << "\n";
    std::cout << "Granger causality (" << (a.robust ? "robust" : "homoskedastic") << " Wald)\n";
    for (const auto& g : table) {
        std::string excl;
        for (std::size_t i = 0; i < g.excluded.size(); ++i) excl += (i ? "+" : "") + g.excluded[i];
        std::cout << "  " << g.dependent << " <- " << excl << ": chi2(" << g.df << ") = " << fixed(g.wald_stat, 2)
                  << ", p = " << fixed(g.p_value, 4) << (g.p_value < 0.05 ? " *" : "") << "\n";
    }
    std::cout << "PCA first-component share: " << fixed(pc.explained(0), 3) << "\n";
    const auto& last = lbq.back();
    std::cout << "portmanteau Q(" << last.order << ") = " << fixed(last.statistic, 2) << ", p = " << fixed(last.p_value, 4)
              << "\n";
    std::cout << "wrote granger.csv, pca.json, diagnostics.json to " << a.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
    fs::path panel;
    fs::path instrument;
    fs::path config;
    fs::path out;
    int lags = 6;
    int horizon = 12;
    double level = 0.68;
    int reps = 1000;
    int block_len = 0;
    std::uint64_t seed = 20240101;
    unsigned threads = 0;
    bool force = false;
    std::string sign = "positive-phi";
    bool offline = false;
    fs::path cache_dir;
};

int run_estimate(EstimateArgs a, const CLI::App& cmd) {
    using namespace cci;
    std::optional<SeriesPanel> panel;
    fs::path instrument = a.instrument;
    if (!a.config.empty()) {
        const ingest::RunConfig cfg = ingest::load_config(a.config);
        auto given = [&](const char* flag) { return cmd.get_option(flag)->count() > 0; };
        if (!given("--lags")) a.lags = cfg.var_lags;
        if (!given("--horizon")) a.horizon = cfg.horizon;
        if (!given("--level")) a.level = cfg.level;
        if (!given("--reps")) a.reps = cfg.reps;
        if (!given("--block-len")) a.block_len = cfg.block_len;
        if (!given("--seed")) a.seed = cfg.seed;
        if (instrument.empty() && !cfg.instrument.empty()) {
            instrument = cfg.instrument;
            if (instrument.is_relative()) instrument = cfg.base_dir / instrument;
        }
        ingest::FetchOptions fetch;
        fetch.offline = a.offline;
        fetch.cache_dir = a.cache_dir;
        panel = ingest::assemble_panel(cfg, fetch);
    } else {
        if (a.panel.empty()) fail(ErrorKind::InvalidArgument, "estimate needs --panel or --config");
        panel = io::load_panel_csv(a.panel);
    }
    if (instrument.empty()) fail(ErrorKind::InvalidArgument, "estimate needs --instrument (or 'instrument:' in the config)");

    proxy::BootstrapOptions bo;
    bo.horizon = a.horizon;
    bo.level = a.level;
    bo.reps = a.reps;
    bo.block_len = a.block_len;
    bo.seed = a.seed;
    bo.threads = a.threads;
    if (a.sign == "positive-phi") {
        bo.identify.sign = proxy::SignConvention::PositivePhi;
    } else if (a.sign == "positive-impact") {
        bo.identify.sign = proxy::SignConvention::PositiveImpact;
    } else {
        fail(ErrorKind::InvalidArgument, "--sign must be positive-phi or positive-impact");
    }

    const var::VarModel model = var::estimate_var(*panel, var::VarSpec{a.lags, true});
    const io::SparseSeries zraw = io::load_sparse_csv(instrument);
    const auto z = proxy::InstrumentSeries::aligned_to(model, zraw.start, zraw.values, zraw.name);
    const proxy::RelevanceReport rel = proxy::relevance_test(model, z);
    std::cout << "first-stage robust F = " << fixed(rel.f_stat, 2) << " (" << rel.rows_used << " rows, threshold "
              << fixed(rel.threshold, 0) << "): " << (rel.strong ? "strong" : "weak") << "\n";
    if (!rel.strong) {
        if (!a.force) {
            fail(ErrorKind::IrrelevantInstrument, "instrument fails the relevance check (F = " + fixed(rel.f_stat, 2) +
                                                      " <= " + fixed(rel.threshold, 0) + "); rerun with --force to continue");
        }
        std::cerr << "warning: weak instrument, continuing because of --force\n";
    }
    const proxy::IrfBundle b = proxy::mbb_bands(model, z, bo);
    const var::StabilityReport st = var::stability(model);

    ensure_dir(a.out);
    std::vector<plot::BandPanel> panels;
    json files = json::array();
    for (int j = 0; j < model.n(); ++j) {
        std::ostringstream csv;
        csv << "horizon,point,lower,upper\n";
        for (int h = 0; h <= b.horizon(); ++h) {
            csv << h << ',' << io::format_double(b.point(h, j)) << ',' << io::format_double(b.lower(h, j)) << ','
                << io::format_double(b.upper(h, j)) << '\n';
        }
        const std::string file = "irf_" + file_stem_for(model.names[static_cast<std::size_t>(j)]) + ".csv";
        io::write_file_atomic(a.out / file, csv.str());
        files.push_back(file);
        panels.push_back({model.names[static_cast<std::size_t>(j)], b.point.col(j), b.lower.col(j), b.upper.col(j)});
    }
    plot::Layout layout;
    layout.caption = "Responses to a one-s.d. shock in " + model.names.front() + ", " + fixed(100 * a.level, 0) +
                     "% MBB bands";
    io::write_file_atomic(a.out / "irf_panel.svg", plot::irf_panel_svg(panels, layout));

    json s;
    s["variables"] = model.names;
    s["window"] = {panel->window().first.str(), panel->window().last.str()};
    s["lags"] = a.lags;
    s["effective_obs"] = model.effective_obs();
    s["spectral_radius"] = st.spectral_radius;
    s["phi"] = b.identification.phi;
    s["impact"] = to_json(b.identification.b_col);
    s["cmd_objective"] = b.identification.cmd_objective;
    s["sign_convention"] = a.sign;
    s["relevance"] = {{"f_stat", rel.f_stat}, {"strong", rel.strong}, {"threshold", rel.threshold}, {"rows", rel.rows_used}};
    s["instrument_missing"] = z.missing();
    s["bootstrap"] = {{"level", b.level},          {"reps", b.reps_requested}, {"used", b.reps_used},
                      {"dropped", b.reps_dropped}, {"block_len", b.block_len}, {"seed", a.seed},
                      {"crossings", b.crossings}};
    s["files"] = files;
    io::write_file_atomic(a.out / "summary.json", s.dump(2) + "\n");

    std::cout << "phi = " << fixed(b.identification.phi, 4) << ", impact column:";
    for (int j = 0; j < model.n(); ++j) std::cout << ' ' << model.names[static_cast<std::size_t>(j)] << '=' << fixed(b.identification.b_col(j), 4);
    std::cout << "\nbootstrap: " << b.reps_used << "/" << b.reps_requested << " replicates, block length " << b.block_len;
    if (b.crossings > 0) std::cout << ", " << b.crossings << " band crossings";
    std::cout << "\nwrote " << files.size() << " IRF files, irf_panel.svg and summary.json to " << a.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// t90

struct T90Args {
    fs::path manifest;
    fs::path out;
    std::string reference = "1961-01:1990-12";
    double percentile = 0.9;
    bool weighted = false;
};

int run_t90(const T90Args& a) {
    using namespace cci::t90;
    const cci::MonthWindow ref = parse_window(a.reference);
    const auto grids = load_manifest(a.manifest, ref);
    const T90Series s = build_t90(grids, T90Options{a.weighted, a.percentile});
    cci::io::write_csv(s.t90, a.out);
    double ref_mean = 0.0;
    std::size_t ref_n = 0;
    for (std::size_t t = 0; t < s.raw_frequency.size(); ++t) {
        if (ref.contains(s.raw_frequency.month_at(t))) {
            ref_mean += s.raw_frequency[t];
            ++ref_n;
        }
    }
    std::cout << "T90 from " << grids.size() << " grids, " << s.t90.start().str() << ".." << s.t90.end().str() << "\n";
    if (ref_n > 0) std::cout << "reference-window exceedance frequency " << fixed(ref_mean / static_cast<double>(ref_n), 2) << "%\n";
    std::cout << "wrote " << a.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    fs::path dgp;
    std::string preset;
    std::optional<double> strength;
    std::optional<std::uint64_t> seed;
    int T = 250;
    int reps = 500;
    int coverage_reps = 0;
    int boot_reps = 500;
    double level = 0.68;
    int horizon = 12;
    unsigned threads = 0;
    fs::path out;
    fs::path write_data;
    fs::path dump_dgp;
};

int run_simulate(const SimulateArgs& a) {
    using namespace cci::sim;
    Dgp dgp;
    if (!a.dgp.empty()) {
        dgp = load_dgp(a.dgp);
    } else if (a.preset == "reference") {
        dgp = reference_dgp_5x6();
    } else if (a.preset == "bivariate") {
        dgp = bivariate_dgp();
    } else {
        cci::fail(cci::ErrorKind::InvalidArgument, "simulate needs --dgp FILE or --preset reference|bivariate");
    }
    if (a.strength) dgp.instrument_strength = *a.strength;
    if (a.seed) dgp.seed = *a.seed;
    dgp.validate();

    if (!a.dump_dgp.empty()) {
        cci::io::write_file_atomic(a.dump_dgp, dgp_json(dgp));
        std::cout << "wrote " << a.dump_dgp.string() << "\n";
    }
    if (!a.write_data.empty()) {
        const Simulation s = simulate(dgp, a.T);
        ensure_dir(a.write_data);
        cci::io::write_panel_csv(s.panel, a.write_data / "panel.csv");
        cci::io::write_csv(s.instrument, a.write_data / "instrument.csv");
        std::cout << "wrote panel.csv (" << s.panel.width() << " x " << s.panel.length() << ") and instrument.csv to "
                  << a.write_data.string() << "\n";
    }
    if (a.reps == 0) return 0;

    McOptions mo;
    mo.T = a.T;
    mo.reps = a.reps;
    mo.coverage_reps = a.coverage_reps;
    mo.bootstrap.reps = a.boot_reps;
    mo.bootstrap.level = a.level;
    mo.bootstrap.horizon = a.horizon;
    mo.threads = a.threads;
    const McReport r = run_mc(dgp, mo);
    if (!a.out.empty()) cci::io::write_file_atomic(a.out, report_json(r));

    std::cout << "Monte Carlo: n=" << dgp.n << " p=" << dgp.p << " T=" << r.T << " reps=" << r.reps
              << " failed=" << r.failed << "\n";
    std::cout << "phi bias " << fixed(r.phi_bias, 4) << "\n";
    std::cout << "impact column relative error: median " << fixed(r.b_relative_error.median, 4) << ", mean "
              << fixed(r.b_relative_error.mean, 4) << ", 90% range [" << fixed(r.b_relative_error.p05, 4) << ", "
              << fixed(r.b_relative_error.p95, 4) << "]\n";
    std::cout << "first-stage F: median " << fixed(r.relevance_f.median, 2) << ", strong share " << fixed(r.strong_share, 3)
              << "\n";
    if (r.coverage.size() > 0) {
        std::cout << "band coverage over " << r.coverage_reps << " reps: min " << fixed(r.coverage.minCoeff(), 3)
                  << ", max " << fixed(r.coverage.maxCoeff(), 3) << ", mean " << fixed(r.coverage.mean(), 3) << "\n";
    }
    if (!a.out.empty()) std::cout << "wrote " << a.out.string() << "\n";
    return 0;
}

int exit_code(const cci::Error& e) {
    switch (e.category()) {
        case cci::ErrorCategory::Validation: return 2;
        case cci::ErrorCategory::Data: return 3;
        case cci::ErrorCategory::Numerical: return 4;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concern-index toolkit: index construction, VAR comparison, proxy-SVAR estimation"};
    app.set_version_flag("--version", std::string("cci ") + CCI_VERSION);
    app.require_subcommand(1);

    BuildIndexArgs bi;
    auto* build = app.add_subcommand("build-index", "Aggregate grouped search-volume exports into the index");
    build->add_option("--vocab", bi.vocab, "Vocabulary CSV (term,category,is_benchmark)")->required();
    build->add_option("--groups", bi.groups, "Directory of group CSVs (date,<term>,...)")->required();
    build->add_option("--out", bi.out, "Index CSV to write")->required();
    build->add_option("--shares", bi.shares, "Sidecar JSON (default: --out with .json)");
    build->add_flag("--adjust", bi.adjust, "Seasonally adjust the index and renormalize");

    CompareArgs ca;
    auto* compare = app.add_subcommand("compare", "VAR stability, Granger causality and PCA for a panel of indices");
    compare->add_option("--panel", ca.panel, "Wide panel CSV (date,<name>,...)")->required();
    compare->add_option("--lags", ca.lags, "VAR lag order")->capture_default_str();
    compare->add_option("--out", ca.out, "Output directory")->required();
    compare->add_flag("--robust", ca.robust, "Heteroskedasticity-robust Wald tests");
    compare->add_option("--lb-order", ca.lb_order, "Portmanteau order (default lags + 12)");

    EstimateArgs ea;
    auto* estimate = app.add_subcommand("estimate", "Proxy-SVAR impulse responses with moving-block bootstrap bands");
    estimate->add_option("--panel", ea.panel, "Wide panel CSV; first column is the shocked variable");
    estimate->add_option("--instrument", ea.instrument, "Instrument CSV (date,value); empty cells are missing");
    estimate->add_option("--config", ea.config, "Run configuration (sources, window, estimation settings)");
    estimate->add_option("--out", ea.out, "Output directory")->required();
    estimate->add_option("--lags", ea.lags)->capture_default_str();
    estimate->add_option("--horizon", ea.horizon)->capture_default_str();
    estimate->add_option("--level", ea.level, "Band coverage level")->capture_default_str();
    estimate->add_option("--reps", ea.reps, "Bootstrap replicates")->capture_default_str();
    estimate->add_option("--block-len", ea.block_len, "Block length (0 = automatic)")->capture_default_str();
    estimate->add_option("--seed", ea.seed)->capture_default_str();
    estimate->add_option("--threads", ea.threads, "Worker threads (0 = all cores)");
    estimate->add_option("--sign", ea.sign, "positive-phi or positive-impact")->capture_default_str();
    estimate->add_flag("--force", ea.force, "Continue when the instrument is weak");
    estimate->add_flag("--offline", ea.offline, "Serve remote sources from the cache only");
    estimate->add_option("--cache-dir", ea.cache_dir, "Cache for remote observations");

    T90Args ta;
    auto* t90 = app.add_subcommand("t90", "Build the temperature-extremes instrument from gridded series");
    t90->add_option("--manifest", ta.manifest, "Manifest CSV (grid_id,path[,weight])")->required();
    t90->add_option("--out", ta.out, "Instrument CSV to write")->required();
    t90->add_option("--reference", ta.reference, "Reference window FIRST:LAST")->capture_default_str();
    t90->add_option("--percentile", ta.percentile)->capture_default_str();
    t90->add_flag("--weighted", ta.weighted, "Use manifest weights");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Synthetic data and Monte Carlo checks of the estimator");
    auto* dgp_opt = sim->add_option("--dgp", sa.dgp, "DGP JSON file");
    sim->add_option("--preset", sa.preset, "Built-in DGP: reference or bivariate")->excludes(dgp_opt);
    sim->add_option("--instrument-strength", sa.strength, "Override the instrument loading");
    sim->add_option("--seed", sa.seed, "Override the DGP seed");
    sim->add_option("--T", sa.T, "Sample length")->capture_default_str();
    sim->add_option("--reps", sa.reps, "Monte Carlo replications (0 = none)")->capture_default_str();
    sim->add_option("--coverage-reps", sa.coverage_reps, "Replications that also run the bootstrap")->capture_default_str();
    sim->add_option("--boot-reps", sa.boot_reps)->capture_default_str();
    sim->add_option("--level", sa.level)->capture_default_str();
    sim->add_option("--horizon", sa.horizon)->capture_default_str();
    sim->add_option("--threads", sa.threads);
    sim->add_option("--out", sa.out, "Monte Carlo report JSON");
    sim->add_option("--write-data", sa.write_data, "Write one simulated panel and instrument here");
    sim->add_option("--dump-dgp", sa.dump_dgp, "Write the DGP as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*build) return run_build_index(bi);
        if (*compare) return run_compare(ca);
        if (*estimate) return run_estimate(ea, *estimate);
        if (*t90) return run_t90(ta);
        if (*sim) return run_simulate(sa);
    } catch (const cci::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
