#include "cci/simlab.hpp"

#include "cci/error.hpp"
#include "cci/io.hpp"
#include "cci/parallel.hpp"
#include "cci/stats.hpp"
#include "cci/var.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>

namespace cci::sim {

void Dgp::validate() const {
    if (n < 1 || p < 1) fail(ErrorKind::InvalidArgument, "DGP needs n >= 1 and p >= 1");
    if (static_cast<int>(phi.size()) != p) fail(ErrorKind::InvalidArgument, "DGP needs one coefficient matrix per lag");
    for (const auto& m : phi) {
        if (m.rows() != n || m.cols() != n) fail(ErrorKind::InvalidArgument, "DGP coefficient matrices must be n x n");
    }
    if (b_true.rows() != n || b_true.cols() != n) fail(ErrorKind::InvalidArgument, "DGP impact matrix must be n x n");
    if (intercept.size() != 0 && intercept.size() != n) fail(ErrorKind::InvalidArgument, "DGP intercept must have n entries");
    if (!names.empty() && static_cast<int>(names.size()) != n) fail(ErrorKind::InvalidArgument, "DGP needs n names");
    if (noise_scale < 0.0) fail(ErrorKind::InvalidArgument, "noise scale must be non-negative");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b_true);
    if (lu.rank() < n) fail(ErrorKind::InvalidArgument, "DGP impact matrix is singular");
    const auto st = var::stability(var::companion(phi).matrix);
    if (!st.stable) {
        fail(ErrorKind::UnstableDgp, "companion spectral radius " + std::to_string(st.spectral_radius) + " >= 1");
    }
}

Eigen::MatrixXd Dgp::true_irf(int horizon) const {
    return proxy::irf(var::companion(phi), target_column(), horizon);
}

Simulation simulate(const Dgp& dgp, int T) { return simulate(dgp, T, dgp.seed); }

Simulation simulate(const Dgp& dgp, int T, std::uint64_t seed) {
    dgp.validate();
    if (!(T > dgp.n * dgp.p + 50)) fail(ErrorKind::TooShort, "simulate needs T > n*p + 50");
    const int n = dgp.n;
    const int p = dgp.p;
    const int total = kBurnIn + T;
    stats::Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::VectorXd c = dgp.intercept.size() == n ? dgp.intercept : Eigen::VectorXd::Zero(n);

    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(total + p, n);
    Eigen::MatrixXd eps(total, n);
    Eigen::VectorXd omega(total);
    for (int t = 0; t < total; ++t) {
        for (int j = 0; j < n; ++j) eps(t, j) = normal(rng);
        omega(t) = normal(rng);
    }
    for (int t = 0; t < total; ++t) {
        Eigen::VectorXd v = c + dgp.b_true * eps.row(t).transpose();
        for (int l = 1; l <= p; ++l) v.noalias() += dgp.phi[static_cast<std::size_t>(l - 1)] * y.row(t + p - l).transpose();
        y.row(t + p) = v.transpose();
    }
    const Eigen::MatrixXd kept = y.bottomRows(T);
    const Eigen::MatrixXd shocks = eps.bottomRows(T);
    std::vector<double> z(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        z[static_cast<std::size_t>(t)] =
            dgp.instrument_strength * shocks(t, 0) + dgp.noise_scale * omega(kBurnIn + t);
    }
    std::vector<std::string> names = dgp.names;
    if (names.empty()) {
        for (int j = 0; j < n; ++j) names.push_back("y" + std::to_string(j + 1));
    }
    const MonthStamp start{2000, 1};
    return {SeriesPanel::from_matrix(start, kept, names), TimeSeries(start, std::move(z), "z"), shocks};
}

Dgp reference_dgp_5x6() {
    Dgp d;
    d.n = 5;
    d.p = 6;
    Eigen::MatrixXd a(5, 5);
    a << 0.90, 0.05, -0.05, 0.00, 0.05,
         0.10, 0.80, 0.05, -0.05, 0.00,
        -0.05, 0.10, 0.85, 0.05, 0.00,
         0.00, -0.05, 0.10, 0.80, 0.05,
         0.05, 0.00, 0.00, 0.10, 0.85;
    const double decay[] = {0.45, 0.15, 0.08, 0.05, 0.03, 0.02};
    for (double w : decay) d.phi.push_back(w * a);
    d.b_true.resize(5, 5);
    d.b_true << 1.0, 0.0, 0.0, 0.0, 0.0,
                0.5, 0.8, 0.0, 0.0, 0.0,
               -0.4, 0.2, 0.7, 0.0, 0.0,
                0.3, -0.1, 0.2, 0.6, 0.0,
                0.6, 0.1, -0.2, 0.1, 0.9;
    d.instrument_strength = 1.0;
    d.noise_scale = 1.0;
    d.seed = 20240607;
    d.names = {"cci", "cons", "infl", "rate", "unemp"};
    return d;
}

Dgp bivariate_dgp() {
    Dgp d;
    d.n = 2;
    d.p = 1;
    Eigen::MatrixXd phi(2, 2);
    phi << 0.5, 0.1,
           0.2, 0.4;
    d.phi = {phi};
    d.b_true.resize(2, 2);
    d.b_true << 1.0, 0.0,
                0.5, 0.8;
    d.instrument_strength = 1.0;
    d.noise_scale = 1.0;
    d.seed = 4242;
    d.names = {"cci", "y2"};
    return d;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int rows, int cols, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) fail(ErrorKind::ConfigError, "'" + what + "' must have " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) {
            fail(ErrorKind::ConfigError, "'" + what + "' row " + std::to_string(r) + " must have " + std::to_string(cols) + " entries");
        }
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

}  // namespace

Dgp parse_dgp(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ConfigError, std::string("DGP spec is not valid JSON: ") + e.what());
    }
    try {
        Dgp d;
        d.n = j.at("n").get<int>();
        d.p = j.at("p").get<int>();
        if (d.n < 1 || d.p < 1) fail(ErrorKind::ConfigError, "'n' and 'p' must be positive");
        const auto& phi = j.at("phi");
        if (!phi.is_array() || static_cast<int>(phi.size()) != d.p) fail(ErrorKind::ConfigError, "'phi' must list p matrices");
        for (int l = 0; l < d.p; ++l) d.phi.push_back(matrix_from_json(phi[l], d.n, d.n, "phi"));
        d.b_true = matrix_from_json(j.at("b"), d.n, d.n, "b");
        if (j.contains("intercept")) {
            const auto v = j["intercept"].get<std::vector<double>>();
            d.intercept = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        d.instrument_strength = j.value("instrument_strength", 1.0);
        d.noise_scale = j.value("noise_scale", 1.0);
        d.seed = j.value("seed", std::uint64_t{1});
        if (j.contains("names")) d.names = j["names"].get<std::vector<std::string>>();
        d.validate();
        return d;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ConfigError, std::string("DGP spec: ") + e.what());
    }
}

Dgp load_dgp(const std::filesystem::path& path) { return parse_dgp(io::read_file(path)); }

std::string dgp_json(const Dgp& dgp) {
    nlohmann::ordered_json j;
    j["n"] = dgp.n;
    j["p"] = dgp.p;
    nlohmann::ordered_json phi = nlohmann::ordered_json::array();
    for (const auto& m : dgp.phi) phi.push_back(matrix_to_json(m));
    j["phi"] = phi;
    j["b"] = matrix_to_json(dgp.b_true);
    if (dgp.intercept.size() > 0) j["intercept"] = vector_to_json(dgp.intercept);
    j["instrument_strength"] = dgp.instrument_strength;
    j["noise_scale"] = dgp.noise_scale;
    j["seed"] = dgp.seed;
    if (!dgp.names.empty()) j["names"] = dgp.names;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

namespace {

struct RepOutcome {
    bool identified = false;
    double phi = 0.0;
    Eigen::VectorXd b;
    double rel_error = 0.0;
    double f_stat = 0.0;
    bool strong = false;
    std::optional<Eigen::MatrixXi> covered;
};

SummaryStats summarize(std::vector<double> v) {
    SummaryStats s;
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    s.mean = stats::mean(v);
    s.median = stats::quantile_sorted(v, 0.5);
    s.p05 = stats::quantile_sorted(v, 0.05);
    s.p95 = stats::quantile_sorted(v, 0.95);
    return s;
}

}  // namespace

McReport run_mc(const Dgp& dgp, const McOptions& options) {
    dgp.validate();
    if (options.reps < 100) fail(ErrorKind::InvalidArgument, "run_mc needs at least 100 replications");
    if (options.coverage_reps > options.reps) fail(ErrorKind::InvalidArgument, "coverage_reps exceeds reps");
    const var::VarSpec spec{options.var_lags > 0 ? options.var_lags : dgp.p, true};
    const Eigen::VectorXd b_true = dgp.target_column();
    const int horizon = options.bootstrap.horizon;
    const Eigen::MatrixXd irf_true = options.coverage_reps > 0 ? dgp.true_irf(horizon) : Eigen::MatrixXd{};

    std::vector<RepOutcome> out(static_cast<std::size_t>(options.reps));
    parallel_for(out.size(), options.threads, [&](std::size_t r) {
        const std::uint64_t rep_seed = stats::derive_seed(dgp.seed, r);
        const Simulation s = simulate(dgp, options.T, rep_seed);
        const var::VarModel model = var::estimate_var(s.panel, spec);
        const auto z = proxy::InstrumentSeries::aligned_to(model, s.instrument);
        RepOutcome& o = out[r];
        const auto rel = proxy::relevance_test(model, z, options.relevance_threshold);
        o.f_stat = rel.f_stat;
        o.strong = rel.strong;
        try {
            const auto id = proxy::identify(proxy::compute_moments(model, z));
            o.identified = true;
            o.phi = id.phi;
            o.b = id.b_col;
            Eigen::VectorXd aligned = id.b_col;
            if (aligned(0) * b_true(0) < 0.0) aligned = -aligned;
            o.rel_error = (aligned - b_true).norm() / b_true.norm();
        } catch (const Error& e) {
            if (e.category() != ErrorCategory::Numerical) throw;
            return;
        }
        if (static_cast<int>(r) < options.coverage_reps) {
            proxy::BootstrapOptions bo = options.bootstrap;
            bo.seed = stats::derive_seed(rep_seed, 0xb007);
            bo.threads = 1;
            try {
                const auto bands = proxy::mbb_bands(model, z, bo);
                Eigen::MatrixXi cov(bands.point.rows(), bands.point.cols());
                for (Eigen::Index h = 0; h < cov.rows(); ++h) {
                    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
                        cov(h, j) = (bands.lower(h, j) <= irf_true(h, j) && irf_true(h, j) <= bands.upper(h, j)) ? 1 : 0;
                    }
                }
                o.covered = cov;
            } catch (const Error& e) {
                if (e.category() != ErrorCategory::Numerical) throw;
            }
        }
    });

    McReport rep;
    rep.reps = options.reps;
    rep.T = options.T;
    rep.seed = dgp.seed;
    rep.phi_true = dgp.instrument_strength;
    rep.b_true = b_true;
    rep.b_bias = Eigen::VectorXd::Zero(dgp.n);
    std::vector<double> errs;
    std::vector<double> fs;
    int strong = 0;
    double phi_sum = 0.0;
    Eigen::MatrixXd cov_sum;
    for (const auto& o : out) {
        fs.push_back(o.f_stat);
        strong += o.strong ? 1 : 0;
        if (!o.identified) {
            ++rep.failed;
            continue;
        }
        errs.push_back(o.rel_error);
        phi_sum += o.phi;
        rep.b_bias += o.b - b_true;
        if (o.covered) {
            if (cov_sum.size() == 0) cov_sum = Eigen::MatrixXd::Zero(o.covered->rows(), o.covered->cols());
            cov_sum += o.covered->cast<double>();
            ++rep.coverage_reps;
        }
    }
    if (static_cast<double>(rep.failed) > options.max_failure_share * options.reps) {
        fail(ErrorKind::NumericalFailure, std::to_string(rep.failed) + " of " + std::to_string(options.reps) +
                                              " Monte Carlo replications failed identification");
    }
    const auto ok = static_cast<double>(errs.size());
    if (ok > 0) {
        rep.phi_bias = phi_sum / ok - dgp.instrument_strength;
        rep.b_bias /= ok;
    }
    rep.b_relative_error = summarize(errs);
    // Infinite F (exact fit) would poison the mean; cap for the summary.
    for (double& f : fs) f = std::min(f, 1e12);
    rep.relevance_f = summarize(fs);
    rep.strong_share = static_cast<double>(strong) / options.reps;
    if (rep.coverage_reps > 0) rep.coverage = cov_sum / rep.coverage_reps;
    return rep;
}

std::string report_json(const McReport& r) {
    auto summary = [](const SummaryStats& s) {
        return nlohmann::ordered_json{{"mean", s.mean}, {"median", s.median}, {"p05", s.p05}, {"p95", s.p95}};
    };
    nlohmann::ordered_json j;
    j["reps"] = r.reps;
    j["T"] = r.T;
    j["seed"] = r.seed;
    j["failed"] = r.failed;
    j["phi_true"] = r.phi_true;
    j["phi_bias"] = r.phi_bias;
    j["b_true"] = vector_to_json(r.b_true);
    j["b_bias"] = vector_to_json(r.b_bias);
    j["b_relative_error"] = summary(r.b_relative_error);
    j["relevance_f"] = summary(r.relevance_f);
    j["strong_share"] = r.strong_share;
    j["coverage_reps"] = r.coverage_reps;
    if (r.coverage.size() > 0) j["coverage"] = matrix_to_json(r.coverage);
    return j.dump(2) + "\n";
}

}  // namespace cci::sim
