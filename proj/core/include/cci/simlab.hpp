#pragma once

#include "cci/proxy_svar.hpp"
#include "cci/series.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cci::sim {

/// y_t = c + sum_l Phi_l y_{t-l} + B eps_t,  eps_t ~ N(0, I),
/// z_t = phi * eps_{1t} + omega_t,  omega_t ~ N(0, sigma_omega^2).
struct Dgp {
    int n = 2;
    int p = 1;
    std::vector<Eigen::MatrixXd> phi;  // p matrices, n x n
    Eigen::VectorXd intercept;         // empty = zero
    Eigen::MatrixXd b_true;            // n x n, column 0 is the target impact column
    double instrument_strength = 1.0;  // phi
    double noise_scale = 1.0;          // sigma_omega
    std::uint64_t seed = 1;
    std::vector<std::string> names;

    /// Throws UnstableDgp when the companion spectral radius is >= 1,
    /// InvalidArgument on shape errors or a singular B.
    void validate() const;
    [[nodiscard]] Eigen::VectorXd target_column() const { return b_true.col(0); }
    /// True IRF of the target shock, horizons 0..h.
    [[nodiscard]] Eigen::MatrixXd true_irf(int horizon) const;
};

inline constexpr int kBurnIn = 100;

struct Simulation {
    SeriesPanel panel;
    TimeSeries instrument;  // dated like the panel
    Eigen::MatrixXd shocks;  // T x n structural shocks
};

[[nodiscard]] Simulation simulate(const Dgp& dgp, int T);
[[nodiscard]] Simulation simulate(const Dgp& dgp, int T, std::uint64_t seed);

/// Five-variable, six-lag DGP with a strong instrument (phi = 1, sigma_omega = 1).
[[nodiscard]] Dgp reference_dgp_5x6();
/// Bivariate VAR(1) used for bootstrap coverage checks.
[[nodiscard]] Dgp bivariate_dgp();

/// JSON spec: {"n","p","phi":[[[..]]],"b":[[..]],"intercept":[..],"instrument_strength","noise_scale","seed","names"}
[[nodiscard]] Dgp load_dgp(const std::filesystem::path& path);
[[nodiscard]] Dgp parse_dgp(const std::string& json_text);
[[nodiscard]] std::string dgp_json(const Dgp& dgp);

struct McOptions {
    int T = 250;
    int reps = 500;
    int var_lags = 0;  // 0 = DGP lag order
    int coverage_reps = 0;  // MC replications that also run the bootstrap
    proxy::BootstrapOptions bootstrap;  // horizon/level/reps/block_len for coverage runs
    double relevance_threshold = 10.0;
    double max_failure_share = 0.05;
    unsigned threads = 0;
};

struct SummaryStats {
    double mean = 0.0;
    double median = 0.0;
    double p05 = 0.0;
    double p95 = 0.0;
};

struct McReport {
    int reps = 0;
    int T = 0;
    int failed = 0;  // identification failures (IrrelevantInstrument etc.)
    double phi_true = 0.0;
    double phi_bias = 0.0;
    Eigen::VectorXd b_true;
    Eigen::VectorXd b_bias;
    SummaryStats b_relative_error;
    SummaryStats relevance_f;
    double strong_share = 0.0;
    Eigen::MatrixXd coverage;  // (H+1) x n share of bands containing the true IRF; empty without coverage reps
    int coverage_reps = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo over the estimator chain simulate -> VAR -> moments -> identify -> IRF.
[[nodiscard]] McReport run_mc(const Dgp& dgp, const McOptions& options);

[[nodiscard]] std::string report_json(const McReport& report);

}  // namespace cci::sim
