#pragma once

#include "cci/series.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace cci::var {

struct VarSpec {
    int lags = 1;
    bool include_intercept = true;
};

/// Reduced-form VAR fitted by equation-wise least squares.
///
/// Rows of `residuals` correspond to months `first_residual_month()` onward.
/// `coeffs` is n x k with k = n*p (+1): the intercept, when present, is column
/// 0, followed by the lag blocks Phi_1 .. Phi_p.
struct VarModel {
    VarSpec spec;
    std::vector<std::string> names;
    MonthStamp sample_start;
    Eigen::MatrixXd data;       // T x n, original sample
    Eigen::MatrixXd design;     // (T-p) x k regressors
    Eigen::MatrixXd coeffs;     // n x k
    Eigen::MatrixXd residuals;  // (T-p) x n
    Eigen::MatrixXd sigma_eta;  // residuals' residuals / (T-p)
    Eigen::MatrixXd xtx_inv;    // (X'X)^-1
    Eigen::VectorXd r2;

    [[nodiscard]] int n() const noexcept { return static_cast<int>(names.size()); }
    [[nodiscard]] int p() const noexcept { return spec.lags; }
    [[nodiscard]] Eigen::Index effective_obs() const noexcept { return residuals.rows(); }
    [[nodiscard]] Eigen::Index regressors() const noexcept { return coeffs.cols(); }
    [[nodiscard]] Eigen::MatrixXd lag_matrix(int lag) const;  // Phi_lag, 1-based
    [[nodiscard]] Eigen::VectorXd intercept() const;
    [[nodiscard]] MonthStamp first_residual_month() const { return sample_start.plus(spec.lags); }
    [[nodiscard]] int index_of(const std::string& name) const;  // throws UnknownVariable
};

/// Lagged regressor matrix for rows p..T-1 of `y`, intercept first when requested.
[[nodiscard]] Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& y, int lags, bool intercept);

[[nodiscard]] VarModel estimate_var(const SeriesPanel& panel, const VarSpec& spec);
[[nodiscard]] VarModel estimate_var(const Eigen::MatrixXd& y, const VarSpec& spec,
                                    std::vector<std::string> names = {}, MonthStamp start = {});

struct CompanionForm {
    Eigen::MatrixXd matrix;    // np x np
    Eigen::MatrixXd selector;  // n x np, [I 0 ... 0]
};

[[nodiscard]] CompanionForm companion(const VarModel& model);
[[nodiscard]] CompanionForm companion(const std::vector<Eigen::MatrixXd>& lag_matrices);

struct StabilityReport {
    bool stable = false;
    double spectral_radius = 0.0;
    std::vector<std::complex<double>> eigenvalues;
};

[[nodiscard]] StabilityReport stability(const VarModel& model);
[[nodiscard]] StabilityReport stability(const Eigen::MatrixXd& companion_matrix);

struct PortmanteauOrder {
    int order = 0;
    double statistic = 0.0;
    int df = 0;
    bool df_adjusted = false;  // false when order <= lag count
    double p_value = 1.0;
};

/// Multivariate Ljung-Box (Hosking) statistic for orders 1..max_order on
/// raw residual rows. Degrees of freedom are n^2 (h - lag_adjust) when that is
/// positive, n^2 h otherwise.
[[nodiscard]] std::vector<PortmanteauOrder> portmanteau(const Eigen::MatrixXd& residuals, int max_order,
                                                        int lag_adjust = 0);
[[nodiscard]] std::vector<PortmanteauOrder> residual_autocorr_test(const VarModel& model, int max_order);

struct GrangerResult {
    std::string dependent;
    std::vector<std::string> excluded;
    double wald_stat = 0.0;
    int df = 0;
    double p_value = 1.0;
};

enum class CovarianceKind { Homoskedastic, HeteroskedasticRobust };

/// Wald test that every lag of `excluded` is zero in the `dependent` equation.
[[nodiscard]] GrangerResult granger_test(const VarModel& model, const std::string& dependent,
                                         const std::vector<std::string>& excluded,
                                         CovarianceKind cov = CovarianceKind::Homoskedastic);
/// Joint test of all other variables ("All" row).
[[nodiscard]] GrangerResult granger_all(const VarModel& model, const std::string& dependent,
                                        CovarianceKind cov = CovarianceKind::Homoskedastic);
/// Per-variable tests plus the joint row for every dependent variable.
[[nodiscard]] std::vector<GrangerResult> granger_table(const VarModel& model,
                                                       CovarianceKind cov = CovarianceKind::Homoskedastic);

[[nodiscard]] Eigen::MatrixXd shock_correlation(const VarModel& model);
[[nodiscard]] Eigen::MatrixXd correlation(const Eigen::MatrixXd& columns);

struct PcaResult {
    Eigen::MatrixXd loadings;  // n x n, column k = component k
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd explained;  // shares, descending, sum to 1
    SeriesPanel scores;
};

[[nodiscard]] PcaResult pca(const SeriesPanel& panel, bool standardize_first = true);

/// Upper-tail chi-square probability.
[[nodiscard]] double chi_square_sf(double x, double df);

}  // namespace cci::var
