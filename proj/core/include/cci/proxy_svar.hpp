#pragma once

#include "cci/series.hpp"
#include "cci/var.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cci::proxy {

/// Instrument aligned row-for-row with a VAR's residual sample.
/// NaN marks a missing month; such rows are skipped pairwise in the moments.
class InstrumentSeries {
public:
    InstrumentSeries(MonthStamp start, Eigen::VectorXd values, std::string name = "z");

    /// Cuts `z` (dated) to the residual window of `model`. Throws LengthMismatch
    /// when `z` does not cover it.
    [[nodiscard]] static InstrumentSeries aligned_to(const var::VarModel& model, MonthStamp z_start,
                                                     const std::vector<double>& z_values, std::string name = "z");
    [[nodiscard]] static InstrumentSeries aligned_to(const var::VarModel& model, const TimeSeries& z);

    [[nodiscard]] const MonthStamp& start() const noexcept { return start_; }
    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::size_t missing() const;

private:
    MonthStamp start_;
    Eigen::VectorXd values_;
    std::string name_;
};

struct MomentSet {
    Eigen::RowVectorXd sigma_z_eta;  // 1 x n
    Eigen::MatrixXd sigma_eta;       // n x n
    double scalar_moment = 0.0;      // sigma_z_eta * sigma_eta^-1 * sigma_eta_z
    std::size_t rows_used = 0;
    std::size_t rows_dropped = 0;
};

/// Covariances of the demeaned instrument with the reduced-form residuals.
[[nodiscard]] MomentSet compute_moments(const var::VarModel& model, const InstrumentSeries& z);
/// Same moments from raw matrices; `residuals` rows pair with `z` entries.
[[nodiscard]] MomentSet compute_moments(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& sigma_eta,
                                        const Eigen::VectorXd& z);

enum class SignConvention {
    PositivePhi,     // instrument positively correlated with the target shock
    PositiveImpact,  // first element of the impact column positive
};

struct IdentifyOptions {
    double relevance_floor = 1e-12;
    SignConvention sign = SignConvention::PositivePhi;
};

struct ProxyIdentification {
    double phi = 0.0;
    Eigen::VectorXd b_col;  // impact column B_.1
    double cmd_objective = 0.0;
    SignConvention sign_convention = SignConvention::PositivePhi;
};

/// Identity-weighted minimum-distance criterion for theta = (phi, B_.1).
[[nodiscard]] double cmd_objective(const MomentSet& moments, double phi, const Eigen::VectorXd& b_col);

/// Closed-form minimum-distance solution of the just-identified system
/// phi^2 = s' S^-1 s, s' = phi B_.1'. Throws IrrelevantInstrument when the
/// scalar moment is below the floor, NumericalFailure when the self-check of
/// the criterion exceeds 1e-10 (relative to the moment scale).
[[nodiscard]] ProxyIdentification identify(const MomentSet& moments, const IdentifyOptions& options = {});

/// Rows h = 0..horizon of S C^h S' B_.1 (horizon+1 x n).
[[nodiscard]] Eigen::MatrixXd irf(const var::VarModel& model, const Eigen::VectorXd& b_col, int horizon);
[[nodiscard]] Eigen::MatrixXd irf(const var::CompanionForm& comp, const Eigen::VectorXd& b_col, int horizon);
[[nodiscard]] Eigen::MatrixXd irf(const var::VarModel& model, const ProxyIdentification& ident, int horizon);

struct BootstrapOptions {
    int horizon = 12;
    double level = 0.68;
    int reps = 1000;
    int block_len = 0;  // 0 selects ceil(5.03 * T^(1/4))
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = hardware concurrency
    IdentifyOptions identify;
    double max_drop_share = 0.10;
};

struct IrfBundle {
    std::vector<std::string> names;
    Eigen::MatrixXd point;  // (H+1) x n
    Eigen::MatrixXd lower;
    Eigen::MatrixXd upper;
    double level = 0.68;
    int reps_requested = 0;
    int reps_used = 0;
    int reps_dropped = 0;
    int block_len = 0;
    int crossings = 0;  // cells where point lies outside [lower, upper]
    ProxyIdentification identification;

    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(point.rows()) - 1; }
};

[[nodiscard]] int default_block_length(Eigen::Index effective_obs);

/// Moving-block bootstrap percentile bands.
[[nodiscard]] IrfBundle mbb_bands(const SeriesPanel& panel, const var::VarSpec& spec, const TimeSeries& z,
                                  const BootstrapOptions& options);
[[nodiscard]] IrfBundle mbb_bands(const var::VarModel& model, const InstrumentSeries& z,
                                  const BootstrapOptions& options);

struct RelevanceReport {
    double f_stat = 0.0;
    double first_stage_coef = 0.0;
    double threshold = 10.0;
    bool strong = false;
    std::size_t rows_used = 0;
};

/// HC0-robust F statistic of the regression of the first reduced-form
/// residual on the demeaned instrument. Stand-in relevance check.
[[nodiscard]] RelevanceReport relevance_test(const var::VarModel& model, const InstrumentSeries& z,
                                             double threshold = 10.0);
[[nodiscard]] RelevanceReport relevance_test(const Eigen::VectorXd& target_residual, const Eigen::VectorXd& z,
                                             double threshold = 10.0);

}  // namespace cci::proxy
