#include "cci/proxy_svar.hpp"

#include "cci/error.hpp"
#include "cci/parallel.hpp"
#include "cci/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace cci::proxy {

InstrumentSeries::InstrumentSeries(MonthStamp start, Eigen::VectorXd values, std::string name)
    : start_(start), values_(std::move(values)), name_(std::move(name)) {
    if (values_.size() == 0) fail(ErrorKind::InvalidArgument, "instrument is empty");
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (std::isinf(values_(i))) fail(ErrorKind::InvalidArgument, "instrument has an infinite value");
    }
}

std::size_t InstrumentSeries::missing() const {
    return static_cast<std::size_t>(values_.array().isNaN().count());
}

InstrumentSeries InstrumentSeries::aligned_to(const var::VarModel& model, MonthStamp z_start,
                                              const std::vector<double>& z_values, std::string name) {
    const MonthStamp first = model.first_residual_month();
    const Eigen::Index rows = model.effective_obs();
    const long offset = months_between(z_start, first);
    if (offset < 0 || offset + rows > static_cast<long>(z_values.size())) {
        fail(ErrorKind::LengthMismatch, "instrument '" + name + "' does not cover the residual window " + first.str() +
                                            ".." + first.plus(rows - 1).str());
    }
    Eigen::VectorXd v(rows);
    for (Eigen::Index i = 0; i < rows; ++i) v(i) = z_values[static_cast<std::size_t>(offset + i)];
    return {first, std::move(v), std::move(name)};
}

InstrumentSeries InstrumentSeries::aligned_to(const var::VarModel& model, const TimeSeries& z) {
    return aligned_to(model, z.start(), z.values(), z.name());
}

// ---------------------------------------------------------------------------

MomentSet compute_moments(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& sigma_eta, const Eigen::VectorXd& z) {
    if (z.size() != residuals.rows()) {
        fail(ErrorKind::LengthMismatch, "instrument has " + std::to_string(z.size()) + " rows, residuals have " +
                                            std::to_string(residuals.rows()));
    }
    const Eigen::Index n = residuals.cols();
    MomentSet m;
    m.sigma_eta = sigma_eta;
    double zsum = 0.0;
    for (Eigen::Index t = 0; t < z.size(); ++t) {
        if (std::isnan(z(t))) {
            ++m.rows_dropped;
        } else {
            zsum += z(t);
            ++m.rows_used;
        }
    }
    if (m.rows_used < 2) fail(ErrorKind::TooShort, "fewer than two instrument observations");
    const double zbar = zsum / static_cast<double>(m.rows_used);
    m.sigma_z_eta = Eigen::RowVectorXd::Zero(n);
    for (Eigen::Index t = 0; t < z.size(); ++t) {
        if (!std::isnan(z(t))) m.sigma_z_eta += (z(t) - zbar) * residuals.row(t);
    }
    m.sigma_z_eta /= static_cast<double>(m.rows_used);

    Eigen::LLT<Eigen::MatrixXd> llt(sigma_eta);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
        fail(ErrorKind::SingularSigma, "residual covariance is not positive definite");
    }
    const Eigen::VectorXd s = m.sigma_z_eta.transpose();
    m.scalar_moment = std::max(0.0, s.dot(llt.solve(s)));
    return m;
}

MomentSet compute_moments(const var::VarModel& model, const InstrumentSeries& z) {
    return compute_moments(model.residuals, model.sigma_eta, z.values());
}

double cmd_objective(const MomentSet& moments, double phi, const Eigen::VectorXd& b_col) {
    const double d0 = moments.scalar_moment - phi * phi;
    const Eigen::RowVectorXd d = moments.sigma_z_eta - phi * b_col.transpose();
    return d0 * d0 + d.squaredNorm();
}

ProxyIdentification identify(const MomentSet& moments, const IdentifyOptions& options) {
    if (!(moments.scalar_moment >= options.relevance_floor) || moments.scalar_moment == 0.0) {
        fail(ErrorKind::IrrelevantInstrument,
             "instrument moment " + std::to_string(moments.scalar_moment) + " below floor");
    }
    ProxyIdentification id;
    id.sign_convention = options.sign;
    id.phi = std::sqrt(moments.scalar_moment);
    id.b_col = moments.sigma_z_eta.transpose() / id.phi;
    if (options.sign == SignConvention::PositiveImpact && id.b_col(0) < 0.0) {
        id.phi = -id.phi;
        id.b_col = -id.b_col;
    }
    id.cmd_objective = cmd_objective(moments, id.phi, id.b_col);
    const double scale = std::max(1.0, moments.scalar_moment * moments.scalar_moment + moments.sigma_z_eta.squaredNorm());
    if (!(id.cmd_objective < 1e-10 * scale)) {
        fail(ErrorKind::NumericalFailure, "minimum-distance criterion " + std::to_string(id.cmd_objective) +
                                              " not zero at the closed-form solution");
    }
    return id;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd irf(const var::CompanionForm& comp, const Eigen::VectorXd& b_col, int horizon) {
    if (horizon < 0) fail(ErrorKind::InvalidArgument, "horizon must be non-negative");
    const Eigen::Index n = comp.selector.rows();
    if (b_col.size() != n) fail(ErrorKind::LengthMismatch, "impact column length differs from model dimension");
    Eigen::MatrixXd out(horizon + 1, n);
    out.row(0) = b_col.transpose();
    Eigen::VectorXd state = comp.selector.transpose() * b_col;
    for (int h = 1; h <= horizon; ++h) {
        state = comp.matrix * state;
        out.row(h) = state.head(n).transpose();
    }
    return out;
}

Eigen::MatrixXd irf(const var::VarModel& model, const Eigen::VectorXd& b_col, int horizon) {
    return irf(var::companion(model), b_col, horizon);
}

Eigen::MatrixXd irf(const var::VarModel& model, const ProxyIdentification& ident, int horizon) {
    return irf(model, ident.b_col, horizon);
}

// ---------------------------------------------------------------------------

int default_block_length(Eigen::Index effective_obs) {
    return static_cast<int>(std::ceil(5.03 * std::pow(static_cast<double>(effective_obs), 0.25)));
}

namespace {

/// Position-in-block means used to re-center resampled rows.
Eigen::MatrixXd block_position_means(const Eigen::MatrixXd& rows, int block_len) {
    const Eigen::Index starts = rows.rows() - block_len + 1;
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(block_len, rows.cols());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(block_len, rows.cols());
    for (int s = 0; s < block_len; ++s) {
        for (Eigen::Index i = 0; i < starts; ++i) {
            for (Eigen::Index c = 0; c < rows.cols(); ++c) {
                const double v = rows(i + s, c);
                if (!std::isnan(v)) {
                    means(s, c) += v;
                    counts(s, c) += 1.0;
                }
            }
        }
    }
    return means.array() / counts.array().max(1.0);
}

struct Replicate {
    std::optional<Eigen::MatrixXd> irf;
};

}  // namespace

IrfBundle mbb_bands(const var::VarModel& model, const InstrumentSeries& z, const BootstrapOptions& options) {
    if (options.reps < 100) fail(ErrorKind::InvalidArgument, "bootstrap needs at least 100 replications");
    if (!(options.level > 0.0 && options.level < 1.0)) fail(ErrorKind::InvalidArgument, "level must lie in (0,1)");
    if (options.horizon < 0) fail(ErrorKind::InvalidArgument, "horizon must be non-negative");
    const Eigen::Index te = model.effective_obs();
    if (z.size() != te) fail(ErrorKind::LengthMismatch, "instrument not aligned to the residual sample");
    const int ell = options.block_len == 0 ? default_block_length(te) : options.block_len;
    if (ell < 1 || ell > te) fail(ErrorKind::InvalidArgument, "block length must lie in 1..T-p");
    if (ell >= te) fail(ErrorKind::InvalidArgument, "block length leaves a single distinct block");

    const Eigen::Index n = model.n();
    const int p = model.p();
    const IdentifyOptions id_opts = options.identify;

    IrfBundle out;
    out.names = model.names;
    out.level = options.level;
    out.block_len = ell;
    out.reps_requested = options.reps;
    out.identification = identify(compute_moments(model, z), id_opts);
    out.point = irf(model, out.identification, options.horizon);

    // Joint rows (eta_t', z_t) resampled together.
    Eigen::MatrixXd joint(te, n + 1);
    joint.leftCols(n) = model.residuals;
    joint.col(n) = z.values();
    const Eigen::MatrixXd centers = block_position_means(joint, ell);
    const Eigen::Index n_blocks = (te + ell - 1) / ell;
    const Eigen::Index max_start = te - ell;
    const Eigen::VectorXd c = model.intercept();
    std::vector<Eigen::MatrixXd> phis;
    for (int l = 1; l <= p; ++l) phis.push_back(model.lag_matrix(l));
    const Eigen::Index T = model.data.rows();

    std::vector<Replicate> results(static_cast<std::size_t>(options.reps));
    parallel_for(results.size(), options.threads, [&](std::size_t b) {
        stats::Rng rng(stats::derive_seed(options.seed, b));
        std::uniform_int_distribution<Eigen::Index> pick(0, max_start);
        Eigen::MatrixXd draw(te, n + 1);
        Eigen::Index row = 0;
        for (Eigen::Index k = 0; k < n_blocks && row < te; ++k) {
            const Eigen::Index start = pick(rng);
            for (int s = 0; s < ell && row < te; ++s, ++row) {
                draw.row(row) = joint.row(start + s) - centers.row(s);
            }
        }
        Eigen::MatrixXd y(T, n);
        y.topRows(p) = model.data.topRows(p);
        for (Eigen::Index t = p; t < T; ++t) {
            Eigen::VectorXd v = c + draw.row(t - p).head(n).transpose();
            for (int l = 1; l <= p; ++l) v.noalias() += phis[static_cast<std::size_t>(l - 1)] * y.row(t - l).transpose();
            y.row(t) = v.transpose();
        }
        try {
            const var::VarModel star = var::estimate_var(y, model.spec, model.names, model.sample_start);
            const MomentSet mom = compute_moments(star.residuals, star.sigma_eta, draw.col(n));
            const ProxyIdentification id = identify(mom, id_opts);
            results[b].irf = irf(star, id, options.horizon);
        } catch (const Error& e) {
            if (e.category() != ErrorCategory::Numerical && e.kind() != ErrorKind::TooShort) throw;
        }
    });

    std::vector<const Eigen::MatrixXd*> kept;
    for (const auto& r : results) {
        if (r.irf) kept.push_back(&*r.irf);
    }
    out.reps_used = static_cast<int>(kept.size());
    out.reps_dropped = options.reps - out.reps_used;
    if (static_cast<double>(out.reps_dropped) > options.max_drop_share * options.reps) {
        fail(ErrorKind::NumericalFailure, std::to_string(out.reps_dropped) + " of " + std::to_string(options.reps) +
                                              " bootstrap replicates failed identification");
    }
    const double lo_p = (1.0 - options.level) / 2.0;
    const double hi_p = 1.0 - lo_p;
    out.lower.resize(out.point.rows(), n);
    out.upper.resize(out.point.rows(), n);
    std::vector<double> cell(kept.size());
    for (Eigen::Index h = 0; h < out.point.rows(); ++h) {
        for (Eigen::Index j = 0; j < n; ++j) {
            for (std::size_t r = 0; r < kept.size(); ++r) cell[r] = (*kept[r])(h, j);
            std::sort(cell.begin(), cell.end());
            out.lower(h, j) = stats::quantile_sorted(cell, lo_p);
            out.upper(h, j) = stats::quantile_sorted(cell, hi_p);
            if (out.point(h, j) < out.lower(h, j) || out.point(h, j) > out.upper(h, j)) ++out.crossings;
        }
    }
    return out;
}

IrfBundle mbb_bands(const SeriesPanel& panel, const var::VarSpec& spec, const TimeSeries& z,
                    const BootstrapOptions& options) {
    const var::VarModel model = var::estimate_var(panel, spec);
    return mbb_bands(model, InstrumentSeries::aligned_to(model, z), options);
}

// ---------------------------------------------------------------------------

RelevanceReport relevance_test(const Eigen::VectorXd& target_residual, const Eigen::VectorXd& z, double threshold) {
    if (target_residual.size() != z.size()) fail(ErrorKind::LengthMismatch, "instrument and residual lengths differ");
    RelevanceReport r;
    r.threshold = threshold;
    double zs = 0.0;
    double es = 0.0;
    for (Eigen::Index t = 0; t < z.size(); ++t) {
        if (std::isnan(z(t))) continue;
        zs += z(t);
        es += target_residual(t);
        ++r.rows_used;
    }
    if (r.rows_used < 3) fail(ErrorKind::TooShort, "fewer than three instrument observations");
    const double zbar = zs / static_cast<double>(r.rows_used);
    const double ebar = es / static_cast<double>(r.rows_used);
    double szz = 0.0;
    double sze = 0.0;
    for (Eigen::Index t = 0; t < z.size(); ++t) {
        if (std::isnan(z(t))) continue;
        szz += (z(t) - zbar) * (z(t) - zbar);
        sze += (z(t) - zbar) * (target_residual(t) - ebar);
    }
    if (!(szz > 0.0)) fail(ErrorKind::ZeroVariance, "instrument has zero variance");
    const double beta = sze / szz;
    double meat = 0.0;
    for (Eigen::Index t = 0; t < z.size(); ++t) {
        if (std::isnan(z(t))) continue;
        const double zc = z(t) - zbar;
        const double u = target_residual(t) - ebar - beta * zc;
        meat += zc * zc * u * u;
    }
    const double var_beta = meat / (szz * szz);
    r.first_stage_coef = beta;
    r.f_stat = var_beta > 0.0 ? beta * beta / var_beta : std::numeric_limits<double>::infinity();
    r.strong = r.f_stat > threshold;
    return r;
}

RelevanceReport relevance_test(const var::VarModel& model, const InstrumentSeries& z, double threshold) {
    if (z.size() != model.effective_obs()) fail(ErrorKind::LengthMismatch, "instrument not aligned to the residual sample");
    return relevance_test(model.residuals.col(0), z.values(), threshold);
}

}  // namespace cci::proxy
