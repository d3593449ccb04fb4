#include "cci/var.hpp"

#include "cci/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cci::var {

Eigen::MatrixXd VarModel::lag_matrix(int lag) const {
    if (lag < 1 || lag > spec.lags) fail(ErrorKind::InvalidArgument, "lag " + std::to_string(lag) + " out of range");
    const Eigen::Index offset = (spec.include_intercept ? 1 : 0) + static_cast<Eigen::Index>(lag - 1) * n();
    return coeffs.block(0, offset, n(), n());
}

Eigen::VectorXd VarModel::intercept() const {
    if (!spec.include_intercept) return Eigen::VectorXd::Zero(n());
    return coeffs.col(0);
}

int VarModel::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) fail(ErrorKind::UnknownVariable, "no variable named '" + name + "'");
    return static_cast<int>(it - names.begin());
}

Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& y, int lags, bool intercept) {
    const Eigen::Index T = y.rows();
    const Eigen::Index n = y.cols();
    const Eigen::Index rows = T - lags;
    const Eigen::Index k = n * lags + (intercept ? 1 : 0);
    Eigen::MatrixXd x(rows, k);
    Eigen::Index col = 0;
    if (intercept) x.col(col++).setOnes();
    for (int l = 1; l <= lags; ++l) {
        x.block(0, col, rows, n) = y.block(lags - l, 0, rows, n);
        col += n;
    }
    return x;
}

VarModel estimate_var(const SeriesPanel& panel, const VarSpec& spec) {
    return estimate_var(panel.matrix(), spec, panel.names(), panel.window().first);
}

VarModel estimate_var(const Eigen::MatrixXd& y, const VarSpec& spec, std::vector<std::string> names, MonthStamp start) {
    if (spec.lags < 1) fail(ErrorKind::InvalidArgument, "VAR needs at least one lag");
    const Eigen::Index T = y.rows();
    const Eigen::Index n = y.cols();
    if (n < 1) fail(ErrorKind::InvalidArgument, "VAR needs at least one variable");
    const Eigen::Index p = spec.lags;
    if (!(T - p > n * p + 1)) {
        fail(ErrorKind::TooShort, "T=" + std::to_string(T) + " too short for n=" + std::to_string(n) +
                                      ", p=" + std::to_string(p));
    }
    if (names.empty()) {
        for (Eigen::Index j = 0; j < n; ++j) names.push_back("y" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(names.size()) != n) fail(ErrorKind::InvalidArgument, "name count mismatch");

    VarModel m;
    m.spec = spec;
    m.names = std::move(names);
    m.sample_start = start;
    m.data = y;
    m.design = lagged_design(y, spec.lags, spec.include_intercept);
    const Eigen::MatrixXd lhs = y.bottomRows(T - p);
    const Eigen::Index k = m.design.cols();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.design);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        fail(ErrorKind::RankDeficient, "regressor matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(k));
    }
    const Eigen::MatrixXd beta = qr.solve(lhs);  // k x n
    m.coeffs = beta.transpose();
    m.residuals = lhs - m.design * beta;
    m.sigma_eta = m.residuals.transpose() * m.residuals / static_cast<double>(T - p);

    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd perm = qr.colsPermutation();
    m.xtx_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();

    m.r2.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double ssr = m.residuals.col(j).squaredNorm();
        const double sst = spec.include_intercept ? (lhs.col(j).array() - lhs.col(j).mean()).square().sum()
                                                  : lhs.col(j).squaredNorm();
        m.r2(j) = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;
    }
    return m;
}

// ---------------------------------------------------------------------------

CompanionForm companion(const std::vector<Eigen::MatrixXd>& lag_matrices) {
    if (lag_matrices.empty()) fail(ErrorKind::InvalidArgument, "companion needs at least one lag matrix");
    const Eigen::Index n = lag_matrices.front().rows();
    const auto p = static_cast<Eigen::Index>(lag_matrices.size());
    CompanionForm c;
    c.matrix = Eigen::MatrixXd::Zero(n * p, n * p);
    for (Eigen::Index l = 0; l < p; ++l) {
        const auto& phi = lag_matrices[static_cast<std::size_t>(l)];
        if (phi.rows() != n || phi.cols() != n) fail(ErrorKind::InvalidArgument, "lag matrices must be n x n");
        c.matrix.block(0, l * n, n, n) = phi;
    }
    if (p > 1) c.matrix.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
    c.selector = Eigen::MatrixXd::Zero(n, n * p);
    c.selector.leftCols(n).setIdentity();
    return c;
}

CompanionForm companion(const VarModel& model) {
    std::vector<Eigen::MatrixXd> lags;
    for (int l = 1; l <= model.p(); ++l) lags.push_back(model.lag_matrix(l));
    return companion(lags);
}

StabilityReport stability(const Eigen::MatrixXd& companion_matrix) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion_matrix, false);
    if (es.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "eigenvalue computation failed");
    StabilityReport r;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        r.eigenvalues.push_back(es.eigenvalues()(i));
        r.spectral_radius = std::max(r.spectral_radius, std::abs(es.eigenvalues()(i)));
    }
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
              [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
    r.stable = r.spectral_radius < 1.0;
    return r;
}

StabilityReport stability(const VarModel& model) { return stability(companion(model).matrix); }

// ---------------------------------------------------------------------------

double chi_square_sf(double x, double df) {
    if (!(df > 0.0)) fail(ErrorKind::InvalidArgument, "chi-square needs positive degrees of freedom");
    if (x <= 0.0) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

std::vector<PortmanteauOrder> portmanteau(const Eigen::MatrixXd& residuals, int max_order, int lag_adjust) {
    if (max_order < 1) fail(ErrorKind::InvalidArgument, "max_order must be at least 1");
    const Eigen::Index T = residuals.rows();
    const Eigen::Index n = residuals.cols();
    if (T - max_order < 2) fail(ErrorKind::TooShort, "too few residual rows for order " + std::to_string(max_order));
    const Eigen::MatrixXd u = residuals.rowwise() - residuals.colwise().mean();
    const Eigen::MatrixXd c0 = u.transpose() * u / static_cast<double>(T);
    Eigen::LDLT<Eigen::MatrixXd> c0_solver(c0);
    if (c0_solver.info() != Eigen::Success || c0_solver.vectorD().minCoeff() <= 0.0) {
        fail(ErrorKind::SingularSigma, "residual covariance is singular");
    }
    std::vector<PortmanteauOrder> out;
    double acc = 0.0;
    const double Td = static_cast<double>(T);
    for (int h = 1; h <= max_order; ++h) {
        const Eigen::MatrixXd ch =
            u.bottomRows(T - h).transpose() * u.topRows(T - h) / Td;  // sum u_t u_{t-h}'
        const Eigen::MatrixXd a = c0_solver.solve(ch);                  // C0^-1 Ch
        const Eigen::MatrixXd b = c0_solver.solve(ch.transpose());      // C0^-1 Ch'
        acc += (a * b).trace() / (Td - h);
        PortmanteauOrder r;
        r.order = h;
        r.statistic = Td * Td * acc;
        const int eff = h - lag_adjust;
        r.df_adjusted = eff > 0;
        r.df = static_cast<int>(n * n) * (r.df_adjusted ? eff : h);
        r.p_value = chi_square_sf(r.statistic, r.df);
        out.push_back(r);
    }
    return out;
}

std::vector<PortmanteauOrder> residual_autocorr_test(const VarModel& model, int max_order) {
    if (max_order < 1) fail(ErrorKind::InvalidArgument, "max_order must be at least 1");
    if (!(model.effective_obs() > max_order)) fail(ErrorKind::TooShort, "max_order exceeds residual sample");
    return portmanteau(model.residuals, max_order, model.p());
}

// ---------------------------------------------------------------------------

GrangerResult granger_test(const VarModel& model, const std::string& dependent, const std::vector<std::string>& excluded,
                           CovarianceKind cov) {
    const int dep = model.index_of(dependent);
    if (excluded.empty()) fail(ErrorKind::UnknownVariable, "no excluded variables given");
    std::vector<int> ex;
    for (const auto& name : excluded) {
        const int j = model.index_of(name);
        if (j == dep) fail(ErrorKind::UnknownVariable, "excluded variable equals the dependent '" + dependent + "'");
        if (std::find(ex.begin(), ex.end(), j) != ex.end()) fail(ErrorKind::UnknownVariable, "'" + name + "' listed twice");
        ex.push_back(j);
    }
    const int n = model.n();
    const int p = model.p();
    const Eigen::Index offset = model.spec.include_intercept ? 1 : 0;
    std::vector<Eigen::Index> idx;
    for (int l = 1; l <= p; ++l) {
        for (int j : ex) idx.push_back(offset + static_cast<Eigen::Index>(l - 1) * n + j);
    }
    const auto q = static_cast<Eigen::Index>(idx.size());
    const Eigen::Index k = model.regressors();
    const Eigen::Index rows = model.effective_obs();
    const Eigen::VectorXd e = model.residuals.col(dep);

    Eigen::MatrixXd v;
    if (cov == CovarianceKind::Homoskedastic) {
        const double s2 = e.squaredNorm() / static_cast<double>(rows - k);
        v = s2 * model.xtx_inv;
    } else {
        const Eigen::MatrixXd xe = model.design.array().colwise() * e.array();
        v = model.xtx_inv * (xe.transpose() * xe) * model.xtx_inv;
    }
    Eigen::VectorXd rb(q);
    Eigen::MatrixXd rvr(q, q);
    for (Eigen::Index a = 0; a < q; ++a) {
        rb(a) = model.coeffs(dep, idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < q; ++b) rvr(a, b) = v(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(rvr);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
        fail(ErrorKind::SingularSigma, "restricted coefficient covariance is singular");
    }
    GrangerResult r;
    r.dependent = dependent;
    r.excluded = excluded;
    r.wald_stat = std::max(0.0, rb.dot(ldlt.solve(rb)));
    r.df = static_cast<int>(q);
    r.p_value = chi_square_sf(r.wald_stat, r.df);
    return r;
}

GrangerResult granger_all(const VarModel& model, const std::string& dependent, CovarianceKind cov) {
    std::vector<std::string> others;
    model.index_of(dependent);
    for (const auto& name : model.names) {
        if (name != dependent) others.push_back(name);
    }
    auto r = granger_test(model, dependent, others, cov);
    r.excluded = {"All"};
    return r;
}

std::vector<GrangerResult> granger_table(const VarModel& model, CovarianceKind cov) {
    std::vector<GrangerResult> out;
    for (const auto& dep : model.names) {
        for (const auto& ex : model.names) {
            if (ex != dep) out.push_back(granger_test(model, dep, {ex}, cov));
        }
        if (model.n() > 2) out.push_back(granger_all(model, dep, cov));
    }
    return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd correlation(const Eigen::MatrixXd& columns) {
    if (columns.rows() < 2) fail(ErrorKind::TooShort, "correlation needs at least two rows");
    const Eigen::MatrixXd c = columns.rowwise() - columns.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c;
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    if (sd.minCoeff() <= 0.0) fail(ErrorKind::ZeroVariance, "a column has zero variance");
    Eigen::MatrixXd r = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        r(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = std::clamp(0.5 * (r(i, j) + r(j, i)), -1.0, 1.0);
            r(i, j) = v;
            r(j, i) = v;
        }
    }
    return r;
}

Eigen::MatrixXd shock_correlation(const VarModel& model) { return correlation(model.residuals); }

PcaResult pca(const SeriesPanel& panel, bool standardize_first) {
    if (panel.width() < 2) fail(ErrorKind::InvalidArgument, "pca needs at least two series");
    Eigen::MatrixXd z = panel.matrix();
    const double denom = static_cast<double>(z.rows() - 1);
    z = z.rowwise() - z.colwise().mean();
    if (standardize_first) {
        const Eigen::VectorXd sd = (z.colwise().squaredNorm() / denom).cwiseSqrt().transpose();
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            if (!(sd(j) > 0.0)) fail(ErrorKind::ZeroVariance, "series '" + panel.series()[static_cast<std::size_t>(j)].name() + "' has zero variance");
            z.col(j) /= sd(j);
        }
    }
    const Eigen::MatrixXd m = z.transpose() * z / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "eigen-decomposition failed");
    const Eigen::Index n = m.rows();
    PcaResult r{Eigen::MatrixXd(n, n), Eigen::VectorXd(n), Eigen::VectorXd(n), panel};
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = n - 1 - k;  // solver sorts ascending
        r.eigenvalues(k) = std::max(0.0, es.eigenvalues()(src));
        Eigen::VectorXd v = es.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        r.loadings.col(k) = v;
    }
    const double total = r.eigenvalues.sum();
    if (!(total > 0.0)) fail(ErrorKind::ZeroVariance, "panel has zero total variance");
    r.explained = r.eigenvalues / total;
    const Eigen::MatrixXd scores = z * r.loadings;
    std::vector<std::string> names;
    for (Eigen::Index k = 0; k < n; ++k) names.push_back("PC" + std::to_string(k + 1));
    r.scores = SeriesPanel::from_matrix(panel.window().first, scores, names);
    return r;
}

}  // namespace cci::var
