#include "check.hpp"

#include "cci/simlab.hpp"

#include <doctest.h>

#include <cmath>

using namespace cci::sim;
using cci::ErrorKind;

namespace {

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd x = a.array() - a.mean();
    const Eigen::VectorXd y = b.array() - b.mean();
    return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

}  // namespace

TEST_SUITE("simlab") {

TEST_CASE("irrelevant instrument is uncorrelated with the target shock") {
    Dgp d = bivariate_dgp();
    d.instrument_strength = 0.0;
    const auto s = simulate(d, 250);
    CHECK(std::abs(corr(s.instrument.to_vector(), s.shocks.col(0))) < 0.15);
}

TEST_CASE("noiseless instrument") {
    Dgp d = reference_dgp_5x6();
    d.noise_scale = 0.0;
    d.instrument_strength = 0.7;
    const auto s = simulate(d, 200);
    const Eigen::VectorXd z = s.instrument.to_vector();
    CHECK(z == Eigen::VectorXd(0.7 * s.shocks.col(0)));
}

TEST_CASE("reduced-form covariance approaches B B'") {
    const Dgp d = reference_dgp_5x6();
    const auto s = simulate(d, 5000);
    const auto m = cci::var::estimate_var(s.panel, {d.p, true});
    const Eigen::MatrixXd bb = d.b_true * d.b_true.transpose();
    CHECK((m.sigma_eta - bb).norm() / bb.norm() < 0.10);
}

TEST_CASE("simulation layout and determinism") {
    const Dgp d = bivariate_dgp();
    const auto a = simulate(d, 120);
    const auto b = simulate(d, 120);
    const auto c = simulate(d, 120, d.seed + 1);
    CHECK(a.panel.matrix() == b.panel.matrix());
    CHECK(a.instrument.values() == b.instrument.values());
    CHECK(a.panel.matrix() != c.panel.matrix());
    CHECK(a.panel.length() == 120);
    CHECK(a.panel.names() == d.names);
    CHECK(a.instrument.name() == "z");
    CHECK(a.instrument.window() == a.panel.window());
    CHECK(a.shocks.rows() == 120);
    CHECK_KIND(simulate(d, d.n * d.p + 50), ErrorKind::TooShort);
}

TEST_CASE("dgp validation") {
    Dgp d = bivariate_dgp();
    d.phi[0] = Eigen::MatrixXd::Identity(2, 2);
    CHECK_KIND(d.validate(), ErrorKind::UnstableDgp);
    CHECK_KIND(simulate(d, 200), ErrorKind::UnstableDgp);
    Dgp s = bivariate_dgp();
    s.b_true << 1, 2, 2, 4;
    CHECK_KIND(s.validate(), ErrorKind::InvalidArgument);
    Dgp shape = bivariate_dgp();
    shape.phi.push_back(Eigen::MatrixXd::Zero(3, 3));
    CHECK_KIND(shape.validate(), ErrorKind::InvalidArgument);
    CHECK_NOTHROW(reference_dgp_5x6().validate());
}

TEST_CASE("true impulse responses") {
    const Dgp d = bivariate_dgp();
    const Eigen::MatrixXd irf = d.true_irf(5);
    CHECK(irf.row(0).transpose() == d.target_column());
    Eigen::VectorXd v = d.target_column();
    for (int h = 1; h <= 5; ++h) {
        v = d.phi[0] * v;
        CHECK((irf.row(h).transpose() - v).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("dgp json round trip") {
    const Dgp d = reference_dgp_5x6();
    const Dgp back = parse_dgp(dgp_json(d));
    CHECK(back.n == d.n);
    CHECK(back.p == d.p);
    for (int l = 0; l < d.p; ++l) CHECK(back.phi[static_cast<std::size_t>(l)] == d.phi[static_cast<std::size_t>(l)]);
    CHECK(back.b_true == d.b_true);
    CHECK(back.seed == d.seed);
    CHECK(back.names == d.names);
    CHECK(back.instrument_strength == d.instrument_strength);
    CHECK(dgp_json(back) == dgp_json(d));
    const Dgp file = load_dgp(testing::fixture("dgp/reference_5x6.json"));
    CHECK(file.b_true == d.b_true);
    CHECK_KIND(parse_dgp("{"), ErrorKind::ConfigError);
    CHECK_KIND(parse_dgp(R"({"n":2,"p":1,"phi":[[[0.5]]],"b":[[1,0],[0,1]]})"), ErrorKind::ConfigError);
}

TEST_CASE("monte carlo") {
    McOptions opt;
    opt.T = 250;
    opt.reps = 100;
    opt.threads = 2;
    SUBCASE("strong instrument is recovered and runs are reproducible") {
        const auto a = run_mc(bivariate_dgp(), opt);
        opt.threads = 1;
        const auto b = run_mc(bivariate_dgp(), opt);
        CHECK(report_json(a) == report_json(b));
        CHECK(a.failed == 0);
        CHECK(a.b_relative_error.median < 0.15);
        CHECK(std::isfinite(a.relevance_f.mean));
        CHECK(a.strong_share > 0.9);
        CHECK(a.reps == 100);
    }
    SUBCASE("errors shrink with the sample size") {
        opt.T = 1000;
        const auto big = run_mc(bivariate_dgp(), opt);
        opt.T = 250;
        const auto small = run_mc(bivariate_dgp(), opt);
        CHECK(big.b_relative_error.median < small.b_relative_error.median);
    }
    SUBCASE("an irrelevant instrument is flagged") {
        Dgp d = bivariate_dgp();
        d.instrument_strength = 0.0;
        opt.max_failure_share = 1.0;
        const auto r = run_mc(d, opt);
        CHECK((r.failed > 50 || r.strong_share < 0.10));
    }
    SUBCASE("guards") {
        opt.reps = 99;
        CHECK_KIND(run_mc(bivariate_dgp(), opt), ErrorKind::InvalidArgument);
        opt.reps = 100;
        opt.coverage_reps = 101;
        CHECK_KIND(run_mc(bivariate_dgp(), opt), ErrorKind::InvalidArgument);
    }
}

}  // TEST_SUITE
