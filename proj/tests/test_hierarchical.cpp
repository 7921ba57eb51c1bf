#include <doctest.h>

#include <cmath>
#include <memory>

#include "cokrig/error.hpp"
#include "cokrig/hierarchical.hpp"

using namespace cokrig;

namespace {

ModelPtr matern_lmc() {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.0, 0.5, 0.8;
    const CorrelationFunction rho{CorrelationFamily::matern, 1.0, 1.5};
    return std::make_shared<const KernelConvModel>(make_lmc(a, {rho, rho}));
}

ModelPtr zero_model() {
    const CorrelationFunction rho{CorrelationFamily::exponential, 1.0, 0.5};
    return std::make_shared<const KernelConvModel>(make_lmc(Eigen::MatrixXd::Zero(2, 2), {rho, rho}));
}

Eigen::MatrixXd sym2(double a, double b, double c) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, b, c;
    return m;
}

} // namespace

TEST_CASE("zero noise leaves the smooth covariance unchanged") {
    const auto w = matern_lmc();
    const HierarchicalModel m(w, MicroScaleSpec::zero(2), MeasurementErrorSpec::zero(2));
    const std::vector<LocationSet> locs{LocationSet({{0, 0}, {0.3, 0.2}, {1, 1}}), LocationSet({{0, 0}, {0.5, 0.5}})};
    const auto bundle = assemble_data_cov(m, locs);
    CHECK(bundle.joint == assemble_joint(*w, locs));
    CHECK(bundle.certificate.pass);
}

TEST_CASE("collocated pair with zero smooth part gives the measurement-error matrix") {
    const HierarchicalModel m(zero_model(), MicroScaleSpec::zero(2), {sym2(1.0, 0.4, 1.0)});
    const LocationSet one({{0.2, 0.7}});
    const auto bundle = assemble_data_cov(m, {one, one});
    CHECK(bundle.joint(0, 0) == 1.0);
    CHECK(bundle.joint(0, 1) == 0.4);
    CHECK(bundle.joint(1, 0) == 0.4);
    CHECK(bundle.joint(1, 1) == 1.0);
}

TEST_CASE("cross-variable measurement error needs exact collocation") {
    const HierarchicalModel m(zero_model(), MicroScaleSpec::zero(2), {sym2(1.0, 0.4, 1.0)});
    const auto bundle = assemble_data_cov(m, {LocationSet({{0, 0}}), LocationSet({{1e-9, 0}})});
    CHECK(bundle.joint(0, 1) == 0.0);
    CHECK(bundle.joint(0, 0) == 1.0);
}

TEST_CASE("micro-scale enters only the diagonal of each variable") {
    Eigen::VectorXd xi(2);
    xi << 0.2, 0.5;
    const auto w = matern_lmc();
    const HierarchicalModel m(w, {xi}, MeasurementErrorSpec::zero(2));
    const LocationSet l({{0, 0}, {0.5, 0}});
    const auto bundle = assemble_data_cov(m, {l, l});
    const auto base = assemble_joint(*w, std::vector<LocationSet>{l, l});
    const Eigen::MatrixXd diff = bundle.joint - base;
    Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
    want.diagonal() << 0.2, 0.2, 0.5, 0.5;
    CHECK((diff - want).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(m.latent_cov(0, {0, 0}, 0, {0, 0}) == doctest::Approx((*w)(0, {0, 0}, 0, {0, 0}) + 0.2));
    CHECK(m.latent_cov(0, {0, 0}, 1, {0, 0}) == (*w)(0, {0, 0}, 1, {0, 0}));
}

TEST_CASE("xi and eps are confounded away from collocation") {
    Eigen::VectorXd a(2), b(2);
    a << 0.2, 0.05;
    b << 0.1, 0.4;
    const auto w = matern_lmc();
    const HierarchicalModel m1(w, {a}, {Eigen::MatrixXd(b.asDiagonal())});
    const HierarchicalModel m2(w, {b}, {Eigen::MatrixXd(a.asDiagonal())});
    const std::vector<LocationSet> locs{LocationSet({{0, 0}, {0.4, 0.1}, {0.9, 0.3}}),
                                        LocationSet({{0.1, 0.8}, {0.6, 0.6}})};
    CHECK(data_covariance(m1, locs) == data_covariance(m2, locs));
}

TEST_CASE("origin gap recovers the nugget sum") {
    Eigen::VectorXd xi(2);
    xi << 0.2, 0.0;
    const HierarchicalModel m(matern_lmc(), {xi}, {sym2(0.1, 0.0, 0.3)});
    const auto g = origin_gap(m, {0.5, 0.5});
    CHECK(g.certificate.pass);
    CHECK(std::abs(g.gap(0, 0) - 0.3) < 1e-4);
    CHECK(std::abs(g.gap(1, 1) - 0.3) < 1e-4);
    CHECK(std::abs(g.gap(0, 1)) < 1e-4);
    CHECK(g.eps_h == doctest::Approx(1e-6));
}

TEST_CASE("origin gap of a smooth model vanishes") {
    const HierarchicalModel m(matern_lmc(), MicroScaleSpec::zero(2), MeasurementErrorSpec::zero(2));
    const auto g = origin_gap(m, {0.1, -0.3});
    CHECK(g.gap.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(g.certificate.pass);
}

TEST_CASE("origin gap sees correlated measurement error") {
    const HierarchicalModel m(matern_lmc(), MicroScaleSpec::zero(2), {sym2(0.1, 0.05, 0.2)});
    const auto g = origin_gap(m, {0, 0});
    CHECK(std::abs(g.gap(0, 1) - 0.05) < 1e-4);
    CHECK(std::abs(g.gap(1, 0) - 0.05) < 1e-4);
}

TEST_CASE("halving eps_h at least halves the continuity residual") {
    Eigen::VectorXd xi(2);
    xi << 0.2, 0.1;
    const HierarchicalModel m(matern_lmc(), {xi}, {sym2(0.1, 0.02, 0.3)});
    Eigen::MatrixXd target(2, 2);
    target << 0.3, 0.02, 0.02, 0.4;
    double prev = (origin_gap(m, {0.5, 0.5}, 0.08).gap - target).cwiseAbs().maxCoeff();
    for (double h : {0.04, 0.02, 0.01}) {
        const double res = (origin_gap(m, {0.5, 0.5}, h).gap - target).cwiseAbs().maxCoeff();
        CHECK(res <= 0.5 * prev);
        prev = res;
    }
}

TEST_CASE("invalid noise specifications are rejected") {
    const auto w = matern_lmc();
    Eigen::VectorXd neg(2);
    neg << -0.1, 0.2;
    CHECK_THROWS_AS(HierarchicalModel(w, {neg}, MeasurementErrorSpec::zero(2)), InputError);
    CHECK_THROWS_AS(HierarchicalModel(w, MicroScaleSpec::zero(3), MeasurementErrorSpec::zero(2)), InputError);
    CHECK_THROWS_AS(HierarchicalModel(w, MicroScaleSpec::zero(2), {sym2(0.1, 0.5, 0.1)}), InputError);
    CHECK_THROWS_AS(HierarchicalModel(w, MicroScaleSpec::zero(2), MeasurementErrorSpec::zero(1)), InputError);
    CHECK_THROWS_AS(HierarchicalModel(nullptr, MicroScaleSpec::zero(2), MeasurementErrorSpec::zero(2)), InputError);
    const HierarchicalModel m(w, MicroScaleSpec::zero(2), MeasurementErrorSpec::zero(2));
    CHECK_THROWS_AS(origin_gap(m, {NAN, 0}), InputError);
}
