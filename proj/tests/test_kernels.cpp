#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include <omp.h>

#include "cokrig/kernels.hpp"

using namespace cokrig;

namespace {

std::vector<Location> random_points(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Location> out(n);
    for (auto& p : out) p = {u(rng), u(rng)};
    return out;
}

std::vector<double> normals(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> z;
    std::vector<double> out(n);
    for (auto& v : out) v = z(rng);
    return out;
}

KernelConvModel test_model() {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.0, 0.4, 0.9;
    return make_lmc(a, {{CorrelationFamily::exponential, 0.3, 0.5}, {CorrelationFamily::matern, 0.2, 2.5}});
}

void check_same(const kernels::BinnedPairs& a, const kernels::BinnedPairs& b) {
    REQUIRE(a.counts.size() == b.counts.size());
    CHECK(a.counts == b.counts);
    CHECK(a.pairs == b.pairs);
    for (std::size_t k = 0; k < a.sums.size(); ++k) {
        CHECK(a.sums[k] == doctest::Approx(b.sums[k]).epsilon(1e-12));
        CHECK(a.lag_sums[k] == doctest::Approx(b.lag_sums[k]).epsilon(1e-12));
    }
}

} // namespace

TEST_CASE("joint assembly: OpenMP and serial agree") {
    std::mt19937_64 rng(1);
    const auto m = test_model();
    const std::vector<LocationSet> locs{LocationSet(random_points(rng, 70)), LocationSet(random_points(rng, 45))};
    const Eigen::MatrixXd a = kernels::serial::assemble_joint(m, locs);
    const Eigen::MatrixXd b = kernels::omp::assemble_joint(m, locs);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);

    Eigen::MatrixXd s(70, 45), o(70, 45);
    kernels::serial::fill_block(m, 0, locs[0], 1, locs[1], s);
    kernels::omp::fill_block(m, 0, locs[0], 1, locs[1], o);
    CHECK(s == o);
}

TEST_CASE("pair binning: OpenMP and serial agree") {
    std::mt19937_64 rng(2);
    const auto la = random_points(rng, 150), lb = random_points(rng, 120);
    const auto va = normals(rng, 150), vb = normals(rng, 120);
    LagBins bins = LagBins::uniform(0.6, 12);
    for (bool directional : {false, true}) {
        if (directional) bins.directional = DirectionalSpec{0.4, 0.3};
        for (auto stat : {kernels::PairStatistic::cross_product, kernels::PairStatistic::half_squared_difference}) {
            kernels::BinningProblem cross{{la, va}, {lb, vb}, false, false, true, stat, &bins};
            check_same(kernels::serial::bin_pairs(cross), kernels::omp::bin_pairs(cross));
            kernels::BinningProblem self{{la, va}, {la, va}, true, true, false, stat, &bins};
            check_same(kernels::serial::bin_pairs(self), kernels::omp::bin_pairs(self));
        }
    }
}

TEST_CASE("pair binning does not depend on the thread count") {
    std::mt19937_64 rng(3);
    const auto la = random_points(rng, 300);
    const auto va = normals(rng, 300);
    const auto bins = LagBins::uniform(0.5, 10);
    kernels::BinningProblem p{{la, va}, {la, va}, true, false, false,
                              kernels::PairStatistic::half_squared_difference, &bins};
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = kernels::omp::bin_pairs(p);
    omp_set_num_threads(4);
    const auto four = kernels::omp::bin_pairs(p);
    omp_set_num_threads(saved);
    CHECK(one.sums == four.sums);
    CHECK(one.counts == four.counts);
    CHECK(one.pairs == four.pairs);
}

TEST_CASE("thread count follows COKRIG_THREADS") {
    const int saved = omp_get_max_threads();
    setenv("COKRIG_THREADS", "3", 1);
    kernels::apply_thread_env();
    CHECK(kernels::thread_count() == 3);
    unsetenv("COKRIG_THREADS");
    omp_set_num_threads(saved);
}
