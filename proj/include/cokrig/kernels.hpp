#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a plain serial reference kept for tests and benchmarks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cokrig/cross_construction.hpp"
#include "cokrig/estimation.hpp"
#include "cokrig/spatial_data.hpp"

namespace cokrig::kernels {

// One side of a binning problem: locations and mean-removed values.
struct SeriesView {
    std::span<const Location> locations;
    std::span<const double> values;
};

enum class PairStatistic { cross_product, half_squared_difference };

struct BinningProblem {
    SeriesView a;        // outer (lower variable index)
    SeriesView b;        // inner
    bool same_series = false;
    bool include_self = false; // self pairs go to the origin bin
    bool negate_lag = false;   // report lag as b - a instead of a - b
    PairStatistic statistic = PairStatistic::cross_product;
    const LagBins* bins = nullptr;
};

struct BinnedPairs {
    std::vector<double> sums;
    std::vector<double> lag_sums;
    std::vector<std::int64_t> counts;
    // Per bin: (index in a, index in b).
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> pairs;
};

// Threads from COKRIG_THREADS when set, otherwise the OpenMP default.
int thread_count();
void apply_thread_env();

namespace serial {
void fill_block(const CrossCovarianceModel& m, std::size_t q, const LocationSet& a, std::size_t r,
                const LocationSet& b, Eigen::Ref<Eigen::MatrixXd> out);
// Entry-by-entry joint matrix; never uses fill_block overrides.
Eigen::MatrixXd assemble_joint(const CrossCovarianceModel& m, std::span<const LocationSet> locations);
BinnedPairs bin_pairs(const BinningProblem& problem);
} // namespace serial

namespace omp {
void fill_block(const CrossCovarianceModel& m, std::size_t q, const LocationSet& a, std::size_t r,
                const LocationSet& b, Eigen::Ref<Eigen::MatrixXd> out);
// Evaluates f(i, j) into out in parallel over rows.
template <class F>
void fill_matrix(Eigen::Ref<Eigen::MatrixXd> out, F&& f) {
    const auto rows = static_cast<std::ptrdiff_t>(out.rows());
    const auto cols = out.cols();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            out(i, j) = f(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
}
Eigen::MatrixXd assemble_joint(const CrossCovarianceModel& m, std::span<const LocationSet> locations);
// Row-partitioned accumulation reduced in row order: the result does not
// depend on the thread count.
BinnedPairs bin_pairs(const BinningProblem& problem);
} // namespace omp

} // namespace cokrig::kernels
