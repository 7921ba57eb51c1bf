#include "cokrig/kernels.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

#include "cokrig/error.hpp"

namespace cokrig::kernels {

int thread_count() {
    if (const char* env = std::getenv("COKRIG_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return omp_get_max_threads();
}

void apply_thread_env() {
    if (std::getenv("COKRIG_THREADS")) omp_set_num_threads(thread_count());
}

namespace {

std::size_t pair_bins(const BinningProblem& p) {
    if (!p.bins) throw InputError("binning problem without bins");
    return p.bins->total_bins();
}

} // namespace

namespace serial {

void fill_block(const CrossCovarianceModel& m, std::size_t q, const LocationSet& a, std::size_t r,
                const LocationSet& b, Eigen::Ref<Eigen::MatrixXd> out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(q, a[i], r, b[j]);
        }
    }
}

Eigen::MatrixXd assemble_joint(const CrossCovarianceModel& m, std::span<const LocationSet> locations) {
    const auto offsets = stacked_offsets(locations);
    const auto n = static_cast<Eigen::Index>(offsets.back());
    Eigen::MatrixXd joint(n, n);
    for (std::size_t q = 0; q < locations.size(); ++q) {
        for (std::size_t r = 0; r < locations.size(); ++r) {
            for (std::size_t i = 0; i < locations[q].size(); ++i) {
                for (std::size_t j = 0; j < locations[r].size(); ++j) {
                    joint(static_cast<Eigen::Index>(offsets[q] + i), static_cast<Eigen::Index>(offsets[r] + j)) =
                        m(q, locations[q][i], r, locations[r][j]);
                }
            }
        }
    }
    return 0.5 * (joint + joint.transpose());
}

BinnedPairs bin_pairs(const BinningProblem& p) {
    const auto nb = pair_bins(p);
    BinnedPairs out;
    out.sums.assign(nb, 0.0);
    out.lag_sums.assign(nb, 0.0);
    out.counts.assign(nb, 0);
    out.pairs.resize(nb);
    const bool directional = p.bins->directional.has_value();
    for (std::size_t i = 0; i < p.a.locations.size(); ++i) {
        const std::size_t j0 = p.same_series && !directional ? i : 0;
        for (std::size_t j = j0; j < p.b.locations.size(); ++j) {
            if (p.same_series && i == j && !p.include_self) continue;
            double hx = p.a.locations[i].x - p.b.locations[j].x;
            double hy = p.a.locations[i].y - p.b.locations[j].y;
            if (p.negate_lag) {
                hx = -hx;
                hy = -hy;
            }
            const auto bin = p.bins->bin_of(hx, hy);
            if (!bin) continue;
            const double va = p.a.values[i], vb = p.b.values[j];
            const double stat = p.statistic == PairStatistic::cross_product ? va * vb : 0.5 * (va - vb) * (va - vb);
            out.sums[*bin] += stat;
            out.lag_sums[*bin] += std::hypot(hx, hy);
            ++out.counts[*bin];
            out.pairs[*bin].emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    }
    return out;
}

} // namespace serial

namespace omp {

void fill_block(const CrossCovarianceModel& m, std::size_t q, const LocationSet& a, std::size_t r,
                const LocationSet& b, Eigen::Ref<Eigen::MatrixXd> out) {
    fill_matrix(out, [&](std::size_t i, std::size_t j) { return m(q, a[i], r, b[j]); });
}

Eigen::MatrixXd assemble_joint(const CrossCovarianceModel& m, std::span<const LocationSet> locations) {
    const auto offsets = stacked_offsets(locations);
    const auto n = static_cast<Eigen::Index>(offsets.back());
    Eigen::MatrixXd joint(n, n);
    for (std::size_t q = 0; q < locations.size(); ++q) {
        for (std::size_t r = q; r < locations.size(); ++r) {
            const auto i0 = static_cast<Eigen::Index>(offsets[q]), j0 = static_cast<Eigen::Index>(offsets[r]);
            const auto nq = static_cast<Eigen::Index>(locations[q].size());
            const auto nr = static_cast<Eigen::Index>(locations[r].size());
            m.fill_block(q, locations[q], r, locations[r], joint.block(i0, j0, nq, nr));
            if (r != q) joint.block(j0, i0, nr, nq) = joint.block(i0, j0, nq, nr).transpose();
        }
    }
    return 0.5 * (joint + joint.transpose());
}

BinnedPairs bin_pairs(const BinningProblem& p) {
    const auto nb = pair_bins(p);
    const bool directional = p.bins->directional.has_value();
    const auto rows = p.a.locations.size();
    std::vector<double> sums(rows * nb, 0.0), lag_sums(rows * nb, 0.0);
    std::vector<std::int64_t> counts(rows * nb, 0);
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> row_pairs(rows); // (bin, j)

#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const std::size_t j0 = p.same_series && !directional ? i : 0;
        double* s = &sums[i * nb];
        double* l = &lag_sums[i * nb];
        std::int64_t* c = &counts[i * nb];
        auto& rp = row_pairs[i];
        for (std::size_t j = j0; j < p.b.locations.size(); ++j) {
            if (p.same_series && i == j && !p.include_self) continue;
            double hx = p.a.locations[i].x - p.b.locations[j].x;
            double hy = p.a.locations[i].y - p.b.locations[j].y;
            if (p.negate_lag) {
                hx = -hx;
                hy = -hy;
            }
            const auto bin = p.bins->bin_of(hx, hy);
            if (!bin) continue;
            const double va = p.a.values[i], vb = p.b.values[j];
            s[*bin] += p.statistic == PairStatistic::cross_product ? va * vb : 0.5 * (va - vb) * (va - vb);
            l[*bin] += std::hypot(hx, hy);
            ++c[*bin];
            rp.emplace_back(static_cast<std::uint32_t>(*bin), static_cast<std::uint32_t>(j));
        }
    }

    BinnedPairs out;
    out.sums.assign(nb, 0.0);
    out.lag_sums.assign(nb, 0.0);
    out.counts.assign(nb, 0);
    out.pairs.resize(nb);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < nb; ++k) {
            out.sums[k] += sums[i * nb + k];
            out.lag_sums[k] += lag_sums[i * nb + k];
            out.counts[k] += counts[i * nb + k];
        }
        for (const auto& [bin, j] : row_pairs[i]) out.pairs[bin].emplace_back(static_cast<std::uint32_t>(i), j);
    }
    return out;
}

} // namespace omp

} // namespace cokrig::kernels
