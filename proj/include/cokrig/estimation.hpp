#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cokrig/families.hpp"
#include "cokrig/optimize.hpp"
#include "cokrig/parameters.hpp"
#include "cokrig/spatial_data.hpp"

namespace cokrig {

// Keeps the signed projection of the lag on `axis_angle` (radians from +x)
// for pairs whose lag lies within `tolerance` radians of the axis line.
struct DirectionalSpec {
    double axis_angle = 0.0;
    double tolerance = 0.39269908169872414; // pi / 8
};

// Distance bins [e_k, e_{k+1}). Pairs at exactly zero lag form a separate
// origin bin. Directional bins are mirrored to negative lags.
struct LagBins {
    std::vector<double> edges;
    std::optional<DirectionalSpec> directional;

    static LagBins uniform(double max_lag, std::size_t count);
    double max_lag() const { return edges.back(); }
    std::size_t distance_bins() const { return edges.size() - 1; }
    // Origin + distance bins, doubled (minus origin) when directional.
    std::size_t total_bins() const;
    // Internal bin id of a lag vector: 0 = origin, 1..m = positive side,
    // m+1..2m = negative side. nullopt when outside range or direction.
    std::optional<std::size_t> bin_of(double hx, double hy) const;
    // Signed center of an internal bin id.
    double center(std::size_t id) const;
    void validate() const;
};

enum class SummaryKind { pseudo_cross_variogram, empirical_cross_cov };

struct LagPair {
    Location s; // variable q
    Location u; // variable r
};

// Bins ordered by increasing signed center. Empty bins have NaN values.
struct EmpiricalSummary {
    SummaryKind kind = SummaryKind::pseudo_cross_variogram;
    std::size_t q = 0;
    std::size_t r = 0;
    std::vector<double> bin_centers;
    std::vector<double> values;
    std::vector<std::int64_t> pair_counts;
    std::vector<double> mean_lag;
    std::vector<std::vector<LagPair>> pairs; // per bin, for model averaging

    std::size_t nonempty_bins() const;
};

// Lag h = s_q - s_r: it points from the variable-r location to the variable-q
// location, so bin values estimate C_qr(h) = cov(Z_q(s + h), Z_r(s)).
EmpiricalSummary empirical_cross_cov(const MultivariateDataset& data, std::size_t q, std::size_t r,
                                     const LagBins& bins);
// 1/2 mean of (Z_q(s) - m_q - Z_r(u) + m_r)^2 per bin; for q == r the
// classical semivariogram estimator over unordered distinct pairs.
EmpiricalSummary pseudo_cross_variogram(const MultivariateDataset& data, std::size_t q, std::size_t r,
                                        const LagBins& bins);

// Model value matching a summary bin: the average over that bin's pairs.
double model_bin_value(const HierarchicalModel& m, const EmpiricalSummary& summary, std::size_t bin);

class FitResult {
public:
    FitResult(ParameterSet params, double objective, std::optional<double> loglik, std::size_t n, bool converged,
              int iterations);

    const ParameterSet& params() const noexcept { return params_; }
    double objective() const noexcept { return objective_; }
    std::optional<double> loglik() const noexcept { return loglik_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t n() const noexcept { return n_; }
    bool converged() const noexcept { return converged_; }
    int iterations() const noexcept { return iterations_; }

    // GLS estimates of the constant per-variable means (ML fits).
    std::vector<double> means;
    // Free parameters that ended at a bound.
    std::vector<std::string> at_boundary;
    // Best objective after each optimizer iteration.
    std::vector<double> trace;

private:
    ParameterSet params_;
    double objective_;
    std::optional<double> loglik_;
    std::size_t k_;
    std::size_t n_;
    bool converged_;
    int iterations_;
};

struct FitSettings {
    OptimizerSettings optimizer{};
    std::size_t dense_cap = 2000;
    double wls_floor = 1e-12;
    // Only the eps_corr part affects the data covariance.
    std::optional<NoiseSplit> split;
};

// Minimizes sum over bins of count * (empirical - model)^2 / max(model^2, floor).
FitResult fit_wls(std::span<const EmpiricalSummary> summaries, const ModelFamily& family, const ParameterSet& init,
                  const FitSettings& settings = {});
double wls_objective(std::span<const EmpiricalSummary> summaries, const ModelFamily& family,
                     const ParameterSet& params, double floor = 1e-12);

struct LikelihoodValue {
    double loglik = 0.0;
    std::vector<double> means;
};

// Gaussian log-likelihood with constant per-variable means profiled out by
// GLS. nullopt when the covariance is not positive definite.
std::optional<LikelihoodValue> profile_loglik(const HierarchicalModel& m, const MultivariateDataset& data);

FitResult fit_ml(const MultivariateDataset& data, const ModelFamily& family, const ParameterSet& init,
                 const FitSettings& settings = {});

struct InformationCriteria {
    double aic = 0.0;
    std::optional<double> aicc; // undefined when n <= k + 1
};

InformationCriteria information_criteria(const FitResult& fit);

} // namespace cokrig
