#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cokrig/estimation.hpp"
#include "cokrig/families.hpp"
#include "cokrig/hierarchical.hpp"
#include "cokrig/spatial_data.hpp"

namespace cokrig {

// Y = W + xi keeps micro-scale variation; W is the smooth part only.
// Measurement error is always filtered.
enum class Predictand { Y, W };

std::string_view to_string(Predictand p);
Predictand parse_predictand(std::string_view s);

struct PredictionTarget {
    Predictand predictand = Predictand::Y;
    std::size_t variable = 0;
    LocationSet locations;
};

struct PredictionSet {
    std::vector<double> means;
    std::vector<double> variances;
    PredictionTarget target;
    std::size_t clamped = 0; // variances clamped from tiny negatives
};

// cov(target process at (q, s0), Z_r(u)).
double target_data_cov(const HierarchicalModel& m, Predictand p, std::size_t q, const Location& s0, std::size_t r,
                       const Location& u);
double target_cov(const HierarchicalModel& m, Predictand p, std::size_t q, const Location& s, const Location& u);

// Simple co-kriging with known constant means.
PredictionSet cokrige(const HierarchicalModel& m, const MultivariateDataset& data, std::span<const double> means,
                      const PredictionTarget& target);

// Joint covariance over targets (first) and all observations, and the matching
// mean vector.
struct JointSystem {
    Eigen::MatrixXd cov;
    Eigen::VectorXd mean;
    std::size_t targets = 0;
};
JointSystem joint_target_system(const HierarchicalModel& m, const MultivariateDataset& data,
                                std::span<const double> means, const PredictionTarget& target);

struct ConditionalMoments {
    std::vector<double> means;
    std::vector<double> variances;
};

// Exact Gaussian conditioning by inverting the full joint matrix (Gauss-Jordan)
// and then the target block of the precision matrix. Independent of the
// Cholesky path in cokrige.
ConditionalMoments gaussian_conditioning_oracle(const Eigen::MatrixXd& joint, std::size_t targets,
                                                const Eigen::VectorXd& observed, const Eigen::VectorXd& means);

double crps_gaussian(double mu, double sigma, double z);

struct ValidationReport {
    std::vector<double> rmse;      // per variable
    std::vector<double> mean_crps; // per variable
    std::vector<std::size_t> heldout_per_variable;
    std::vector<std::vector<std::size_t>> folds; // per variable, fold of each observation
    std::size_t n_heldout = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

struct ValidationSettings {
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    FitSettings fit{};
    NoiseSplit split{};
    // Called with (fold, training data) before each fit.
    std::function<void(std::size_t, const MultivariateDataset&)> on_training;
};

// Stratified k-fold assignment: observations of each variable are shuffled
// and dealt round-robin, continuing across variables.
std::vector<std::vector<std::size_t>> assign_folds(const MultivariateDataset& data, std::size_t k,
                                                   std::uint64_t seed);

// Fits on each training portion, predicts held-out Y and scores it against
// the held-out observation. The predictive distribution scored is that of
// the new observation: variance of Y plus the measurement-error variance.
ValidationReport cross_validate(const MultivariateDataset& data, const ModelFamily& family, const ParameterSet& init,
                                const ValidationSettings& settings);

} // namespace cokrig
