#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace cokrig {

struct OptimizerSettings {
    int max_iterations = 2000; // per start
    double tolerance = 1e-6;   // simplex size at convergence
    int starts = 5;            // first start unjittered, the rest jittered
    double jitter = 0.3;       // standard deviation of start jitter
    double initial_step = 0.5;
    std::uint64_t seed = 0;
};

struct OptimizerResult {
    Eigen::VectorXd x;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    // Best value seen after each iteration, across all starts.
    std::vector<double> trace;
};

// Value returned for rejected (e.g. non-p.d.) evaluations.
inline constexpr double kRejectedValue = 1e300;

// Derivative-free Nelder-Mead (GSL nmsimplex2) with jittered restarts, on an
// unconstrained vector.
OptimizerResult minimize(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                         const OptimizerSettings& settings);

} // namespace cokrig
