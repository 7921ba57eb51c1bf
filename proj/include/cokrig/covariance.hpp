#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "cokrig/spatial_data.hpp"

namespace cokrig {

struct MaternParams {
    double sigma2 = 1.0;
    double range = 1.0;
    double nu = 0.5;
};

// Matern covariance in the sqrt(2 nu) h / range parameterization, so that
// nu = 0.5 is sigma2 * exp(-h / range). Closed forms for nu in {0.5, 1.5, 2.5};
// modified Bessel function of the second kind otherwise.
double matern_cov(const MaternParams& p, double h);

enum class CorrelationFamily { exponential, matern, gaussian };

std::string_view to_string(CorrelationFamily family);
CorrelationFamily parse_correlation_family(std::string_view name);

// Unit-variance isotropic correlation function.
struct CorrelationFunction {
    CorrelationFamily family = CorrelationFamily::exponential;
    double range = 1.0;
    double nu = 0.5; // matern only

    double operator()(double h) const;
    void validate() const;
};

// sigma2 * rho(h).
struct CovarianceFunction {
    double sigma2 = 1.0;
    CorrelationFunction correlation{};

    double operator()(double h) const { return sigma2 * correlation(h); }
    double operator()(const Location& a, const Location& b) const { return (*this)(distance(a, b)); }
};

CovarianceFunction matern_covariance(double sigma2, double range, double nu);

// Entry (i, j) = k(|a_i - b_j|).
Eigen::MatrixXd eval_cov_matrix(const CovarianceFunction& k, const LocationSet& a, const LocationSet& b);

struct NndCertificate {
    double min_eigenvalue = 0.0;
    double trace = 0.0;
    double tol_used = 0.0;
    bool pass = false;
};

// Symmetrizes M (after checking it is symmetric to within tol * max(trace, 1)
// entrywise) and certifies min eigenvalue >= -tol * max(trace, 1).
NndCertificate check_nnd(const Eigen::MatrixXd& m, double tol);

// Bisquare basis functions sharing one scale.
struct BasisSet {
    LocationSet centers;
    double scale = 1.0;

    std::size_t size() const noexcept { return centers.size(); }
    void validate() const;
};

Eigen::VectorXd bisquare_basis(const BasisSet& basis, const Location& s);
// Rows are bisquare_basis evaluated at each location.
Eigen::MatrixXd basis_matrix(const BasisSet& basis, const LocationSet& locations);

} // namespace cokrig
