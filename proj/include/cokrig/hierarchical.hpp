#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "cokrig/covariance.hpp"
#include "cokrig/cross_construction.hpp"
#include "cokrig/spatial_data.hpp"

namespace cokrig {

// Stationary measurement-error covariance Sigma_eps(0). Off-diagonal entries
// apply only where different variables are observed at exactly the same
// location; errors at distinct observations are independent.
struct MeasurementErrorSpec {
    Eigen::MatrixXd sigma_eps;

    static MeasurementErrorSpec zero(std::size_t p) { return {Eigen::MatrixXd::Zero(p, p)}; }
    void validate(std::size_t p) const;
};

// Diagonal micro-scale variances Sigma_xi(0); xi is white in space.
struct MicroScaleSpec {
    Eigen::VectorXd sigma_xi;

    static MicroScaleSpec zero(std::size_t p) { return {Eigen::VectorXd::Zero(p)}; }
    void validate(std::size_t p) const;
};

// Z = W + xi + eps with a smooth W from any cross-construction.
class HierarchicalModel {
public:
    HierarchicalModel(ModelPtr smooth, MicroScaleSpec micro, MeasurementErrorSpec noise);

    std::size_t variables() const noexcept { return smooth_->variables(); }
    const CrossCovarianceModel& smooth() const noexcept { return *smooth_; }
    const ModelPtr& smooth_ptr() const noexcept { return smooth_; }
    const MicroScaleSpec& micro() const noexcept { return micro_; }
    const MeasurementErrorSpec& noise() const noexcept { return noise_; }

    // cov(Z_q(s), Z_r(u)) for two observations.
    double data_cov(std::size_t q, const Location& s, std::size_t r, const Location& u) const;
    // cov(Y_q(s), Y_r(u)), Y = W + xi.
    double latent_cov(std::size_t q, const Location& s, std::size_t r, const Location& u) const;

private:
    ModelPtr smooth_;
    MicroScaleSpec micro_;
    MeasurementErrorSpec noise_;
};

// Dense data covariance over per-variable observation locations, without a
// certificate (used inside likelihood loops).
Eigen::MatrixXd data_covariance(const HierarchicalModel& m, std::span<const LocationSet> locations);

// Data covariance with an n.n.d. certificate; throws NumericalError on failure.
CovMatrixBundle assemble_data_cov(const HierarchicalModel& m, std::vector<LocationSet> locations);

struct OriginGap {
    Eigen::MatrixXd gap; // p x p
    NndCertificate certificate;
    double eps_h = 0.0;
};

// C_Z(probe, probe) minus the mean of C_Z(probe, probe +/- eps_h * e_x), with
// all variables treated as observed at the probe. eps_h <= 0 selects
// characteristic_length / 1e6.
OriginGap origin_gap(const HierarchicalModel& m, const Location& probe, double eps_h = 0.0);

} // namespace cokrig
