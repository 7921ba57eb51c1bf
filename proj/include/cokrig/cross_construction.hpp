#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "cokrig/covariance.hpp"
#include "cokrig/spatial_data.hpp"

namespace cokrig {

// A valid multivariate covariance: cov(W_q(s), W_r(u)) for zero-based
// variable indices q, r.
class CrossCovarianceModel {
public:
    virtual ~CrossCovarianceModel() = default;

    virtual std::size_t variables() const = 0;
    virtual double operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const = 0;
    virtual std::string kind() const = 0;
    // Typical correlation length, used for default lag steps.
    virtual double characteristic_length() const = 0;

    // out(i, j) = cov(W_q(a_i), W_r(b_j)). The default evaluates entry by
    // entry; models with cheaper structure override it.
    virtual void fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                            Eigen::Ref<Eigen::MatrixXd> out) const;
};

using ModelPtr = std::shared_ptr<const CrossCovarianceModel>;

// ---------------------------------------------------------------------------
// Conditional construction: cov(Z1) = S11, cov(Z1, Z2) = S11 B',
// cov(Z2) = S2|1 + B S11 B'.

struct ScaledIdentityB {
    double b0 = 0.0;
};
// B(s, u) = b0 * exp(-|s-u| / range), each row normalized to sum to b0.
struct DistanceDecayB {
    double b0 = 0.0;
    double range = 1.0;
};
struct ExplicitB {
    Eigen::MatrixXd matrix;
};
using BOperator = std::variant<ScaledIdentityB, DistanceDecayB, ExplicitB>;

Eigen::MatrixXd realize_b(const BOperator& b, const LocationSet& grid);

// Joint 2n x 2n matrix [[S11, S11 B'], [B S11, S21 + B S11 B']].
Eigen::MatrixXd conditional_joint_matrix(const Eigen::MatrixXd& sigma11, const Eigen::MatrixXd& sigma21,
                                         const Eigen::MatrixXd& b);

class ConditionalModel final : public CrossCovarianceModel {
public:
    // `order[0]` is the conditioning (marginal) variable, `order[1]` the
    // conditioned one. A grid is required unless B is a scaled identity, in
    // which case the model is evaluated in closed form at any location.
    ConditionalModel(CovarianceFunction marginal, CovarianceFunction conditional, BOperator b,
                     std::optional<LocationSet> grid = std::nullopt, std::array<std::size_t, 2> order = {0, 1});

    std::size_t variables() const override { return 2; }
    double operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const override;
    std::string kind() const override { return "conditional"; }
    double characteristic_length() const override;
    void fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                    Eigen::Ref<Eigen::MatrixXd> out) const override;

    const CovarianceFunction& marginal() const noexcept { return marginal_; }
    const CovarianceFunction& conditional() const noexcept { return conditional_; }
    const BOperator& b_operator() const noexcept { return b_; }
    const std::optional<LocationSet>& grid() const noexcept { return grid_; }
    std::array<std::size_t, 2> order() const noexcept { return order_; }

private:
    CovarianceFunction marginal_;
    CovarianceFunction conditional_;
    BOperator b_;
    std::optional<LocationSet> grid_;
    std::array<std::size_t, 2> order_;
    // Joint covariance on the grid in role order (marginal first), present
    // only for grid-based B rules.
    Eigen::MatrixXd grid_joint_;
};

// ---------------------------------------------------------------------------
// Spatial Random Effects: W_q(s) = S_q(s)' eta_q + xi_q(s),
// cov((eta_1', eta_2')') = K.

using NuggetFunction = std::function<double(const Location&)>;
NuggetFunction constant_nugget(double v);

class SreModel final : public CrossCovarianceModel {
public:
    // K is (b1 + b2) square, symmetric positive definite.
    SreModel(BasisSet basis1, BasisSet basis2, Eigen::MatrixXd k, NuggetFunction nugget1 = constant_nugget(0.0),
             NuggetFunction nugget2 = constant_nugget(0.0));

    std::size_t variables() const override { return 2; }
    double operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const override;
    std::string kind() const override { return "sre"; }
    double characteristic_length() const override;
    void fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                    Eigen::Ref<Eigen::MatrixXd> out) const override;

    const BasisSet& basis(std::size_t q) const { return q == 0 ? basis1_ : basis2_; }
    const Eigen::MatrixXd& k() const noexcept { return k_; }

private:
    Eigen::Block<const Eigen::MatrixXd> k_block(std::size_t q, std::size_t r) const;
    double nugget(std::size_t q, const Location& s) const;

    BasisSet basis1_;
    BasisSet basis2_;
    Eigen::MatrixXd k_;
    NuggetFunction nugget1_;
    NuggetFunction nugget2_;
};

double sre_cross_cov(const SreModel& m, std::size_t q, std::size_t r, const Location& s, const Location& u);

// ---------------------------------------------------------------------------
// Kernel convolution: Z_q(s) = sum_k int g_qk(u - s) U_k(u) du with
// independent unit-variance factors U_k.

// Gaussian bump amplitude * N(v; shift, width^2 I); width 0 is a Dirac mass
// amplitude * delta(v - shift).
struct Kernel {
    double amplitude = 0.0;
    double width = 0.0;
    double shift_x = 0.0;
    double shift_y = 0.0;

    bool is_dirac() const noexcept { return width == 0.0; }
};

struct Quadrature {
    int nodes = 64;            // per axis
    double half_width = 5.0;   // integration box half-width in kernel widths
    double tail_tolerance = 1e-4;
};

class KernelConvModel final : public CrossCovarianceModel {
public:
    // kernels is p x p row-major: kernels[q * p + k] = g_qk.
    KernelConvModel(std::vector<CorrelationFunction> factors, std::vector<Kernel> kernels, Quadrature quad = {});

    std::size_t variables() const override { return factors_.size(); }
    double operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const override;
    std::string kind() const override { return "kernel_conv"; }
    double characteristic_length() const override;
    // Caches C_qr by distinct lag vector; regular grids have few of them.
    void fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                    Eigen::Ref<Eigen::MatrixXd> out) const override;

    // C_qr(h) = cov(Z_q(s + h), Z_r(s)).
    double cross_cov(std::size_t q, std::size_t r, double hx, double hy) const;

    const Kernel& kernel(std::size_t q, std::size_t k) const { return kernels_[q * factors_.size() + k]; }
    const std::vector<CorrelationFunction>& factors() const noexcept { return factors_; }

private:
    std::vector<CorrelationFunction> factors_;
    std::vector<Kernel> kernels_;
    Quadrature quad_;
    std::vector<double> node_offsets_; // standardized midpoints
    std::vector<double> node_weights_; // standardized 2-D weights, row-major
};

// Linear model of coregionalization as the all-Dirac, zero-shift special case.
KernelConvModel make_lmc(const Eigen::MatrixXd& a, std::vector<CorrelationFunction> factors);

double kernel_conv_cross_cov(const KernelConvModel& m, std::size_t q, std::size_t r, double hx, double hy);

// ---------------------------------------------------------------------------
// Variance modulation: cov(e^{m_q(s)} W_q(s), e^{m_r(u)} W_r(u)). Valid for
// any valid base model.
class ModulatedModel final : public CrossCovarianceModel {
public:
    using LogScale = std::function<double(std::size_t q, const Location& s)>;

    ModulatedModel(ModelPtr base, LogScale log_scale);

    std::size_t variables() const override { return base_->variables(); }
    double operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const override;
    std::string kind() const override { return base_->kind() + "+modulated"; }
    double characteristic_length() const override { return base_->characteristic_length(); }
    void fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                    Eigen::Ref<Eigen::MatrixXd> out) const override;

private:
    ModelPtr base_;
    LogScale log_scale_;
};

// ---------------------------------------------------------------------------

struct CovMatrixBundle {
    std::vector<LocationSet> locations; // per variable
    std::vector<std::size_t> offsets;   // start row of each variable, plus total
    Eigen::MatrixXd joint;
    NndCertificate certificate;

    std::size_t variables() const noexcept { return locations.size(); }
    Eigen::MatrixXd block(std::size_t q, std::size_t r) const;
};

inline constexpr double kBundleTolerance = 1e-8;

std::vector<std::size_t> stacked_offsets(std::span<const LocationSet> locations);

// Joint matrix of a model over per-variable location sets (upper triangle
// evaluated, mirrored).
Eigen::MatrixXd assemble_joint(const CrossCovarianceModel& model, std::span<const LocationSet> locations);

// Certifies and wraps a joint matrix; throws NumericalError if the certificate
// fails. Also the hook for injecting hand-built blocks in tests.
CovMatrixBundle certify_bundle(Eigen::MatrixXd joint, std::vector<LocationSet> locations,
                               double tol = kBundleTolerance);

CovMatrixBundle assemble_bundle(const CrossCovarianceModel& model, std::vector<LocationSet> locations);

// Bundle on the model's own discretization grid (L1 = L2 = grid).
CovMatrixBundle conditional_joint_cov(const ConditionalModel& m, const LocationSet& l1, const LocationSet& l2);

// Draws realizations of a certified bundle. The factorization is computed
// once: Cholesky when possible, otherwise a pivoted LDL' whose negative
// pivots may not exceed 1e-10 * max(trace, 1).
class FieldSampler {
public:
    explicit FieldSampler(const CovMatrixBundle& bundle);

    MultivariateDataset draw(std::span<const double> means, std::uint64_t seed) const;
    Eigen::VectorXd draw_vector(std::uint64_t seed) const;

private:
    std::vector<LocationSet> locations_;
    std::vector<std::size_t> offsets_;
    Eigen::MatrixXd factor_;                       // joint = factor * factor'
    Eigen::PermutationMatrix<Eigen::Dynamic> perm_; // identity for Cholesky
};

MultivariateDataset simulate_field(const CovMatrixBundle& bundle, std::span<const double> means,
                                   std::uint64_t seed);

} // namespace cokrig
