#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cokrig/covariance.hpp"
#include "cokrig/cross_construction.hpp"
#include "cokrig/hierarchical.hpp"
#include "cokrig/parameters.hpp"
#include "cokrig/spatial_data.hpp"

namespace cokrig {

// Fraction of each variable's fitted nugget attributed to measurement error
// (filtered at prediction); the rest is micro-scale variation (predicted).
// `eps_corr` correlates measurement errors of collocated observations,
// row-major p x p with unit diagonal; empty means uncorrelated.
struct NoiseSplit {
    std::vector<double> eps_fraction;
    std::vector<double> eps_corr;

    static NoiseSplit all_measurement_error(std::size_t p) { return {std::vector<double>(p, 1.0), {}}; }
};

// A parametric family of hierarchical models. Every family exposes a
// `nugget[q]` group holding the total (micro-scale + measurement-error)
// nugget of each variable; the two are confounded in data.
class ModelFamily {
public:
    virtual ~ModelFamily() = default;

    virtual std::string name() const = 0;
    virtual std::size_t variables() const = 0;
    // Parameters with defaults, bounds and the all-free mask.
    virtual ParameterSet defaults() const = 0;
    virtual ModelPtr smooth(const ParameterSet& params) const = 0;

    Eigen::VectorXd nuggets(const ParameterSet& params) const;
    HierarchicalModel build(const ParameterSet& params, const NoiseSplit& split) const;
};

using FamilyPtr = std::shared_ptr<const ModelFamily>;

struct Bounds {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};
Bounds bounding_box(const MultivariateDataset& data);

// LMC: W = A U with lower-triangular A (groups `a`, `range`, `nugget`).
// With regions > 0 the family is the variance-modulated, nonstationary
// variant with a `log_scale` group of p * regions^2 free parameters over a
// regions x regions partition of `box`.
struct LmcFamilyOptions {
    std::size_t variables = 2;
    CorrelationFamily correlation = CorrelationFamily::exponential;
    double nu = 0.5;
    std::size_t regions = 0;
    Bounds box{};
};
FamilyPtr make_lmc_family(const LmcFamilyOptions& options);

// Conditional construction with Matern marginal and conditional covariances
// (groups `sill`, `range`, `b0`, optional `b_range`, `nugget`).
struct ConditionalFamilyOptions {
    CorrelationFamily correlation = CorrelationFamily::matern;
    double nu = 1.5;
    bool distance_decay = false; // B rule; false = b0 * I
    std::optional<LocationSet> grid; // required for distance_decay
    std::array<std::size_t, 2> order = {0, 1};
};
FamilyPtr make_conditional_family(const ConditionalFamilyOptions& options);

// Bivariate SRE with shared bisquare centers and
// K = [[s1, c sqrt(s1 s2)], [c sqrt(s1 s2), s2]] (x) exp(-D / k_range)
// (groups `sill`, `corr`, `k_range`, `nugget`).
struct SreFamilyOptions {
    LocationSet centers;
    std::array<double, 2> scale = {1.0, 1.0};
};
FamilyPtr make_sre_family(const SreFamilyOptions& options);

// Kernel convolution with per-kernel widths fixed by the options (0 = Dirac);
// groups `a` (p x p amplitudes), `range`, `shift_x`, `shift_y`, `nugget`.
struct KernelConvFamilyOptions {
    std::size_t variables = 2;
    CorrelationFamily correlation = CorrelationFamily::exponential;
    double nu = 0.5;
    std::vector<double> widths; // p*p row-major; empty = all Dirac
    Quadrature quadrature{};
};
FamilyPtr make_kernel_conv_family(const KernelConvFamilyOptions& options);

} // namespace cokrig
