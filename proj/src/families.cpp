#include "cokrig/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cokrig/error.hpp"

namespace cokrig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Parameter positive(std::string name, double value) { return {std::move(name), value, 0.0, kInf, true}; }
Parameter unbounded(std::string name, double value) { return {std::move(name), value, -kInf, kInf, true}; }

void add_nuggets(std::vector<Parameter>& out, std::size_t p) {
    for (std::size_t q = 0; q < p; ++q) out.push_back(positive(element_name("nugget", q), 0.1));
}

class LmcFamily final : public ModelFamily {
public:
    explicit LmcFamily(LmcFamilyOptions o) : o_(o) {
        if (o_.variables == 0) throw InputError("LMC needs at least one variable");
        if (o_.regions > 0 && !(o_.box.xmax > o_.box.xmin && o_.box.ymax > o_.box.ymin)) {
            throw InputError("regional LMC needs a nondegenerate bounding box");
        }
    }

    std::string name() const override { return o_.regions > 0 ? "lmc_regional" : "lmc"; }
    std::size_t variables() const override { return o_.variables; }

    ParameterSet defaults() const override {
        const auto p = o_.variables;
        std::vector<Parameter> out;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                out.push_back(i == j ? positive(element_name("a", i, j), 1.0) : unbounded(element_name("a", i, j), 0.0));
            }
        }
        for (std::size_t k = 0; k < p; ++k) out.push_back(positive(element_name("range", k), 1.0));
        add_nuggets(out, p);
        for (std::size_t i = 0; i < p * o_.regions * o_.regions; ++i) {
            out.push_back({element_name("log_scale", i), 0.0, -3.0, 3.0, true});
        }
        return ParameterSet(std::move(out));
    }

    ModelPtr smooth(const ParameterSet& params) const override {
        const auto p = o_.variables;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = params[element_name("a", i, j)];
            }
        }
        std::vector<CorrelationFunction> factors;
        for (std::size_t k = 0; k < p; ++k) factors.push_back({o_.correlation, params[element_name("range", k)], o_.nu});
        auto base = std::make_shared<const KernelConvModel>(make_lmc(a, std::move(factors)));
        if (o_.regions == 0) return base;

        auto scales = params.group_values("log_scale");
        const auto regions = o_.regions;
        const Bounds box = o_.box;
        auto cell = [regions](double v, double lo, double hi) {
            const auto i = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(regions)));
            return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(regions) - 1));
        };
        auto log_scale = [scales = std::move(scales), regions, box, cell](std::size_t q, const Location& s) {
            const auto ix = cell(s.x, box.xmin, box.xmax), iy = cell(s.y, box.ymin, box.ymax);
            return scales[q * regions * regions + iy * regions + ix];
        };
        return std::make_shared<const ModulatedModel>(std::move(base), std::move(log_scale));
    }

private:
    LmcFamilyOptions o_;
};

class ConditionalFamily final : public ModelFamily {
public:
    explicit ConditionalFamily(ConditionalFamilyOptions o) : o_(std::move(o)) {
        if (o_.distance_decay && !o_.grid) throw InputError("distance-decay B needs a grid");
    }

    std::string name() const override { return "conditional"; }
    std::size_t variables() const override { return 2; }

    ParameterSet defaults() const override {
        std::vector<Parameter> out;
        for (std::size_t q = 0; q < 2; ++q) out.push_back(positive(element_name("sill", q), 1.0));
        for (std::size_t q = 0; q < 2; ++q) out.push_back(positive(element_name("range", q), 1.0));
        out.push_back(unbounded(element_name("b0", 0), 0.5));
        if (o_.distance_decay) out.push_back(positive(element_name("b_range", 0), 1.0));
        add_nuggets(out, 2);
        return ParameterSet(std::move(out));
    }

    ModelPtr smooth(const ParameterSet& params) const override {
        CovarianceFunction marginal{params["sill[1]"], {o_.correlation, params["range[1]"], o_.nu}};
        CovarianceFunction conditional{params["sill[2]"], {o_.correlation, params["range[2]"], o_.nu}};
        BOperator b = ScaledIdentityB{params["b0[1]"]};
        std::optional<LocationSet> grid;
        if (o_.distance_decay) {
            b = DistanceDecayB{params["b0[1]"], params["b_range[1]"]};
            grid = o_.grid;
        }
        return std::make_shared<const ConditionalModel>(marginal, conditional, std::move(b), std::move(grid),
                                                        o_.order);
    }

private:
    ConditionalFamilyOptions o_;
};

class SreFamily final : public ModelFamily {
public:
    explicit SreFamily(SreFamilyOptions o) : o_(std::move(o)) {
        BasisSet{o_.centers, o_.scale[0]}.validate();
        BasisSet{o_.centers, o_.scale[1]}.validate();
        const auto b = static_cast<Eigen::Index>(o_.centers.size());
        dist_.resize(b, b);
        for (Eigen::Index i = 0; i < b; ++i) {
            for (Eigen::Index j = 0; j < b; ++j) {
                dist_(i, j) = distance(o_.centers[static_cast<std::size_t>(i)], o_.centers[static_cast<std::size_t>(j)]);
            }
        }
    }

    std::string name() const override { return "sre"; }
    std::size_t variables() const override { return 2; }

    ParameterSet defaults() const override {
        std::vector<Parameter> out;
        for (std::size_t q = 0; q < 2; ++q) out.push_back(positive(element_name("sill", q), 1.0));
        out.push_back({element_name("corr", 0), 0.0, -1.0, 1.0, true});
        out.push_back(positive(element_name("k_range", 0), 1.0));
        add_nuggets(out, 2);
        return ParameterSet(std::move(out));
    }

    ModelPtr smooth(const ParameterSet& params) const override {
        const double s1 = params["sill[1]"], s2 = params["sill[2]"], c = params["corr[1]"];
        const double k_range = params["k_range[1]"];
        if (!(k_range > 0.0)) throw InputError("k_range must be positive");
        const Eigen::MatrixXd r = (-dist_.array() / k_range).exp().matrix();
        const auto b = r.rows();
        Eigen::MatrixXd k(2 * b, 2 * b);
        const double cross = c * std::sqrt(s1 * s2);
        k.topLeftCorner(b, b) = s1 * r;
        k.topRightCorner(b, b) = cross * r;
        k.bottomLeftCorner(b, b) = cross * r;
        k.bottomRightCorner(b, b) = s2 * r;
        return std::make_shared<const SreModel>(BasisSet{o_.centers, o_.scale[0]}, BasisSet{o_.centers, o_.scale[1]},
                                                std::move(k));
    }

private:
    SreFamilyOptions o_;
    Eigen::MatrixXd dist_;
};

class KernelConvFamily final : public ModelFamily {
public:
    explicit KernelConvFamily(KernelConvFamilyOptions o) : o_(std::move(o)) {
        const auto p = o_.variables;
        if (p == 0) throw InputError("kernel convolution needs at least one variable");
        if (o_.widths.empty()) o_.widths.assign(p * p, 0.0);
        if (o_.widths.size() != p * p) throw InputError("kernel widths must have p x p entries");
    }

    std::string name() const override { return "kernel_conv"; }
    std::size_t variables() const override { return o_.variables; }

    ParameterSet defaults() const override {
        const auto p = o_.variables;
        std::vector<Parameter> out;
        for (std::size_t q = 0; q < p; ++q) {
            for (std::size_t k = 0; k < p; ++k) out.push_back(unbounded(element_name("a", q, k), q == k ? 1.0 : 0.0));
        }
        for (std::size_t k = 0; k < p; ++k) out.push_back(positive(element_name("range", k), 1.0));
        for (const char* g : {"shift_x", "shift_y"}) {
            for (std::size_t q = 0; q < p; ++q) {
                for (std::size_t k = 0; k < p; ++k) out.push_back(unbounded(element_name(g, q, k), 0.0));
            }
        }
        add_nuggets(out, p);
        return ParameterSet(std::move(out));
    }

    ModelPtr smooth(const ParameterSet& params) const override {
        const auto p = o_.variables;
        std::vector<CorrelationFunction> factors;
        for (std::size_t k = 0; k < p; ++k) factors.push_back({o_.correlation, params[element_name("range", k)], o_.nu});
        std::vector<Kernel> kernels;
        for (std::size_t q = 0; q < p; ++q) {
            for (std::size_t k = 0; k < p; ++k) {
                kernels.push_back({params[element_name("a", q, k)], o_.widths[q * p + k],
                                   params[element_name("shift_x", q, k)], params[element_name("shift_y", q, k)]});
            }
        }
        return std::make_shared<const KernelConvModel>(std::move(factors), std::move(kernels), o_.quadrature);
    }

private:
    KernelConvFamilyOptions o_;
};

} // namespace

Eigen::VectorXd ModelFamily::nuggets(const ParameterSet& params) const {
    auto v = params.group_values("nugget");
    if (v.size() != variables()) throw InputError("nugget group must have one entry per variable");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

HierarchicalModel ModelFamily::build(const ParameterSet& params, const NoiseSplit& split) const {
    const auto p = variables();
    const auto n = static_cast<Eigen::Index>(p);
    const Eigen::VectorXd total = nuggets(params);
    if (split.eps_fraction.size() != p) throw InputError("noise split must have one fraction per variable");
    if (!split.eps_corr.empty() && split.eps_corr.size() != p * p) {
        throw InputError("measurement-error correlation must be p x p");
    }
    MicroScaleSpec micro{Eigen::VectorXd(n)};
    MeasurementErrorSpec noise{Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index q = 0; q < n; ++q) {
        const double f = split.eps_fraction[static_cast<std::size_t>(q)];
        if (!(f >= 0.0 && f <= 1.0)) throw InputError("noise split fractions must lie in [0, 1]");
        noise.sigma_eps(q, q) = f * total(q);
        micro.sigma_xi(q) = total(q) - noise.sigma_eps(q, q);
    }
    if (!split.eps_corr.empty()) {
        for (Eigen::Index q = 0; q < n; ++q) {
            for (Eigen::Index r = 0; r < n; ++r) {
                if (q == r) continue;
                const double c = split.eps_corr[static_cast<std::size_t>(q * n + r)];
                noise.sigma_eps(q, r) = c * std::sqrt(noise.sigma_eps(q, q) * noise.sigma_eps(r, r));
            }
        }
    }
    return HierarchicalModel(smooth(params), std::move(micro), std::move(noise));
}

Bounds bounding_box(const MultivariateDataset& data) {
    Bounds b{kInf, -kInf, kInf, -kInf};
    for (const auto& s : data.series()) {
        for (const auto& loc : s.locations()) {
            b.xmin = std::min(b.xmin, loc.x);
            b.xmax = std::max(b.xmax, loc.x);
            b.ymin = std::min(b.ymin, loc.y);
            b.ymax = std::max(b.ymax, loc.y);
        }
    }
    return b;
}

FamilyPtr make_lmc_family(const LmcFamilyOptions& options) { return std::make_shared<const LmcFamily>(options); }
FamilyPtr make_conditional_family(const ConditionalFamilyOptions& options) {
    return std::make_shared<const ConditionalFamily>(options);
}
FamilyPtr make_sre_family(const SreFamilyOptions& options) { return std::make_shared<const SreFamily>(options); }
FamilyPtr make_kernel_conv_family(const KernelConvFamilyOptions& options) {
    return std::make_shared<const KernelConvFamily>(options);
}

} // namespace cokrig
