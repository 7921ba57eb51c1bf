#include "cokrig/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "cokrig/error.hpp"
#include "cokrig/kernels.hpp"
#include "cokrig/rng.hpp"

namespace cokrig {

std::string_view to_string(Predictand p) { return p == Predictand::Y ? "Y" : "W"; }

Predictand parse_predictand(std::string_view s) {
    if (s == "Y" || s == "y") return Predictand::Y;
    if (s == "W" || s == "w") return Predictand::W;
    throw InputError("unknown predictand '" + std::string(s) + "' (expected Y or W)");
}

double target_data_cov(const HierarchicalModel& m, Predictand p, std::size_t q, const Location& s0, std::size_t r,
                       const Location& u) {
    return p == Predictand::Y ? m.latent_cov(q, s0, r, u) : m.smooth()(q, s0, r, u);
}

double target_cov(const HierarchicalModel& m, Predictand p, std::size_t q, const Location& s, const Location& u) {
    return p == Predictand::Y ? m.latent_cov(q, s, q, u) : m.smooth()(q, s, q, u);
}

namespace {

void check_target(const HierarchicalModel& m, const MultivariateDataset& data, std::span<const double> means,
                  const PredictionTarget& target) {
    if (target.variable >= m.variables()) {
        throw InputError("unknown target variable " + std::to_string(target.variable + 1));
    }
    if (data.variables() != m.variables()) throw InputError("dataset and model disagree on variable count");
    if (means.size() != m.variables()) throw InputError("need one mean per variable");
    if (target.locations.empty()) throw InputError("no target locations");
}

Eigen::VectorXd stacked_means(const MultivariateDataset& data, std::span<const double> means) {
    Eigen::VectorXd mu(static_cast<Eigen::Index>(data.total_size()));
    Eigen::Index k = 0;
    for (std::size_t q = 0; q < data.variables(); ++q) {
        for (std::size_t i = 0; i < data[q].size(); ++i) mu(k++) = means[q];
    }
    return mu;
}

} // namespace

PredictionSet cokrige(const HierarchicalModel& m, const MultivariateDataset& data, std::span<const double> means,
                      const PredictionTarget& target) {
    check_target(m, data, means, target);
    const auto locations = data.location_sets();
    Eigen::MatrixXd cz = data_covariance(m, locations);
    if (!cz.allFinite()) throw NumericalError("data covariance has non-finite entries");
    Eigen::LLT<Eigen::MatrixXd> llt(cz);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * std::max(cz.diagonal().mean(), 1.0);
        cz.diagonal().array() += jitter;
        llt.compute(cz);
        if (llt.info() != Eigen::Success) {
            const auto cert = check_nnd(cz, 0.0);
            throw NumericalError("data covariance is singular (min eigenvalue " +
                                 std::to_string(cert.min_eigenvalue) + ")");
        }
    }

    const Eigen::VectorXd resid = data.stacked_values() - stacked_means(data, means);
    const Eigen::VectorXd alpha = llt.solve(resid);

    // Cross-covariances: rows are observations, columns targets.
    const auto n = cz.rows();
    const auto t = static_cast<Eigen::Index>(target.locations.size());
    std::vector<std::pair<std::size_t, Location>> obs;
    obs.reserve(static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < data.variables(); ++r) {
        for (const auto& u : data[r].locations()) obs.emplace_back(r, u);
    }
    Eigen::MatrixXd c(n, t);
    kernels::omp::fill_matrix(c, [&](std::size_t i, std::size_t j) {
        return target_data_cov(m, target.predictand, target.variable, target.locations[j], obs[i].first,
                               obs[i].second);
    });
    const Eigen::MatrixXd lc = llt.matrixL().solve(c);

    PredictionSet out;
    out.target = target;
    out.means.resize(static_cast<std::size_t>(t));
    out.variances.resize(static_cast<std::size_t>(t));
    const double mu = means[target.variable];
    for (Eigen::Index j = 0; j < t; ++j) {
        const auto& s0 = target.locations[static_cast<std::size_t>(j)];
        const double c0 = target_cov(m, target.predictand, target.variable, s0, s0);
        double v = c0 - lc.col(j).squaredNorm();
        if (v < 0.0) {
            if (v < -1e-12 * std::max(1.0, c0)) {
                throw NumericalError("negative predictive variance " + std::to_string(v) + " at target " +
                                     std::to_string(j + 1));
            }
            v = 0.0;
            ++out.clamped;
        }
        out.means[static_cast<std::size_t>(j)] = mu + c.col(j).dot(alpha);
        out.variances[static_cast<std::size_t>(j)] = v;
    }
    return out;
}

JointSystem joint_target_system(const HierarchicalModel& m, const MultivariateDataset& data,
                                std::span<const double> means, const PredictionTarget& target) {
    check_target(m, data, means, target);
    const auto locations = data.location_sets();
    const auto t = static_cast<Eigen::Index>(target.locations.size());
    const auto n = static_cast<Eigen::Index>(data.total_size());
    JointSystem sys;
    sys.targets = target.locations.size();
    sys.cov.resize(t + n, t + n);
    sys.cov.bottomRightCorner(n, n) = data_covariance(m, locations);
    for (Eigen::Index i = 0; i < t; ++i) {
        const auto& si = target.locations[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < t; ++j) {
            sys.cov(i, j) = target_cov(m, target.predictand, target.variable, si, target.locations[static_cast<std::size_t>(j)]);
        }
        Eigen::Index k = t;
        for (std::size_t r = 0; r < data.variables(); ++r) {
            for (const auto& u : data[r].locations()) {
                sys.cov(i, k) = sys.cov(k, i) = target_data_cov(m, target.predictand, target.variable, si, r, u);
                ++k;
            }
        }
    }
    sys.mean.resize(t + n);
    sys.mean.head(t).setConstant(means[target.variable]);
    sys.mean.tail(n) = stacked_means(data, means);
    return sys;
}

namespace {

// Gauss-Jordan inverse with partial pivoting.
Eigen::MatrixXd gauss_jordan_inverse(Eigen::MatrixXd a) {
    const auto n = a.rows();
    Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        }
        if (std::abs(a(pivot, col)) <= 1e-15 * scale) throw NumericalError("singular block in conditioning oracle");
        if (pivot != col) {
            a.row(pivot).swap(a.row(col));
            inv.row(pivot).swap(inv.row(col));
        }
        const double d = a(col, col);
        a.row(col) /= d;
        inv.row(col) /= d;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            a.row(r) -= f * a.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return inv;
}

} // namespace

ConditionalMoments gaussian_conditioning_oracle(const Eigen::MatrixXd& joint, std::size_t targets,
                                                const Eigen::VectorXd& observed, const Eigen::VectorXd& means) {
    const auto total = joint.rows();
    const auto t = static_cast<Eigen::Index>(targets);
    if (joint.cols() != total || means.size() != total || observed.size() != total - t || t == 0 || t >= total) {
        throw InputError("conditioning oracle: inconsistent dimensions");
    }
    const Eigen::MatrixXd precision = gauss_jordan_inverse(joint);
    const Eigen::MatrixXd cond_cov = gauss_jordan_inverse(precision.topLeftCorner(t, t));
    const Eigen::VectorXd dev = observed - means.tail(total - t);
    const Eigen::VectorXd shift = cond_cov * (precision.topRightCorner(t, total - t) * dev);
    ConditionalMoments out;
    for (Eigen::Index i = 0; i < t; ++i) {
        out.means.push_back(means(i) - shift(i));
        out.variances.push_back(cond_cov(i, i));
    }
    return out;
}

double crps_gaussian(double mu, double sigma, double z) {
    if (!(sigma >= 0.0)) throw InputError("CRPS needs a nonnegative sigma");
    if (sigma == 0.0) return std::abs(z - mu);
    const double u = (z - mu) / sigma;
    const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    return sigma * (u * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(std::numbers::pi));
}

std::vector<std::vector<std::size_t>> assign_folds(const MultivariateDataset& data, std::size_t k,
                                                   std::uint64_t seed) {
    if (k < 2) throw InputError("cross-validation needs at least 2 folds");
    if (data.total_size() < k) {
        throw InputError("too few observations (" + std::to_string(data.total_size()) + ") for " + std::to_string(k) +
                         " folds");
    }
    std::vector<std::vector<std::size_t>> folds(data.variables());
    std::size_t next = 0;
    for (std::size_t q = 0; q < data.variables(); ++q) {
        const auto n = data[q].size();
        if (n < 2) throw InputError("variable " + std::to_string(q + 1) + " has too few observations for cross-validation");
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        auto engine = make_engine(derive_seed(seed, q));
        for (std::size_t i = n - 1; i > 0; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(order[i], order[pick(engine)]);
        }
        folds[q].resize(n);
        for (std::size_t i = 0; i < n; ++i) folds[q][order[i]] = (next + i) % k;
        next += n;
    }
    return folds;
}

ValidationReport cross_validate(const MultivariateDataset& data, const ModelFamily& family, const ParameterSet& init,
                                const ValidationSettings& settings) {
    const auto p = data.variables();
    if (p != family.variables()) throw InputError("dataset and model disagree on variable count");
    const NoiseSplit split =
        settings.split.eps_fraction.empty() ? NoiseSplit::all_measurement_error(p) : settings.split;

    ValidationReport report;
    report.k = settings.folds;
    report.seed = settings.seed;
    report.folds = assign_folds(data, settings.folds, settings.seed);
    std::vector<double> sq(p, 0.0), crps(p, 0.0);
    report.heldout_per_variable.assign(p, 0);

    for (std::size_t f = 0; f < settings.folds; ++f) {
        std::vector<VariableSeries> train;
        std::vector<std::vector<std::size_t>> held(p);
        for (std::size_t q = 0; q < p; ++q) {
            std::vector<Location> locs;
            std::vector<double> vals;
            for (std::size_t i = 0; i < data[q].size(); ++i) {
                if (report.folds[q][i] == f) {
                    held[q].push_back(i);
                } else {
                    locs.push_back(data[q].locations()[i]);
                    vals.push_back(data[q].values()[i]);
                }
            }
            train.emplace_back(q, std::move(locs), std::move(vals));
        }
        const MultivariateDataset training(std::move(train));
        if (settings.on_training) settings.on_training(f, training);

        FitSettings fs = settings.fit;
        fs.optimizer.seed = derive_seed(settings.seed, 1000 + f);
        const auto fit = fit_ml(training, family, init, fs);
        const auto model = family.build(fit.params(), split);

        for (std::size_t q = 0; q < p; ++q) {
            if (held[q].empty()) continue;
            std::vector<Location> locs;
            for (auto i : held[q]) locs.push_back(data[q].locations()[i]);
            const PredictionTarget target{Predictand::Y, q, LocationSet(std::move(locs))};
            const auto pred = cokrige(model, training, fit.means, target);
            const double eps = model.noise().sigma_eps(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
            for (std::size_t j = 0; j < held[q].size(); ++j) {
                const double z = data[q].values()[held[q][j]];
                const double err = z - pred.means[j];
                sq[q] += err * err;
                crps[q] += crps_gaussian(pred.means[j], std::sqrt(pred.variances[j] + eps), z);
            }
            report.heldout_per_variable[q] += held[q].size();
        }
    }
    for (std::size_t q = 0; q < p; ++q) {
        const auto n = static_cast<double>(report.heldout_per_variable[q]);
        report.rmse.push_back(std::sqrt(sq[q] / n));
        report.mean_crps.push_back(crps[q] / n);
        report.n_heldout += report.heldout_per_variable[q];
    }
    return report;
}

} // namespace cokrig
