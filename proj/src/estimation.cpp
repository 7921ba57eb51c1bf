#include "cokrig/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "cokrig/error.hpp"
#include "cokrig/kernels.hpp"

namespace cokrig {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Pairs per bin kept for model averaging (evenly strided).
constexpr std::size_t kModelPairsPerBin = 256;

} // namespace

// ---------------------------------------------------------------------------
// Lag bins

LagBins LagBins::uniform(double max_lag, std::size_t count) {
    if (!(max_lag > 0.0) || !std::isfinite(max_lag)) throw InputError("max_lag must be positive and finite");
    if (count == 0) throw InputError("bin count must be positive");
    LagBins b;
    b.edges.resize(count + 1);
    for (std::size_t k = 0; k <= count; ++k) b.edges[k] = max_lag * static_cast<double>(k) / static_cast<double>(count);
    b.edges.back() = max_lag;
    return b;
}

std::size_t LagBins::total_bins() const { return 1 + (directional ? 2 : 1) * distance_bins(); }

void LagBins::validate() const {
    if (edges.size() < 2) throw InputError("lag bins need at least two edges");
    if (edges.front() != 0.0) throw InputError("lag bin edges must start at 0");
    for (std::size_t k = 1; k < edges.size(); ++k) {
        if (!(edges[k] > edges[k - 1]) || !std::isfinite(edges[k])) {
            throw InputError("lag bin edges must be finite and strictly increasing");
        }
    }
    if (directional) {
        const double t = directional->tolerance;
        if (!(t > 0.0 && t <= std::numbers::pi / 2) || !std::isfinite(directional->axis_angle)) {
            throw InputError("directional tolerance must lie in (0, pi/2]");
        }
    }
}

std::optional<std::size_t> LagBins::bin_of(double hx, double hy) const {
    if (hx == 0.0 && hy == 0.0) return 0;
    double d = 0.0;
    bool negative = false;
    if (directional) {
        const double c = std::cos(directional->axis_angle), s = std::sin(directional->axis_angle);
        const double along = hx * c + hy * s;
        const double across = -hx * s + hy * c;
        if (along == 0.0 || std::abs(across) > std::abs(along) * std::tan(directional->tolerance)) return std::nullopt;
        d = std::abs(along);
        negative = along < 0.0;
    } else {
        d = std::hypot(hx, hy);
    }
    if (!(d < edges.back())) return std::nullopt;
    const auto it = std::upper_bound(edges.begin(), edges.end(), d);
    const auto k = static_cast<std::size_t>(it - edges.begin()); // 1..m
    return negative ? distance_bins() + k : k;
}

double LagBins::center(std::size_t id) const {
    if (id == 0) return 0.0;
    const auto m = distance_bins();
    const bool negative = id > m;
    const auto k = negative ? id - m : id;
    const double c = 0.5 * (edges[k - 1] + edges[k]);
    return negative ? -c : c;
}

std::size_t EmpiricalSummary::nonempty_bins() const {
    return static_cast<std::size_t>(std::count_if(pair_counts.begin(), pair_counts.end(), [](auto c) { return c > 0; }));
}

// ---------------------------------------------------------------------------
// Empirical summaries

namespace {

EmpiricalSummary summarize(const MultivariateDataset& data, std::size_t q, std::size_t r, const LagBins& bins,
                           SummaryKind kind) {
    if (q >= data.variables() || r >= data.variables()) throw InputError("unknown variable index in summary pair");
    bins.validate();
    for (auto v : {q, r}) {
        if (data[v].size() < 2) throw InputError("summary needs at least two observations per variable");
    }
    const std::size_t lo = std::min(q, r), hi = std::max(q, r);
    auto centered = [&](std::size_t v) {
        std::vector<double> out(data[v].values());
        const double mean = data[v].mean();
        for (auto& x : out) x -= mean;
        return out;
    };
    const auto va = centered(lo);
    const auto vb = lo == hi ? va : centered(hi);
    const auto& la = data[lo].locations().points();
    const auto& lb = data[hi].locations().points();

    kernels::BinningProblem problem;
    problem.a = {la, va};
    problem.b = {lb, vb};
    problem.same_series = lo == hi;
    problem.include_self = kind == SummaryKind::empirical_cross_cov;
    problem.negate_lag = q > r;
    problem.statistic = kind == SummaryKind::empirical_cross_cov ? kernels::PairStatistic::cross_product
                                                                 : kernels::PairStatistic::half_squared_difference;
    problem.bins = &bins;
    const auto binned = kernels::omp::bin_pairs(problem);

    std::vector<std::size_t> order;
    const auto m = bins.distance_bins();
    if (bins.directional) {
        for (std::size_t k = 2 * m; k > m; --k) order.push_back(k);
    }
    for (std::size_t k = 0; k <= m; ++k) order.push_back(k);

    EmpiricalSummary out;
    out.kind = kind;
    out.q = q;
    out.r = r;
    for (auto id : order) {
        const auto count = binned.counts[id];
        out.bin_centers.push_back(bins.center(id));
        out.pair_counts.push_back(count);
        out.values.push_back(count > 0 ? binned.sums[id] / static_cast<double>(count) : kNaN);
        out.mean_lag.push_back(count > 0 ? binned.lag_sums[id] / static_cast<double>(count) : kNaN);
        const auto& all = binned.pairs[id];
        std::vector<LagPair> kept;
        const std::size_t take = std::min(all.size(), kModelPairsPerBin);
        kept.reserve(take);
        for (std::size_t t = 0; t < take; ++t) {
            const auto& [i, j] = all[t * all.size() / take];
            const Location& sa = la[i];
            const Location& sb = lb[j];
            kept.push_back(q > r ? LagPair{sb, sa} : LagPair{sa, sb});
        }
        out.pairs.push_back(std::move(kept));
    }
    if (out.nonempty_bins() == 0) throw InputError("all lag bins are empty");
    return out;
}

} // namespace

EmpiricalSummary empirical_cross_cov(const MultivariateDataset& data, std::size_t q, std::size_t r,
                                     const LagBins& bins) {
    return summarize(data, q, r, bins, SummaryKind::empirical_cross_cov);
}

EmpiricalSummary pseudo_cross_variogram(const MultivariateDataset& data, std::size_t q, std::size_t r,
                                        const LagBins& bins) {
    return summarize(data, q, r, bins, SummaryKind::pseudo_cross_variogram);
}

double model_bin_value(const HierarchicalModel& m, const EmpiricalSummary& summary, std::size_t bin) {
    const auto& pairs = summary.pairs.at(bin);
    if (pairs.empty()) return kNaN;
    const auto q = summary.q, r = summary.r;
    double total = 0.0;
    for (const auto& pr : pairs) {
        const double cross = m.data_cov(q, pr.s, r, pr.u);
        if (summary.kind == SummaryKind::empirical_cross_cov) {
            total += cross;
        } else {
            total += 0.5 * (m.data_cov(q, pr.s, q, pr.s) + m.data_cov(r, pr.u, r, pr.u)) - cross;
        }
    }
    return total / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Fitting

FitResult::FitResult(ParameterSet params, double objective, std::optional<double> loglik, std::size_t n,
                     bool converged, int iterations)
    : params_(std::move(params)), objective_(objective), loglik_(loglik), k_(params_.free_count()), n_(n),
      converged_(converged), iterations_(iterations) {
    if (k_ == 0) throw InputError("a fit needs at least one free parameter");
}

namespace {

NoiseSplit split_for(const ModelFamily& family, const FitSettings& settings) {
    return settings.split ? *settings.split : NoiseSplit::all_measurement_error(family.variables());
}

std::vector<std::string> boundary_params(const ParameterSet& params) {
    std::vector<std::string> out;
    for (const auto& p : params.items()) {
        if (!p.free) continue;
        const bool low = std::isfinite(p.lower) && p.value - p.lower <= 1e-6 * std::max(1.0, std::abs(p.lower));
        const bool high = std::isfinite(p.upper) && p.upper - p.value <= 1e-6 * std::max(1.0, std::abs(p.upper));
        if (low || high) out.push_back(p.name);
    }
    return out;
}

void check_init(const ParameterSet& init) {
    for (const auto& p : init.items()) {
        if (!std::isfinite(p.value) || p.value < p.lower || p.value > p.upper) {
            throw InputError("initial value of " + p.name + " lies outside its bounds");
        }
    }
}

double wls_value(std::span<const EmpiricalSummary> summaries, const HierarchicalModel& m, double floor) {
    double total = 0.0;
    for (const auto& s : summaries) {
        for (std::size_t b = 0; b < s.values.size(); ++b) {
            if (s.pair_counts[b] == 0) continue;
            const double model = model_bin_value(m, s, b);
            const double diff = s.values[b] - model;
            total += static_cast<double>(s.pair_counts[b]) * diff * diff / std::max(model * model, floor);
        }
    }
    return total;
}

} // namespace

double wls_objective(std::span<const EmpiricalSummary> summaries, const ModelFamily& family,
                     const ParameterSet& params, double floor) {
    const auto m = family.build(params, NoiseSplit::all_measurement_error(family.variables()));
    return wls_value(summaries, m, floor);
}

FitResult fit_wls(std::span<const EmpiricalSummary> summaries, const ModelFamily& family, const ParameterSet& init,
                  const FitSettings& settings) {
    std::size_t bins = 0;
    for (const auto& s : summaries) {
        if (s.q >= family.variables() || s.r >= family.variables()) throw InputError("summary variable out of range");
        bins += s.nonempty_bins();
    }
    if (bins == 0) throw InputError("WLS needs at least one nonempty bin");
    check_init(init);
    const auto split = split_for(family, settings);

    auto objective = [&](const Eigen::VectorXd& t) {
        try {
            const auto params = init.from_unconstrained(t);
            return wls_value(summaries, family.build(params, split), settings.wls_floor);
        } catch (const std::exception&) {
            return kRejectedValue;
        }
    };
    const auto opt = minimize(objective, init.to_unconstrained(), settings.optimizer);
    auto params = init.from_unconstrained(opt.x);
    FitResult fit(params, opt.value, std::nullopt, bins, opt.converged, opt.iterations);
    fit.at_boundary = boundary_params(params);
    fit.trace = opt.trace;
    return fit;
}

std::optional<LikelihoodValue> profile_loglik(const HierarchicalModel& m, const MultivariateDataset& data) {
    const auto locations = data.location_sets();
    const Eigen::MatrixXd c = data_covariance(m, locations);
    if (!c.allFinite()) return std::nullopt;
    const Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) return std::nullopt;

    const auto n = c.rows();
    const auto p = static_cast<Eigen::Index>(data.variables());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
    const auto offsets = stacked_offsets(locations);
    for (Eigen::Index q = 0; q < p; ++q) {
        const auto uq = static_cast<std::size_t>(q);
        x.col(q).segment(static_cast<Eigen::Index>(offsets[uq]), static_cast<Eigen::Index>(data[uq].size())).setOnes();
    }
    const auto l = llt.matrixL();
    const Eigen::MatrixXd lx = l.solve(x);
    const Eigen::VectorXd lz = l.solve(data.stacked_values());
    const Eigen::VectorXd beta = (lx.transpose() * lx).ldlt().solve(lx.transpose() * lz);
    const Eigen::VectorXd resid = lz - lx * beta;
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double ll = -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + logdet + resid.squaredNorm());
    if (!std::isfinite(ll) || !beta.allFinite()) return std::nullopt;
    return LikelihoodValue{ll, std::vector<double>(beta.data(), beta.data() + beta.size())};
}

FitResult fit_ml(const MultivariateDataset& data, const ModelFamily& family, const ParameterSet& init,
                 const FitSettings& settings) {
    if (data.variables() != family.variables()) throw InputError("dataset and model disagree on variable count");
    if (data.total_size() > settings.dense_cap) {
        throw InputError("dataset has " + std::to_string(data.total_size()) + " observations, above the dense cap of " +
                         std::to_string(settings.dense_cap));
    }
    check_init(init);
    const auto split = split_for(family, settings);

    auto objective = [&](const Eigen::VectorXd& t) {
        try {
            const auto value = profile_loglik(family.build(init.from_unconstrained(t), split), data);
            return value ? -value->loglik : kRejectedValue;
        } catch (const std::exception&) {
            return kRejectedValue;
        }
    };
    const auto opt = minimize(objective, init.to_unconstrained(), settings.optimizer);
    auto params = init.from_unconstrained(opt.x);
    const auto value = profile_loglik(family.build(params, split), data);
    if (!value) throw NumericalError("covariance at the fitted parameters is not positive definite");
    FitResult fit(params, -value->loglik, value->loglik, data.total_size(), opt.converged, opt.iterations);
    fit.means = value->means;
    fit.at_boundary = boundary_params(params);
    fit.trace = opt.trace;
    return fit;
}

InformationCriteria information_criteria(const FitResult& fit) {
    if (!fit.loglik()) throw InputError("information criteria need a log-likelihood");
    const double k = static_cast<double>(fit.k()), n = static_cast<double>(fit.n());
    InformationCriteria ic;
    ic.aic = -2.0 * *fit.loglik() + 2.0 * k;
    if (fit.n() > fit.k() + 1) ic.aicc = ic.aic + 2.0 * k * (k + 1.0) / (n - k - 1.0);
    return ic;
}

} // namespace cokrig
