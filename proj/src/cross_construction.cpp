#include "cokrig/cross_construction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "cokrig/error.hpp"
#include "cokrig/kernels.hpp"
#include "cokrig/rng.hpp"

namespace cokrig {

void CrossCovarianceModel::fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                                      Eigen::Ref<Eigen::MatrixXd> out) const {
    kernels::omp::fill_block(*this, q, a, r, b, out);
}

namespace {

void check_variable(const CrossCovarianceModel& m, std::size_t q) {
    if (q >= m.variables()) {
        throw InputError("variable index " + std::to_string(q + 1) + " out of range for a " +
                         std::to_string(m.variables()) + "-variable model");
    }
}

std::string describe(const NndCertificate& c) {
    std::ostringstream os;
    os << "min eigenvalue " << c.min_eigenvalue << ", trace " << c.trace << ", tol " << c.tol_used;
    return os.str();
}

} // namespace

// --- conditional -----------------------------------------------------------

Eigen::MatrixXd realize_b(const BOperator& b, const LocationSet& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd out;
    if (const auto* id = std::get_if<ScaledIdentityB>(&b)) {
        out = id->b0 * Eigen::MatrixXd::Identity(n, n);
    } else if (const auto* decay = std::get_if<DistanceDecayB>(&b)) {
        if (!(decay->range > 0.0)) throw InputError("distance-decay B needs a positive range");
        out.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                out(i, j) = std::exp(-distance(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]) /
                                     decay->range);
            }
            out.row(i) *= decay->b0 / out.row(i).sum();
        }
    } else {
        out = std::get<ExplicitB>(b).matrix;
        if (out.rows() != n || out.cols() != n) {
            throw InputError("explicit B must be " + std::to_string(n) + " x " + std::to_string(n));
        }
    }
    if (!out.allFinite()) throw NumericalError("B realization has non-finite entries");
    return out;
}

Eigen::MatrixXd conditional_joint_matrix(const Eigen::MatrixXd& sigma11, const Eigen::MatrixXd& sigma21,
                                         const Eigen::MatrixXd& b) {
    const auto n = sigma11.rows();
    if (sigma11.cols() != n || sigma21.rows() != n || sigma21.cols() != n || b.rows() != n || b.cols() != n) {
        throw InputError("conditional_joint_matrix: dimension mismatch");
    }
    if (!b.allFinite()) throw NumericalError("B has non-finite entries");
    const Eigen::MatrixXd bs = b * sigma11; // cov(Z2, Z1)
    Eigen::MatrixXd joint(2 * n, 2 * n);
    joint.topLeftCorner(n, n) = sigma11;
    joint.topRightCorner(n, n) = bs.transpose();
    joint.bottomLeftCorner(n, n) = bs;
    joint.bottomRightCorner(n, n) = sigma21 + bs * b.transpose();
    return 0.5 * (joint + joint.transpose());
}

ConditionalModel::ConditionalModel(CovarianceFunction marginal, CovarianceFunction conditional, BOperator b,
                                   std::optional<LocationSet> grid, std::array<std::size_t, 2> order)
    : marginal_(marginal), conditional_(conditional), b_(std::move(b)), grid_(std::move(grid)), order_(order) {
    marginal_.correlation.validate();
    conditional_.correlation.validate();
    if (!(marginal_.sigma2 >= 0.0) || !(conditional_.sigma2 >= 0.0)) {
        throw InputError("conditional model variances must be nonnegative");
    }
    if (!((order_[0] == 0 && order_[1] == 1) || (order_[0] == 1 && order_[1] == 0))) {
        throw InputError("condition order must be a permutation of (1, 2)");
    }
    if (const auto* id = std::get_if<ScaledIdentityB>(&b_)) {
        if (!std::isfinite(id->b0)) throw NumericalError("B has non-finite entries");
        return;
    }
    if (!grid_) throw InputError("conditional model: a grid is required for this B rule");
    const Eigen::MatrixXd s11 = eval_cov_matrix(marginal_, *grid_, *grid_);
    const Eigen::MatrixXd s21 = eval_cov_matrix(conditional_, *grid_, *grid_);
    grid_joint_ = conditional_joint_matrix(s11, s21, realize_b(b_, *grid_));
}

double ConditionalModel::operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const {
    check_variable(*this, q);
    check_variable(*this, r);
    const std::size_t rq = q == order_[0] ? 0 : 1;
    const std::size_t rr = r == order_[0] ? 0 : 1;
    if (const auto* id = std::get_if<ScaledIdentityB>(&b_)) {
        const double h = distance(s, u);
        const double c11 = marginal_(h);
        if (rq == 0 && rr == 0) return c11;
        if (rq != rr) return id->b0 * c11;
        return conditional_(h) + id->b0 * id->b0 * c11;
    }
    const auto n = grid_->size();
    const auto i = nearest_index(*grid_, s), j = nearest_index(*grid_, u);
    return grid_joint_(static_cast<Eigen::Index>(rq * n + i), static_cast<Eigen::Index>(rr * n + j));
}

double ConditionalModel::characteristic_length() const {
    return std::max(marginal_.correlation.range, conditional_.correlation.range);
}

namespace {

// Grid-based conditional blocks: snap each location once.
void fill_conditional_grid(const ConditionalModel& m, const Eigen::MatrixXd& grid_joint, std::size_t q,
                           const LocationSet& a, std::size_t r, const LocationSet& b,
                           Eigen::Ref<Eigen::MatrixXd> out) {
    const auto& grid = *m.grid();
    const auto n = grid.size();
    const std::size_t rq = q == m.order()[0] ? 0 : 1;
    const std::size_t rr = r == m.order()[0] ? 0 : 1;
    std::vector<std::size_t> ia(a.size()), ib(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ia[i] = rq * n + nearest_index(grid, a[i]);
    for (std::size_t j = 0; j < b.size(); ++j) ib[j] = rr * n + nearest_index(grid, b[j]);
    kernels::omp::fill_matrix(out, [&](std::size_t i, std::size_t j) {
        return grid_joint(static_cast<Eigen::Index>(ia[i]), static_cast<Eigen::Index>(ib[j]));
    });
}

} // namespace

void ConditionalModel::fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                                  Eigen::Ref<Eigen::MatrixXd> out) const {
    check_variable(*this, q);
    check_variable(*this, r);
    if (std::holds_alternative<ScaledIdentityB>(b_)) {
        kernels::omp::fill_block(*this, q, a, r, b, out);
    } else {
        fill_conditional_grid(*this, grid_joint_, q, a, r, b, out);
    }
}

CovMatrixBundle conditional_joint_cov(const ConditionalModel& m, const LocationSet& l1, const LocationSet& l2) {
    auto same_set = [](const LocationSet& x, const LocationSet& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!same_location(x[i], y[i])) return false;
        }
        return true;
    };
    if (!same_set(l1, l2)) throw InputError("conditional construction needs L1 = L2 (the common grid)");
    if (m.grid() && !same_set(*m.grid(), l1)) throw InputError("locations differ from the model's grid");

    const Eigen::MatrixXd s11 = eval_cov_matrix(m.marginal(), l1, l1);
    const Eigen::MatrixXd s21 = eval_cov_matrix(m.conditional(), l1, l1);
    for (const auto* s : {&s11, &s21}) {
        auto cert = check_nnd(*s, kBundleTolerance);
        if (!cert.pass) throw NumericalError("univariate covariance fails n.n.d.: " + describe(cert));
    }
    Eigen::MatrixXd joint = conditional_joint_matrix(s11, s21, realize_b(m.b_operator(), l1));
    if (m.order()[0] == 1) {
        // role order -> variable order
        const auto n = static_cast<Eigen::Index>(l1.size());
        Eigen::PermutationMatrix<Eigen::Dynamic> swap(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            swap.indices()(i) = static_cast<int>(i + n);
            swap.indices()(i + n) = static_cast<int>(i);
        }
        joint = swap * joint * swap.transpose();
    }
    return certify_bundle(std::move(joint), {l1, l2});
}

// --- SRE -------------------------------------------------------------------

NuggetFunction constant_nugget(double v) {
    if (!(v >= 0.0)) throw InputError("nugget must be nonnegative");
    return [v](const Location&) { return v; };
}

SreModel::SreModel(BasisSet basis1, BasisSet basis2, Eigen::MatrixXd k, NuggetFunction nugget1,
                   NuggetFunction nugget2)
    : basis1_(std::move(basis1)), basis2_(std::move(basis2)), k_(std::move(k)), nugget1_(std::move(nugget1)),
      nugget2_(std::move(nugget2)) {
    basis1_.validate();
    basis2_.validate();
    const auto b = static_cast<Eigen::Index>(basis1_.size() + basis2_.size());
    if (k_.rows() != b || k_.cols() != b) {
        throw InputError("SRE K must be " + std::to_string(b) + " x " + std::to_string(b));
    }
    if (!k_.allFinite()) throw InputError("SRE K has non-finite entries");
    const double scale = std::max(k_.cwiseAbs().maxCoeff(), 1.0);
    if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("SRE K is not symmetric");
    k_ = 0.5 * (k_ + k_.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
        throw InputError("SRE K is not positive definite");
    }
    if (!nugget1_ || !nugget2_) throw InputError("SRE nugget functions must be set");
}

Eigen::Block<const Eigen::MatrixXd> SreModel::k_block(std::size_t q, std::size_t r) const {
    const auto b1 = static_cast<Eigen::Index>(basis1_.size());
    const auto bq = static_cast<Eigen::Index>(basis(q).size()), br = static_cast<Eigen::Index>(basis(r).size());
    return k_.block(q == 0 ? 0 : b1, r == 0 ? 0 : b1, bq, br);
}

double SreModel::nugget(std::size_t q, const Location& s) const {
    const double v = q == 0 ? nugget1_(s) : nugget2_(s);
    if (!(v >= 0.0)) throw InputError("SRE nugget must be nonnegative");
    return v;
}

double SreModel::operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const {
    check_variable(*this, q);
    check_variable(*this, r);
    const Eigen::VectorXd sq = bisquare_basis(basis(q), s);
    const Eigen::VectorXd sr = bisquare_basis(basis(r), u);
    double c = sq.dot(k_block(q, r) * sr);
    if (q == r && same_location(s, u)) c += nugget(q, s);
    return c;
}

void SreModel::fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                          Eigen::Ref<Eigen::MatrixXd> out) const {
    check_variable(*this, q);
    check_variable(*this, r);
    const Eigen::MatrixXd sa = basis_matrix(basis(q), a);
    const Eigen::MatrixXd sb = basis_matrix(basis(r), b);
    out.noalias() = sa * k_block(q, r) * sb.transpose();
    if (q != r) return;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (same_location(a[i], b[j])) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += nugget(q, a[i]);
        }
    }
}

double SreModel::characteristic_length() const { return std::max(basis1_.scale, basis2_.scale); }

double sre_cross_cov(const SreModel& m, std::size_t q, std::size_t r, const Location& s, const Location& u) {
    return m(q, s, r, u);
}

// --- kernel convolution ----------------------------------------------------

KernelConvModel::KernelConvModel(std::vector<CorrelationFunction> factors, std::vector<Kernel> kernels,
                                 Quadrature quad)
    : factors_(std::move(factors)), kernels_(std::move(kernels)), quad_(quad) {
    const auto p = factors_.size();
    if (p == 0) throw InputError("kernel convolution needs at least one factor");
    if (kernels_.size() != p * p) throw InputError("kernel convolution needs p x p kernels");
    for (const auto& f : factors_) f.validate();
    for (const auto& k : kernels_) {
        if (!std::isfinite(k.amplitude) || !std::isfinite(k.shift_x) || !std::isfinite(k.shift_y)) {
            throw InputError("kernel parameters must be finite");
        }
        if (!(k.width >= 0.0) || !std::isfinite(k.width)) throw InputError("kernel width must be >= 0");
    }
    if (quad_.nodes < 2 || !(quad_.half_width > 0.0) || !(quad_.tail_tolerance > 0.0)) {
        throw InputError("invalid quadrature settings");
    }
    const auto n = static_cast<std::size_t>(quad_.nodes);
    const double step = 2.0 * quad_.half_width / static_cast<double>(n);
    std::vector<double> w1(n);
    node_offsets_.resize(n);
    double mass1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = -quad_.half_width + (static_cast<double>(i) + 0.5) * step;
        node_offsets_[i] = t;
        w1[i] = step * std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
        mass1 += w1[i];
    }
    // Mass the midpoint rule misses: truncated tails plus discretization.
    const double missing = std::abs(1.0 - mass1 * mass1);
    if (missing > quad_.tail_tolerance) {
        std::ostringstream os;
        os << "quadrature grid too coarse: estimated missing mass " << missing << " exceeds " << quad_.tail_tolerance;
        throw NumericalError(os.str());
    }
    node_weights_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) node_weights_[i * n + j] = w1[i] * w1[j] / (mass1 * mass1);
    }
}

double KernelConvModel::cross_cov(std::size_t q, std::size_t r, double hx, double hy) const {
    check_variable(*this, q);
    check_variable(*this, r);
    const auto p = factors_.size();
    const auto n = node_offsets_.size();
    double c = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        const Kernel& gq = kernels_[q * p + k];
        const Kernel& gr = kernels_[r * p + k];
        const double amp = gq.amplitude * gr.amplitude;
        if (amp == 0.0) continue;
        // v1 - v2 ~ N(shift_q - shift_r, (w_q^2 + w_r^2) I) for Gaussian kernels.
        const double mx = gq.shift_x - gr.shift_x + hx;
        const double my = gq.shift_y - gr.shift_y + hy;
        const double tau = std::sqrt(gq.width * gq.width + gr.width * gr.width);
        const auto& rho = factors_[k];
        if (tau == 0.0) {
            c += amp * rho(std::hypot(mx, my));
            continue;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = mx + tau * node_offsets_[i];
            for (std::size_t j = 0; j < n; ++j) {
                acc += node_weights_[i * n + j] * rho(std::hypot(x, my + tau * node_offsets_[j]));
            }
        }
        c += amp * acc;
    }
    return c;
}

double KernelConvModel::operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const {
    return cross_cov(q, r, s.x - u.x, s.y - u.y);
}

double KernelConvModel::characteristic_length() const {
    double len = 0.0;
    for (const auto& f : factors_) len = std::max(len, f.range);
    return len;
}

void KernelConvModel::fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                                 Eigen::Ref<Eigen::MatrixXd> out) const {
    const bool all_dirac =
        std::all_of(kernels_.begin(), kernels_.end(), [](const Kernel& k) { return k.is_dirac(); });
    if (all_dirac) {
        kernels::omp::fill_block(*this, q, a, r, b, out);
        return;
    }
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
            return static_cast<std::size_t>(splitmix64(k.first ^ splitmix64(k.second)));
        }
    };
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::uint32_t, KeyHash> index;
    std::vector<std::pair<double, double>> lags;
    std::vector<std::uint32_t> slot(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double hx = a[i].x - b[j].x, hy = a[i].y - b[j].y;
            auto key = std::make_pair(std::bit_cast<std::uint64_t>(hx), std::bit_cast<std::uint64_t>(hy));
            auto [it, inserted] = index.emplace(key, static_cast<std::uint32_t>(lags.size()));
            if (inserted) lags.emplace_back(hx, hy);
            slot[i * b.size() + j] = it->second;
        }
    }
    std::vector<double> values(lags.size());
    const auto nl = static_cast<std::ptrdiff_t>(lags.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t l = 0; l < nl; ++l) {
        values[static_cast<std::size_t>(l)] =
            cross_cov(q, r, lags[static_cast<std::size_t>(l)].first, lags[static_cast<std::size_t>(l)].second);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[slot[i * b.size() + j]];
        }
    }
}

KernelConvModel make_lmc(const Eigen::MatrixXd& a, std::vector<CorrelationFunction> factors) {
    const auto p = static_cast<Eigen::Index>(factors.size());
    if (a.rows() != p || a.cols() != p) throw InputError("LMC coefficient matrix must be p x p");
    std::vector<Kernel> kernels;
    kernels.reserve(static_cast<std::size_t>(p * p));
    for (Eigen::Index q = 0; q < p; ++q) {
        for (Eigen::Index k = 0; k < p; ++k) kernels.push_back(Kernel{a(q, k), 0.0, 0.0, 0.0});
    }
    return KernelConvModel(std::move(factors), std::move(kernels));
}

double kernel_conv_cross_cov(const KernelConvModel& m, std::size_t q, std::size_t r, double hx, double hy) {
    return m.cross_cov(q, r, hx, hy);
}

// --- modulated -------------------------------------------------------------

ModulatedModel::ModulatedModel(ModelPtr base, LogScale log_scale)
    : base_(std::move(base)), log_scale_(std::move(log_scale)) {
    if (!base_ || !log_scale_) throw InputError("modulated model needs a base model and a log-scale function");
}

double ModulatedModel::operator()(std::size_t q, const Location& s, std::size_t r, const Location& u) const {
    return std::exp(log_scale_(q, s)) * std::exp(log_scale_(r, u)) * (*base_)(q, s, r, u);
}

void ModulatedModel::fill_block(std::size_t q, const LocationSet& a, std::size_t r, const LocationSet& b,
                                Eigen::Ref<Eigen::MatrixXd> out) const {
    base_->fill_block(q, a, r, b, out);
    Eigen::VectorXd fa(static_cast<Eigen::Index>(a.size())), fb(static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) fa(static_cast<Eigen::Index>(i)) = std::exp(log_scale_(q, a[i]));
    for (std::size_t j = 0; j < b.size(); ++j) fb(static_cast<Eigen::Index>(j)) = std::exp(log_scale_(r, b[j]));
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = fa(i) * fb(j) * out(i, j);
    }
}

// --- bundles ---------------------------------------------------------------

Eigen::MatrixXd CovMatrixBundle::block(std::size_t q, std::size_t r) const {
    const auto i0 = static_cast<Eigen::Index>(offsets[q]), j0 = static_cast<Eigen::Index>(offsets[r]);
    return joint.block(i0, j0, static_cast<Eigen::Index>(offsets[q + 1]) - i0,
                       static_cast<Eigen::Index>(offsets[r + 1]) - j0);
}

std::vector<std::size_t> stacked_offsets(std::span<const LocationSet> locations) {
    std::vector<std::size_t> offsets{0};
    for (const auto& l : locations) offsets.push_back(offsets.back() + l.size());
    return offsets;
}

Eigen::MatrixXd assemble_joint(const CrossCovarianceModel& model, std::span<const LocationSet> locations) {
    if (locations.size() != model.variables()) {
        throw InputError("expected location sets for " + std::to_string(model.variables()) + " variables");
    }
    for (const auto& l : locations) {
        if (l.empty()) throw InputError("empty location set");
    }
    return kernels::omp::assemble_joint(model, locations);
}

CovMatrixBundle certify_bundle(Eigen::MatrixXd joint, std::vector<LocationSet> locations, double tol) {
    CovMatrixBundle bundle;
    bundle.offsets = stacked_offsets(locations);
    const auto n = static_cast<Eigen::Index>(bundle.offsets.back());
    if (joint.rows() != n || joint.cols() != n) throw InputError("joint matrix does not match location sets");
    bundle.certificate = check_nnd(joint, tol);
    if (!bundle.certificate.pass) {
        throw NumericalError("covariance bundle fails n.n.d. certificate: " + describe(bundle.certificate));
    }
    bundle.joint = 0.5 * (joint + joint.transpose());
    bundle.locations = std::move(locations);
    return bundle;
}

CovMatrixBundle assemble_bundle(const CrossCovarianceModel& model, std::vector<LocationSet> locations) {
    Eigen::MatrixXd joint = assemble_joint(model, locations);
    return certify_bundle(std::move(joint), std::move(locations));
}

// --- simulation ------------------------------------------------------------

FieldSampler::FieldSampler(const CovMatrixBundle& bundle)
    : locations_(bundle.locations), offsets_(bundle.offsets) {
    if (!bundle.certificate.pass) throw NumericalError("cannot simulate from an uncertified bundle");
    const auto n = bundle.joint.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(bundle.joint);
    if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        perm_.setIdentity(n);
        return;
    }
    // Semidefinite: pivoted LDL', tolerating pivots down to the jitter budget.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(bundle.joint);
    const double budget = 1e-10 * std::max(bundle.joint.trace(), 1.0);
    Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !d.allFinite() || d.minCoeff() < -budget) {
        throw NumericalError("factorization failed: joint needs more than 1e-10 * trace of jitter");
    }
    d = d.cwiseMax(0.0).cwiseSqrt();
    factor_ = Eigen::MatrixXd(ldlt.matrixL()) * d.asDiagonal();
    perm_ = Eigen::PermutationMatrix<Eigen::Dynamic>(ldlt.transpositionsP());
}

Eigen::VectorXd FieldSampler::draw_vector(std::uint64_t seed) const {
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(factor_.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(engine);
    Eigen::VectorXd y = factor_.triangularView<Eigen::Lower>() * z;
    return perm_.transpose() * y;
}

MultivariateDataset FieldSampler::draw(std::span<const double> means, std::uint64_t seed) const {
    if (means.size() != locations_.size()) throw InputError("one mean per variable is required");
    const Eigen::VectorXd x = draw_vector(seed);
    std::vector<VariableSeries> series;
    for (std::size_t q = 0; q < locations_.size(); ++q) {
        std::vector<double> values(locations_[q].size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = means[q] + x(static_cast<Eigen::Index>(offsets_[q] + i));
        }
        series.emplace_back(q, locations_[q].points(), std::move(values));
    }
    return MultivariateDataset(std::move(series));
}

MultivariateDataset simulate_field(const CovMatrixBundle& bundle, std::span<const double> means,
                                   std::uint64_t seed) {
    return FieldSampler(bundle).draw(means, seed);
}

} // namespace cokrig
