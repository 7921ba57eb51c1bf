#include "cokrig/covariance.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "cokrig/error.hpp"
#include "cokrig/kernels.hpp"

namespace cokrig {

double matern_cov(const MaternParams& p, double h) {
    if (!std::isfinite(p.sigma2) || !std::isfinite(p.range) || !std::isfinite(p.nu) || p.sigma2 <= 0.0 ||
        p.range <= 0.0 || p.nu <= 0.0) {
        throw InputError("matern: parameters must be positive and finite");
    }
    if (!(h >= 0.0) || !std::isfinite(h)) {
        throw InputError("matern: lag must be finite and nonnegative");
    }
    if (h == 0.0) return p.sigma2;
    if (p.nu == 0.5) return p.sigma2 * std::exp(-h / p.range);
    if (p.nu == 1.5) {
        const double x = std::sqrt(3.0) * h / p.range;
        return p.sigma2 * (1.0 + x) * std::exp(-x);
    }
    if (p.nu == 2.5) {
        const double x = std::sqrt(5.0) * h / p.range;
        return p.sigma2 * (1.0 + x + x * x / 3.0) * std::exp(-x);
    }
    const double x = std::sqrt(2.0 * p.nu) * h / p.range;
    const double k = std::cyl_bessel_k(p.nu, x);
    if (k == 0.0) return 0.0;
    const double log_c = (1.0 - p.nu) * std::log(2.0) - std::lgamma(p.nu) + p.nu * std::log(x) + std::log(k);
    return p.sigma2 * std::exp(log_c);
}

std::string_view to_string(CorrelationFamily family) {
    switch (family) {
    case CorrelationFamily::exponential: return "exponential";
    case CorrelationFamily::matern: return "matern";
    case CorrelationFamily::gaussian: return "gaussian";
    }
    return "?";
}

CorrelationFamily parse_correlation_family(std::string_view name) {
    if (name == "exponential") return CorrelationFamily::exponential;
    if (name == "matern") return CorrelationFamily::matern;
    if (name == "gaussian") return CorrelationFamily::gaussian;
    throw InputError("unknown correlation family '" + std::string(name) + "'");
}

double CorrelationFunction::operator()(double h) const {
    switch (family) {
    case CorrelationFamily::exponential: return std::exp(-h / range);
    case CorrelationFamily::matern: return matern_cov({1.0, range, nu}, h);
    case CorrelationFamily::gaussian: {
        const double x = h / range;
        return std::exp(-x * x);
    }
    }
    return 0.0;
}

void CorrelationFunction::validate() const {
    if (!(range > 0.0) || !std::isfinite(range)) throw InputError("correlation range must be positive and finite");
    if (family == CorrelationFamily::matern && (!(nu > 0.0) || !std::isfinite(nu))) {
        throw InputError("matern smoothness must be positive and finite");
    }
}

CovarianceFunction matern_covariance(double sigma2, double range, double nu) {
    CovarianceFunction k{sigma2, {CorrelationFamily::matern, range, nu}};
    k.correlation.validate();
    return k;
}

Eigen::MatrixXd eval_cov_matrix(const CovarianceFunction& k, const LocationSet& a, const LocationSet& b) {
    if (a.empty() || b.empty()) throw InputError("eval_cov_matrix: empty location set");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    kernels::omp::fill_matrix(out, [&](std::size_t i, std::size_t j) { return k(a[i], b[j]); });
    return out;
}

NndCertificate check_nnd(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols()) throw InputError("check_nnd: matrix is not square");
    if (!(tol >= 0.0)) throw InputError("check_nnd: tolerance must be >= 0");
    if (!m.allFinite()) throw NumericalError("check_nnd: matrix has non-finite entries");
    NndCertificate cert;
    cert.trace = m.trace();
    cert.tol_used = tol;
    const double scale = std::max(cert.trace, 1.0);
    const double asym = m.rows() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol * scale) {
        throw InputError("check_nnd: matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    }
    if (m.rows() == 0) {
        cert.pass = true;
        return cert;
    }
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("check_nnd: eigensolver did not converge");
    cert.min_eigenvalue = es.eigenvalues().minCoeff();
    cert.pass = cert.min_eigenvalue >= -tol * scale;
    return cert;
}

void BasisSet::validate() const {
    if (centers.empty()) throw InputError("basis set has no centers");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("basis scale must be positive and finite");
}

Eigen::VectorXd bisquare_basis(const BasisSet& basis, const Location& s) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
        const double d = distance(s, basis.centers[a]) / basis.scale;
        const double t = 1.0 - d * d;
        out(static_cast<Eigen::Index>(a)) = d < 1.0 ? t * t : 0.0;
    }
    return out;
}

Eigen::MatrixXd basis_matrix(const BasisSet& basis, const LocationSet& locations) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(locations.size()), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < locations.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = bisquare_basis(basis, locations[i]).transpose();
    }
    return out;
}

} // namespace cokrig
