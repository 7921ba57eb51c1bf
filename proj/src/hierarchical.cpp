#include "cokrig/hierarchical.hpp"

#include <string>

#include "cokrig/error.hpp"

namespace cokrig {

void MeasurementErrorSpec::validate(std::size_t p) const {
    const auto n = static_cast<Eigen::Index>(p);
    if (sigma_eps.rows() != n || sigma_eps.cols() != n) {
        throw InputError("measurement-error matrix must be " + std::to_string(p) + " x " + std::to_string(p));
    }
    auto cert = check_nnd(sigma_eps, 1e-12);
    if (!cert.pass) throw InputError("measurement-error matrix is not nonnegative definite");
}

void MicroScaleSpec::validate(std::size_t p) const {
    if (sigma_xi.size() != static_cast<Eigen::Index>(p)) {
        throw InputError("micro-scale variances must have " + std::to_string(p) + " entries");
    }
    if (!sigma_xi.allFinite() || sigma_xi.minCoeff() < 0.0) {
        throw InputError("micro-scale variances must be finite and nonnegative");
    }
}

HierarchicalModel::HierarchicalModel(ModelPtr smooth, MicroScaleSpec micro, MeasurementErrorSpec noise)
    : smooth_(std::move(smooth)), micro_(std::move(micro)), noise_(std::move(noise)) {
    if (!smooth_) throw InputError("hierarchical model needs a smooth component");
    micro_.validate(smooth_->variables());
    noise_.validate(smooth_->variables());
    noise_.sigma_eps = 0.5 * (noise_.sigma_eps + noise_.sigma_eps.transpose());
}

double HierarchicalModel::data_cov(std::size_t q, const Location& s, std::size_t r, const Location& u) const {
    double c = (*smooth_)(q, s, r, u);
    if (same_location(s, u)) {
        const auto iq = static_cast<Eigen::Index>(q), ir = static_cast<Eigen::Index>(r);
        c += q == r ? (micro_.sigma_xi(iq) + noise_.sigma_eps(iq, iq)) : noise_.sigma_eps(iq, ir);
    }
    return c;
}

double HierarchicalModel::latent_cov(std::size_t q, const Location& s, std::size_t r, const Location& u) const {
    double c = (*smooth_)(q, s, r, u);
    if (q == r && same_location(s, u)) c += micro_.sigma_xi(static_cast<Eigen::Index>(q));
    return c;
}

Eigen::MatrixXd data_covariance(const HierarchicalModel& m, std::span<const LocationSet> locations) {
    Eigen::MatrixXd joint = assemble_joint(m.smooth(), locations);
    const auto offsets = stacked_offsets(locations);
    const auto& xi = m.micro().sigma_xi;
    const auto& eps = m.noise().sigma_eps;
    for (std::size_t q = 0; q < locations.size(); ++q) {
        for (std::size_t r = q; r < locations.size(); ++r) {
            const auto iq = static_cast<Eigen::Index>(q), ir = static_cast<Eigen::Index>(r);
            const double add = q == r ? (xi(iq) + eps(iq, iq)) : eps(iq, ir);
            if (add == 0.0) continue;
            for (std::size_t i = 0; i < locations[q].size(); ++i) {
                for (std::size_t j = 0; j < locations[r].size(); ++j) {
                    if (!same_location(locations[q][i], locations[r][j])) continue;
                    const auto a = static_cast<Eigen::Index>(offsets[q] + i);
                    const auto b = static_cast<Eigen::Index>(offsets[r] + j);
                    joint(a, b) += add;
                    if (a != b) joint(b, a) += add;
                }
            }
        }
    }
    return joint;
}

CovMatrixBundle assemble_data_cov(const HierarchicalModel& m, std::vector<LocationSet> locations) {
    Eigen::MatrixXd joint = data_covariance(m, locations);
    return certify_bundle(std::move(joint), std::move(locations));
}

OriginGap origin_gap(const HierarchicalModel& m, const Location& probe, double eps_h) {
    if (!is_finite(probe)) throw InputError("origin_gap: probe must be finite");
    OriginGap out;
    out.eps_h = eps_h > 0.0 ? eps_h : m.smooth().characteristic_length() / 1e6;
    const Location right{probe.x + out.eps_h, probe.y};
    const Location left{probe.x - out.eps_h, probe.y};
    const auto p = static_cast<Eigen::Index>(m.variables());
    out.gap.resize(p, p);
    for (Eigen::Index q = 0; q < p; ++q) {
        for (Eigen::Index r = 0; r < p; ++r) {
            const auto uq = static_cast<std::size_t>(q), ur = static_cast<std::size_t>(r);
            const double limit = 0.5 * (m.data_cov(uq, probe, ur, right) + m.data_cov(uq, probe, ur, left));
            out.gap(q, r) = m.data_cov(uq, probe, ur, probe) - limit;
        }
    }
    const Eigen::MatrixXd sym = 0.5 * (out.gap + out.gap.transpose());
    out.certificate = check_nnd(sym, kBundleTolerance);
    return out;
}

} // namespace cokrig
