#include "cokrig/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "cokrig/error.hpp"

namespace cokrig {

std::string Parameter::group() const { return name.substr(0, name.find('[')); }

std::string element_name(std::string_view group, std::size_t i) {
    return std::string(group) + "[" + std::to_string(i + 1) + "]";
}

std::string element_name(std::string_view group, std::size_t i, std::size_t j) {
    return std::string(group) + "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
}

std::size_t ParameterSet::free_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(params_.begin(), params_.end(), [](const Parameter& p) { return p.free; }));
}

std::optional<std::size_t> ParameterSet::find(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) return i;
    }
    return std::nullopt;
}

double ParameterSet::operator[](std::string_view name) const {
    auto i = find(name);
    if (!i) throw InputError("unknown parameter '" + std::string(name) + "'");
    return params_[*i].value;
}

double ParameterSet::get(std::string_view name, double fallback) const {
    auto i = find(name);
    return i ? params_[*i].value : fallback;
}

void ParameterSet::set(std::string_view name, double value) {
    auto i = find(name);
    if (!i) throw InputError("unknown parameter '" + std::string(name) + "'");
    params_[*i].value = value;
}

void ParameterSet::fix(std::string_view name_or_group) {
    bool any = false;
    for (auto& p : params_) {
        if (p.name == name_or_group || p.group() == name_or_group) {
            p.free = false;
            any = true;
        }
    }
    if (!any) throw InputError("cannot fix unknown parameter '" + std::string(name_or_group) + "'");
}

std::vector<double> ParameterSet::group_values(std::string_view group) const {
    std::vector<double> out;
    for (const auto& p : params_) {
        if (p.group() == group) out.push_back(p.value);
    }
    return out;
}

namespace {

constexpr double kTiny = 1e-12;

double to_t(const Parameter& p) {
    const bool lo = std::isfinite(p.lower), hi = std::isfinite(p.upper);
    if (!lo && !hi) return p.value;
    if (lo && !hi) return std::log(std::max(p.value - p.lower, kTiny));
    if (!lo && hi) return std::log(std::max(p.upper - p.value, kTiny));
    const double u = std::clamp((p.value - p.lower) / (p.upper - p.lower), kTiny, 1.0 - kTiny);
    return std::log(u / (1.0 - u));
}

double from_t(const Parameter& p, double t) {
    const bool lo = std::isfinite(p.lower), hi = std::isfinite(p.upper);
    t = std::clamp(t, -700.0, 700.0);
    if (!lo && !hi) return t;
    if (lo && !hi) return p.lower + std::exp(t);
    if (!lo && hi) return p.upper - std::exp(t);
    return p.lower + (p.upper - p.lower) / (1.0 + std::exp(-t));
}

} // namespace

Eigen::VectorXd ParameterSet::to_unconstrained() const {
    Eigen::VectorXd t(static_cast<Eigen::Index>(free_count()));
    Eigen::Index k = 0;
    for (const auto& p : params_) {
        if (p.free) t(k++) = to_t(p);
    }
    return t;
}

ParameterSet ParameterSet::from_unconstrained(const Eigen::VectorXd& t) const {
    if (t.size() != static_cast<Eigen::Index>(free_count())) throw InputError("parameter vector size mismatch");
    ParameterSet out = *this;
    Eigen::Index k = 0;
    for (auto& p : out.params_) {
        if (p.free) p.value = from_t(p, t(k++));
    }
    return out;
}

} // namespace cokrig
