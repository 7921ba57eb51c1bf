#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace cokrig {

// One scalar model parameter. Element names look like `range[2]` or
// `a[2,1]`; the part before the bracket is the group name.
struct Parameter {
    std::string name;
    double value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool free = true;

    std::string group() const;
};

class ParameterSet {
public:
    ParameterSet() = default;
    explicit ParameterSet(std::vector<Parameter> params) : params_(std::move(params)) {}

    std::size_t size() const noexcept { return params_.size(); }
    std::size_t free_count() const noexcept;
    const std::vector<Parameter>& items() const noexcept { return params_; }
    std::vector<Parameter>& items() noexcept { return params_; }

    std::optional<std::size_t> find(std::string_view name) const;
    double operator[](std::string_view name) const; // throws InputError when absent
    double get(std::string_view name, double fallback) const;
    void set(std::string_view name, double value);
    // Fixes either a single element (`range[1]`) or a whole group (`range`).
    void fix(std::string_view name_or_group);
    // Values of all group elements in declaration order.
    std::vector<double> group_values(std::string_view group) const;

    // Free parameters mapped to an unconstrained vector: identity for
    // unbounded, lower + exp(t) for half-bounded, logistic for boxed.
    Eigen::VectorXd to_unconstrained() const;
    ParameterSet from_unconstrained(const Eigen::VectorXd& t) const;

private:
    std::vector<Parameter> params_;
};

std::string element_name(std::string_view group, std::size_t i);
std::string element_name(std::string_view group, std::size_t i, std::size_t j);

} // namespace cokrig
