#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cokrig {

enum class Command { simulate, fit, predict, validate, diagnose };

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view s);

// Parsed `key = value` (or `key: value`) pairs grouped by `[section]`.
// Keys before the first header belong to [run].
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

struct GridSpec {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    long nx = 1, ny = 1;
};

struct RunConfig {
    Command command = Command::simulate;
    ConfigSections sections;
    std::filesystem::path base_dir; // relative paths resolve against this

    std::optional<std::filesystem::path> data_path;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = "out";

    // [model]
    std::string family = "lmc";
    std::size_t variables = 2;
    std::string correlation;       // empty = family default
    std::optional<double> nu;
    std::size_t regions = 0;
    std::optional<std::vector<std::size_t>> condition_order; // zero-based
    std::string b_rule = "identity";
    std::optional<GridSpec> model_grid;
    std::optional<GridSpec> basis_grid;
    std::vector<double> basis_scale;
    std::vector<double> kernel_width;
    int quad_nodes = 64;

    // [params]: group name -> values in element order.
    std::map<std::string, std::vector<double>> params;

    // [noise]
    std::vector<double> split;    // eps fraction per variable
    std::vector<double> eps_corr; // p x p row-major
    std::vector<double> sigma_xi;
    std::vector<double> sigma_eps; // p x p row-major

    // [fit]
    std::string method = "ml";
    std::vector<std::string> fixed;
    int restarts = 5;
    int max_iter = 2000;
    double tolerance = 1e-6;
    std::optional<double> max_lag;
    std::size_t bins = 15;
    std::size_t dense_cap = 2000;

    // [simulate]
    std::optional<GridSpec> sim_grid;
    std::vector<double> sim_mean;
    std::optional<std::size_t> subsample;
    bool export_bundle = false;

    // [predict]
    std::optional<std::filesystem::path> fit_path;
    std::size_t predict_variable = 0; // zero-based
    std::string predictand = "Y";
    std::optional<GridSpec> targets;
    std::vector<double> means;

    // [validate]
    std::size_t folds = 5;

    // [diagnose]
    bool directional = false;
    double axis_deg = 0.0;
    double tolerance_deg = 22.5;
    std::optional<std::vector<double>> probe;

    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

struct ConfigResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors; // every problem found, in file order
};

// Parses and validates config text for a command. Never throws on bad input.
ConfigResult validate_config(std::string_view text, Command command,
                             const std::filesystem::path& base_dir = std::filesystem::path("."));

// Applies a `q=frac,...` override (one-based q) to the split fractions.
std::vector<std::string> apply_noise_split(RunConfig& config, std::string_view spec);

// Parses an INI-style text into sections; syntax errors are appended.
ConfigSections parse_sections(std::string_view text, std::vector<std::string>& errors);

std::size_t edit_distance(std::string_view a, std::string_view b);

} // namespace cokrig
