#include "cokrig/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace cokrig {

std::string_view to_string(Command c) {
    switch (c) {
    case Command::simulate: return "simulate";
    case Command::fit: return "fit";
    case Command::predict: return "predict";
    case Command::validate: return "validate";
    case Command::diagnose: return "diagnose";
    }
    return "?";
}

std::optional<Command> parse_command(std::string_view s) {
    for (auto c : {Command::simulate, Command::fit, Command::predict, Command::validate, Command::diagnose}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in{std::string(s)};
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    if (!out.empty() && out.back().empty() && out.size() == 1) out.clear();
    return out;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
    return v;
}

struct Ctx {
    RunConfig& cfg;
    std::vector<std::string>& errors;
    std::string where; // section.key

    void fail(const std::string& what) { errors.push_back(where + ": " + what); }

    std::optional<double> num(std::string_view v) {
        auto d = to_double(v);
        if (!d) fail("expected a finite number, got '" + std::string(v) + "'");
        return d;
    }
    std::optional<std::uint64_t> uint(std::string_view v) {
        auto d = to_uint(v);
        if (!d) fail("expected a nonnegative integer, got '" + std::string(v) + "'");
        return d;
    }
    std::optional<std::vector<double>> nums(std::string_view v) {
        std::vector<double> out;
        for (const auto& item : split_list(v)) {
            auto d = to_double(item);
            if (!d) {
                fail("expected a comma-separated list of numbers, got '" + std::string(v) + "'");
                return std::nullopt;
            }
            out.push_back(*d);
        }
        if (out.empty()) {
            fail("empty list");
            return std::nullopt;
        }
        return out;
    }
    std::optional<bool> flag(std::string_view v) {
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail("expected true or false, got '" + std::string(v) + "'");
        return std::nullopt;
    }
    std::optional<GridSpec> grid(std::string_view v) {
        auto n = nums(v);
        if (!n) return std::nullopt;
        if (n->size() != 6) {
            fail("grid needs xmin,xmax,ymin,ymax,nx,ny");
            return std::nullopt;
        }
        const auto& g = *n;
        if (g[4] < 1 || g[5] < 1 || g[4] != std::floor(g[4]) || g[5] != std::floor(g[5])) {
            fail("grid counts must be positive integers");
            return std::nullopt;
        }
        if (g[1] < g[0] || g[3] < g[2]) {
            fail("grid bounds are inverted");
            return std::nullopt;
        }
        return GridSpec{g[0], g[1], g[2], g[3], static_cast<long>(g[4]), static_cast<long>(g[5])};
    }
    template <class T>
    void positive(std::string_view v, T& out, std::uint64_t min = 1) {
        if (auto d = uint(v)) {
            if (*d < min) {
                fail("must be at least " + std::to_string(min));
            } else {
                out = static_cast<T>(*d);
            }
        }
    }
};

using Handler = std::function<void(Ctx&, const std::string&)>;

const std::map<std::string, std::map<std::string, Handler>>& schema() {
    static const std::map<std::string, std::map<std::string, Handler>> s = [] {
        std::map<std::string, std::map<std::string, Handler>> m;
        m["run"] = {
            {"data", [](Ctx& c, const std::string& v) { c.cfg.data_path = v; }},
            {"seed", [](Ctx& c, const std::string& v) { c.cfg.seed = c.uint(v); }},
            {"out", [](Ctx& c, const std::string& v) { c.cfg.out_dir = v; }},
        };
        m["model"] = {
            {"family",
             [](Ctx& c, const std::string& v) {
                 static const std::set<std::string> ok{"conditional", "sre", "kernel_conv", "lmc"};
                 if (!ok.count(v)) c.fail("unknown family '" + v + "' (conditional, sre, kernel_conv or lmc)");
                 c.cfg.family = v;
             }},
            {"variables", [](Ctx& c, const std::string& v) { c.positive(v, c.cfg.variables); }},
            {"correlation",
             [](Ctx& c, const std::string& v) {
                 if (v != "exponential" && v != "matern" && v != "gaussian") {
                     c.fail("unknown correlation '" + v + "' (exponential, matern or gaussian)");
                 }
                 c.cfg.correlation = v;
             }},
            {"nu",
             [](Ctx& c, const std::string& v) {
                 if (auto d = c.num(v)) {
                     if (*d <= 0.0) c.fail("must be positive");
                     c.cfg.nu = *d;
                 }
             }},
            {"regions", [](Ctx& c, const std::string& v) { c.positive(v, c.cfg.regions, 0); }},
            {"condition_order",
             [](Ctx& c, const std::string& v) {
                 if (v == "1,2" || v == "1, 2") {
                     c.cfg.condition_order = std::vector<std::size_t>{0, 1};
                 } else if (v == "2,1" || v == "2, 1") {
                     c.cfg.condition_order = std::vector<std::size_t>{1, 0};
                 } else {
                     c.fail("must be '1,2' or '2,1'");
                 }
             }},
            {"b_rule",
             [](Ctx& c, const std::string& v) {
                 if (v != "identity" && v != "distance_decay") c.fail("must be identity or distance_decay");
                 c.cfg.b_rule = v;
             }},
            {"grid", [](Ctx& c, const std::string& v) { c.cfg.model_grid = c.grid(v); }},
            {"basis_grid", [](Ctx& c, const std::string& v) { c.cfg.basis_grid = c.grid(v); }},
            {"basis_scale",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.basis_scale = *n;
             }},
            {"kernel_width",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.kernel_width = *n;
             }},
            {"quad_nodes",
             [](Ctx& c, const std::string& v) {
                 int n = 0;
                 c.positive(v, n, 2);
                 if (n > 0) c.cfg.quad_nodes = n;
             }},
        };
        auto group = [](const std::string& g) {
            return Handler([g](Ctx& c, const std::string& v) {
                if (auto n = c.nums(v)) c.cfg.params[g] = *n;
            });
        };
        for (const char* g : {"a", "range", "nugget", "sill", "b0", "b_range", "corr", "k_range", "shift_x",
                              "shift_y", "log_scale"}) {
            m["params"][g] = group(g);
        }
        m["noise"] = {
            {"split",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.split = *n;
             }},
            {"eps_corr",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.eps_corr = *n;
             }},
            {"sigma_xi",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.sigma_xi = *n;
             }},
            {"sigma_eps",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.sigma_eps = *n;
             }},
        };
        m["fit"] = {
            {"method",
             [](Ctx& c, const std::string& v) {
                 if (v != "ml" && v != "wls") c.fail("must be ml or wls");
                 c.cfg.method = v;
             }},
            {"fixed", [](Ctx& c, const std::string& v) { c.cfg.fixed = split_list(v); }},
            {"restarts", [](Ctx& c, const std::string& v) { c.positive(v, c.cfg.restarts); }},
            {"max_iter", [](Ctx& c, const std::string& v) { c.positive(v, c.cfg.max_iter); }},
            {"tolerance",
             [](Ctx& c, const std::string& v) {
                 if (auto d = c.num(v)) {
                     if (*d <= 0.0) c.fail("must be positive");
                     c.cfg.tolerance = *d;
                 }
             }},
            {"max_lag",
             [](Ctx& c, const std::string& v) {
                 if (auto d = c.num(v)) {
                     if (*d <= 0.0) c.fail("must be positive");
                     c.cfg.max_lag = *d;
                 }
             }},
            {"bins", [](Ctx& c, const std::string& v) { c.positive(v, c.cfg.bins); }},
            {"dense_cap", [](Ctx& c, const std::string& v) { c.positive(v, c.cfg.dense_cap); }},
        };
        m["simulate"] = {
            {"grid", [](Ctx& c, const std::string& v) { c.cfg.sim_grid = c.grid(v); }},
            {"mean",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.sim_mean = *n;
             }},
            {"subsample",
             [](Ctx& c, const std::string& v) {
                 std::size_t n = 0;
                 c.positive(v, n);
                 if (n > 0) c.cfg.subsample = n;
             }},
            {"export_bundle",
             [](Ctx& c, const std::string& v) {
                 if (auto b = c.flag(v)) c.cfg.export_bundle = *b;
             }},
        };
        m["predict"] = {
            {"fit", [](Ctx& c, const std::string& v) { c.cfg.fit_path = v; }},
            {"variable",
             [](Ctx& c, const std::string& v) {
                 std::size_t n = 0;
                 c.positive(v, n);
                 if (n > 0) c.cfg.predict_variable = n - 1;
             }},
            {"predictand",
             [](Ctx& c, const std::string& v) {
                 if (v != "Y" && v != "W") c.fail("must be Y or W");
                 c.cfg.predictand = v;
             }},
            {"targets", [](Ctx& c, const std::string& v) { c.cfg.targets = c.grid(v); }},
            {"means",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) c.cfg.means = *n;
             }},
        };
        m["validate"] = {
            {"folds",
             [](Ctx& c, const std::string& v) {
                 if (auto d = c.uint(v)) {
                     if (*d < 2) c.fail("folds must be at least 2");
                     c.cfg.folds = static_cast<std::size_t>(*d);
                 }
             }},
        };
        m["diagnose"] = {
            {"max_lag",
             [](Ctx& c, const std::string& v) {
                 if (auto d = c.num(v)) {
                     if (*d <= 0.0) c.fail("must be positive");
                     c.cfg.max_lag = *d;
                 }
             }},
            {"bins", [](Ctx& c, const std::string& v) { c.positive(v, c.cfg.bins); }},
            {"directional",
             [](Ctx& c, const std::string& v) {
                 if (auto b = c.flag(v)) c.cfg.directional = *b;
             }},
            {"axis_deg",
             [](Ctx& c, const std::string& v) {
                 if (auto d = c.num(v)) c.cfg.axis_deg = *d;
             }},
            {"tolerance_deg",
             [](Ctx& c, const std::string& v) {
                 if (auto d = c.num(v)) {
                     if (*d <= 0.0 || *d > 90.0) c.fail("must lie in (0, 90]");
                     c.cfg.tolerance_deg = *d;
                 }
             }},
            {"probe",
             [](Ctx& c, const std::string& v) {
                 if (auto n = c.nums(v)) {
                     if (n->size() != 2) c.fail("probe needs x,y");
                     c.cfg.probe = *n;
                 }
             }},
        };
        return m;
    }();
    return s;
}

std::string suggestion(const std::string& key, const std::vector<std::string>& candidates) {
    std::string best;
    std::size_t best_d = 3;
    for (const auto& c : candidates) {
        const auto d = edit_distance(key, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best.empty() ? std::string() : " (did you mean '" + best + "'?)";
}

} // namespace

ConfigSections parse_sections(std::string_view text, std::vector<std::string>& errors) {
    ConfigSections out;
    std::string section = "run";
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(line_no) + ": malformed section header");
                continue;
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            out[section];
            continue;
        }
        const auto sep = line.find_first_of("=:");
        if (sep == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        const auto key = trim(std::string_view(line).substr(0, sep));
        const auto value = trim(std::string_view(line).substr(sep + 1));
        if (key.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        auto& sec = out[section];
        if (sec.count(key)) {
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + section + "." + key + "'");
            continue;
        }
        sec[key] = value;
    }
    return out;
}

ConfigResult validate_config(std::string_view text, Command command, const std::filesystem::path& base_dir) {
    ConfigResult result;
    auto& errors = result.errors;
    RunConfig cfg;
    cfg.command = command;
    cfg.base_dir = base_dir;
    cfg.sections = parse_sections(text, errors);

    const auto& known = schema();
    std::vector<std::string> section_names, all_keys;
    for (const auto& [name, keys] : known) {
        section_names.push_back(name);
        for (const auto& k : keys) all_keys.push_back(k.first);
    }

    for (const auto& [section, entries] : cfg.sections) {
        const auto sec = known.find(section);
        if (sec == known.end()) {
            errors.push_back("unknown section [" + section + "]" + suggestion(section, section_names));
            continue;
        }
        std::vector<std::string> local;
        for (const auto& k : sec->second) local.push_back(k.first);
        for (const auto& [key, value] : entries) {
            const auto h = sec->second.find(key);
            if (h == sec->second.end()) {
                auto hint = suggestion(key, local);
                if (hint.empty()) hint = suggestion(key, all_keys);
                errors.push_back("unknown key '" + section + "." + key + "'" + hint);
                continue;
            }
            Ctx ctx{cfg, errors, section + "." + key};
            h->second(ctx, value);
        }
    }

    auto has = [&](const std::string& section, const std::string& key) {
        const auto s = cfg.sections.find(section);
        return s != cfg.sections.end() && s->second.count(key) > 0;
    };
    auto require = [&](const std::string& section, const std::string& key) {
        if (!has(section, key)) {
            errors.push_back("missing required key '" + section + "." + key + "' for " +
                             std::string(to_string(command)));
        }
    };

    if (command != Command::simulate) require("run", "data");
    if (command == Command::simulate || command == Command::validate) require("run", "seed");
    if (command != Command::diagnose) require("model", "family");
    if (command == Command::simulate && !cfg.sim_grid && !cfg.model_grid) require("simulate", "grid");
    if (command == Command::predict) require("predict", "targets");
    if (cfg.family == "conditional" && cfg.variables != 2) {
        errors.push_back("model.variables: the conditional family is bivariate");
    }
    if (cfg.family == "sre") {
        if (cfg.variables != 2) errors.push_back("model.variables: the sre family is bivariate");
        if (!cfg.basis_grid) require("model", "basis_grid");
    }
    if (cfg.family == "conditional" && cfg.b_rule == "distance_decay" && !cfg.model_grid) {
        errors.push_back("model.grid: required by b_rule = distance_decay");
    }
    if (!cfg.split.empty()) {
        if (cfg.split.size() != cfg.variables) errors.push_back("noise.split: needs one fraction per variable");
        for (double f : cfg.split) {
            if (f < 0.0 || f > 1.0) {
                errors.push_back("noise.split: fractions must lie in [0, 1]");
                break;
            }
        }
    }
    const bool explicit_noise = !cfg.sigma_xi.empty() || !cfg.sigma_eps.empty();
    if (explicit_noise && cfg.params.count("nugget")) {
        errors.push_back("params.nugget: give either nugget or noise.sigma_xi / noise.sigma_eps, not both");
    }
    if (explicit_noise && !cfg.split.empty()) {
        errors.push_back("noise.split: conflicts with explicit noise.sigma_xi / noise.sigma_eps");
    }
    const auto p = cfg.variables;
    if (!cfg.sigma_xi.empty() && cfg.sigma_xi.size() != p) errors.push_back("noise.sigma_xi: needs p entries");
    if (!cfg.sigma_eps.empty() && cfg.sigma_eps.size() != p * p) errors.push_back("noise.sigma_eps: needs p*p entries");
    if (!cfg.eps_corr.empty() && cfg.eps_corr.size() != p * p) errors.push_back("noise.eps_corr: needs p*p entries");
    if (!cfg.sim_mean.empty() && cfg.sim_mean.size() != p) errors.push_back("simulate.mean: needs p entries");
    if (!cfg.means.empty() && cfg.means.size() != p) errors.push_back("predict.means: needs p entries");
    if (cfg.predict_variable >= p) errors.push_back("predict.variable: exceeds the number of variables");

    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

std::vector<std::string> apply_noise_split(RunConfig& config, std::string_view spec) {
    std::vector<std::string> errors;
    if (!config.sigma_xi.empty() || !config.sigma_eps.empty()) {
        errors.push_back("--noise-split: conflicts with explicit noise.sigma_xi / noise.sigma_eps");
        return errors;
    }
    std::vector<double> split = config.split.empty() ? std::vector<double>(config.variables, 1.0) : config.split;
    for (const auto& item : split_list(spec)) {
        const auto eq = item.find('=');
        const auto q = eq == std::string::npos ? std::nullopt : to_uint(trim(std::string_view(item).substr(0, eq)));
        const auto f = eq == std::string::npos ? std::nullopt : to_double(trim(std::string_view(item).substr(eq + 1)));
        if (!q || !f || *q < 1 || *q > config.variables || *f < 0.0 || *f > 1.0) {
            errors.push_back("--noise-split: bad entry '" + item + "' (expected q=fraction, q in 1.." +
                             std::to_string(config.variables) + ", fraction in [0, 1])");
            continue;
        }
        split[static_cast<std::size_t>(*q - 1)] = *f;
    }
    if (errors.empty()) config.split = std::move(split);
    return errors;
}

} // namespace cokrig
