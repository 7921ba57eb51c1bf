#include "cokrig/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/crc.hpp>
#include <json.hpp>

#include "cokrig/error.hpp"
#include "cokrig/estimation.hpp"
#include "cokrig/families.hpp"
#include "cokrig/hierarchical.hpp"
#include "cokrig/kernels.hpp"
#include "cokrig/prediction.hpp"
#include "cokrig/rng.hpp"

#ifndef COKRIG_VERSION
#define COKRIG_VERSION "0.0.0"
#endif

namespace cokrig {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
}

LocationSet grid_of(const GridSpec& g) { return make_grid(g.xmin, g.xmax, g.ymin, g.ymax, g.nx, g.ny); }

struct Session {
    const RunConfig& cfg;
    std::vector<std::pair<std::string, std::string>> files;
    std::vector<std::string> notes;
    std::optional<std::filesystem::path> input;
    std::optional<std::uint32_t> input_crc;

    void emit(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }

    std::uint64_t seed() const { return cfg.seed.value_or(0); }

    MultivariateDataset load() {
        const auto path = cfg.resolve(*cfg.data_path);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("cannot open data file " + path.string());
        const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        boost::crc_32_type crc;
        crc.process_bytes(bytes.data(), bytes.size());
        input = path;
        input_crc = crc.checksum();
        std::istringstream text(bytes);
        auto loaded = parse_dataset(text, {}, path.string());
        for (const auto& [orig, id] : loaded.id_map) {
            if (orig != static_cast<std::int64_t>(id)) {
                std::ostringstream map;
                write_id_map(map, loaded);
                notes.push_back("variable ids re-indexed: " + map.str());
                break;
            }
        }
        if (loaded.data.variables() != cfg.variables) {
            throw InputError("data has " + std::to_string(loaded.data.variables()) + " variables but model.variables = " +
                             std::to_string(cfg.variables));
        }
        return std::move(loaded.data);
    }

    CorrelationFamily correlation(CorrelationFamily fallback) const {
        return cfg.correlation.empty() ? fallback : parse_correlation_family(cfg.correlation);
    }
    double nu(CorrelationFamily c) const {
        if (cfg.nu) return *cfg.nu;
        return c == CorrelationFamily::matern ? 1.5 : 0.5;
    }

    FamilyPtr family(const std::optional<Bounds>& box) {
        const auto& name = cfg.family;
        if (name == "lmc") {
            LmcFamilyOptions o;
            o.variables = cfg.variables;
            o.correlation = correlation(CorrelationFamily::exponential);
            o.nu = nu(o.correlation);
            o.regions = cfg.regions;
            if (box) o.box = *box;
            return make_lmc_family(o);
        }
        if (name == "conditional") {
            ConditionalFamilyOptions o;
            o.correlation = correlation(CorrelationFamily::matern);
            o.nu = nu(o.correlation);
            o.distance_decay = cfg.b_rule == "distance_decay";
            if (cfg.model_grid) o.grid = grid_of(*cfg.model_grid);
            if (cfg.condition_order) {
                o.order = {(*cfg.condition_order)[0], (*cfg.condition_order)[1]};
            } else {
                notes.push_back("condition_order not given: variable 1 conditions variable 2");
            }
            return make_conditional_family(o);
        }
        if (name == "sre") {
            SreFamilyOptions o;
            const auto& g = *cfg.basis_grid;
            o.centers = grid_of(g);
            double scale = 1.0;
            if (cfg.basis_scale.empty()) {
                const double dx = g.nx > 1 ? (g.xmax - g.xmin) / static_cast<double>(g.nx - 1) : 0.0;
                const double dy = g.ny > 1 ? (g.ymax - g.ymin) / static_cast<double>(g.ny - 1) : 0.0;
                scale = 1.5 * std::max({dx, dy, 1e-12});
                notes.push_back("basis_scale not given: using " + fmt(scale));
                o.scale = {scale, scale};
            } else if (cfg.basis_scale.size() == 1) {
                o.scale = {cfg.basis_scale[0], cfg.basis_scale[0]};
            } else if (cfg.basis_scale.size() == 2) {
                o.scale = {cfg.basis_scale[0], cfg.basis_scale[1]};
            } else {
                throw InputError("model.basis_scale: needs one or two values");
            }
            return make_sre_family(o);
        }
        KernelConvFamilyOptions o;
        o.variables = cfg.variables;
        o.correlation = correlation(CorrelationFamily::exponential);
        o.nu = nu(o.correlation);
        const auto pp = cfg.variables * cfg.variables;
        if (cfg.kernel_width.size() == 1) {
            o.widths.assign(pp, cfg.kernel_width[0]);
        } else if (!cfg.kernel_width.empty()) {
            if (cfg.kernel_width.size() != pp) throw InputError("model.kernel_width: needs 1 or p*p values");
            o.widths = cfg.kernel_width;
        }
        o.quadrature.nodes = cfg.quad_nodes;
        return make_kernel_conv_family(o);
    }

    static void assign(ParameterSet& ps, const std::string& group, const std::vector<double>& values,
                       const std::string& family, const std::string& source) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (ps.items()[i].group() == group) idx.push_back(i);
        }
        if (idx.empty()) throw InputError(source + "." + group + ": not a parameter of the " + family + " family");
        if (idx.size() != values.size()) {
            throw InputError(source + "." + group + ": the " + family + " family expects " + std::to_string(idx.size()) +
                             " values, got " + std::to_string(values.size()));
        }
        for (std::size_t k = 0; k < idx.size(); ++k) ps.items()[idx[k]].value = values[k];
    }

    ParameterSet params(const ModelFamily& fam, const std::map<std::string, std::vector<double>>& extra = {}) {
        auto ps = fam.defaults();
        for (const auto& [group, values] : cfg.params) assign(ps, group, values, fam.name(), "params");
        for (const auto& [group, values] : extra) assign(ps, group, values, fam.name(), "fit");
        const auto p = cfg.variables;
        if (!cfg.sigma_xi.empty() || !cfg.sigma_eps.empty()) {
            std::vector<double> total(p);
            for (std::size_t q = 0; q < p; ++q) {
                total[q] = (cfg.sigma_xi.empty() ? 0.0 : cfg.sigma_xi[q]) +
                           (cfg.sigma_eps.empty() ? 0.0 : cfg.sigma_eps[q * p + q]);
            }
            assign(ps, "nugget", total, fam.name(), "noise");
        }
        for (const auto& name : cfg.fixed) ps.fix(name);
        for (const auto& prm : ps.items()) {
            if (prm.value < prm.lower || prm.value > prm.upper) {
                throw InputError("parameter " + prm.name + " = " + fmt(prm.value) + " lies outside [" + fmt(prm.lower) +
                                 ", " + fmt(prm.upper) + "]");
            }
        }
        return ps;
    }

    NoiseSplit split() {
        const auto p = cfg.variables;
        if (!cfg.sigma_xi.empty() || !cfg.sigma_eps.empty()) {
            NoiseSplit s{std::vector<double>(p, 0.0), {}};
            std::vector<double> eps(p, 0.0);
            for (std::size_t q = 0; q < p; ++q) {
                const double xi = cfg.sigma_xi.empty() ? 0.0 : cfg.sigma_xi[q];
                eps[q] = cfg.sigma_eps.empty() ? 0.0 : cfg.sigma_eps[q * p + q];
                s.eps_fraction[q] = xi + eps[q] > 0.0 ? eps[q] / (xi + eps[q]) : 1.0;
            }
            if (!cfg.sigma_eps.empty()) {
                s.eps_corr.assign(p * p, 0.0);
                for (std::size_t q = 0; q < p; ++q) {
                    for (std::size_t r = 0; r < p; ++r) {
                        const double d = std::sqrt(eps[q] * eps[r]);
                        s.eps_corr[q * p + r] = q == r ? 1.0 : (d > 0.0 ? cfg.sigma_eps[q * p + r] / d : 0.0);
                    }
                }
            }
            return s;
        }
        NoiseSplit s = NoiseSplit::all_measurement_error(p);
        if (cfg.split.empty()) {
            notes.push_back("noise split not given: the whole nugget is treated as measurement error");
        } else {
            s.eps_fraction = cfg.split;
        }
        s.eps_corr = cfg.eps_corr;
        return s;
    }

    FitSettings fit_settings(std::uint64_t stream) const {
        FitSettings fs;
        fs.optimizer.max_iterations = cfg.max_iter;
        fs.optimizer.tolerance = cfg.tolerance;
        fs.optimizer.starts = cfg.restarts;
        fs.optimizer.seed = derive_seed(seed(), stream);
        fs.dense_cap = cfg.dense_cap;
        return fs;
    }

    LagBins bins(const MultivariateDataset& data, bool directional) const {
        const auto box = bounding_box(data);
        const double diag = std::hypot(box.xmax - box.xmin, box.ymax - box.ymin);
        const double max_lag = cfg.max_lag.value_or(diag > 0.0 ? 0.5 * diag : 1.0);
        auto b = LagBins::uniform(max_lag, cfg.bins);
        if (directional) {
            b.directional = DirectionalSpec{cfg.axis_deg * std::numbers::pi / 180.0,
                                            cfg.tolerance_deg * std::numbers::pi / 180.0};
        }
        return b;
    }

    static std::string params_section(const ParameterSet& ps) {
        std::ostringstream out;
        out << "[params]\n";
        std::vector<std::string> groups;
        for (const auto& p : ps.items()) {
            if (std::find(groups.begin(), groups.end(), p.group()) == groups.end()) groups.push_back(p.group());
        }
        for (const auto& g : groups) out << g << " = " << join(ps.group_values(g)) << '\n';
        return out.str();
    }

    static std::string summaries_csv(const std::vector<EmpiricalSummary>& summaries) {
        std::ostringstream out;
        out << "pair_q,pair_r,bin_center,value,count\n";
        for (const auto& s : summaries) {
            for (std::size_t b = 0; b < s.values.size(); ++b) {
                out << s.q + 1 << ',' << s.r + 1 << ',' << fmt(s.bin_centers[b]) << ',' << fmt(s.values[b]) << ','
                    << s.pair_counts[b] << '\n';
            }
        }
        return out.str();
    }

    // ------------------------------------------------------------------

    void simulate() {
        const auto p = cfg.variables;
        const auto locs = grid_of(cfg.sim_grid ? *cfg.sim_grid : *cfg.model_grid);
        Bounds box{locs[0].x, locs[0].x, locs[0].y, locs[0].y};
        for (const auto& s : locs) {
            box.xmin = std::min(box.xmin, s.x);
            box.xmax = std::max(box.xmax, s.x);
            box.ymin = std::min(box.ymin, s.y);
            box.ymax = std::max(box.ymax, s.y);
        }
        const auto fam = family(box);
        const auto ps = params(*fam);
        const auto model = fam->build(ps, split());
        const auto bundle = assemble_data_cov(model, std::vector<LocationSet>(p, locs));
        std::vector<double> means = cfg.sim_mean.empty() ? std::vector<double>(p, 0.0) : cfg.sim_mean;
        auto data = FieldSampler(bundle).draw(means, derive_seed(seed(), 1));

        if (cfg.subsample && *cfg.subsample < locs.size()) {
            std::vector<VariableSeries> kept;
            for (std::size_t q = 0; q < p; ++q) {
                std::vector<std::size_t> order(locs.size());
                std::iota(order.begin(), order.end(), 0);
                auto engine = make_engine(derive_seed(seed(), 2 + q));
                std::shuffle(order.begin(), order.end(), engine);
                order.resize(*cfg.subsample);
                std::sort(order.begin(), order.end());
                std::vector<Location> l;
                std::vector<double> v;
                for (auto i : order) {
                    l.push_back(data[q].locations()[i]);
                    v.push_back(data[q].values()[i]);
                }
                kept.emplace_back(q, std::move(l), std::move(v));
            }
            data = MultivariateDataset(std::move(kept));
        }

        std::ostringstream csv;
        write_dataset(csv, data);
        emit("simulated.csv", csv.str());
        std::ostringstream cert;
        cert << "[certificate]\nmin_eigenvalue = " << fmt(bundle.certificate.min_eigenvalue)
             << "\ntrace = " << fmt(bundle.certificate.trace) << "\ntolerance = " << fmt(bundle.certificate.tol_used)
             << "\npass = " << (bundle.certificate.pass ? "true" : "false") << '\n';
        emit("certificate.txt", cert.str());
        if (cfg.export_bundle) {
            std::ostringstream cov;
            const auto& j = bundle.joint;
            for (Eigen::Index r = 0; r < j.rows(); ++r) {
                for (Eigen::Index c = 0; c < j.cols(); ++c) cov << (c ? "," : "") << fmt(j(r, c));
                cov << '\n';
            }
            emit("covariance.csv", cov.str());
        }
    }

    void fit() {
        const auto data = load();
        const auto fam = family(bounding_box(data));
        const auto init = params(*fam);
        auto fs = fit_settings(3);
        fs.split = split();
        std::optional<FitResult> result;
        std::vector<EmpiricalSummary> summaries;
        if (cfg.method == "wls") {
            const auto b = bins(data, false);
            for (std::size_t q = 0; q < data.variables(); ++q) {
                for (std::size_t r = q; r < data.variables(); ++r) summaries.push_back(pseudo_cross_variogram(data, q, r, b));
            }
            result = fit_wls(summaries, *fam, init, fs);
            emit("pseudo_cross_variogram.csv", summaries_csv(summaries));
        } else {
            result = fit_ml(data, *fam, init, fs);
        }
        std::ostringstream out;
        out << "[model]\nfamily = " << fam->name() << "\n\n" << params_section(result->params()) << "\n[fit]\n";
        out << "method = " << cfg.method << '\n';
        out << "objective = " << fmt(result->objective()) << '\n';
        if (result->loglik()) {
            const auto ic = information_criteria(*result);
            out << "loglik = " << fmt(*result->loglik()) << '\n';
            out << "aic = " << fmt(ic.aic) << '\n';
            out << "aicc = " << (ic.aicc ? fmt(*ic.aicc) : std::string("undefined")) << '\n';
        }
        out << "k = " << result->k() << "\nn = " << result->n() << '\n';
        out << "converged = " << (result->converged() ? "true" : "false") << '\n';
        out << "iterations = " << result->iterations() << '\n';
        if (!result->means.empty()) out << "means = " << join(result->means) << '\n';
        out << "at_boundary = " << join(result->at_boundary) << '\n';
        out << "fixed = " << join(cfg.fixed) << '\n';
        emit("fit.txt", out.str());
        if (!result->converged()) notes.push_back("optimizer did not converge");
    }

    void predict() {
        const auto data = load();
        const auto fam = family(bounding_box(data));
        std::map<std::string, std::vector<double>> fitted;
        std::vector<double> fit_means;
        if (cfg.fit_path) {
            const auto path = cfg.resolve(*cfg.fit_path);
            std::ifstream in(path);
            if (!in) throw InputError("cannot open fit file " + path.string());
            const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            std::vector<std::string> errors;
            auto sections = parse_sections(text, errors);
            if (!errors.empty()) throw InputError("fit file " + path.string() + ": " + errors.front());
            if (sections["model"].count("family") && sections["model"]["family"] != fam->name()) {
                throw InputError("fit file was produced by the " + sections["model"]["family"] + " family, config asks for " +
                                 fam->name());
            }
            auto numbers = [&](const std::string& v) {
                std::vector<double> out;
                std::istringstream items(v);
                std::string item;
                while (std::getline(items, item, ',')) {
                    try {
                        out.push_back(std::stod(item));
                    } catch (const std::exception&) {
                        throw InputError("fit file " + path.string() + ": bad number '" + item + "'");
                    }
                }
                return out;
            };
            for (const auto& [group, v] : sections["params"]) fitted[group] = numbers(v);
            if (sections["fit"].count("means")) fit_means = numbers(sections["fit"]["means"]);
        }
        const auto ps = params(*fam, fitted);
        const auto model = fam->build(ps, split());
        std::vector<double> means = cfg.means;
        if (means.empty()) means = fit_means;
        if (means.empty()) {
            for (const auto& s : data.series()) means.push_back(s.mean());
            notes.push_back("means not given: using sample means");
        }
        if (means.size() != data.variables()) throw InputError("need one mean per variable");
        const PredictionTarget target{parse_predictand(cfg.predictand), cfg.predict_variable, grid_of(*cfg.targets)};
        const auto pred = cokrige(model, data, means, target);
        if (pred.clamped > 0) {
            notes.push_back("warning: " + std::to_string(pred.clamped) + " tiny negative variances clamped to 0");
        }
        std::ostringstream csv;
        csv << "variable,x,y,mean,variance\n";
        for (std::size_t i = 0; i < pred.means.size(); ++i) {
            const auto& s = target.locations[i];
            csv << cfg.predict_variable + 1 << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(pred.means[i]) << ','
                << fmt(pred.variances[i]) << '\n';
        }
        emit("predictions.csv", csv.str());
        notes.push_back("plug-in predictors and their standard errors ignore parameter uncertainty");
    }

    void validate() {
        const auto data = load();
        const auto fam = family(bounding_box(data));
        const auto init = params(*fam);
        ValidationSettings vs;
        vs.folds = cfg.folds;
        vs.seed = seed();
        vs.fit = fit_settings(4);
        vs.split = split();
        vs.fit.split = vs.split;
        const auto report = cross_validate(data, *fam, init, vs);
        std::ostringstream out;
        out << "[validation]\nfolds = " << report.k << "\nseed = " << report.seed << "\nn_heldout = " << report.n_heldout
            << '\n';
        for (std::size_t q = 0; q < report.rmse.size(); ++q) {
            out << "\n[variable " << q + 1 << "]\nrmse = " << fmt(report.rmse[q]) << "\ncrps = " << fmt(report.mean_crps[q])
                << "\nn_heldout = " << report.heldout_per_variable[q] << '\n';
        }
        emit("validation.txt", out.str());
        std::ostringstream folds;
        folds << "variable,x,y,fold\n";
        for (std::size_t q = 0; q < data.variables(); ++q) {
            for (std::size_t i = 0; i < data[q].size(); ++i) {
                const auto& s = data[q].locations()[i];
                folds << q + 1 << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << report.folds[q][i] + 1 << '\n';
            }
        }
        emit("folds.csv", folds.str());
    }

    void diagnose() {
        const auto data = load();
        const auto b = bins(data, cfg.directional);
        std::vector<EmpiricalSummary> pseudo, cross;
        for (std::size_t q = 0; q < data.variables(); ++q) {
            for (std::size_t r = q; r < data.variables(); ++r) {
                pseudo.push_back(pseudo_cross_variogram(data, q, r, b));
                cross.push_back(empirical_cross_cov(data, q, r, b));
            }
        }
        emit("pseudo_cross_variogram.csv", summaries_csv(pseudo));
        emit("empirical_cross_cov.csv", summaries_csv(cross));

        const auto box = bounding_box(data);
        const auto fam = family(box);
        const auto model = fam->build(params(*fam), split());
        const Location probe = cfg.probe ? Location{(*cfg.probe)[0], (*cfg.probe)[1]}
                                         : Location{0.5 * (box.xmin + box.xmax), 0.5 * (box.ymin + box.ymax)};
        const auto gap = origin_gap(model, probe);
        std::ostringstream out;
        out << "[origin_gap]\nfamily = " << fam->name() << "\nprobe = " << fmt(probe.x) << ", " << fmt(probe.y)
            << "\neps_h = " << fmt(gap.eps_h) << '\n';
        for (Eigen::Index q = 0; q < gap.gap.rows(); ++q) {
            std::vector<double> row(gap.gap.cols());
            for (Eigen::Index r = 0; r < gap.gap.cols(); ++r) row[static_cast<std::size_t>(r)] = gap.gap(q, r);
            out << "row[" << q + 1 << "] = " << join(row) << '\n';
        }
        out << "certificate_min_eigenvalue = " << fmt(gap.certificate.min_eigenvalue)
            << "\ncertificate_pass = " << (gap.certificate.pass ? "true" : "false") << '\n';

        out << "\n[data_covariance]\n";
        if (data.total_size() <= cfg.dense_cap) {
            const auto cert = check_nnd(data_covariance(model, data.location_sets()), kBundleTolerance);
            out << "min_eigenvalue = " << fmt(cert.min_eigenvalue) << "\ntrace = " << fmt(cert.trace)
                << "\ntolerance = " << fmt(cert.tol_used) << "\npass = " << (cert.pass ? "true" : "false") << '\n';
        } else {
            out << "skipped = n above dense cap\n";
        }

        out << "\n[collocation]\n";
        const auto col = collocation_report(data, 0.0);
        for (Eigen::Index q = 0; q < col.rows(); ++q) {
            out << "row[" << q + 1 << "] = ";
            for (Eigen::Index r = 0; r < col.cols(); ++r) out << (r ? ", " : "") << col(q, r);
            out << '\n';
        }
        emit("diagnostics.txt", out.str());
    }
};

std::string error_json(int status, const std::string& kind, const std::vector<std::string>& errors) {
    nlohmann::json j;
    j["status"] = status;
    j["kind"] = kind;
    j["errors"] = errors;
    return j.dump();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

RunOutcome fail(const std::filesystem::path& out_dir, int status, const std::string& kind,
                const std::vector<std::string>& errors) {
    RunOutcome o;
    o.status = status;
    o.out_dir = out_dir;
    o.error = error_json(status, kind, errors);
    try {
        std::filesystem::create_directories(out_dir);
        write_file(out_dir / "error.log", o.error + "\n");
        o.files.push_back("error.log");
    } catch (const std::exception&) {
    }
    return o;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

} // namespace

RunOutcome run(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    const auto started_utc = utc_now();
    const auto out_dir = config.out_dir;
    Session session{config, {}, {}, {}, {}};
    try {
        switch (config.command) {
        case Command::simulate: session.simulate(); break;
        case Command::fit: session.fit(); break;
        case Command::predict: session.predict(); break;
        case Command::validate: session.validate(); break;
        case Command::diagnose: session.diagnose(); break;
        }
    } catch (const InputError& e) {
        return fail(out_dir, kExitInput, "input", {e.what()});
    } catch (const NumericalError& e) {
        return fail(out_dir, kExitNumerical, "numerical", {e.what()});
    } catch (const std::bad_alloc&) {
        return fail(out_dir, kExitNumerical, "numerical", {"out of memory"});
    } catch (const std::exception& e) {
        return fail(out_dir, kExitInput, "input", {e.what()});
    }

    RunOutcome outcome;
    outcome.out_dir = out_dir;
    try {
        std::filesystem::create_directories(out_dir);
        std::filesystem::remove(out_dir / "error.log");
        for (const auto& [name, content] : session.files) {
            write_file(out_dir / name, content);
            outcome.files.push_back(name);
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::ostringstream m;
        m << "[manifest]\ncommand = " << to_string(config.command) << "\nversion = " << COKRIG_VERSION
          << "\nstarted_utc = " << started_utc << "\nwall_seconds = " << fmt(wall)
          << "\nthreads = " << kernels::thread_count() << '\n';
        if (session.input) {
            std::ostringstream crc;
            crc << std::hex << std::setw(8) << std::setfill('0') << *session.input_crc;
            m << "input = " << session.input->string() << "\ninput_crc32 = " << crc.str() << '\n';
        }
        m << "outputs = " << join(outcome.files) << '\n';
        m << "\n[notes]\n";
        for (std::size_t i = 0; i < session.notes.size(); ++i) m << "note" << i + 1 << " = " << session.notes[i] << '\n';
        for (const auto& [section, entries] : config.sections) {
            m << "\n[config." << section << "]\n";
            for (const auto& [k, v] : entries) m << k << " = " << v << '\n';
        }
        write_file(out_dir / "manifest.txt", m.str());
        outcome.files.push_back("manifest.txt");
    } catch (const std::exception& e) {
        for (const auto& name : outcome.files) std::filesystem::remove(out_dir / name);
        return fail(out_dir, kExitInput, "io", {e.what()});
    }
    return outcome;
}

RunOutcome run_cli(const CliArgs& args, std::ostream& err) {
    auto out_dir_for = [&](const ConfigSections& sections) {
        if (args.out_dir) return *args.out_dir;
        const auto base = args.config_path.parent_path();
        if (auto r = sections.find("run"); r != sections.end()) {
            if (auto o = r->second.find("out"); o != r->second.end()) {
                const std::filesystem::path p = o->second;
                return p.is_absolute() ? p : base / p;
            }
        }
        return base / "out";
    };

    std::ifstream in(args.config_path);
    if (!in) {
        auto o = fail(args.out_dir.value_or("out"), kExitInput, "config",
                      {"cannot read config file " + args.config_path.string()});
        err << o.error << '\n';
        return o;
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto result = validate_config(text, args.command, args.config_path.parent_path());
    if (result.config && args.noise_split) {
        auto errors = apply_noise_split(*result.config, *args.noise_split);
        if (!errors.empty()) {
            result.errors = std::move(errors);
            result.config.reset();
        }
    }
    if (!result.config) {
        std::vector<std::string> ignored;
        const auto o = fail(out_dir_for(parse_sections(text, ignored)), kExitInput, "config", result.errors);
        err << o.error << '\n';
        return o;
    }
    auto& cfg = *result.config;
    cfg.out_dir = out_dir_for(cfg.sections);
    const auto outcome = run(cfg);
    if (outcome.status != kExitOk) err << outcome.error << '\n';
    return outcome;
}

} // namespace cokrig
