#include "cokrig/optimize.hpp"

#include <cmath>
#include <memory>
#include <random>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "cokrig/rng.hpp"

namespace cokrig {

namespace {

struct Context {
    const std::function<double(const Eigen::VectorXd&)>* f;
    Eigen::VectorXd x;
};

double evaluate(const gsl_vector* v, void* raw) {
    auto* ctx = static_cast<Context*>(raw);
    for (Eigen::Index i = 0; i < ctx->x.size(); ++i) ctx->x(i) = gsl_vector_get(v, static_cast<std::size_t>(i));
    const double value = (*ctx->f)(ctx->x);
    return std::isfinite(value) ? std::min(value, kRejectedValue) : kRejectedValue;
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct Run {
    Eigen::VectorXd x;
    double value;
    bool converged;
    int iterations;
};

Run run_simplex(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
                const OptimizerSettings& settings, double& best, std::vector<double>& trace) {
    const auto n = static_cast<std::size_t>(start.size());
    Context ctx{&f, Eigen::VectorXd(start.size())};
    gsl_multimin_function fn{&evaluate, n, &ctx};

    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n)), step(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, start(static_cast<Eigen::Index>(i)));
    gsl_vector_set_all(step.get(), settings.initial_step);

    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());

    Run run{start, s->fval, false, 0};
    for (int it = 0; it < settings.max_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
        ++run.iterations;
        best = std::min(best, s->fval);
        trace.push_back(best);
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), settings.tolerance) == GSL_SUCCESS) {
            run.converged = true;
            break;
        }
    }
    const gsl_vector* xm = gsl_multimin_fminimizer_x(s.get());
    for (std::size_t i = 0; i < n; ++i) run.x(static_cast<Eigen::Index>(i)) = gsl_vector_get(xm, i);
    run.value = gsl_multimin_fminimizer_minimum(s.get());
    return run;
}

} // namespace

OptimizerResult minimize(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                         const OptimizerSettings& settings) {
    static const bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;

    OptimizerResult result;
    if (x0.size() == 0) {
        result.x = x0;
        result.value = f(x0);
        result.converged = true;
        result.trace.push_back(result.value);
        return result;
    }

    auto engine = make_engine(settings.seed);
    std::normal_distribution<double> normal(0.0, settings.jitter);
    double best = f(x0);
    if (!std::isfinite(best)) best = kRejectedValue;
    result.x = x0;
    result.value = best;
    const int starts = std::max(settings.starts, 1);
    for (int start = 0; start < starts; ++start) {
        Eigen::VectorXd init = x0;
        if (start > 0) {
            for (Eigen::Index i = 0; i < init.size(); ++i) init(i) += normal(engine);
        }
        Run run = run_simplex(f, init, settings, best, result.trace);
        result.iterations += run.iterations;
        if (start == 0 || run.value < result.value) {
            result.x = run.x;
            result.value = run.value;
            result.converged = run.converged;
        }
    }
    return result;
}

} // namespace cokrig
