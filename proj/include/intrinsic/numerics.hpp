#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace intrinsic {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Probabilists' Gauss–Hermite rule: weights sum to 1 against the standard normal.
Rule1D gauss_hermite_rule(int m);
/// Gauss–Legendre rule on [a, b] (weights sum to b − a).
Rule1D gauss_legendre_rule(int m, double a = -1.0, double b = 1.0);

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

IntegralResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                double rel_tol = 1e-10, double abs_tol = 1e-300,
                                int max_depth = 50);

/// Adaptive Gauss–Kronrod on a finite or semi-infinite interval (b may be +inf).
IntegralResult adaptive_kronrod(const std::function<double(double)>& f, double a, double b,
                                double rel_tol = 1e-12, int max_depth = 20);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;
    double derivative(double t) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::size_t locate(double t) const;
    std::vector<double> x_, y_, d_;
};

/// Natural-order cubic interpolation on a uniform grid (Catmull–Rom style, C¹).
class UniformCubic {
public:
    UniformCubic() = default;
    UniformCubic(double x0, double dx, std::vector<double> y);
    double operator()(double t) const;

private:
    double x0_ = 0.0, dx_ = 1.0;
    std::vector<double> y_;
};

/// Dense-output-free adaptive Dormand–Prince 5(4) stepper.
struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;
    std::size_t max_steps = 2000000;
};

using OdeRhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;
/// Called after every accepted step; may modify the state (projection). Returns false to stop.
using OdeObserver = std::function<bool(double, std::vector<double>&)>;

struct OdeResult {
    bool completed = true;
    double t_end = 0.0;
    std::size_t steps = 0;
};

OdeResult integrate_dopri(const OdeRhs& rhs, std::vector<double>& y, double t0, double t1,
                          const OdeOptions& opt, const OdeObserver& observer = {});

/// Classical fixed-step RK4 on the same state layout.
void integrate_rk4(const OdeRhs& rhs, std::vector<double>& y, double t0, double t1,
                   std::size_t steps);

/// Worker-count setting shared by every parallel loop.
void set_worker_count(unsigned jobs);
unsigned worker_count();

/// Runs body(chunk_begin, chunk_end) over fixed chunks of [0, n); chunk boundaries do
/// not depend on the worker count.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Deterministic per-stream generator keyed by (seed, stream index).
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

/// Sum in index order with Neumaier compensation.
double ordered_sum(const std::vector<double>& v);

}  // namespace intrinsic
