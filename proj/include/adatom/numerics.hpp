#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace adatom {

struct QuadRule {
    std::vector<double> nodes;    // on [-1,1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights, computed once per order and cached.
const QuadRule& gauss_legendre(int order);

// Composite Gauss-Legendre over [a,b] split into `pieces` equal subintervals.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int pieces, int order = 8);

// Bisection on [lo,hi] assuming f(lo) and f(hi) have opposite sign.
// Stops when the bracket width falls below rel_tol * max(|lo|,|hi|,1).
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double rel_tol = 1e-12, int max_iter = 200);

// Quintic smoothstep: s(0)=0, s(1)=1, s'(0)=s'(1)=0, s''(0)=s''(1)=0.
double smoothstep(double t);
double smoothstep_deriv(double t);

// Monotone cubic interpolant (Fritsch-Carlson limited slopes).
// Keeps the data monotone and is C1; eval/deriv are analytic per segment.
class MonotoneCubic {
  public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double eval(double t) const;
    double deriv(double t) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

  private:
    std::size_t segment(double t) const;
    std::vector<double> x_, y_, d_;  // d_ = node slopes
};

// Index-sharded parallel loop. Thread count is min(hardware, RELAX_THREADS);
// each index writes only its own slot, so results do not depend on sharding.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

int max_threads();

}  // namespace adatom
