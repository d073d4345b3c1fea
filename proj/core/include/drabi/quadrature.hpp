#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace drabi::quad {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  std::size_t max_intervals = 4000;
};

template <std::size_t N>
struct Result {
  Vec<N> value{};
  Vec<N> error{};
  std::size_t intervals = 0;
  bool converged = false;
};

/// Adaptive 21-point Gauss-Kronrod integration of a vector-valued integrand
/// over [a, b], pre-split at `breaks`. Every component must satisfy
/// err <= max(rel_tol |I|, abs_tol). The interval with the largest scaled
/// error is bisected until converged or max_intervals is reached.
template <std::size_t N>
Result<N> integrate(const std::function<Vec<N>(double)>& f, double a, double b,
                    std::span<const double> breaks, const Options& opt);

double integrate_scalar(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breaks, const Options& opt,
                        double* error_out = nullptr);

extern template Result<1> integrate<1>(const std::function<Vec<1>(double)>&, double, double,
                                       std::span<const double>, const Options&);
extern template Result<2> integrate<2>(const std::function<Vec<2>(double)>&, double, double,
                                       std::span<const double>, const Options&);
extern template Result<4> integrate<4>(const std::function<Vec<4>(double)>&, double, double,
                                       std::span<const double>, const Options&);

}  // namespace drabi::quad
