#include "drabi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace drabi::quad {
namespace {

// QUADPACK qk21 abscissae and weights.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208931957080, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <std::size_t N>
struct Panel {
  double a;
  double b;
  Vec<N> value;
  Vec<N> error;
  double priority;
};

template <std::size_t N>
Panel<N> gk21(const std::function<Vec<N>(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Vec<N> kron{};
  Vec<N> gauss{};

  const Vec<N> fc = f(center);
  for (std::size_t c = 0; c < N; ++c) kron[c] = fc[c] * kWgk[10];

  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const Vec<N> f1 = f(center - dx);
    const Vec<N> f2 = f(center + dx);
    for (std::size_t c = 0; c < N; ++c) {
      const double s = f1[c] + f2[c];
      kron[c] += kWgk[j] * s;
      if (j % 2 == 1) gauss[c] += kWg[j / 2] * s;
    }
  }

  Panel<N> p{a, b, {}, {}, 0.0};
  for (std::size_t c = 0; c < N; ++c) {
    p.value[c] = kron[c] * half;
    p.error[c] = std::abs((kron[c] - gauss[c]) * half);
  }
  return p;
}

template <std::size_t N>
double scaled_error(const Panel<N>& p, const Vec<N>& scale) {
  double worst = 0.0;
  for (std::size_t c = 0; c < N; ++c) worst = std::max(worst, p.error[c] / scale[c]);
  return worst;
}

}  // namespace

template <std::size_t N>
Result<N> integrate(const std::function<Vec<N>(double)>& f, double a, double b,
                    std::span<const double> breaks, const Options& opt) {
  Result<N> out;
  if (!(b > a)) {
    out.converged = true;
    return out;
  }

  std::vector<double> edges{a};
  for (double x : breaks)
    if (x > a && x < b) edges.push_back(x);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<Panel<N>> panels;
  panels.reserve(opt.max_intervals + 2);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) panels.push_back(gk21<N>(f, edges[i], edges[i + 1]));

  auto totals = [&](Vec<N>& value, Vec<N>& error) {
    value.fill(0.0);
    error.fill(0.0);
    for (const auto& p : panels)
      for (std::size_t c = 0; c < N; ++c) {
        value[c] += p.value[c];
        error[c] += p.error[c];
      }
  };

  auto cmp = [](const Panel<N>* x, const Panel<N>* y) { return x->priority < y->priority; };

  Vec<N> value{};
  Vec<N> error{};
  totals(value, error);

  while (true) {
    Vec<N> scale{};
    bool done = true;
    for (std::size_t c = 0; c < N; ++c) {
      scale[c] = std::max(opt.rel_tol * std::abs(value[c]), opt.abs_tol);
      if (error[c] > scale[c]) done = false;
    }
    if (done) {
      out.converged = true;
      break;
    }
    if (panels.size() >= opt.max_intervals) break;

    // Rebuild the queue with current scales and bisect a batch of the worst panels.
    std::priority_queue<Panel<N>*, std::vector<Panel<N>*>, decltype(cmp)> heap(cmp);
    for (auto& p : panels) {
      p.priority = scaled_error(p, scale);
      heap.push(&p);
    }
    const std::size_t batch = std::max<std::size_t>(1, panels.size() / 8);
    std::vector<Panel<N>> fresh;
    std::vector<Panel<N>*> split;
    for (std::size_t k = 0; k < batch && !heap.empty(); ++k) {
      Panel<N>* worst = heap.top();
      heap.pop();
      if (worst->priority <= 1.0 / static_cast<double>(panels.size()) && k > 0) break;
      split.push_back(worst);
    }
    for (Panel<N>* p : split) {
      const double mid = 0.5 * (p->a + p->b);
      if (!(mid > p->a && mid < p->b)) continue;
      fresh.push_back(gk21<N>(f, p->a, mid));
      *p = gk21<N>(f, mid, p->b);
    }
    if (fresh.empty()) break;
    for (auto& p : fresh) panels.push_back(std::move(p));
    totals(value, error);
  }

  out.value = value;
  out.error = error;
  out.intervals = panels.size();
  return out;
}

template Result<1> integrate<1>(const std::function<Vec<1>(double)>&, double, double,
                                std::span<const double>, const Options&);
template Result<2> integrate<2>(const std::function<Vec<2>(double)>&, double, double,
                                std::span<const double>, const Options&);
template Result<4> integrate<4>(const std::function<Vec<4>(double)>&, double, double,
                                std::span<const double>, const Options&);

double integrate_scalar(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breaks, const Options& opt, double* error_out) {
  auto r = integrate<1>([&](double x) { return Vec<1>{f(x)}; }, a, b, breaks, opt);
  if (error_out) *error_out = r.error[0];
  return r.value[0];
}

}  // namespace drabi::quad
