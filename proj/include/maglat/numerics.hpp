#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace maglat {

/// Neumaier-compensated accumulator.
template <class T>
class CompensatedSum {
 public:
  CompensatedSum() : sum_(T::Zero()), comp_(T::Zero()) {}

  void add(const T& x) {
    const T t = sum_ + x;
    for (int i = 0; i < static_cast<int>(x.size()); ++i) {
      if (std::abs(sum_[i]) >= std::abs(x[i]))
        comp_[i] += (sum_[i] - t[i]) + x[i];
      else
        comp_[i] += (x[i] - t[i]) + sum_[i];
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_;
  T comp_;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers with static
/// contiguous chunks. Results must be written to per-index slots, so output
/// is independent of the thread count. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// n evenly spaced values on [a, b] (a single value gives the midpoint).
inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = 0.5 * (a + b);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace maglat
