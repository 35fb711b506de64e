#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include "buck/neural.hpp"

namespace buck {

/// Number of samples folded into one partial gradient. The partition depends only on the
/// dataset size, so the summation order (and every bit of the result) is thread-count independent.
inline constexpr std::size_t kGradientBlock = 512;

struct BatchGradient {
    Gradients grad;
    double cost = 0.0;  // (1 / 2P) * sum (pred - target)^2 at the current weights
};

/// Straight sequential accumulation over all rows.
BatchGradient batch_gradient_serial(const Mlp& net, const StandardizedData& data);

/// OpenMP kernel: per-block partial sums, reduced in block order.
BatchGradient batch_gradient(const Mlp& net, const StandardizedData& data);

/// Runs fn(i) for i in [0, n) across OpenMP threads. The first exception thrown by any
/// iteration is rethrown on the calling thread after the loop.
template <class Fn>
void parallel_for_index(std::size_t n, Fn&& fn) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Sequential counterpart of parallel_for_index.
template <class Fn>
void serial_for_index(std::size_t n, Fn&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace buck
