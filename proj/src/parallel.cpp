#include "buck/parallel.hpp"

#include <algorithm>
#include <vector>

namespace buck {

namespace {

struct Scratch {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
    std::vector<double> delta;
    std::vector<double> delta_prev;
};

// Sums rows [begin, end) into acc and returns the summed squared error.
double accumulate_rows(const Mlp& net, const StandardizedData& data, std::size_t begin, std::size_t end,
                       double inv_batch, Gradients& acc, Scratch& scratch) {
    double sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double pred = accumulate_backward(net, data.input(i), data.targets[i], inv_batch, acc, scratch.pre,
                                                scratch.post, scratch.delta, scratch.delta_prev);
        const double r = pred - data.targets[i];
        sq += r * r;
    }
    return sq;
}

}  // namespace

BatchGradient batch_gradient_serial(const Mlp& net, const StandardizedData& data) {
    const std::size_t n = data.size();
    if (n == 0) throw ValidationError("batch gradient needs at least one row");
    const double inv = 1.0 / static_cast<double>(n);
    BatchGradient out{Gradients::zeros_like(net), 0.0};
    Scratch scratch;
    Gradients block = Gradients::zeros_like(net);
    const Gradients zero = block;
    double sq = 0.0;
    for (std::size_t begin = 0; begin < n; begin += kGradientBlock) {
        block = zero;
        sq += accumulate_rows(net, data, begin, std::min(n, begin + kGradientBlock), inv, block, scratch);
        out.grad += block;
    }
    out.cost = 0.5 * sq * inv;
    return out;
}

BatchGradient batch_gradient(const Mlp& net, const StandardizedData& data) {
    const std::size_t n = data.size();
    if (n == 0) throw ValidationError("batch gradient needs at least one row");
    const std::size_t blocks = (n + kGradientBlock - 1) / kGradientBlock;
    const double inv = 1.0 / static_cast<double>(n);

    std::vector<Gradients> partial(blocks, Gradients::zeros_like(net));
    std::vector<double> partial_sq(blocks, 0.0);

#pragma omp parallel
    {
        Scratch scratch;
#pragma omp for schedule(static)
        for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
            const std::size_t begin = static_cast<std::size_t>(b) * kGradientBlock;
            const std::size_t end = std::min(n, begin + kGradientBlock);
            partial_sq[b] = accumulate_rows(net, data, begin, end, inv, partial[b], scratch);
        }
    }

    BatchGradient out{Gradients::zeros_like(net), 0.0};
    double sq = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        out.grad += partial[b];
        sq += partial_sq[b];
    }
    out.cost = 0.5 * sq * inv;
    return out;
}

}  // namespace buck
