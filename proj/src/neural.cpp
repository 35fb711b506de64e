#include "buck/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "buck/parallel.hpp"

namespace buck {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "?";
}

std::string_view to_string(Optimizer o) {
    switch (o) {
        case Optimizer::sgd: return "sgd";
        case Optimizer::adam: return "adam";
        case Optimizer::rmsprop: return "rmsprop";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    for (Activation a : kActivations)
        if (to_string(a) == name) return a;
    throw ValidationError("unknown activation '" + std::string(name) + "' (expected relu|sigmoid|tanh)");
}

Optimizer parse_optimizer(std::string_view name) {
    for (Optimizer o : kOptimizers)
        if (to_string(o) == name) return o;
    throw ValidationError("unknown optimizer '" + std::string(name) + "' (expected sgd|adam|rmsprop)");
}

std::vector<double> Normalization::standardize_input(std::span<const double> physical) const {
    if (physical.size() != input_mean.size()) throw ValidationError("input size does not match normalization");
    std::vector<double> z(physical.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (physical[i] - input_mean[i]) / input_scale[i];
    return z;
}

namespace {

// Uniform double in [0,1) from the top 53 bits; mt19937_64 output is fixed by the standard.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Mlp Mlp::create(std::vector<std::size_t> layer_sizes, Activation activation, std::uint64_t seed) {
    if (layer_sizes.size() < 3) throw ValidationError("an MLP needs an input, at least one hidden and an output layer");
    if (layer_sizes.back() != 1) throw ValidationError("the output layer must have exactly one node");
    for (std::size_t n : layer_sizes)
        if (n == 0) throw ValidationError("layer sizes must be positive");

    Mlp net;
    net.layer_sizes = std::move(layer_sizes);
    net.activation = activation;
    net.seed = seed;
    net.normalization.input_mean.assign(net.layer_sizes.front(), 0.0);
    net.normalization.input_scale.assign(net.layer_sizes.front(), 1.0);

    std::mt19937_64 rng(seed);
    for (std::size_t k = 1; k < net.layer_sizes.size(); ++k) {
        DenseLayer layer;
        layer.inputs = net.layer_sizes[k - 1];
        layer.outputs = net.layer_sizes[k];
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        layer.weights.resize(layer.inputs * layer.outputs);
        for (double& w : layer.weights) w = (2.0 * unit_uniform(rng) - 1.0) * limit;
        layer.bias.assign(layer.outputs, 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

void Mlp::validate() const {
    if (layer_sizes.size() < 3 || layers.size() != layer_sizes.size() - 1)
        throw ValidationError("layer count does not match layer_sizes");
    if (layer_sizes.back() != 1) throw ValidationError("the output layer must have exactly one node");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.inputs != layer_sizes[k] || l.outputs != layer_sizes[k + 1] ||
            l.weights.size() != l.inputs * l.outputs || l.bias.size() != l.outputs)
            throw ValidationError("weight shapes inconsistent with layer_sizes at layer " + std::to_string(k + 1));
        for (double w : l.weights)
            if (!std::isfinite(w)) throw ValidationError("non-finite weight");
        for (double b : l.bias)
            if (!std::isfinite(b)) throw ValidationError("non-finite bias");
    }
    if (normalization.input_mean.size() != layer_sizes.front() ||
        normalization.input_scale.size() != layer_sizes.front())
        throw ValidationError("normalization size does not match the input layer");
    for (double s : normalization.input_scale)
        if (!(s > 0.0)) throw ValidationError("normalization input_scale must be positive");
    if (!(normalization.target_scale > 0.0)) throw ValidationError("normalization target_scale must be positive");
}

double activate(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::tanh: return std::tanh(x);
    }
    return x;
}

double activate_derivative(Activation a, double pre, double post) {
    switch (a) {
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: return post * (1.0 - post);
        case Activation::tanh: return 1.0 - post * post;
    }
    return 1.0;
}

namespace {

void check_input(const Mlp& net, std::span<const double> input) {
    if (input.size() != net.input_size())
        throw ValidationError("input length " + std::to_string(input.size()) + " does not match input layer " +
                              std::to_string(net.input_size()));
}

// Forward pass into caller-provided buffers; returns the linear output.
double forward_into(const Mlp& net, std::span<const double> input, std::vector<std::vector<double>>& pre,
                    std::vector<std::vector<double>>& post) {
    const std::size_t depth = net.layers.size();
    pre.resize(depth);
    post.resize(depth);
    post[0].assign(input.begin(), input.end());
    for (std::size_t k = 0; k < depth; ++k) {
        const DenseLayer& layer = net.layers[k];
        const std::vector<double>& h = post[k];
        std::vector<double>& s = pre[k];
        s.resize(layer.outputs);
        for (std::size_t r = 0; r < layer.outputs; ++r) {
            double acc = layer.bias[r];
            const double* w = layer.weights.data() + r * layer.inputs;
            for (std::size_t c = 0; c < layer.inputs; ++c) acc += w[c] * h[c];
            s[r] = acc;
        }
        if (k + 1 < depth) {
            std::vector<double>& next = post[k + 1];
            next.resize(layer.outputs);
            for (std::size_t r = 0; r < layer.outputs; ++r) next[r] = activate(net.activation, s[r]);
        }
    }
    return pre.back()[0];
}

}  // namespace

ForwardPass forward(const Mlp& net, std::span<const double> input) {
    check_input(net, input);
    ForwardPass fp;
    fp.output = forward_into(net, input, fp.pre, fp.post);
    return fp;
}

double predict(const Mlp& net, std::span<const double> input) { return forward(net, input).output; }

double predict_physical(const Mlp& net, double e, double edot) {
    const std::array<double, 2> x{e, edot};
    const std::vector<double> z = net.normalization.standardize_input(x);
    return net.normalization.destandardize_target(predict(net, z));
}

std::vector<double> hidden_features(const Mlp& net, std::span<const double> input) {
    const ForwardPass fp = forward(net, input);
    const auto f = fp.features();
    return {f.begin(), f.end()};
}

double cost(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.empty() || predictions.size() != targets.size())
        throw ValidationError("cost needs equal-length, non-empty prediction and target vectors");
    double sq = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double r = predictions[i] - targets[i];
        sq += r * r;
    }
    return sq / (2.0 * static_cast<double>(predictions.size()));
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
    return std::sqrt(2.0 * cost(predictions, targets));
}

Gradients Gradients::zeros_like(const Mlp& net) {
    Gradients g;
    for (const auto& l : net.layers) {
        g.weights.emplace_back(l.weights.size(), 0.0);
        g.biases.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (std::size_t i = 0; i < weights[k].size(); ++i) weights[k][i] += other.weights[k][i];
        for (std::size_t i = 0; i < biases[k].size(); ++i) biases[k][i] += other.biases[k][i];
    }
    return *this;
}

bool Gradients::finite() const {
    for (const auto& v : weights)
        for (double x : v)
            if (!std::isfinite(x)) return false;
    for (const auto& v : biases)
        for (double x : v)
            if (!std::isfinite(x)) return false;
    return true;
}

double Gradients::max_abs() const {
    double m = 0.0;
    for (const auto& v : weights)
        for (double x : v) m = std::max(m, std::abs(x));
    for (const auto& v : biases)
        for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double accumulate_backward(const Mlp& net, std::span<const double> input, double target, double inv_batch,
                           Gradients& acc, std::vector<std::vector<double>>& pre,
                           std::vector<std::vector<double>>& post, std::vector<double>& delta,
                           std::vector<double>& delta_prev) {
    const double output = forward_into(net, input, pre, post);
    delta.assign(1, (output - target) * inv_batch);

    for (std::size_t k = net.layers.size(); k-- > 0;) {
        const DenseLayer& layer = net.layers[k];
        const std::vector<double>& h = post[k];
        double* gw = acc.weights[k].data();
        double* gb = acc.biases[k].data();
        for (std::size_t r = 0; r < layer.outputs; ++r) {
            const double d = delta[r];
            gb[r] += d;
            for (std::size_t c = 0; c < layer.inputs; ++c) gw[r * layer.inputs + c] += d * h[c];
        }
        if (k == 0) break;
        delta_prev.assign(layer.inputs, 0.0);
        for (std::size_t r = 0; r < layer.outputs; ++r) {
            const double d = delta[r];
            for (std::size_t c = 0; c < layer.inputs; ++c) delta_prev[c] += layer.weight(r, c) * d;
        }
        const std::vector<double>& s_prev = pre[k - 1];
        for (std::size_t c = 0; c < layer.inputs; ++c)
            delta_prev[c] *= activate_derivative(net.activation, s_prev[c], h[c]);
        delta.swap(delta_prev);
    }
    return output;
}

Gradients backward(const Mlp& net, std::span<const double> input, double target, std::size_t batch_size) {
    check_input(net, input);
    if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
    Gradients g = Gradients::zeros_like(net);
    std::vector<std::vector<double>> pre, post;
    std::vector<double> delta, delta_prev;
    accumulate_backward(net, input, target, 1.0 / static_cast<double>(batch_size), g, pre, post, delta, delta_prev);
    if (!g.finite()) throw DivergenceError("non-finite gradient", 0);
    return g;
}

void Dataset::validate() const {
    if (rows.empty()) throw ValidationError("dataset is empty");
    for (const Sample& s : rows)
        if (!std::isfinite(s.e) || !std::isfinite(s.edot) || !std::isfinite(s.f))
            throw ValidationError("dataset contains a non-finite value");
}

Normalization fit_normalization(const Dataset& data) {
    data.validate();
    const double n = static_cast<double>(data.size());
    double me = 0.0, md = 0.0, mf = 0.0;
    for (const Sample& s : data.rows) {
        me += s.e;
        md += s.edot;
        mf += s.f;
    }
    me /= n;
    md /= n;
    mf /= n;
    double ve = 0.0, vd = 0.0, vf = 0.0;
    for (const Sample& s : data.rows) {
        ve += (s.e - me) * (s.e - me);
        vd += (s.edot - md) * (s.edot - md);
        vf += (s.f - mf) * (s.f - mf);
    }
    // Constant columns keep unit scale so standardization stays finite.
    auto scale = [&](double v) {
        const double sd = std::sqrt(v / n);
        return sd > 0.0 ? sd : 1.0;
    };
    Normalization norm;
    norm.input_mean = {me, md};
    norm.input_scale = {scale(ve), scale(vd)};
    norm.target_mean = mf;
    norm.target_scale = scale(vf);
    return norm;
}

StandardizedData standardize(const Dataset& data, const Normalization& norm) {
    StandardizedData out;
    out.inputs.reserve(2 * data.size());
    out.targets.reserve(data.size());
    for (const Sample& s : data.rows) {
        out.inputs.push_back((s.e - norm.input_mean[0]) / norm.input_scale[0]);
        out.inputs.push_back((s.edot - norm.input_mean[1]) / norm.input_scale[1]);
        out.targets.push_back(norm.standardize_target(s.f));
    }
    return out;
}

double default_learning_rate(Optimizer o) {
    switch (o) {
        case Optimizer::sgd: return 0.2;
        case Optimizer::adam: return 0.01;
        case Optimizer::rmsprop: return 0.01;
    }
    return 0.01;
}

double TrainConfig::effective_learning_rate() const {
    return std::isnan(learning_rate) ? default_learning_rate(optimizer) : learning_rate;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    const double lr = effective_learning_rate();
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("learning_rate must be a finite number >= 0");
}

namespace {

// Per-parameter optimizer state with the nesting of Gradients.
class OptimizerState {
public:
    OptimizerState(const Mlp& net, Optimizer kind, double lr) : kind_(kind), lr_(lr) {
        first_ = Gradients::zeros_like(net);
        second_ = Gradients::zeros_like(net);
    }

    void step(Mlp& net, const Gradients& g) {
        ++t_;
        for (std::size_t k = 0; k < net.layers.size(); ++k) {
            update(net.layers[k].weights, g.weights[k], first_.weights[k], second_.weights[k]);
            update(net.layers[k].bias, g.biases[k], first_.biases[k], second_.biases[k]);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kRmsDecay = 0.9;
    static constexpr double kEps = 1e-8;

    void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                std::vector<double>& v) const {
        switch (kind_) {
            case Optimizer::sgd:
                for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
                break;
            case Optimizer::adam: {
                const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
                const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
                for (std::size_t i = 0; i < p.size(); ++i) {
                    m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
                    v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
                    p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
                }
                break;
            }
            case Optimizer::rmsprop:
                for (std::size_t i = 0; i < p.size(); ++i) {
                    v[i] = kRmsDecay * v[i] + (1.0 - kRmsDecay) * g[i] * g[i];
                    p[i] -= lr_ * g[i] / (std::sqrt(v[i]) + kEps);
                }
                break;
        }
    }

    Optimizer kind_;
    double lr_;
    std::size_t t_ = 0;
    Gradients first_;
    Gradients second_;
};

}  // namespace

TrainResult train(Mlp net, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    net.validate();
    if (net.input_size() != 2) throw ValidationError("the converter model takes two inputs (e, edot)");

    net.normalization = fit_normalization(data);
    const StandardizedData z = standardize(data, net.normalization);
    OptimizerState opt(net, cfg.optimizer, cfg.effective_learning_rate());

    TrainResult result;
    result.history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
        BatchGradient bg = batch_gradient(net, z);
        if (!std::isfinite(bg.cost) || !bg.grad.finite()) throw DivergenceError("training diverged", epoch);
        const double r = std::sqrt(2.0 * bg.cost);
        if (epoch == 0) {
            result.initial_cost = bg.cost;
            result.initial_rmse = r;
        } else {
            result.history.push_back({epoch, bg.cost, r});
        }
        if (epoch < cfg.epochs) opt.step(net, bg.grad);
    }
    result.net = std::move(net);
    return result;
}

std::vector<double> predict_dataset(const Mlp& net, const Dataset& data) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const Sample& s : data.rows) out.push_back(predict_physical(net, s.e, s.edot));
    return out;
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ValidationError("correlation needs two equal series of length >= 2");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

const SweepCell& SweepTable::at(Optimizer o, Activation a) const {
    for (const SweepCell& c : cells)
        if (c.optimizer == o && c.activation == a) return c;
    throw ValidationError("sweep cell not found");
}

namespace {

template <class ForEach>
SweepTable run_sweep(const Dataset& data, std::size_t epochs, std::uint64_t seed,
                     const std::vector<std::size_t>& layer_sizes, ForEach&& for_each) {
    data.validate();
    SweepTable table;
    for (Optimizer o : kOptimizers)
        for (Activation a : kActivations) table.cells.push_back({o, a, 0.0});

    for_each(table.cells.size(), [&](std::size_t i) {
        SweepCell& cell = table.cells[i];
        TrainConfig cfg;
        cfg.optimizer = cell.optimizer;
        cfg.epochs = epochs;
        cfg.seed = seed;
        try {
            const TrainResult r = train(Mlp::create(layer_sizes, cell.activation, seed), data, cfg);
            cell.rmse = r.history.back().rmse;
        } catch (const DivergenceError&) {
            cell.rmse = std::numeric_limits<double>::infinity();
        }
    });

    table.best = 0;
    for (std::size_t i = 1; i < table.cells.size(); ++i)
        if (table.cells[i].rmse < table.cells[table.best].rmse) table.best = i;
    return table;
}

}  // namespace

SweepTable hyperparameter_sweep(const Dataset& data, std::size_t epochs, std::uint64_t seed,
                                std::vector<std::size_t> layer_sizes) {
    return run_sweep(data, epochs, seed, layer_sizes,
                     [](std::size_t n, auto&& fn) { parallel_for_index(n, fn); });
}

SweepTable hyperparameter_sweep_serial(const Dataset& data, std::size_t epochs, std::uint64_t seed,
                                       std::vector<std::size_t> layer_sizes) {
    return run_sweep(data, epochs, seed, layer_sizes, [](std::size_t n, auto&& fn) { serial_for_index(n, fn); });
}

void AdaptiveHead::validate() const {
    if (!(gain_gamma > 0.0)) throw ValidationError("adaptation gain gamma must be > 0");
    if (!(approx_error_bound >= 0.0)) throw ValidationError("approx_error_bound must be >= 0");
    for (double w : weights_W_hat)
        if (!std::isfinite(w)) throw ValidationError("non-finite adaptive weight");
}

AdaptiveHead make_adaptive_head(const Mlp& net, double gamma, double projection_factor) {
    net.validate();
    const DenseLayer& out = net.layers.back();
    AdaptiveHead head;
    head.gain_gamma = gamma;
    head.weights_W_hat.resize(out.inputs);
    double norm2 = 0.0;
    for (std::size_t c = 0; c < out.inputs; ++c) {
        head.weights_W_hat[c] = net.normalization.target_scale * out.weight(0, c);
        norm2 += head.weights_W_hat[c] * head.weights_W_hat[c];
    }
    head.bias = net.normalization.destandardize_target(out.bias[0]);
    const double norm = std::sqrt(norm2);
    if (norm > 0.0 && std::isfinite(projection_factor)) head.max_norm = projection_factor * norm;
    return head;
}

double f_hat(const AdaptiveHead& head, std::span<const double> features) {
    if (features.size() != head.weights_W_hat.size())
        throw ValidationError("feature length does not match the adaptive head");
    double acc = head.bias;
    for (std::size_t i = 0; i < features.size(); ++i) acc += head.weights_W_hat[i] * features[i];
    return acc;
}

void adapt_in_place(AdaptiveHead& head, double s, std::span<const double> features, double dt_s) {
    if (!(dt_s > 0.0)) throw ValidationError("adaptation dt_s must be positive");
    if (features.size() != head.weights_W_hat.size())
        throw ValidationError("feature length does not match the adaptive head");
    const double k = head.gain_gamma * s * dt_s;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        head.weights_W_hat[i] += k * features[i];
        norm2 += head.weights_W_hat[i] * head.weights_W_hat[i];
    }
    if (!std::isfinite(norm2)) throw ValidationError("adaptive weights became non-finite");
    const double norm = std::sqrt(norm2);
    if (norm > head.max_norm) {
        const double shrink = head.max_norm / norm;
        for (double& w : head.weights_W_hat) w *= shrink;
    }
}

AdaptiveHead adapt(AdaptiveHead head, double s, std::span<const double> features, double dt_s) {
    adapt_in_place(head, s, features, dt_s);
    return head;
}

}  // namespace buck
