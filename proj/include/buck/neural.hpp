#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buck/error.hpp"

namespace buck {

enum class Activation { sigmoid, relu, tanh };
enum class Optimizer { sgd, adam, rmsprop };

std::string_view to_string(Activation a);
std::string_view to_string(Optimizer o);
Activation parse_activation(std::string_view name);
Optimizer parse_optimizer(std::string_view name);

inline constexpr std::array<Optimizer, 3> kOptimizers{Optimizer::sgd, Optimizer::adam, Optimizer::rmsprop};
inline constexpr std::array<Activation, 3> kActivations{Activation::sigmoid, Activation::relu, Activation::tanh};

/// Fully connected layer; weights are row-major (outputs x inputs).
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    double weight(std::size_t row, std::size_t col) const { return weights[row * inputs + col]; }
    double& weight(std::size_t row, std::size_t col) { return weights[row * inputs + col]; }
};

/// z-score statistics mapping physical (e, edot) -> network inputs and network output -> f.
struct Normalization {
    std::vector<double> input_mean{0.0, 0.0};
    std::vector<double> input_scale{1.0, 1.0};
    double target_mean = 0.0;
    double target_scale = 1.0;

    std::vector<double> standardize_input(std::span<const double> physical) const;
    double standardize_target(double f) const { return (f - target_mean) / target_scale; }
    double destandardize_target(double y) const { return target_mean + target_scale * y; }
};

/// Multilayer perceptron. Hidden layers use `activation`, the output layer is linear.
struct Mlp {
    std::vector<std::size_t> layer_sizes{2, 3, 3, 1};
    Activation activation = Activation::relu;
    std::vector<DenseLayer> layers;
    Normalization normalization;
    std::uint64_t seed = 0;

    /// Scaled-uniform (Glorot) initialization, +/- sqrt(6 / (fan_in + fan_out)), zero biases.
    static Mlp create(std::vector<std::size_t> layer_sizes, Activation activation, std::uint64_t seed);

    std::size_t input_size() const { return layer_sizes.front(); }
    /// Width of the last hidden layer (length of the feature vector sigma(x)).
    std::size_t feature_size() const { return layer_sizes[layer_sizes.size() - 2]; }
    std::size_t parameter_count() const;

    void validate() const;
};

struct ForwardPass {
    std::vector<std::vector<double>> pre;   // S_k per layer
    std::vector<std::vector<double>> post;  // post[0] = input, post[k] = act(S_k) for hidden k
    double output = 0.0;

    /// Last hidden activation vector.
    std::span<const double> features() const { return post.back(); }
};

double activate(Activation a, double x);
/// Derivative w.r.t. the pre-activation, expressed through pre and post values. ReLU'(0) = 0.
double activate_derivative(Activation a, double pre, double post);

/// Network-space forward pass (inputs already standardized).
ForwardPass forward(const Mlp& net, std::span<const double> input);
double predict(const Mlp& net, std::span<const double> input);
/// Physical f for physical (e, edot), applying the stored normalization.
double predict_physical(const Mlp& net, double e, double edot);
/// sigma(x): last hidden activations for a network-space input.
std::vector<double> hidden_features(const Mlp& net, std::span<const double> input);

/// (1 / 2P) * sum (pred - target)^2
double cost(std::span<const double> predictions, std::span<const double> targets);
/// sqrt(mean squared error)
double rmse(std::span<const double> predictions, std::span<const double> targets);

/// Gradients with the same nesting as Mlp::layers.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static Gradients zeros_like(const Mlp& net);
    Gradients& operator+=(const Gradients& other);
    bool finite() const;
    double max_abs() const;
};

/// Gradient of the cost for one sample, where the sample is one of batch_size rows.
/// Throws DivergenceError(epoch 0) on non-finite gradients.
Gradients backward(const Mlp& net, std::span<const double> input, double target, std::size_t batch_size = 1);

/// Adds the gradient of one sample (scaled by 1/batch_size) to acc; returns the prediction.
/// Allocation-free hot path used by the batch kernels.
double accumulate_backward(const Mlp& net, std::span<const double> input, double target, double inv_batch,
                           Gradients& acc, std::vector<std::vector<double>>& scratch_pre,
                           std::vector<std::vector<double>>& scratch_post, std::vector<double>& delta,
                           std::vector<double>& delta_prev);

/// One row of the converter dataset: tracking error, its rate, and the target f (V/s^2).
struct Sample {
    double e = 0.0;
    double edot = 0.0;
    double f = 0.0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
    std::vector<Sample> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    void validate() const;
};

Normalization fit_normalization(const Dataset& data);

/// Network-space training data: two inputs per row and a scalar target.
struct StandardizedData {
    std::vector<double> inputs;  // row-major, 2 per row
    std::vector<double> targets;

    std::size_t size() const { return targets.size(); }
    std::span<const double> input(std::size_t i) const { return {inputs.data() + 2 * i, 2}; }
};

StandardizedData standardize(const Dataset& data, const Normalization& norm);

/// Optimizer-specific default step size used when TrainConfig::learning_rate is unset.
double default_learning_rate(Optimizer o);

struct TrainConfig {
    Optimizer optimizer = Optimizer::sgd;
    double learning_rate = std::numeric_limits<double>::quiet_NaN();  // NaN selects the optimizer default
    std::size_t epochs = 260;
    std::uint64_t seed = 42;

    double effective_learning_rate() const;
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double cost = 0.0;  // network-space cost after this epoch's update
    double rmse = 0.0;
};

struct TrainResult {
    Mlp net;
    std::vector<EpochRecord> history;
    double initial_cost = 0.0;
    double initial_rmse = 0.0;
};

/// Full-batch training. Fits the normalization on `data` and stores it in the returned net.
TrainResult train(Mlp net, const Dataset& data, const TrainConfig& cfg);

/// Predictions of a trained net over a dataset, in physical units.
std::vector<double> predict_dataset(const Mlp& net, const Dataset& data);

/// Pearson correlation coefficient.
double correlation(std::span<const double> a, std::span<const double> b);

struct SweepCell {
    Optimizer optimizer = Optimizer::sgd;
    Activation activation = Activation::relu;
    double rmse = 0.0;  // +inf when the cell diverged
};

/// 3 x 3 grid of RMSE values indexed [optimizer][activation] in kOptimizers / kActivations order.
struct SweepTable {
    std::vector<SweepCell> cells;  // row-major over optimizer, then activation
    std::size_t best = 0;

    const SweepCell& at(Optimizer o, Activation a) const;
};

/// Trains one model per optimizer x activation from the same initialization seed.
/// Cells run in parallel; results are independent of the thread count.
SweepTable hyperparameter_sweep(const Dataset& data, std::size_t epochs, std::uint64_t seed,
                                std::vector<std::size_t> layer_sizes = {2, 3, 3, 1});
/// Serial reference for hyperparameter_sweep.
SweepTable hyperparameter_sweep_serial(const Dataset& data, std::size_t epochs, std::uint64_t seed,
                                       std::vector<std::size_t> layer_sizes = {2, 3, 3, 1});

/// Online-adapted output weights W_hat over frozen features: f_hat = W_hat . sigma + bias.
///
/// bias is the frozen (de-standardized) output offset of the trained net and does not adapt.
struct AdaptiveHead {
    std::vector<double> weights_W_hat;
    double gain_gamma = 1.0;
    double approx_error_bound = 0.0;
    double bias = 0.0;
    double max_norm = std::numeric_limits<double>::infinity();

    void validate() const;
};

/// Physical-unit head initialized from the trained output layer.
/// max_norm = projection_factor * |W_hat(0)| (unbounded when the initial norm is zero).
AdaptiveHead make_adaptive_head(const Mlp& net, double gamma, double projection_factor = 10.0);

double f_hat(const AdaptiveHead& head, std::span<const double> features);

/// Forward-Euler step of dW_hat/dt = gamma * s * sigma, followed by norm projection.
AdaptiveHead adapt(AdaptiveHead head, double s, std::span<const double> features, double dt_s);
/// In-place variant of adapt.
void adapt_in_place(AdaptiveHead& head, double s, std::span<const double> features, double dt_s);

}  // namespace buck
