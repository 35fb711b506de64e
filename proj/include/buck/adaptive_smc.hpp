#pragma once

#include <span>
#include <vector>

#include "buck/neural.hpp"
#include "buck/plant.hpp"
#include "buck/smc.hpp"

namespace buck {

struct LyapunovSample {
    double t_s = 0.0;
    double value = 0.0;
};

/// Mutable state of one DNN-based adaptive sliding-mode controller instance.
///
/// The network's hidden layers are frozen; only head.weights_W_hat adapts online.
struct AdaptiveSmcState {
    AdaptiveHead head;
    SmcConfig smc;
    Mlp net;
    double last_s = 0.0;
    double time_s = 0.0;
    /// Weights W* against which the composite Lyapunov value is reported. Defaults to the
    /// initial W_hat; tests with a representable f set it to the true weights.
    std::vector<double> reference_weights;
    std::vector<LyapunovSample> lyapunov_history;
    bool record_history = true;

    /// Head initialized from the trained output layer (or zeros when cold_start).
    static AdaptiveSmcState from_network(Mlp net, const SmcConfig& smc, double gamma,
                                         double projection_factor = 10.0, bool cold_start = false);
    void validate() const;
};

struct DnnSmcStep {
    double duty = 0.0;
    double raw_control = 0.0;  // before clamping
    double s = 0.0;
    double f_hat = 0.0;
    bool saturated = false;
    double composite_lyapunov = 0.0;
};

/// One controller update: duty = clamp((LC/V_in) * (c*x2 + f_hat + eta*sw(s)), 0, 1),
/// then W_hat <- W_hat + gamma*s*sigma*dt unless the duty saturated.
///
/// f_hat evaluates the frozen features on the standardized (x1, x2) input.
/// Throws SimulationError on any non-finite intermediate.
DnnSmcStep dnn_smc_step(const ErrorState& err, AdaptiveSmcState& state, const ConverterParams& params, double dt_s);

double dnn_smc_duty(const ErrorState& err, AdaptiveSmcState& state, const ConverterParams& params, double dt_s);

/// Features sigma(x) for a physical error state.
std::vector<double> controller_features(const Mlp& net, const ErrorState& err);

/// f(x) = v_o/(LC) + dv_o/dt/(RC), with dv_o/dt from the capacitor current.
double true_f(const PlantState& state, const ConverterParams& params);

/// V = s^2/2 + |W_tilde|^2 / (2 gamma)
double composite_lyapunov(double s, std::span<const double> w_tilde, double gamma);

/// Closed loop in error coordinates where f is exactly representable by the adaptive head:
/// dx1 = x2, dx2 = W*.sigma(x) + bias - (V_in/LC) u + d. Used to check the adaptation law.
struct RepresentableLoopResult {
    std::vector<double> time_s;
    std::vector<double> composite;  // V with W_tilde = W_hat - W*
    std::vector<double> s;
    std::vector<bool> saturated;
};

RepresentableLoopResult simulate_representable_loop(AdaptiveSmcState state, std::span<const double> w_star,
                                                    const ConverterParams& params, ErrorState x0,
                                                    double duration_s, double dt_s, const Disturbance& d = {});

}  // namespace buck
