#include "buck/adaptive_smc.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace buck {

AdaptiveSmcState AdaptiveSmcState::from_network(Mlp net, const SmcConfig& smc, double gamma,
                                                double projection_factor, bool cold_start) {
    AdaptiveSmcState st;
    st.head = make_adaptive_head(net, gamma, projection_factor);
    if (cold_start) {
        std::fill(st.head.weights_W_hat.begin(), st.head.weights_W_hat.end(), 0.0);
        st.head.max_norm = std::numeric_limits<double>::infinity();
    }
    st.reference_weights = st.head.weights_W_hat;
    st.smc = smc;
    st.net = std::move(net);
    st.validate();
    return st;
}

void AdaptiveSmcState::validate() const {
    head.validate();
    smc.validate();
    net.validate();
    if (head.weights_W_hat.size() != net.feature_size())
        throw ValidationError("adaptive head length does not match the last hidden layer width");
    if (reference_weights.size() != head.weights_W_hat.size())
        throw ValidationError("reference weights length does not match the adaptive head");
}

std::vector<double> controller_features(const Mlp& net, const ErrorState& err) {
    const std::array<double, 2> x{err.x1_volt, err.x2_volt_per_s};
    return hidden_features(net, net.normalization.standardize_input(x));
}

double composite_lyapunov(double s, std::span<const double> w_tilde, double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
    double n2 = 0.0;
    for (double w : w_tilde) n2 += w * w;
    return 0.5 * s * s + n2 / (2.0 * gamma);
}

namespace {

double composite_against(const AdaptiveSmcState& st, double s) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < st.reference_weights.size(); ++i) {
        const double d = st.head.weights_W_hat[i] - st.reference_weights[i];
        n2 += d * d;
    }
    return 0.5 * s * s + n2 / (2.0 * st.head.gain_gamma);
}

}  // namespace

DnnSmcStep dnn_smc_step(const ErrorState& err, AdaptiveSmcState& st, const ConverterParams& p, double dt_s) {
    if (!(dt_s > 0.0)) throw ValidationError("dt_s must be positive");
    DnnSmcStep out;
    out.s = sliding_surface(err, st.smc);
    const std::vector<double> sigma = controller_features(st.net, err);
    out.f_hat = f_hat(st.head, sigma);
    const double bracket = st.smc.surface_slope_c * err.x2_volt_per_s + out.f_hat +
                           st.smc.switching_gain_eta * switching_function(out.s, st.smc.boundary_layer_phi);
    out.raw_control = (p.lc() / p.input_voltage_volt) * bracket;
    if (!std::isfinite(out.raw_control) || !std::isfinite(out.s))
        throw SimulationError("DNN-SMC produced a non-finite control signal", st.time_s);
    out.duty = std::clamp(out.raw_control, 0.0, 1.0);
    out.saturated = out.raw_control <= 0.0 || out.raw_control >= 1.0;

    out.composite_lyapunov = composite_against(st, out.s);
    if (st.record_history) st.lyapunov_history.push_back({st.time_s, out.composite_lyapunov});

    // Anti-windup: W_hat is frozen while the duty is clamped.
    if (!out.saturated) {
        try {
            adapt_in_place(st.head, out.s, sigma, dt_s);
        } catch (const ValidationError& e) {
            throw SimulationError(e.what(), st.time_s);
        }
    }
    st.last_s = out.s;
    st.time_s += dt_s;
    return out;
}

double dnn_smc_duty(const ErrorState& err, AdaptiveSmcState& state, const ConverterParams& params, double dt_s) {
    return dnn_smc_step(err, state, params, dt_s).duty;
}

double true_f(const PlantState& state, const ConverterParams& p) {
    const double v_dot =
        (state.inductor_current_ampere - state.output_voltage_volt / p.load_resistance_ohm) / p.capacitance_farad;
    return state.output_voltage_volt / p.lc() + v_dot / (p.load_resistance_ohm * p.capacitance_farad);
}

RepresentableLoopResult simulate_representable_loop(AdaptiveSmcState st, std::span<const double> w_star,
                                                    const ConverterParams& p, ErrorState x0, double duration_s,
                                                    double dt_s, const Disturbance& disturbance) {
    if (w_star.size() != st.head.weights_W_hat.size()) throw ValidationError("W* length does not match the head");
    st.reference_weights.assign(w_star.begin(), w_star.end());
    st.record_history = false;

    const double bias = st.head.bias;
    const double gain = p.input_voltage_volt / p.lc();
    auto f_of = [&](const ErrorState& e) {
        const std::vector<double> sigma = controller_features(st.net, e);
        double acc = bias;
        for (std::size_t i = 0; i < sigma.size(); ++i) acc += w_star[i] * sigma[i];
        return acc;
    };

    RepresentableLoopResult out;
    const auto steps = static_cast<std::size_t>(std::llround(duration_s / dt_s));
    ErrorState x = x0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt_s;
        const DnnSmcStep u = dnn_smc_step(x, st, p, dt_s);
        out.time_s.push_back(t);
        out.composite.push_back(u.composite_lyapunov);
        out.s.push_back(u.s);
        out.saturated.push_back(u.saturated);
        if (k == steps) break;

        const double d = disturbance.value(t);
        auto rhs = [&](const ErrorState& e) {
            return ErrorDerivative{e.x2_volt_per_s, f_of(e) - gain * u.duty + d};
        };
        auto add = [](const ErrorState& e, const ErrorDerivative& de, double h) {
            return ErrorState{e.x1_volt + h * de.dx1, e.x2_volt_per_s + h * de.dx2};
        };
        const ErrorDerivative k1 = rhs(x);
        const ErrorDerivative k2 = rhs(add(x, k1, 0.5 * dt_s));
        const ErrorDerivative k3 = rhs(add(x, k2, 0.5 * dt_s));
        const ErrorDerivative k4 = rhs(add(x, k3, dt_s));
        x.x1_volt += dt_s / 6.0 * (k1.dx1 + 2 * k2.dx1 + 2 * k3.dx1 + k4.dx1);
        x.x2_volt_per_s += dt_s / 6.0 * (k1.dx2 + 2 * k2.dx2 + 2 * k3.dx2 + k4.dx2);
        if (!std::isfinite(x.x1_volt) || !std::isfinite(x.x2_volt_per_s))
            throw SimulationError("representable loop diverged", t);
    }
    return out;
}

}  // namespace buck
