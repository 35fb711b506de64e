#pragma once

#include <cmath>
#include <concepts>

#include "buck/error.hpp"

namespace buck {

/// Ideal buck converter circuit constants. Defaults are the 12 V -> 5 V design point.
struct ConverterParams {
    double inductance_henry = 160e-6;
    double capacitance_farad = 200e-6;
    double load_resistance_ohm = 10.0;
    double input_voltage_volt = 12.0;
    double reference_voltage_volt = 5.0;
    double switching_frequency_hz = 25'000.0;

    double switching_period_s() const { return 1.0 / switching_frequency_hz; }
    double lc() const { return inductance_henry * capacitance_farad; }

    /// Throws ValidationError unless every field is positive and V_ref <= V_in.
    void validate() const;
};

/// Physical state: inductor current and output (capacitor) voltage.
struct PlantState {
    double inductor_current_ampere = 0.0;
    double output_voltage_volt = 0.0;

    bool finite() const { return std::isfinite(inductor_current_ampere) && std::isfinite(output_voltage_volt); }

    friend PlantState operator+(PlantState a, const PlantState& b) {
        return {a.inductor_current_ampere + b.inductor_current_ampere, a.output_voltage_volt + b.output_voltage_volt};
    }
    friend PlantState operator*(double k, const PlantState& a) {
        return {k * a.inductor_current_ampere, k * a.output_voltage_volt};
    }
    friend bool operator==(const PlantState&, const PlantState&) = default;
};

/// Time derivative of a PlantState (A/s, V/s); same layout.
using PlantDerivative = PlantState;

/// Tracking-error coordinates: x1 = V_ref - v_o, x2 = dx1/dt = -dv_o/dt.
struct ErrorState {
    double x1_volt = 0.0;
    double x2_volt_per_s = 0.0;

    friend bool operator==(const ErrorState&, const ErrorState&) = default;
};

/// Time derivative of an ErrorState (V/s, V/s^2).
struct ErrorDerivative {
    double dx1 = 0.0;
    double dx2 = 0.0;
};

enum class DisturbanceKind { none, additive_step, additive_sine };

/// Additive disturbance d(t) entering the second error equation (V/s^2).
///
/// magnitude must not exceed bound_T, so |d(t)| <= bound_T holds for every t.
struct Disturbance {
    DisturbanceKind kind = DisturbanceKind::none;
    double magnitude = 0.0;
    double start_time_s = 0.0;
    double bound_T = 0.0;
    double frequency_hz = 1000.0;  // additive_sine only

    void validate() const;
    double value(double t_s) const;
};

PlantDerivative switched_derivative(const PlantState& state, bool gate, const ConverterParams& params);

/// State-space averaged model; the gate is replaced by the duty ratio. Throws on duty outside [0,1].
PlantDerivative averaged_derivative(const PlantState& state, double duty, const ConverterParams& params);

/// Averaged model with the additive disturbance d (V/s^2) applied to dx2/dt.
///
/// d enters the inductor equation as -C*d, which leaves the capacitor current (and hence
/// the x2 measurement) untouched and shifts dx2/dt by exactly d.
PlantDerivative averaged_derivative(const PlantState& state, double duty, const ConverterParams& params, double d);

ErrorDerivative error_dynamics(const ErrorState& err, double duty, const ConverterParams& params, double d);

/// x2 uses the capacitor current (i_L - v_o/R)/C, so it needs no numeric differentiation.
ErrorState error_coordinates(const PlantState& state, const ConverterParams& params);

/// Fixed-frequency PWM comparator: on while the phase within the period is below duty.
bool pwm_gate(double time_in_period_s, double duty, const ConverterParams& params);

void check_duty(double duty);

/// Classical fourth-order Runge-Kutta step.
template <std::invocable<const PlantState&> Derivative>
PlantState rk4_step(const PlantState& x, Derivative&& f, double dt_s) {
    const PlantDerivative k1 = f(x);
    const PlantDerivative k2 = f(x + (0.5 * dt_s) * k1);
    const PlantDerivative k3 = f(x + (0.5 * dt_s) * k2);
    const PlantDerivative k4 = f(x + dt_s * k3);
    return x + (dt_s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <std::invocable<const PlantState&> Derivative>
PlantState euler_step(const PlantState& x, Derivative&& f, double dt_s) {
    return x + dt_s * f(x);
}

/// One RK4 step of the averaged model, holding duty and d over the step.
/// Throws SimulationError when the result is not finite.
PlantState integrate_averaged(const PlantState& x, double duty, const ConverterParams& params, double dt_s,
                              double d = 0.0, double t_s = 0.0);

/// Per-period summary of a switched-model integration.
struct SwitchedPeriod {
    PlantState end;
    double mean_output_voltage = 0.0;
    double mean_inductor_current = 0.0;
    double min_output_voltage = 0.0;
    double max_output_voltage = 0.0;
};

/// Integrates one switching period of the switched model with forward-Euler sub-steps.
///
/// duty is latched for the whole period. A sub-step containing the comparator edge is split
/// at the edge so the gate is constant on each Euler interval. Means are time averages.
SwitchedPeriod integrate_switched_period(const PlantState& x, double duty, const ConverterParams& params,
                                         int substeps = 100, const Disturbance& disturbance = {},
                                         double t_start_s = 0.0);

}  // namespace buck
