#include "buck/plant.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace buck {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(std::string(name) + " must be a positive finite number, got " + std::to_string(value));
    }
}

}  // namespace

void ConverterParams::validate() const {
    require_positive(inductance_henry, "inductance_henry");
    require_positive(capacitance_farad, "capacitance_farad");
    require_positive(load_resistance_ohm, "load_resistance_ohm");
    require_positive(input_voltage_volt, "input_voltage_volt");
    require_positive(reference_voltage_volt, "reference_voltage_volt");
    require_positive(switching_frequency_hz, "switching_frequency_hz");
    if (reference_voltage_volt > input_voltage_volt) {
        throw ValidationError("reference_voltage_volt must not exceed input_voltage_volt (buck steps down only)");
    }
}

void Disturbance::validate() const {
    if (!(bound_T >= 0.0)) throw ValidationError("disturbance bound_T must be nonnegative");
    if (!(start_time_s >= 0.0)) throw ValidationError("disturbance start_time_s must be nonnegative");
    if (kind == DisturbanceKind::none) return;
    if (!std::isfinite(magnitude) || std::abs(magnitude) > bound_T) {
        throw ValidationError("disturbance magnitude must satisfy |magnitude| <= bound_T");
    }
    if (kind == DisturbanceKind::additive_sine && !(frequency_hz > 0.0)) {
        throw ValidationError("disturbance frequency_hz must be positive");
    }
}

double Disturbance::value(double t_s) const {
    if (kind == DisturbanceKind::none || t_s < start_time_s) return 0.0;
    if (kind == DisturbanceKind::additive_step) return magnitude;
    return magnitude * std::sin(2.0 * std::numbers::pi * frequency_hz * (t_s - start_time_s));
}

void check_duty(double duty) {
    if (!(duty >= 0.0 && duty <= 1.0)) {
        throw ValidationError("duty must lie in [0, 1], got " + std::to_string(duty));
    }
}

PlantDerivative switched_derivative(const PlantState& state, bool gate, const ConverterParams& p) {
    const double sc = gate ? 1.0 : 0.0;
    return {sc * p.input_voltage_volt / p.inductance_henry - state.output_voltage_volt / p.inductance_henry,
            state.inductor_current_ampere / p.capacitance_farad -
                state.output_voltage_volt / (p.load_resistance_ohm * p.capacitance_farad)};
}

PlantDerivative averaged_derivative(const PlantState& state, double duty, const ConverterParams& p) {
    check_duty(duty);
    return {duty * p.input_voltage_volt / p.inductance_henry - state.output_voltage_volt / p.inductance_henry,
            state.inductor_current_ampere / p.capacitance_farad -
                state.output_voltage_volt / (p.load_resistance_ohm * p.capacitance_farad)};
}

PlantDerivative averaged_derivative(const PlantState& state, double duty, const ConverterParams& p, double d) {
    PlantDerivative dx = averaged_derivative(state, duty, p);
    dx.inductor_current_ampere -= p.capacitance_farad * d;
    return dx;
}

ErrorDerivative error_dynamics(const ErrorState& err, double duty, const ConverterParams& p, double d) {
    check_duty(duty);
    const double lc = p.lc();
    return {err.x2_volt_per_s,
            -err.x1_volt / lc - err.x2_volt_per_s / (p.load_resistance_ohm * p.capacitance_farad) +
                p.reference_voltage_volt / lc - (p.input_voltage_volt / lc) * duty + d};
}

ErrorState error_coordinates(const PlantState& state, const ConverterParams& p) {
    const double capacitor_current = state.inductor_current_ampere - state.output_voltage_volt / p.load_resistance_ohm;
    return {p.reference_voltage_volt - state.output_voltage_volt, -capacitor_current / p.capacitance_farad};
}

bool pwm_gate(double time_in_period_s, double duty, const ConverterParams& p) {
    check_duty(duty);
    const double ts = p.switching_period_s();
    double phase = std::fmod(time_in_period_s, ts) / ts;
    if (phase < 0.0) phase += 1.0;
    return phase < duty;
}

PlantState integrate_averaged(const PlantState& x, double duty, const ConverterParams& params, double dt_s, double d,
                              double t_s) {
    if (!(dt_s > 0.0)) throw ValidationError("dt_s must be positive");
    check_duty(duty);
    const PlantState next = rk4_step(
        x, [&](const PlantState& s) { return averaged_derivative(s, duty, params, d); }, dt_s);
    if (!next.finite()) throw SimulationError("averaged plant state became non-finite", t_s);
    return next;
}

SwitchedPeriod integrate_switched_period(const PlantState& x, double duty, const ConverterParams& params,
                                         int substeps, const Disturbance& disturbance, double t_start_s) {
    check_duty(duty);
    if (substeps < 1) throw ValidationError("substeps must be >= 1");
    const double ts = params.switching_period_s();
    const double h = ts / substeps;
    const double edge = duty * ts;

    SwitchedPeriod out;
    out.min_output_voltage = x.output_voltage_volt;
    out.max_output_voltage = x.output_voltage_volt;

    PlantState state = x;
    double v_integral = 0.0;
    double i_integral = 0.0;

    // Trapezoidal time averages over each Euler interval.
    auto advance = [&](double t0, double t1, bool gate) {
        const double dt = t1 - t0;
        if (dt <= 0.0) return;
        const double d = disturbance.value(t_start_s + t0);
        PlantDerivative dx = switched_derivative(state, gate, params);
        dx.inductor_current_ampere -= params.capacitance_farad * d;
        const PlantState next = state + dt * dx;
        v_integral += 0.5 * dt * (state.output_voltage_volt + next.output_voltage_volt);
        i_integral += 0.5 * dt * (state.inductor_current_ampere + next.inductor_current_ampere);
        state = next;
        out.min_output_voltage = std::min(out.min_output_voltage, state.output_voltage_volt);
        out.max_output_voltage = std::max(out.max_output_voltage, state.output_voltage_volt);
    };

    for (int k = 0; k < substeps; ++k) {
        const double t0 = k * h;
        const double t1 = (k + 1 == substeps) ? ts : (k + 1) * h;
        if (edge > t0 && edge < t1) {
            advance(t0, edge, true);
            advance(edge, t1, false);
        } else {
            advance(t0, t1, t0 < edge);
        }
        if (!state.finite()) throw SimulationError("switched plant state became non-finite", t_start_s + t0);
    }
    out.end = state;
    out.mean_output_voltage = v_integral / ts;
    out.mean_inductor_current = i_integral / ts;
    return out;
}

}  // namespace buck
