#include "buck/smc.hpp"

#include <algorithm>

namespace buck {

void SmcConfig::validate() const {
    if (!(surface_slope_c > 0.0)) throw ValidationError("surface_slope_c must be > 0");
    if (!(switching_gain_eta > 0.0)) throw ValidationError("switching_gain_eta must be > 0");
    if (!(boundary_layer_phi >= 0.0)) throw ValidationError("boundary_layer_phi must be >= 0");
    if (!(disturbance_bound_T >= 0.0)) throw ValidationError("disturbance_bound_T must be >= 0");
}

double sliding_surface(const ErrorState& err, const SmcConfig& cfg) {
    return cfg.surface_slope_c * err.x1_volt + err.x2_volt_per_s;
}

double switching_function(double s, double phi) {
    if (phi > 0.0) return std::clamp(s / phi, -1.0, 1.0);
    return static_cast<double>((s > 0.0) - (s < 0.0));
}

double equivalent_control(const ErrorState& err, const ConverterParams& p, const SmcConfig& cfg) {
    const double lc = p.lc();
    const double bracket = cfg.surface_slope_c * err.x2_volt_per_s - err.x1_volt / lc -
                           err.x2_volt_per_s / (p.load_resistance_ohm * p.capacitance_farad) +
                           p.reference_voltage_volt / lc;
    return (lc / p.input_voltage_volt) * bracket;
}

double switching_control(double s, const ConverterParams& p, const SmcConfig& cfg) {
    return (p.lc() / p.input_voltage_volt) * cfg.switching_gain_eta * switching_function(s, cfg.boundary_layer_phi);
}

double smc_raw_control(const ErrorState& err, const ConverterParams& p, const SmcConfig& cfg) {
    return equivalent_control(err, p, cfg) + switching_control(sliding_surface(err, cfg), p, cfg);
}

double smc_duty(const ErrorState& err, const ConverterParams& p, const SmcConfig& cfg) {
    return std::clamp(smc_raw_control(err, p, cfg), 0.0, 1.0);
}

double lyapunov_value(double s) { return 0.5 * s * s; }

}  // namespace buck
