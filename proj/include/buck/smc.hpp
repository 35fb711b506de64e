#pragma once

#include "buck/plant.hpp"

namespace buck {

/// Sliding-mode controller gains.
struct SmcConfig {
    double surface_slope_c = 500.0;        // 1/s
    double switching_gain_eta = 2.0e7;     // V/s^2
    double boundary_layer_phi = 0.0;       // V/s, 0 selects the pure sign function
    double disturbance_bound_T = 0.0;      // V/s^2

    void validate() const;
};

/// s = c*x1 + x2
double sliding_surface(const ErrorState& err, const SmcConfig& cfg);

/// sgn(s) with sgn(0) = 0 when phi == 0, otherwise clamp(s/phi, -1, 1).
double switching_function(double s, double phi);

/// Duty that holds ds/dt = 0 on the nominal model (unsaturated).
double equivalent_control(const ErrorState& err, const ConverterParams& params, const SmcConfig& cfg);

/// Reaching term (LC/V_in)*eta*sw(s); drives ds/dt = -eta*sw(s) when added to the equivalent control.
double switching_control(double s, const ConverterParams& params, const SmcConfig& cfg);

/// clamp(u_eq + u_sw, 0, 1)
double smc_duty(const ErrorState& err, const ConverterParams& params, const SmcConfig& cfg);

/// Unsaturated u_eq + u_sw, for saturation diagnostics.
double smc_raw_control(const ErrorState& err, const ConverterParams& params, const SmcConfig& cfg);

/// V = s^2 / 2
double lyapunov_value(double s);

}  // namespace buck
