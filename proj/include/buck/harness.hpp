#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "buck/adaptive_smc.hpp"
#include "buck/neural.hpp"
#include "buck/plant.hpp"
#include "buck/smc.hpp"

namespace buck {

enum class PlantModel { averaged, switched };
enum class EventKind { load_step, vin_step };

std::string_view to_string(PlantModel m);
std::string_view to_string(EventKind k);
PlantModel parse_plant_model(std::string_view name);
EventKind parse_event_kind(std::string_view name);

/// Instantaneous change of the load resistance (ohm) or input voltage (V).
struct Event {
    double time_s = 0.0;
    EventKind kind = EventKind::load_step;
    double new_value = 1.0;
};

struct Scenario {
    ConverterParams params;            // plant at t = 0; also the controllers' nominal model
    double duration_s = 0.06;
    double dt_s = 1e-6;                // averaged model step (= controller period)
    PlantModel model = PlantModel::averaged;
    std::vector<Event> events;         // strictly increasing in time, inside [0, duration]
    Disturbance additive_disturbance;
    std::uint64_t seed = 0;
    int switched_substeps = 100;       // Euler sub-steps per switching period
    PlantState initial_state{};

    void validate() const;
    /// Controller period: dt_s for the averaged model, T_s for the switched model.
    double sample_period_s() const;
};

struct ClassicSmcController {
    SmcConfig smc;
};

struct DnnSmcController {
    Mlp net;
    SmcConfig smc;
    double gamma = 1e3;
    double projection_factor = 10.0;
    bool cold_start = false;
};

struct OpenLoopController {
    double duty = 0.0;
};

using ControllerSpec = std::variant<ClassicSmcController, DnnSmcController, OpenLoopController>;

std::string controller_name(const ControllerSpec& c);

/// One sample per controller period. The first nine fields form the trace CSV; the envelope
/// fields summarize the switching period that starts at t (equal to v_o / i_l for the averaged model).
struct TraceRecord {
    double t = 0.0;
    double i_l = 0.0;
    double v_o = 0.0;
    double duty = 0.0;
    double s = 0.0;
    double v_lyap = 0.0;
    double f_hat = 0.0;  // NaN for controllers without an estimator
    double r_load = 0.0;
    double v_in = 0.0;

    double v_o_min = 0.0;
    double v_o_max = 0.0;
    double v_o_mean = 0.0;
    double i_l_mean = 0.0;
};

struct Trace {
    std::vector<TraceRecord> records;
    double sample_period_s = 0.0;
    PlantModel model = PlantModel::averaged;
    double reference_voltage_volt = 5.0;

    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }
};

/// Steps the plant under the controller; events mutate R or V_in at the first controller
/// sample whose time is at or after the event time. Controllers keep the initial parameters
/// as their model; the x2 measurement uses the true capacitor current.
Trace run_scenario(const Scenario& scn, const ControllerSpec& controller);

struct EventMetrics {
    double time_s = 0.0;
    double overshoot_v = 0.0;              // max |v_o - V_ref| from the event to the next one
    double recovery_time_s = 0.0;          // re-entry into the +/-2% band with no later exit
    bool recovered = false;
    double current_recovery_time_s = 0.0;  // i_L into +/-2% of V_ref/R_new, no later exit
    bool current_recovered = false;
};

struct Metrics {
    double settling_time_s = 0.0;   // startup, measured before the first event
    bool settled = false;
    double overshoot_v = 0.0;       // startup overshoot above V_ref
    std::vector<EventMetrics> events;
    double recovery_time_s = 0.0;   // worst event recovery, 0 without events
    double ripple_pp_v = 0.0;       // over the final 10% of the trace
    double steady_state_error_v = 0.0;
    double final_inductor_current_a = 0.0;  // mean over the final 10%
};

inline constexpr double kBandFraction = 0.02;

Metrics compute_metrics(const Trace& trace, const Scenario& scn);

struct DatasetOptions {
    SmcConfig smc;
    double sample_interval_s = 1e-5;   // rows are taken every this many seconds of each run
    double exclude_initial_s = 0.2e-3;
    std::uint64_t seed = 42;
};

/// Default operating grid: R in {2,5,10} x V_in in {10,12,14}, each a startup followed by a
/// load step at 10 ms to the next resistance of the cycle 2 -> 5 -> 10 -> 2.
std::vector<Scenario> default_dataset_scenarios(const ConverterParams& base, double duration_s = 0.02,
                                                double step_time_s = 0.01);

/// Runs every scenario under classic SMC (in parallel), samples (x1, x2, true_f) rows and
/// shuffles them with the seed. Throws ValidationError when no rows are produced.
Dataset generate_dataset(const std::vector<Scenario>& scenarios, const DatasetOptions& opt);
Dataset generate_dataset_serial(const std::vector<Scenario>& scenarios, const DatasetOptions& opt);

/// The three comparison experiments: startup, load 10 -> 2 ohm, V_in 12 -> 13 V.
struct Experiment {
    std::string name;
    Scenario scenario;
};

std::vector<Experiment> default_experiments(const ConverterParams& base, double duration_s = 0.06,
                                            double event_time_s = 0.03);

struct ReportRow {
    std::string controller;  // classic_smc, dnn_smc or ratio
    std::string experiment;
    double settling_ms = 0.0;
    double overshoot_v = 0.0;
    double recovery_ms = 0.0;
    double ripple_pp_v = 0.0;
    double ss_error_v = 0.0;
};

struct ComparisonRun {
    std::string controller;
    std::string experiment;
    Trace trace;
    Metrics metrics;
};

struct ComparisonReport {
    std::vector<ReportRow> rows;
    std::vector<ComparisonRun> runs;  // experiment-major, classic before dnn

    const ComparisonRun& run(const std::string& controller, const std::string& experiment) const;
};

/// Runs every experiment under both controllers and assembles metric and ratio rows
/// (ratio = second / first; 0/0 counts as 1).
ComparisonReport compare_controllers(const std::vector<Experiment>& experiments, const ControllerSpec& first,
                                     const ControllerSpec& second);
ComparisonReport compare_controllers_serial(const std::vector<Experiment>& experiments, const ControllerSpec& first,
                                            const ControllerSpec& second);

/// Same report row for a metric set.
ReportRow report_row(const std::string& controller, const std::string& experiment, const Metrics& m);

}  // namespace buck
