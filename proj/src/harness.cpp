#include "buck/harness.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <tuple>
#include <cmath>
#include <limits>
#include <random>

#include "buck/parallel.hpp"

namespace buck {

std::string_view to_string(PlantModel m) { return m == PlantModel::averaged ? "averaged" : "switched"; }
std::string_view to_string(EventKind k) { return k == EventKind::load_step ? "load_step" : "vin_step"; }

PlantModel parse_plant_model(std::string_view name) {
    if (name == "averaged") return PlantModel::averaged;
    if (name == "switched") return PlantModel::switched;
    throw ValidationError("unknown plant model '" + std::string(name) + "' (expected averaged|switched)");
}

EventKind parse_event_kind(std::string_view name) {
    if (name == "load_step") return EventKind::load_step;
    if (name == "vin_step") return EventKind::vin_step;
    throw ValidationError("unknown event kind '" + std::string(name) + "' (expected load_step|vin_step)");
}

void Scenario::validate() const {
    params.validate();
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) throw ValidationError("duration_s must be >= 0");
    if (!(dt_s > 0.0)) throw ValidationError("dt_s must be positive");
    if (switched_substeps < 1) throw ValidationError("switched_substeps must be >= 1");
    additive_disturbance.validate();
    double previous = -1.0;
    for (const Event& e : events) {
        if (!(e.time_s >= 0.0) || e.time_s > duration_s)
            throw ValidationError("event time must lie within [0, duration_s]");
        if (!(e.time_s > previous)) throw ValidationError("events must be strictly increasing in time");
        if (!(e.new_value > 0.0)) throw ValidationError("event new_value must be positive");
        previous = e.time_s;
    }
}

double Scenario::sample_period_s() const {
    return model == PlantModel::averaged ? dt_s : params.switching_period_s();
}

std::string controller_name(const ControllerSpec& c) {
    return std::visit(
        [](const auto& spec) -> std::string {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, ClassicSmcController>) return "classic_smc";
            else if constexpr (std::is_same_v<T, DnnSmcController>) return "dnn_smc";
            else return "open_loop";
        },
        c);
}

namespace {

// Per-run controller instance built from a spec.
class ControllerInstance {
public:
    ControllerInstance(const ControllerSpec& spec, const ConverterParams& model) : model_(model) {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ClassicSmcController>) {
                    s.smc.validate();
                    smc_ = s.smc;
                    kind_ = Kind::classic;
                } else if constexpr (std::is_same_v<T, DnnSmcController>) {
                    adaptive_ = AdaptiveSmcState::from_network(s.net, s.smc, s.gamma, s.projection_factor,
                                                               s.cold_start);
                    adaptive_->record_history = false;
                    smc_ = s.smc;
                    kind_ = Kind::dnn;
                } else {
                    check_duty(s.duty);
                    open_duty_ = s.duty;
                    kind_ = Kind::open;
                }
            },
            spec);
    }

    struct Output {
        double duty;
        double s;
        double v_lyap;
        double f_hat;
    };

    Output update(const ErrorState& err, double dt_s, double t_s) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        switch (kind_) {
            case Kind::classic: {
                const double s = sliding_surface(err, smc_);
                return {smc_duty(err, model_, smc_), s, lyapunov_value(s), nan};
            }
            case Kind::dnn: {
                adaptive_->time_s = t_s;
                const DnnSmcStep step = dnn_smc_step(err, *adaptive_, model_, dt_s);
                return {step.duty, step.s, step.composite_lyapunov, step.f_hat};
            }
            case Kind::open:
                break;
        }
        const double s = sliding_surface(err, smc_);
        return {open_duty_, s, lyapunov_value(s), nan};
    }

private:
    enum class Kind { classic, dnn, open };
    Kind kind_ = Kind::open;
    ConverterParams model_;
    SmcConfig smc_;
    std::optional<AdaptiveSmcState> adaptive_;
    double open_duty_ = 0.0;
};

// First sample index at or after time t for a uniform grid of period h.
std::size_t first_index_at_or_after(double t, double h) {
    const double k = std::ceil(t / h - 1e-9);
    return k <= 0.0 ? 0 : static_cast<std::size_t>(k);
}

void apply_event(const Event& e, ConverterParams& plant) {
    if (e.kind == EventKind::load_step) plant.load_resistance_ohm = e.new_value;
    else plant.input_voltage_volt = e.new_value;
}

}  // namespace

Trace run_scenario(const Scenario& scn, const ControllerSpec& spec) {
    scn.validate();
    Trace trace;
    trace.model = scn.model;
    trace.sample_period_s = scn.sample_period_s();
    trace.reference_voltage_volt = scn.params.reference_voltage_volt;

    const double h = trace.sample_period_s;
    const auto steps = static_cast<std::size_t>(std::floor(scn.duration_s / h + 1e-9));
    if (steps == 0) return trace;
    trace.records.reserve(steps);

    ControllerInstance controller(spec, scn.params);
    ConverterParams plant = scn.params;
    PlantState x = scn.initial_state;
    // Switched plants are measured through the previous period's mean.
    PlantState measured = x;

    std::vector<std::size_t> event_index;
    for (const Event& e : scn.events) event_index.push_back(first_index_at_or_after(e.time_s, h));
    std::size_t next_event = 0;

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        while (next_event < scn.events.size() && event_index[next_event] <= k) {
            apply_event(scn.events[next_event], plant);
            ++next_event;
        }

        const ErrorState err = error_coordinates(scn.model == PlantModel::averaged ? x : measured, plant);
        const auto u = controller.update(err, h, t);

        TraceRecord rec{t, x.inductor_current_ampere, x.output_voltage_volt, u.duty, u.s, u.v_lyap, u.f_hat,
                        plant.load_resistance_ohm, plant.input_voltage_volt};

        if (scn.model == PlantModel::averaged) {
            const double d = scn.additive_disturbance.value(t);
            x = integrate_averaged(x, u.duty, plant, h, d, t);
            rec.v_o_min = std::min(rec.v_o, x.output_voltage_volt);
            rec.v_o_max = std::max(rec.v_o, x.output_voltage_volt);
            rec.v_o_mean = rec.v_o;
            rec.i_l_mean = rec.i_l;
        } else {
            const SwitchedPeriod period =
                integrate_switched_period(x, u.duty, plant, scn.switched_substeps, scn.additive_disturbance, t);
            x = period.end;
            measured = {period.mean_inductor_current, period.mean_output_voltage};
            rec.v_o_min = period.min_output_voltage;
            rec.v_o_max = period.max_output_voltage;
            rec.v_o_mean = period.mean_output_voltage;
            rec.i_l_mean = period.mean_inductor_current;
        }
        trace.records.push_back(rec);
    }
    return trace;
}

namespace {

struct Segment {
    std::size_t begin;
    std::size_t end;  // exclusive
};

// Time from the segment start to the first sample after the last out-of-band sample.
// Returns {time, true} when the final sample of the segment is inside the band.
template <class OutOfBand>
std::pair<double, bool> hold_time(const Trace& tr, Segment seg, OutOfBand&& out_of_band) {
    if (seg.begin >= seg.end) return {0.0, false};
    std::optional<std::size_t> last_out;
    for (std::size_t i = seg.begin; i < seg.end; ++i)
        if (out_of_band(tr.records[i])) last_out = i;
    const double t0 = tr.records[seg.begin].t;
    if (!last_out) return {0.0, true};
    if (*last_out + 1 >= seg.end) return {tr.records[seg.end - 1].t - t0 + tr.sample_period_s, false};
    return {tr.records[*last_out + 1].t - t0, true};
}

}  // namespace

Metrics compute_metrics(const Trace& tr, const Scenario& scn) {
    if (tr.empty()) throw ValidationError("compute_metrics needs a non-empty trace");
    const double vref = scn.params.reference_voltage_volt;
    const double band = kBandFraction * vref;
    const std::size_t n = tr.size();

    std::vector<std::size_t> starts;
    for (const Event& e : scn.events) starts.push_back(std::min(n, first_index_at_or_after(e.time_s, tr.sample_period_s)));

    Metrics m;
    const std::size_t startup_end = starts.empty() ? n : starts.front();
    auto v_out = [&](const TraceRecord& r) { return std::abs(r.v_o - vref) > band; };
    std::tie(m.settling_time_s, m.settled) = hold_time(tr, {0, startup_end}, v_out);
    for (std::size_t i = 0; i < startup_end; ++i) m.overshoot_v = std::max(m.overshoot_v, tr.records[i].v_o_max - vref);

    for (std::size_t j = 0; j < starts.size(); ++j) {
        const Segment seg{starts[j], j + 1 < starts.size() ? starts[j + 1] : n};
        EventMetrics em;
        em.time_s = scn.events[j].time_s;
        for (std::size_t i = seg.begin; i < seg.end; ++i) {
            const auto& r = tr.records[i];
            em.overshoot_v = std::max({em.overshoot_v, std::abs(r.v_o_max - vref), std::abs(r.v_o_min - vref)});
        }
        std::tie(em.recovery_time_s, em.recovered) = hold_time(tr, seg, v_out);
        std::tie(em.current_recovery_time_s, em.current_recovered) =
            hold_time(tr, seg, [&](const TraceRecord& r) {
                const double target = vref / r.r_load;
                return std::abs(r.i_l_mean - target) > kBandFraction * target;
            });
        m.recovery_time_s = std::max(m.recovery_time_s, em.recovery_time_s);
        m.events.push_back(em);
    }

    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double v_sum = 0.0, i_sum = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) {
        lo = std::min(lo, tr.records[i].v_o_min);
        hi = std::max(hi, tr.records[i].v_o_max);
        v_sum += tr.records[i].v_o_mean;
        i_sum += tr.records[i].i_l_mean;
    }
    m.ripple_pp_v = hi - lo;
    m.steady_state_error_v = std::abs(v_sum / static_cast<double>(tail) - vref);
    m.final_inductor_current_a = i_sum / static_cast<double>(tail);
    return m;
}

std::vector<Scenario> default_dataset_scenarios(const ConverterParams& base, double duration_s, double step_time_s) {
    const std::array<double, 3> resistances{2.0, 5.0, 10.0};
    const std::array<double, 3> input_voltages{10.0, 12.0, 14.0};
    std::vector<Scenario> out;
    for (std::size_t ri = 0; ri < resistances.size(); ++ri) {
        for (double vin : input_voltages) {
            Scenario s;
            s.params = base;
            s.params.load_resistance_ohm = resistances[ri];
            s.params.input_voltage_volt = vin;
            s.duration_s = duration_s;
            s.events = {{step_time_s, EventKind::load_step, resistances[(ri + 1) % resistances.size()]}};
            out.push_back(s);
        }
    }
    return out;
}

namespace {

std::vector<Sample> sample_trace(const Trace& tr, const Scenario& scn, const DatasetOptions& opt) {
    std::vector<Sample> rows;
    const double h = tr.sample_period_s;
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.sample_interval_s / h)));
    const std::size_t first = first_index_at_or_after(opt.exclude_initial_s, h);
    ConverterParams p = scn.params;
    for (std::size_t i = first; i < tr.size(); i += stride) {
        const TraceRecord& r = tr.records[i];
        p.load_resistance_ohm = r.r_load;
        p.input_voltage_volt = r.v_in;
        const PlantState x{r.i_l, r.v_o};
        const ErrorState err = error_coordinates(x, p);
        rows.push_back({err.x1_volt, err.x2_volt_per_s, true_f(x, p)});
    }
    return rows;
}

template <class ForEach>
Dataset build_dataset(const std::vector<Scenario>& scenarios, const DatasetOptions& opt, ForEach&& for_each) {
    if (scenarios.empty()) throw ValidationError("generate_dataset needs at least one scenario");
    if (!(opt.sample_interval_s > 0.0)) throw ValidationError("sample_interval_s must be positive");
    std::vector<std::vector<Sample>> per_run(scenarios.size());
    for_each(scenarios.size(), [&](std::size_t i) {
        const Trace tr = run_scenario(scenarios[i], ClassicSmcController{opt.smc});
        per_run[i] = sample_trace(tr, scenarios[i], opt);
    });

    Dataset data;
    for (auto& rows : per_run) data.rows.insert(data.rows.end(), rows.begin(), rows.end());
    if (data.rows.empty()) throw ValidationError("generated dataset is empty");

    // Fisher-Yates with a fixed-width bounded draw, identical on every standard library.
    std::mt19937_64 rng(opt.seed);
    for (std::size_t i = data.rows.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(data.rows[i], data.rows[j]);
    }
    return data;
}

}  // namespace

Dataset generate_dataset(const std::vector<Scenario>& scenarios, const DatasetOptions& opt) {
    return build_dataset(scenarios, opt, [](std::size_t n, auto&& fn) { parallel_for_index(n, fn); });
}

Dataset generate_dataset_serial(const std::vector<Scenario>& scenarios, const DatasetOptions& opt) {
    return build_dataset(scenarios, opt, [](std::size_t n, auto&& fn) { serial_for_index(n, fn); });
}

std::vector<Experiment> default_experiments(const ConverterParams& base, double duration_s, double event_time_s) {
    Scenario startup;
    startup.params = base;
    startup.params.load_resistance_ohm = 10.0;
    startup.params.input_voltage_volt = 12.0;
    startup.duration_s = duration_s;

    Scenario load = startup;
    load.events = {{event_time_s, EventKind::load_step, 2.0}};

    Scenario line = startup;
    line.events = {{event_time_s, EventKind::vin_step, 13.0}};

    return {{"startup", startup}, {"load_step", load}, {"vin_step", line}};
}

ReportRow report_row(const std::string& controller, const std::string& experiment, const Metrics& m) {
    ReportRow row;
    row.controller = controller;
    row.experiment = experiment;
    row.settling_ms = 1e3 * m.settling_time_s;
    row.overshoot_v = m.events.empty() ? m.overshoot_v : m.events.front().overshoot_v;
    row.recovery_ms = 1e3 * m.recovery_time_s;
    row.ripple_pp_v = m.ripple_pp_v;
    row.ss_error_v = m.steady_state_error_v;
    return row;
}

const ComparisonRun& ComparisonReport::run(const std::string& controller, const std::string& experiment) const {
    for (const auto& r : runs)
        if (r.controller == controller && r.experiment == experiment) return r;
    throw ValidationError("no run for " + controller + " / " + experiment);
}

namespace {

double ratio(double second, double first) {
    if (first == 0.0) return second == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return second / first;
}

template <class ForEach>
ComparisonReport build_report(const std::vector<Experiment>& experiments, const ControllerSpec& first,
                              const ControllerSpec& second, ForEach&& for_each) {
    const std::array<const ControllerSpec*, 2> controllers{&first, &second};
    ComparisonReport report;
    report.runs.resize(2 * experiments.size());
    for_each(report.runs.size(), [&](std::size_t i) {
        const Experiment& ex = experiments[i / 2];
        const ControllerSpec& c = *controllers[i % 2];
        ComparisonRun& run = report.runs[i];
        run.controller = controller_name(c);
        run.experiment = ex.name;
        run.trace = run_scenario(ex.scenario, c);
        run.metrics = compute_metrics(run.trace, ex.scenario);
    });

    for (std::size_t e = 0; e < experiments.size(); ++e) {
        const ReportRow a = report_row(report.runs[2 * e].controller, experiments[e].name, report.runs[2 * e].metrics);
        const ReportRow b =
            report_row(report.runs[2 * e + 1].controller, experiments[e].name, report.runs[2 * e + 1].metrics);
        ReportRow r;
        r.controller = "ratio";
        r.experiment = experiments[e].name;
        r.settling_ms = ratio(b.settling_ms, a.settling_ms);
        r.overshoot_v = ratio(b.overshoot_v, a.overshoot_v);
        r.recovery_ms = ratio(b.recovery_ms, a.recovery_ms);
        r.ripple_pp_v = ratio(b.ripple_pp_v, a.ripple_pp_v);
        r.ss_error_v = ratio(b.ss_error_v, a.ss_error_v);
        report.rows.push_back(a);
        report.rows.push_back(b);
        report.rows.push_back(r);
    }
    return report;
}

}  // namespace

ComparisonReport compare_controllers(const std::vector<Experiment>& experiments, const ControllerSpec& first,
                                     const ControllerSpec& second) {
    return build_report(experiments, first, second, [](std::size_t n, auto&& fn) { parallel_for_index(n, fn); });
}

ComparisonReport compare_controllers_serial(const std::vector<Experiment>& experiments, const ControllerSpec& first,
                                            const ControllerSpec& second) {
    return build_report(experiments, first, second, [](std::size_t n, auto&& fn) { serial_for_index(n, fn); });
}

}  // namespace buck
