#include "buck/config.hpp"

#include <set>

#include <json.hpp>

#include "buck/io.hpp"

namespace buck {

using nlohmann::json;

namespace {

// Rejects keys of `obj` outside `allowed`, naming the offending key and its section.
void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError("config section '" + section + "' must be an object");
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!names.contains(key))
            throw ValidationError("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
}

template <class T>
void read(const json& obj, const char* key, const std::string& section, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + section + "." + key + "' has the wrong type");
    }
}

void read_converter(const json& j, ConverterParams& p) {
    const std::string sec = "converter";
    check_keys(j, sec,
               {"inductance_henry", "capacitance_farad", "load_resistance_ohm", "input_voltage_volt",
                "reference_voltage_volt", "switching_frequency_hz"});
    read(j, "inductance_henry", sec, p.inductance_henry);
    read(j, "capacitance_farad", sec, p.capacitance_farad);
    read(j, "load_resistance_ohm", sec, p.load_resistance_ohm);
    read(j, "input_voltage_volt", sec, p.input_voltage_volt);
    read(j, "reference_voltage_volt", sec, p.reference_voltage_volt);
    read(j, "switching_frequency_hz", sec, p.switching_frequency_hz);
}

void read_smc(const json& j, SmcConfig& c) {
    const std::string sec = "smc";
    check_keys(j, sec, {"surface_slope_c", "switching_gain_eta", "boundary_layer_phi", "disturbance_bound_T"});
    read(j, "surface_slope_c", sec, c.surface_slope_c);
    read(j, "switching_gain_eta", sec, c.switching_gain_eta);
    read(j, "boundary_layer_phi", sec, c.boundary_layer_phi);
    read(j, "disturbance_bound_T", sec, c.disturbance_bound_T);
}

DisturbanceKind parse_disturbance_kind(const std::string& s) {
    if (s == "none") return DisturbanceKind::none;
    if (s == "additive_step") return DisturbanceKind::additive_step;
    if (s == "additive_sine") return DisturbanceKind::additive_sine;
    throw ValidationError("config key 'scenario.disturbance.kind' must be none|additive_step|additive_sine");
}

void read_scenario(const json& j, Scenario& s) {
    const std::string sec = "scenario";
    check_keys(j, sec, {"duration_s", "dt_s", "model", "switched_substeps", "events", "disturbance"});
    read(j, "duration_s", sec, s.duration_s);
    read(j, "dt_s", sec, s.dt_s);
    read(j, "switched_substeps", sec, s.switched_substeps);
    if (j.contains("model")) {
        std::string m;
        read(j, "model", sec, m);
        s.model = parse_plant_model(m);
    }
    if (j.contains("events")) {
        if (!j.at("events").is_array()) throw ValidationError("config key 'scenario.events' must be an array");
        s.events.clear();
        for (const json& e : j.at("events")) {
            const std::string esec = "scenario.events[]";
            check_keys(e, esec, {"time_s", "kind", "new_value"});
            Event ev;
            std::string kind = "load_step";
            read(e, "time_s", esec, ev.time_s);
            read(e, "kind", esec, kind);
            read(e, "new_value", esec, ev.new_value);
            ev.kind = parse_event_kind(kind);
            s.events.push_back(ev);
        }
    }
    if (j.contains("disturbance")) {
        const json& d = j.at("disturbance");
        const std::string dsec = "scenario.disturbance";
        check_keys(d, dsec, {"kind", "magnitude", "start_time_s", "bound_T", "frequency_hz"});
        std::string kind = "none";
        read(d, "kind", dsec, kind);
        s.additive_disturbance.kind = parse_disturbance_kind(kind);
        read(d, "magnitude", dsec, s.additive_disturbance.magnitude);
        read(d, "start_time_s", dsec, s.additive_disturbance.start_time_s);
        read(d, "bound_T", dsec, s.additive_disturbance.bound_T);
        read(d, "frequency_hz", dsec, s.additive_disturbance.frequency_hz);
    }
}

void read_train(const json& j, RunConfig& cfg) {
    const std::string sec = "train";
    check_keys(j, sec, {"optimizer", "activation", "learning_rate", "epochs", "layer_sizes"});
    if (j.contains("optimizer")) {
        std::string o;
        read(j, "optimizer", sec, o);
        cfg.train.optimizer = parse_optimizer(o);
    }
    if (j.contains("activation")) {
        std::string a;
        read(j, "activation", sec, a);
        cfg.activation = parse_activation(a);
    }
    read(j, "learning_rate", sec, cfg.train.learning_rate);
    read(j, "epochs", sec, cfg.train.epochs);
    read(j, "layer_sizes", sec, cfg.layer_sizes);
}

}  // namespace

void RunConfig::sync() {
    scenario.params = converter;
    scenario.seed = seed;
    train.seed = seed;
}

void RunConfig::validate() const {
    converter.validate();
    smc.validate();
    scenario.validate();
    train.validate();
    if (!(adaptive.gamma > 0.0)) throw ValidationError("config key 'adaptive.gamma' must be > 0");
    if (!(adaptive.projection_factor > 0.0)) throw ValidationError("config key 'adaptive.projection_factor' must be > 0");
    if (layer_sizes.size() < 3 || layer_sizes.front() != 2 || layer_sizes.back() != 1)
        throw ValidationError("config key 'train.layer_sizes' must start with 2 inputs and end with 1 output");
    if (!(dataset.sample_interval_s > 0.0)) throw ValidationError("config key 'dataset.sample_interval_s' must be > 0");
    if (!(dataset.exclude_initial_s >= 0.0)) throw ValidationError("config key 'dataset.exclude_initial_s' must be >= 0");
    if (!(dataset.duration_s > 0.0) || !(dataset.step_time_s >= 0.0) || dataset.step_time_s > dataset.duration_s)
        throw ValidationError("config keys 'dataset.duration_s'/'dataset.step_time_s' must satisfy 0 <= step <= duration");
    if (!(compare.duration_s > 0.0) || !(compare.event_time_s >= 0.0) || compare.event_time_s > compare.duration_s)
        throw ValidationError("config keys 'compare.duration_s'/'compare.event_time_s' must satisfy 0 <= event <= duration");
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    check_keys(doc, "", {"converter", "smc", "adaptive", "scenario", "train", "dataset", "compare", "paths", "seed"});
    if (doc.contains("converter")) read_converter(doc.at("converter"), cfg.converter);
    if (doc.contains("smc")) read_smc(doc.at("smc"), cfg.smc);
    if (doc.contains("adaptive")) {
        const json& a = doc.at("adaptive");
        check_keys(a, "adaptive", {"gamma", "projection_factor", "cold_start"});
        read(a, "gamma", "adaptive", cfg.adaptive.gamma);
        read(a, "projection_factor", "adaptive", cfg.adaptive.projection_factor);
        read(a, "cold_start", "adaptive", cfg.adaptive.cold_start);
    }
    if (doc.contains("scenario")) read_scenario(doc.at("scenario"), cfg.scenario);
    if (doc.contains("train")) read_train(doc.at("train"), cfg);
    if (doc.contains("dataset")) {
        const json& d = doc.at("dataset");
        check_keys(d, "dataset", {"sample_interval_s", "exclude_initial_s", "duration_s", "step_time_s"});
        read(d, "sample_interval_s", "dataset", cfg.dataset.sample_interval_s);
        read(d, "exclude_initial_s", "dataset", cfg.dataset.exclude_initial_s);
        read(d, "duration_s", "dataset", cfg.dataset.duration_s);
        read(d, "step_time_s", "dataset", cfg.dataset.step_time_s);
    }
    if (doc.contains("compare")) {
        const json& c = doc.at("compare");
        check_keys(c, "compare", {"duration_s", "event_time_s"});
        read(c, "duration_s", "compare", cfg.compare.duration_s);
        read(c, "event_time_s", "compare", cfg.compare.event_time_s);
    }
    if (doc.contains("paths")) {
        const json& p = doc.at("paths");
        check_keys(p, "paths", {"model", "dataset", "out", "history", "svg_dir"});
        read(p, "model", "paths", cfg.paths.model);
        read(p, "dataset", "paths", cfg.paths.dataset);
        read(p, "out", "paths", cfg.paths.out);
        read(p, "history", "paths", cfg.paths.history);
        read(p, "svg_dir", "paths", cfg.paths.svg_dir);
    }
    read(doc, "seed", "", cfg.seed);
    cfg.sync();
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(io::read_file(path)); }

}  // namespace buck
