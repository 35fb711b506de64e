#include "buck/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "buck/config.hpp"
#include "buck/error.hpp"
#include "buck/harness.hpp"
#include "buck/io.hpp"
#include "buck/svg.hpp"

namespace buck {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string controller = "classic";
    std::string model;
    std::string dataset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::string> optimizer;
    std::optional<std::string> activation;
    bool svg = false;
};

// Missing input files are reported as usage errors.
class MissingFile : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw MissingFile(std::string("missing ") + what + " path");
    if (!fs::is_regular_file(path)) throw MissingFile(std::string(what) + " file not found: " + path);
}

RunConfig resolve_config(const Options& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.optimizer) cfg.train.optimizer = parse_optimizer(*o.optimizer);
    if (o.activation) cfg.activation = parse_activation(*o.activation);
    if (!o.model.empty()) cfg.paths.model = o.model;
    if (!o.dataset.empty()) cfg.paths.dataset = o.dataset;
    if (!o.out.empty()) cfg.paths.out = o.out;
    cfg.sync();
    cfg.validate();
    return cfg;
}

std::string require_out(const RunConfig& cfg) {
    if (cfg.paths.out.empty()) throw ValidationError("missing output path (--out or paths.out)");
    return cfg.paths.out;
}

ControllerSpec make_controller(const RunConfig& cfg, const std::string& kind) {
    if (kind == "classic") return ClassicSmcController{cfg.smc};
    if (kind == "dnn") {
        require_file(cfg.paths.model, "model");
        DnnSmcController c;
        c.net = io::load_model(cfg.paths.model);
        c.smc = cfg.smc;
        c.gamma = cfg.adaptive.gamma;
        c.projection_factor = cfg.adaptive.projection_factor;
        c.cold_start = cfg.adaptive.cold_start;
        return c;
    }
    throw ValidationError("--controller must be classic|dnn");
}

void print_metrics(std::ostream& out, const Metrics& m) {
    out << "settling_ms=" << io::format_double(m.settling_time_s * 1e3) << '\n'
        << "settled=" << (m.settled ? "true" : "false") << '\n'
        << "overshoot_v=" << io::format_double(m.overshoot_v) << '\n'
        << "recovery_ms=" << io::format_double(m.recovery_time_s * 1e3) << '\n'
        << "ripple_pp_v=" << io::format_double(m.ripple_pp_v) << '\n'
        << "ss_error_v=" << io::format_double(m.steady_state_error_v) << '\n';
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const ControllerSpec ctrl = make_controller(cfg, o.controller);
    const Trace trace = run_scenario(cfg.scenario, ctrl);
    if (!cfg.paths.out.empty()) {
        std::ostringstream os;
        io::write_trace_csv(os, trace);
        io::write_file(cfg.paths.out, os.str());
    }
    out << "controller=" << controller_name(ctrl) << '\n' << "rows=" << trace.size() << '\n';
    print_metrics(out, compute_metrics(trace, cfg.scenario));
    return kExitOk;
}

int cmd_dataset(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const std::string path = require_out(cfg);
    DatasetOptions opt;
    opt.smc = cfg.smc;
    opt.sample_interval_s = cfg.dataset.sample_interval_s;
    opt.exclude_initial_s = cfg.dataset.exclude_initial_s;
    opt.seed = cfg.seed;
    const Dataset data = generate_dataset(
        default_dataset_scenarios(cfg.converter, cfg.dataset.duration_s, cfg.dataset.step_time_s), opt);
    std::ostringstream os;
    io::write_dataset_csv(os, data);
    io::write_file(path, os.str());
    out << "rows=" << data.rows.size() << '\n';
    return kExitOk;
}

std::string history_path_for(const RunConfig& cfg, const std::string& model_path) {
    if (!cfg.paths.history.empty()) return cfg.paths.history;
    fs::path p(model_path);
    p.replace_extension();
    return p.string() + ".history.csv";
}

int cmd_train(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    require_file(cfg.paths.dataset, "dataset");
    const std::string model_path = require_out(cfg);
    const Dataset data = io::load_dataset(cfg.paths.dataset);
    const Mlp init = Mlp::create(cfg.layer_sizes, cfg.activation, cfg.seed);
    const TrainResult res = train(init, data, cfg.train);
    io::save_model(model_path, res.net);
    std::ostringstream hs;
    io::write_history_csv(hs, res.history);
    const std::string hist = history_path_for(cfg, model_path);
    io::write_file(hist, hs.str());
    const std::vector<double> pred = predict_dataset(res.net, data);
    std::vector<double> target;
    target.reserve(data.rows.size());
    for (const Sample& s : data.rows) target.push_back(s.f);
    out << "epochs=" << res.history.size() << '\n'
        << "final_cost=" << io::format_double(res.history.empty() ? res.initial_cost : res.history.back().cost) << '\n'
        << "rmse_physical=" << io::format_double(rmse(pred, target)) << '\n'
        << "correlation=" << io::format_double(correlation(pred, target)) << '\n'
        << "history=" << hist << '\n';
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    RunConfig cfg = resolve_config(o);
    require_file(cfg.paths.dataset, "dataset");
    const std::string path = require_out(cfg);
    const std::size_t epochs = o.epochs ? *o.epochs : 50;
    const SweepTable table = hyperparameter_sweep(io::load_dataset(cfg.paths.dataset), epochs, cfg.seed, cfg.layer_sizes);
    std::ostringstream os;
    io::write_sweep_csv(os, table);
    io::write_file(path, os.str());
    const SweepCell& best = table.cells[table.best];
    out << "best=" << to_string(best.optimizer) << ',' << to_string(best.activation) << '\n'
        << "rmse=" << io::format_double(best.rmse) << '\n';
    return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const std::string path = require_out(cfg);
    const ControllerSpec dnn = make_controller(cfg, "dnn");
    const ControllerSpec classic = make_controller(cfg, "classic");
    const std::vector<Experiment> exps =
        default_experiments(cfg.converter, cfg.compare.duration_s, cfg.compare.event_time_s);
    const ComparisonReport report = compare_controllers(exps, classic, dnn);
    std::ostringstream os;
    io::write_report_csv(os, report);
    io::write_file(path, os.str());
    if (o.svg) {
        fs::path base(path);
        base.replace_extension();
        for (const Experiment& e : exps) {
            for (bool current : {false, true}) {
                const std::string file = base.string() + "_" + e.name + (current ? "_i_l.svg" : "_v_o.svg");
                io::write_file(file, svg::render(svg::comparison_chart(report, e.name, current)));
                out << "svg=" << file << '\n';
            }
        }
    }
    for (const ReportRow& r : report.rows)
        out << r.controller << ' ' << r.experiment << " settling_ms=" << io::format_double(r.settling_ms)
            << " recovery_ms=" << io::format_double(r.recovery_ms) << " overshoot_v=" << io::format_double(r.overshoot_v)
            << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Buck converter sliding-mode control simulator", "buck_sim"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration");
        sub->add_option("--seed", o.seed, "Seed for every random stream");
        sub->add_option("--out", o.out, "Output file");
    };
    auto add_train_flags = [&](CLI::App* sub) {
        sub->add_option("--dataset", o.dataset, "Dataset CSV");
        sub->add_option("--epochs", o.epochs, "Training epochs");
        sub->add_option("--optimizer", o.optimizer, "sgd|adam|rmsprop")
            ->check(CLI::IsMember({"sgd", "adam", "rmsprop"}));
        sub->add_option("--activation", o.activation, "relu|sigmoid|tanh")
            ->check(CLI::IsMember({"relu", "sigmoid", "tanh"}));
    };

    CLI::App* sim = app.add_subcommand("simulate", "Run one scenario and write its trace");
    add_common(sim);
    sim->add_option("--controller", o.controller, "classic|dnn")->check(CLI::IsMember({"classic", "dnn"}));
    sim->add_option("--model", o.model, "Trained model JSON (dnn controller)");

    CLI::App* ds = app.add_subcommand("dataset", "Generate the training dataset");
    add_common(ds);

    CLI::App* tr = app.add_subcommand("train", "Train the approximator network");
    add_common(tr);
    add_train_flags(tr);

    CLI::App* sw = app.add_subcommand("sweep", "Optimizer x activation RMSE table");
    add_common(sw);
    add_train_flags(sw);

    CLI::App* cmp = app.add_subcommand("compare", "Compare classic and DNN sliding-mode control");
    add_common(cmp);
    cmp->add_option("--model", o.model, "Trained model JSON");
    cmp->add_flag("--svg", o.svg, "Also write SVG plots of v_o and i_L per experiment");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o, out);
        if (ds->parsed()) return cmd_dataset(o, out);
        if (tr->parsed()) return cmd_train(o, out);
        if (sw->parsed()) return cmd_sweep(o, out);
        return cmd_compare(o, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const MissingFile& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DivergenceError& e) {
        err << "error: training diverged: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace buck
