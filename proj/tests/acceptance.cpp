#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "buck/adaptive_smc.hpp"
#include "buck/cli.hpp"
#include "buck/config.hpp"
#include "buck/harness.hpp"
#include "buck/io.hpp"
#include "buck/neural.hpp"

using namespace buck;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double mean_over(const Trace& tr, double t0, double t1, double TraceRecord::*field) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const TraceRecord& r : tr.records)
        if (r.t >= t0 && r.t < t1) {
            acc += r.*field;
            ++n;
        }
    return n ? acc / static_cast<double>(n) : std::nan("");
}

void criterion1() {
    const auto start = std::chrono::steady_clock::now();
    Scenario s;
    s.duration_s = 0.06;
    const Trace tr = run_scenario(s, OpenLoopController{5.0 / 12.0});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double v = tr.records.back().v_o, i = tr.records.back().i_l;
    const double v_ref = 5.0 / 12.0 * 12.0, i_ref = v_ref / 10.0;
    const bool pass = std::abs(v - v_ref) <= 0.005 * v_ref && std::abs(i - i_ref) <= 0.005 * i_ref && secs < 1.0;
    report(1, pass, "v_o=" + fmt("%.6f", v) + " V i_L=" + fmt("%.6f", i) + " A runtime=" + fmt("%.3f", secs) + " s");
}

void criterion2() {
    Scenario av;
    av.duration_s = 0.04;
    Scenario sw = av;
    sw.model = PlantModel::switched;
    const OpenLoopController d{5.0 / 12.0};
    const Trace ta = run_scenario(av, d), ts = run_scenario(sw, d);
    double worst = 0.0;
    for (const TraceRecord& r : ts.records) {
        if (r.t < 0.02) continue;
        const std::size_t k = static_cast<std::size_t>(std::llround(r.t / ta.sample_period_s));
        const std::size_t end = std::min(ta.size(), k + static_cast<std::size_t>(std::llround(ts.sample_period_s / ta.sample_period_s)));
        double acc = 0.0;
        for (std::size_t j = k; j < end; ++j) acc += ta.records[j].v_o;
        worst = std::max(worst, std::abs(r.v_o_mean - acc / static_cast<double>(end - k)));
    }
    const double ripple = compute_metrics(ts, sw).ripple_pp_v;
    report(2, worst <= 0.01 * 5.0 && ripple > 0.0,
           "max |mean v_o diff|=" + fmt("%.3e", worst) + " V ripple_pp=" + fmt("%.4f", ripple) + " V");
}

// s * ds > 1e-6 s^2 on unsaturated steps outside |s| < 2 eta T_s, excluding the steps that
// straddle an event.
std::pair<std::size_t, std::size_t> reaching_violations(const Trace& tr, const Scenario& scn, const SmcConfig& smc) {
    const double band = 2.0 * smc.switching_gain_eta * scn.params.switching_period_s();
    std::size_t bad = 0, counted = 0;
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
        const TraceRecord& a = tr.records[k];
        const TraceRecord& b = tr.records[k + 1];
        if (a.duty <= 0.0 || a.duty >= 1.0) continue;
        if (a.r_load != b.r_load || a.v_in != b.v_in) continue;
        if (std::abs(a.s) < band) continue;
        ++counted;
        if (a.s * (b.s - a.s) > 1e-6 * a.s * a.s) ++bad;
    }
    return {bad, counted};
}

void criterion7() {
    const ConverterParams p;
    SmcConfig smc;
    const double dt = 1e-6;
    smc.boundary_layer_phi = 20.0 * smc.switching_gain_eta * dt;
    Mlp net = Mlp::create({2, 3, 3, 1}, Activation::relu, 21);
    for (auto& l : net.layers)
        for (double& b : l.bias) b = 0.5;
    net.normalization.input_scale = {1.0, 1000.0};
    net.normalization.target_mean = 1.5625e8;
    net.normalization.target_scale = 2e7;
    const AdaptiveSmcState st = AdaptiveSmcState::from_network(net, smc, AdaptiveConfig{}.gamma);
    std::vector<double> w_star = st.head.weights_W_hat;
    for (std::size_t i = 0; i < w_star.size(); ++i) w_star[i] *= 1.0 + 0.05 * double(i + 1);
    const RepresentableLoopResult r = simulate_representable_loop(st, w_star, p, {0.05, -10.0}, 10e-3, dt);
    std::size_t bad = 0;
    double worst = 0.0;
    for (std::size_t k = 1; k < r.composite.size(); ++k) {
        const double rel = r.composite[k] / r.composite[k - 1] - 1.0;
        worst = std::max(worst, rel);
        if (rel > 1e-6) ++bad;
    }
    report(7, bad == 0, std::to_string(bad) + " increases over " + std::to_string(r.composite.size() - 1) +
                            " steps, worst relative step=" + fmt("%.2e", worst));
}

void criterion8() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Activation act = kActivations[trial % kActivations.size()];
        Mlp net = Mlp::create({2, 3, 3, 1}, act, 1000 + trial);
        for (auto& l : net.layers)
            for (double& b : l.bias) b = 0.3 * g(rng);
        const double x[] = {g(rng), g(rng)};
        const double target = g(rng);
        const Gradients grad = backward(net, x, target);
        auto loss = [&] {
            const double r = predict(net, x) - target;
            return 0.5 * r * r;
        };
        auto check = [&](double& param, double analytic) {
            const double w0 = param, h = 1e-6;
            param = w0 + h;
            const double lp = loss();
            param = w0 - h;
            const double lm = loss();
            param = w0;
            const double fd = (lp - lm) / (2.0 * h);
            worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::max(std::abs(analytic), std::abs(fd))));
        };
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            for (std::size_t k = 0; k < net.layers[l].weights.size(); ++k) check(net.layers[l].weights[k], grad.weights[l][k]);
            for (std::size_t k = 0; k < net.layers[l].bias.size(); ++k) check(net.layers[l].bias[k], grad.biases[l][k]);
        }
    }
    report(8, worst < 1e-5, "max relative error=" + fmt("%.3e", worst) + " over 100 nets");
}

struct Pipeline {
    fs::path dir;
    bool ok = true;
};

Pipeline run_pipeline(const fs::path& dir) {
    fs::create_directories(dir);
    Pipeline p{dir};
    auto step = [&](std::vector<std::string> args) {
        std::ostringstream out, err;
        if (run_cli(args, out, err) != kExitOk) {
            std::fprintf(stderr, "%s", err.str().c_str());
            p.ok = false;
        }
    };
    const std::string d = dir.string() + "/";
    step({"simulate", "--out", d + "trace.csv"});
    step({"dataset", "--out", d + "dataset.csv"});
    step({"train", "--dataset", d + "dataset.csv", "--out", d + "model.json"});
    step({"sweep", "--dataset", d + "dataset.csv", "--out", d + "sweep.csv"});
    step({"compare", "--model", d + "model.json", "--out", d + "report.csv"});
    return p;
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const fs::path root = fs::temp_directory_path() / ("buck_acceptance_" + std::to_string(std::random_device{}()));

    criterion1();
    criterion2();

    const Pipeline first = run_pipeline(root / "a");
    if (!first.ok) {
        std::printf("pipeline failed\n");
        fs::remove_all(root);
        return 1;
    }

    const RunConfig cfg = parse_run_config("{}");
    DnnSmcController dnn;
    dnn.net = io::load_model(first.dir / "model.json");
    dnn.smc = cfg.smc;
    dnn.gamma = cfg.adaptive.gamma;
    dnn.projection_factor = cfg.adaptive.projection_factor;
    const std::vector<Experiment> exps =
        default_experiments(cfg.converter, cfg.compare.duration_s, cfg.compare.event_time_s);
    const ComparisonReport rep = compare_controllers(exps, ClassicSmcController{cfg.smc}, dnn);

    {
        const Metrics& c = rep.run("classic_smc", "startup").metrics;
        const Metrics& n = rep.run("dnn_smc", "startup").metrics;
        const double cs = c.settling_time_s * 1e3, ns = n.settling_time_s * 1e3;
        const bool pass = c.settled && n.settled && cs >= 6.0 && cs <= 16.0 && ns <= 0.7 * cs;
        report(3, pass, "classic settling=" + fmt("%.3f", cs) + " ms (6..16) dnn settling=" + fmt("%.3f", ns) +
                            " ms ratio=" + fmt("%.3f", ns / cs) + " (<= 0.7)");
    }
    {
        const Experiment& e = *std::find_if(exps.begin(), exps.end(), [](const Experiment& x) { return x.name == "load_step"; });
        const Metrics& c = rep.run("classic_smc", "load_step").metrics;
        const Metrics& n = rep.run("dnn_smc", "load_step").metrics;
        const double t_ev = e.scenario.events.front().time_s;
        const Trace& tc = rep.run("classic_smc", "load_step").trace;
        const double i_before = mean_over(tc, 0.9 * t_ev, t_ev, &TraceRecord::i_l);
        const double i_after = c.final_inductor_current_a;
        const double cr = c.events.front().recovery_time_s * 1e3, nr = n.events.front().recovery_time_s * 1e3;
        const bool pass = c.events.front().recovered && n.events.front().recovered && cr <= 40.0 && nr <= 20.0 &&
                          std::abs(i_before - 0.5) <= 0.02 * 0.5 && std::abs(i_after - 2.5) <= 0.02 * 2.5 &&
                          std::abs(n.final_inductor_current_a - 2.5) <= 0.02 * 2.5;
        report(4, pass, "recovery classic=" + fmt("%.3f", cr) + " ms (<= 40) dnn=" + fmt("%.3f", nr) +
                            " ms (<= 20) i_L " + fmt("%.4f", i_before) + " -> " + fmt("%.4f", i_after) + " A");
    }
    {
        const Metrics& c = rep.run("classic_smc", "vin_step").metrics;
        const Metrics& n = rep.run("dnn_smc", "vin_step").metrics;
        const double co = c.events.front().overshoot_v, no = n.events.front().overshoot_v;
        const double cr = c.events.front().recovery_time_s * 1e3, nr = n.events.front().recovery_time_s * 1e3;
        report(5, no <= co && nr <= cr,
               "overshoot dnn=" + fmt("%.4f", no) + " classic=" + fmt("%.4f", co) + " V recovery dnn=" + fmt("%.3f", nr) +
                   " classic=" + fmt("%.3f", cr) + " ms");
    }
    {
        std::size_t bad = 0, counted = 0;
        for (const ComparisonRun& r : rep.runs) {
            const Scenario& scn =
                std::find_if(exps.begin(), exps.end(), [&](const Experiment& x) { return x.name == r.experiment; })->scenario;
            const auto [b, c] = reaching_violations(r.trace, scn, cfg.smc);
            bad += b;
            counted += c;
        }
        report(6, bad == 0, std::to_string(bad) + " reaching violations over " + std::to_string(counted) +
                                " unsaturated steps outside the band");
    }

    criterion7();
    criterion8();

    {
        const Dataset data = io::load_dataset(first.dir / "dataset.csv");
        const Mlp net = io::load_model(first.dir / "model.json");
        const std::vector<double> pred = predict_dataset(net, data);
        std::vector<double> target;
        for (const Sample& s : data.rows) target.push_back(s.f);
        const double r = correlation(pred, target);
        const SweepTable sweep = hyperparameter_sweep(data, 50, cfg.seed, cfg.layer_sizes);
        const double relu = sweep.at(Optimizer::sgd, Activation::relu).rmse;
        const double sig = sweep.at(Optimizer::sgd, Activation::sigmoid).rmse;
        report(9, r >= 0.99 && relu < sig,
               "R=" + fmt("%.5f", r) + " (>= 0.99) sweep rmse sgd/relu=" + fmt("%.4f", relu) +
                   " sgd/sigmoid=" + fmt("%.4f", sig));
    }
    {
        const Pipeline second = run_pipeline(root / "b");
        std::vector<std::string> differing;
        for (const char* f : {"trace.csv", "dataset.csv", "model.json", "model.history.csv", "sweep.csv", "report.csv"})
            if (!second.ok || io::read_file(first.dir / f) != io::read_file(second.dir / f)) differing.push_back(f);
        std::string detail = differing.empty() ? "all outputs byte-identical" : "differs:";
        for (const std::string& f : differing) detail += " " + f;
        report(10, differing.empty(), detail);
    }

    fs::remove_all(root);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("summary: %d of 10 criteria failed, runtime %.1f s\n", failures, secs);
    return 0;
}
