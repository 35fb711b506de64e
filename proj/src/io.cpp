#include "buck/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace buck::io {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
    os << kTraceHeader << '\n';
    for (const TraceRecord& r : trace.records) {
        os << format_double(r.t) << ',' << format_double(r.i_l) << ',' << format_double(r.v_o) << ','
           << format_double(r.duty) << ',' << format_double(r.s) << ',' << format_double(r.v_lyap) << ','
           << format_double(r.f_hat) << ',' << format_double(r.r_load) << ',' << format_double(r.v_in) << '\n';
    }
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << kDatasetHeader << '\n';
    for (const Sample& s : data.rows)
        os << format_double(s.e) << ',' << format_double(s.edot) << ',' << format_double(s.f) << '\n';
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ValidationError("dataset line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

}  // namespace

Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != kDatasetHeader)
        throw ValidationError(std::string("dataset header must be '") + kDatasetHeader + "'");
    Dataset data;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto c1 = row.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
        if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos)
            throw ValidationError("dataset line " + std::to_string(lineno) + ": expected 3 fields");
        data.rows.push_back({parse_double(row.substr(0, c1), lineno), parse_double(row.substr(c1 + 1, c2 - c1 - 1), lineno),
                             parse_double(row.substr(c2 + 1), lineno)});
    }
    data.validate();
    return data;
}

void write_report_csv(std::ostream& os, const ComparisonReport& report) {
    os << kReportHeader << '\n';
    for (const ReportRow& r : report.rows) {
        os << r.controller << ',' << r.experiment << ',' << format_double(r.settling_ms) << ','
           << format_double(r.overshoot_v) << ',' << format_double(r.recovery_ms) << ','
           << format_double(r.ripple_pp_v) << ',' << format_double(r.ss_error_v) << '\n';
    }
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
    os << kHistoryHeader << '\n';
    for (const EpochRecord& e : history)
        os << e.epoch << ',' << format_double(e.cost) << ',' << format_double(e.rmse) << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepTable& table) {
    os << kSweepHeader << '\n';
    for (std::size_t i = 0; i < table.cells.size(); ++i) {
        const SweepCell& c = table.cells[i];
        os << to_string(c.optimizer) << ',' << to_string(c.activation) << ',' << format_double(c.rmse) << ','
           << (i == table.best ? 1 : 0) << '\n';
    }
}

std::string model_to_json(const Mlp& net) {
    net.validate();
    json weights = json::array();
    json biases = json::array();
    for (const DenseLayer& l : net.layers) {
        json rows = json::array();
        for (std::size_t r = 0; r < l.outputs; ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < l.inputs; ++c) row.push_back(l.weight(r, c));
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
        biases.push_back(l.bias);
    }
    json doc;
    doc["layer_sizes"] = net.layer_sizes;
    doc["activation"] = std::string(to_string(net.activation));
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);
    doc["normalization"] = {{"input_mean", net.normalization.input_mean},
                            {"input_scale", net.normalization.input_scale},
                            {"target_mean", net.normalization.target_mean},
                            {"target_scale", net.normalization.target_scale}};
    doc["seed"] = net.seed;
    return doc.dump(2) + "\n";
}

Mlp model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        Mlp net;
        net.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
        net.activation = parse_activation(doc.at("activation").get<std::string>());
        net.seed = doc.at("seed").get<std::uint64_t>();
        const json& w = doc.at("weights");
        const json& b = doc.at("biases");
        if (net.layer_sizes.size() < 2 || w.size() != net.layer_sizes.size() - 1 || b.size() != w.size())
            throw ValidationError("model weights/biases do not match layer_sizes");
        for (std::size_t k = 0; k < w.size(); ++k) {
            DenseLayer l;
            l.inputs = net.layer_sizes[k];
            l.outputs = net.layer_sizes[k + 1];
            if (w[k].size() != l.outputs) throw ValidationError("weight matrix row count mismatch at layer " + std::to_string(k + 1));
            for (const json& row : w[k]) {
                if (row.size() != l.inputs) throw ValidationError("weight matrix column count mismatch at layer " + std::to_string(k + 1));
                for (const json& x : row) l.weights.push_back(x.get<double>());
            }
            l.bias = b[k].get<std::vector<double>>();
            net.layers.push_back(std::move(l));
        }
        const json& n = doc.at("normalization");
        net.normalization.input_mean = n.at("input_mean").get<std::vector<double>>();
        net.normalization.input_scale = n.at("input_scale").get<std::vector<double>>();
        net.normalization.target_mean = n.at("target_mean").get<double>();
        net.normalization.target_scale = n.at("target_scale").get<double>();
        net.validate();
        return net;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what());
    }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    os << contents;
    if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void save_model(const std::filesystem::path& path, const Mlp& net) { write_file(path, model_to_json(net)); }

Mlp load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
    return read_dataset_csv(is);
}

}  // namespace buck::io
