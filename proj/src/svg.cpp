#include "buck/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <locale>
#include <sstream>

#include "buck/error.hpp"

namespace buck::svg {

namespace {

constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 32.0;
constexpr double kBottom = 44.0;

std::string fixed(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string tick_label(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

std::string render(const Chart& chart) {
    if (chart.width <= kLeft + kRight || chart.height <= kTop + kBottom)
        throw ValidationError("svg chart is too small");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Series& s : chart.series) {
        if (s.x.size() != s.y.size()) throw ValidationError("svg series '" + s.label + "' has mismatched lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmin <= xmax)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double pw = chart.width - kLeft - kRight;
    const double ph = chart.height - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\"" << chart.height
       << "\" viewBox=\"0 0 " << chart.width << ' ' << chart.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fixed(chart.width / 2.0) << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"14\">"
       << escape(chart.title) << "</text>\n";
    os << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(pw) << "\" height=\""
       << fixed(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";

    constexpr int kTicks = 5;
    for (int k = 0; k <= kTicks; ++k) {
        const double xv = xmin + (xmax - xmin) * k / kTicks;
        const double yv = ymin + (ymax - ymin) * k / kTicks;
        os << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(kTop + ph + 16)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << tick_label(xv) << "</text>\n";
        os << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(py(yv) + 3)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick_label(yv) << "</text>\n";
        os << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << fixed(kLeft + pw)
           << "\" y2=\"" << fixed(py(yv)) << "\" stroke=\"#ddd\"/>\n";
    }
    os << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(chart.height - 8.0)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << escape(chart.x_label)
       << "</text>\n";
    os << "<text x=\"14\" y=\"" << fixed(kTop + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\" transform=\"rotate(-90 14 "
       << fixed(kTop + ph / 2) << ")\">" << escape(chart.y_label) << "</text>\n";

    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const Series& s = chart.series[si];
        const std::size_t n = s.x.size();
        const std::size_t stride = chart.max_points == 0 || n <= chart.max_points
                                       ? 1
                                       : (n + chart.max_points - 1) / chart.max_points;
        os << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.2\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < n; i += stride) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!first) os << ' ';
            os << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
            first = false;
        }
        if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.x[n - 1]) && std::isfinite(s.y[n - 1]))
            os << ' ' << fixed(px(s.x[n - 1])) << ',' << fixed(py(s.y[n - 1]));
        os << "\"/>\n";
        const double ly = kTop + 14.0 + 14.0 * static_cast<double>(si);
        os << "<line x1=\"" << fixed(kLeft + pw - 110) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(kLeft + pw - 90)
           << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << fixed(kLeft + pw - 84) << "\" y=\"" << fixed(ly + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

Chart comparison_chart(const ComparisonReport& report, const std::string& experiment, bool inductor_current) {
    static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    Chart chart;
    chart.title = experiment + (inductor_current ? ": inductor current" : ": output voltage");
    chart.x_label = "t (ms)";
    chart.y_label = inductor_current ? "i_L (A)" : "v_o (V)";
    std::size_t k = 0;
    for (const ComparisonRun& run : report.runs) {
        if (run.experiment != experiment) continue;
        Series s;
        s.label = run.controller == "classic_smc" ? "SMC" : run.controller == "dnn_smc" ? "DNN-SMC" : run.controller;
        s.color = kColors[k++ % 4];
        s.x.reserve(run.trace.size());
        s.y.reserve(run.trace.size());
        for (const TraceRecord& r : run.trace.records) {
            s.x.push_back(r.t * 1e3);
            s.y.push_back(inductor_current ? r.i_l : r.v_o);
        }
        chart.series.push_back(std::move(s));
    }
    if (chart.series.empty()) throw ValidationError("no runs for experiment '" + experiment + "'");
    return chart;
}

}  // namespace buck::svg
