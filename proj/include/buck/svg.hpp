#pragma once

#include <string>
#include <vector>

#include "buck/harness.hpp"

namespace buck::svg {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    int width = 720;
    int height = 360;
    std::size_t max_points = 1200;  // per series, after decimation
};

/// Renders a line chart with one polyline per series. Output depends only on the input.
std::string render(const Chart& chart);

/// v_o or i_L of both controllers for one experiment of a comparison.
Chart comparison_chart(const ComparisonReport& report, const std::string& experiment, bool inductor_current);

}  // namespace buck::svg
