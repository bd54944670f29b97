#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gaug {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;
};

struct PlotLabels {
    std::string title;
    std::string x_axis;
    std::string y_axis;
};

std::string scatter_svg(const std::vector<ScatterPoint>& points, const PlotLabels& labels);
/// One polyline per named series; x is the position in the series.
std::string line_svg(const std::map<std::string, std::vector<double>>& series, const PlotLabels& labels);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gaug
