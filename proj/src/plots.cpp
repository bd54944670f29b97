#include "gaug/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gaug/error.hpp"

namespace gaug {

namespace {

constexpr double kWidth = 640, kHeight = 420, kMargin = 60;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
    double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
    if (!(x0 < x1)) { x0 -= 0.5; x1 += 0.5; }
    if (!(y0 < y1)) { y0 -= 0.5; y1 += 0.5; }
    const double dx = 0.05 * (x1 - x0), dy = 0.05 * (y1 - y0);
    return {x0 - dx, x1 + dx, y0 - dy, y1 + dy};
}

void header(std::ostringstream& os, const Frame& f, const PlotLabels& labels) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(labels.title) << "</text>\n"
       << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
       << kHeight - kMargin << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kHeight - kMargin
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << escape(labels.x_axis) << "</text>\n"
       << "<text x=\"15\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 "
       << kHeight / 2 << ")\">" << escape(labels.y_axis) << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
        const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
        os << "<text x=\"" << f.px(x) << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
           << x << "</text>\n"
           << "<text x=\"" << kMargin - 6 << "\" y=\"" << f.py(y) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << y
           << "</text>\n";
    }
}

}  // namespace

std::string scatter_svg(const std::vector<ScatterPoint>& points, const PlotLabels& labels) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& p : points) {
        x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    if (points.empty()) { x0 = y0 = 0; x1 = y1 = 1; }
    const Frame f = make_frame(x0, x1, y0, y1);
    std::ostringstream os;
    os.precision(4);
    header(os, f, labels);
    for (const auto& p : points) {
        os << "<circle cx=\"" << f.px(p.x) << "\" cy=\"" << f.py(p.y) << "\" r=\"4\" fill=\"" << kColors[0] << "\"/>\n";
        if (!p.label.empty()) {
            os << "<text x=\"" << f.px(p.x) + 6 << "\" y=\"" << f.py(p.y) - 4 << "\" font-size=\"9\">" << escape(p.label)
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string line_svg(const std::map<std::string, std::vector<double>>& series, const PlotLabels& labels) {
    double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
    std::size_t longest = 1;
    for (const auto& [_, values] : series) {
        longest = std::max(longest, values.size());
        for (double v : values) {
            if (std::isfinite(v)) { y0 = std::min(y0, v); y1 = std::max(y1, v); }
        }
    }
    if (!(y0 <= y1)) { y0 = 0; y1 = 1; }
    const Frame f = make_frame(0, static_cast<double>(longest - 1), y0, y1);
    std::ostringstream os;
    os.precision(4);
    header(os, f, labels);
    int color = 0;
    for (const auto& [name, values] : series) {
        const char* c = kColors[color % 6];
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (std::isfinite(values[i])) os << f.px(static_cast<double>(i)) << ',' << f.py(values[i]) << ' ';
        }
        os << "\"/>\n<text x=\"" << kWidth - kMargin - 4 << "\" y=\"" << kMargin + 14 * color << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
           << c << "\">" << escape(name) << "</text>\n";
        ++color;
    }
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace gaug
