#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace aka {
namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 440;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 170;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("svg: cannot write " + path);
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const Series& s : series)
        for (const auto& [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    ymin = std::min(ymin, 0.0);
    ymax = std::max(ymax * 1.05, ymin + 1e-9);

    const double pw = kWidth - kMarginLeft - kMarginRight;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kMarginTop + ph - (y - ymin) / (ymax - ymin) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << title << "</text>\n";

    // axes and grid
    for (int i = 0; i <= 5; ++i) {
        const double y = ymin + (ymax - ymin) * i / 5.0;
        os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << py(y) << "\" x2=\""
           << kMarginLeft + pw << "\" y2=\"" << py(y)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << py(y) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << num(y) << "</text>\n";
    }
    const int xticks = std::min<int>(8, std::max<int>(1, static_cast<int>(xmax - xmin)));
    for (int i = 0; i <= xticks; ++i) {
        const double x = xmin + (xmax - xmin) * i / xticks;
        os << "<text x=\"" << px(x) << "\" y=\"" << kMarginTop + ph + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << num(x) << "</text>\n";
    }
    os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << kMarginTop + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + ph << "\" x2=\""
       << kMarginLeft + pw << "\" y2=\"" << kMarginTop + ph << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 16
       << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    os << "<text x=\"20\" y=\"" << kMarginTop + ph / 2
       << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 "
       << kMarginTop + ph / 2 << ")\">" << y_label << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : series[si].points) os << px(x) << "," << py(y) << " ";
        os << "\"/>\n";
        for (const auto& [x, y] : series[si].points)
            os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
               << "\"/>\n";
        const double ly = kMarginTop + 16.0 * si;
        os << "<rect x=\"" << kMarginLeft + pw + 12 << "\" y=\"" << ly - 8
           << "\" width=\"12\" height=\"4\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << kMarginLeft + pw + 30 << "\" y=\"" << ly
           << "\" font-size=\"11\">" << series[si].label << "</text>\n";
    }
    os << "</svg>\n";
}

void write_heatmap(const std::string& path, const std::string& title, const Matrix& values,
                   double vmin, double vmax) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("svg: cannot write " + path);
    if (values.empty()) throw std::invalid_argument("svg: empty heatmap");
    const int cell = std::max(4, std::min(24, 560 / std::max(values.rows(), values.cols())));
    const int w = kMarginLeft + values.cols() * cell + 60;
    const int h = kMarginTop + values.rows() * cell + 40;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title
       << "</text>\n";
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    for (int r = 0; r < values.rows(); ++r)
        for (int c = 0; c < values.cols(); ++c) {
            double t = (std::clamp(values(r, c), vmin, vmax) - vmin) / span;  // 0..1
            // blue (0) -> white (0.5) -> red (1)
            int red, green, blue;
            if (t < 0.5) {
                const double u = t * 2.0;
                red = static_cast<int>(30 + u * (255 - 30));
                green = static_cast<int>(60 + u * (255 - 60));
                blue = 255;
            } else {
                const double u = (t - 0.5) * 2.0;
                red = 255;
                green = static_cast<int>(255 - u * (255 - 60));
                blue = static_cast<int>(255 - u * (255 - 30));
            }
            os << "<rect x=\"" << kMarginLeft + c * cell << "\" y=\"" << kMarginTop + r * cell
               << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << red << ","
               << green << "," << blue << ")\"/>\n";
        }
    os << "<text x=\"" << kMarginLeft << "\" y=\"" << kMarginTop + values.rows() * cell + 24
       << "\" font-size=\"11\">range [" << num(vmin) << ", " << num(vmax) << "]</text>\n";
    os << "</svg>\n";
}

}  // namespace aka
