#pragma once

#include <string>
#include <vector>

#include "matrix.hpp"

namespace aka {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

// Minimal self-contained SVG emitters; no external plotting dependency.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

// Diverging blue-white-red colormap over [vmin, vmax].
void write_heatmap(const std::string& path, const std::string& title, const Matrix& values,
                   double vmin, double vmax);

}  // namespace aka
