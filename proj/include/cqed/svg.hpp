#pragma once

#include <string>
#include <vector>

#include "cqed/datio.hpp"

namespace cqed {

// Minimal self-contained SVG output: heatmap of a Map2D and polyline plots.
// Good enough for eyeballing simulations; not a plotting library.
void write_svg_heatmap(const std::string& path, const Map2D& m,
                       const std::string& title = "");
void write_svg_lines(const std::string& path, const Eigen::VectorXd& x,
                     const std::vector<Eigen::VectorXd>& ys,
                     const std::string& title = "");

}  // namespace cqed
