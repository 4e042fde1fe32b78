#include "cqed/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cqed {

// compact perceptual-ish colormap (dark blue -> teal -> yellow)
static void colormap(double t, int& r, int& g, int& b) {
  t = std::clamp(t, 0.0, 1.0);
  r = static_cast<int>(255.0 * std::clamp(1.61 * t - 0.61, 0.0, 1.0));
  g = static_cast<int>(255.0 * std::clamp(1.1 * t, 0.0, 1.0));
  b = static_cast<int>(255.0 * std::clamp(0.35 + 0.9 * t * (1.0 - t) * 2.0 - 0.6 * t, 0.0, 1.0));
}

void write_svg_heatmap(const std::string& path, const Map2D& m,
                       const std::string& title) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  const int w = 640, hgt = 480, ml = 60, mb = 40, mt = 30;
  const Eigen::Index nx = m.x.size(), ny = m.y.size();
  const double lo = m.cells.minCoeff(), hi = m.cells.maxCoeff();
  const double scale = (hi > lo) ? 1.0 / (hi - lo) : 0.0;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
      << hgt << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  const double cw = static_cast<double>(w - ml - 10) / static_cast<double>(nx);
  const double ch = static_cast<double>(hgt - mb - mt) / static_cast<double>(ny);
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      int r, g, b;
      colormap((m.cells(i, j) - lo) * scale, r, g, b);
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "<rect x='%.2f' y='%.2f' width='%.2f' height='%.2f' "
                    "fill='rgb(%d,%d,%d)'/>\n",
                    ml + static_cast<double>(i) * cw,
                    mt + static_cast<double>(ny - 1 - j) * ch, cw + 0.5, ch + 0.5,
                    r, g, b);
      out << buf;
    }
  }
  out << "<text x='" << ml << "' y='18' font-size='13'>" << title << "</text>\n";
  out << "<text x='" << w / 2 << "' y='" << hgt - 8 << "' font-size='12'>"
      << m.x_label << " [" << m.x.minCoeff() << ", " << m.x.maxCoeff()
      << "]</text>\n";
  out << "<text x='8' y='" << hgt / 2 << "' font-size='12' transform='rotate(-90 12,"
      << hgt / 2 << ")'>" << m.y_label << " [" << m.y.minCoeff() << ", "
      << m.y.maxCoeff() << "]</text>\n";
  out << "</svg>\n";
}

void write_svg_lines(const std::string& path, const Eigen::VectorXd& x,
                     const std::vector<Eigen::VectorXd>& ys,
                     const std::string& title) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  const int w = 640, hgt = 480, ml = 60, mb = 40, mt = 30;
  double ylo = 1e300, yhi = -1e300;
  for (const auto& y : ys) {
    ylo = std::min(ylo, y.minCoeff());
    yhi = std::max(yhi, y.maxCoeff());
  }
  if (!(yhi > ylo)) yhi = ylo + 1.0;
  const double xlo = x.minCoeff(), xhi = x.maxCoeff();
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
      << hgt << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  for (size_t k = 0; k < ys.size(); ++k) {
    out << "<polyline fill='none' stroke='" << colors[k % 8]
        << "' stroke-width='1.5' points='";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double px = ml + (x[i] - xlo) / (xhi - xlo > 0 ? xhi - xlo : 1.0) *
                                 (w - ml - 10);
      const double py = hgt - mb - (ys[k][i] - ylo) / (yhi - ylo) * (hgt - mb - mt);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
      out << buf;
    }
    out << "'/>\n";
  }
  out << "<text x='" << ml << "' y='18' font-size='13'>" << title << "</text>\n";
  out << "</svg>\n";
}

}  // namespace cqed
