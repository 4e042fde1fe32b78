#include "cqed/datio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace cqed {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string content_hash(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

// 17 significant digits: enough for a double to round-trip exactly.
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

static std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  return out;
}

static std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open for reading: " + path);
  return in;
}

static std::vector<double> split_row(const std::string& line, const std::string& path) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      row.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw config_error("malformed number '" + cell + "' in " + path);
    }
  }
  return row;
}

void write_trace_csv(const std::string& path, const ComplexTrace& t) {
  if (t.f.size() != t.s21.size())
    throw config_error("trace: axis and data lengths differ");
  auto out = open_out(path);
  out << "f_d_hz,re_s21,im_s21\n";
  for (Eigen::Index i = 0; i < t.f.size(); ++i)
    out << fmt17(t.f[i]) << ',' << fmt17(t.s21[i].real()) << ','
        << fmt17(t.s21[i].imag()) << '\n';
}

ComplexTrace read_trace_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty trace file: " + path);
  std::vector<double> f, re, im;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_row(line, path);
    if (row.size() != 3)
      throw config_error("trace row needs 3 columns in " + path);
    f.push_back(row[0]);
    re.push_back(row[1]);
    im.push_back(row[2]);
  }
  ComplexTrace t;
  t.f = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  t.s21.resize(t.f.size());
  for (Eigen::Index i = 0; i < t.f.size(); ++i)
    t.s21[i] = cplx(re[static_cast<size_t>(i)], im[static_cast<size_t>(i)]);
  return t;
}

void write_map_csv(const std::string& path, const Map2D& m) {
  if (m.cells.rows() != m.x.size() || m.cells.cols() != m.y.size())
    throw config_error("map: cell shape does not match axes");
  auto out = open_out(path);
  out << m.x_label;
  for (Eigen::Index j = 0; j < m.y.size(); ++j) out << ',' << fmt17(m.y[j]);
  out << '\n';
  for (Eigen::Index i = 0; i < m.x.size(); ++i) {
    out << fmt17(m.x[i]);
    for (Eigen::Index j = 0; j < m.y.size(); ++j) out << ',' << fmt17(m.cells(i, j));
    out << '\n';
  }
}

Map2D read_map_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty map file: " + path);
  Map2D m;
  {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> y;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        m.x_label = cell;
        first = false;
      } else {
        y.push_back(std::stod(cell));
      }
    }
    m.y = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_row(line, path);
    if (static_cast<Eigen::Index>(row.size()) != m.y.size() + 1)
      throw config_error("map row width mismatch in " + path);
    rows.push_back(std::move(row));
  }
  m.x.resize(static_cast<Eigen::Index>(rows.size()));
  m.cells.resize(m.x.size(), m.y.size());
  for (Eigen::Index i = 0; i < m.x.size(); ++i) {
    m.x[i] = rows[static_cast<size_t>(i)][0];
    for (Eigen::Index j = 0; j < m.y.size(); ++j)
      m.cells(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j) + 1];
  }
  return m;
}

void write_sidecar(const std::string& path, const json& inputs) {
  json side;
  side["schema"] = "cqedsim-meta/1";
  side["inputs"] = inputs;
  side["content_hash"] = content_hash(inputs);
  auto out = open_out(path);
  out << side.dump(2) << '\n';
}

json read_sidecar(const std::string& path) {
  auto in = open_in(path);
  json side;
  try {
    in >> side;
  } catch (const std::exception& e) {
    throw config_error("malformed sidecar " + path + ": " + e.what());
  }
  if (side.value("schema", "") != "cqedsim-meta/1")
    throw config_error("unsupported sidecar schema in " + path);
  return side;
}

bool verify_sidecar(const json& sidecar) {
  if (!sidecar.contains("inputs") || !sidecar.contains("content_hash")) return false;
  return content_hash(sidecar["inputs"]) == sidecar["content_hash"].get<std::string>();
}

// Linear interpolation of the background onto the requested point; the axis
// must be sorted ascending.
static cplx interp_background(const ComplexTrace& bg, double f) {
  const Eigen::Index n = bg.f.size();
  if (n < 2) throw config_error("background needs at least two points");
  if (f < bg.f[0] || f > bg.f[n - 1])
    throw config_error("background span does not cover the data axis");
  Eigen::Index hi = 1;
  while (hi < n - 1 && bg.f[hi] < f) ++hi;
  const double t = (f - bg.f[hi - 1]) / (bg.f[hi] - bg.f[hi - 1]);
  return bg.s21[hi - 1] + t * (bg.s21[hi] - bg.s21[hi - 1]);
}

ComplexTrace normalize_background(const ComplexTrace& data,
                                  const ComplexTrace& background) {
  ComplexTrace out = data;
  for (Eigen::Index i = 0; i < data.f.size(); ++i) {
    const cplx b = interp_background(background, data.f[i]);
    if (std::abs(b) == 0.0)
      throw numeric_error("background is zero at f = " + std::to_string(data.f[i]));
    out.s21[i] = data.s21[i] / b;
  }
  return out;
}

Map2D normalize_background(const Map2D& data, const ComplexTrace& background) {
  Map2D out = data;
  for (Eigen::Index j = 0; j < data.y.size(); ++j) {
    const double b2 = std::norm(interp_background(background, data.y[j]));
    if (b2 == 0.0)
      throw numeric_error("background is zero at f = " + std::to_string(data.y[j]));
    out.cells.col(j) = data.cells.col(j) / b2;
  }
  return out;
}

ComplexTrace linecut(const Map2D& m, char axis, double at, Interp interp) {
  if (axis != 'x' && axis != 'y') throw config_error("linecut: axis must be 'x' or 'y'");
  const Eigen::VectorXd& a = (axis == 'x') ? m.x : m.y;
  const Eigen::Index n = a.size();
  if (n < 1) throw config_error("linecut: empty axis");
  if (at < a.minCoeff() || at > a.maxCoeff())
    throw config_error("linecut position out of axis range");
  ComplexTrace t;
  auto take = [&](Eigen::Index k) -> Eigen::VectorXd {
    if (axis == 'x') return m.cells.row(k).transpose();
    return m.cells.col(k);
  };
  Eigen::VectorXd vals;
  if (interp == Interp::nearest) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(a[i] - at) < std::abs(a[best] - at)) best = i;
    vals = take(best);
  } else {
    Eigen::Index hi = 1;
    while (hi < n - 1 && a[hi] < at) ++hi;
    const double w = (at - a[hi - 1]) / (a[hi] - a[hi - 1]);
    vals = (1.0 - w) * take(hi - 1) + w * take(hi);
  }
  t.f = (axis == 'x') ? m.y : m.x;
  t.s21 = vals.cast<cplx>();
  return t;
}

Eigen::VectorXd voltage_axis_to_detuning(const Eigen::VectorXd& v_pl,
                                         const DetuningCal& cal) {
  Eigen::VectorXd eps(v_pl.size());
  for (Eigen::Index i = 0; i < v_pl.size(); ++i)
    eps[i] = detuning_from_voltages(cal, v_pl[i], cal.v_pr0);
  return eps;
}

Eigen::VectorXd detuning_axis_to_voltage(const Eigen::VectorXd& eps,
                                         const DetuningCal& cal) {
  if (cal.beta_pl == 0.0)
    throw config_error("detuning_axis_to_voltage: beta_pl must be non-zero");
  return (eps / (cal.beta_pl * ev_to_hz)).array() + cal.v_pl0;
}

}  // namespace cqed
