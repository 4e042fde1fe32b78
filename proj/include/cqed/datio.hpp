#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "cqed/chargeq.hpp"
#include "cqed/errors.hpp"

namespace cqed {

using json = nlohmann::json;

// A single complex transmission trace versus drive frequency.
struct ComplexTrace {
  Eigen::VectorXd f;     // drive frequency [Hz]
  Eigen::VectorXcd s21;  // complex transmission
};

// Real-valued 2D dataset: cells(i, j) sampled at x(i) (slow axis, e.g. plunger
// voltage or detuning) and y(j) (fast axis, drive frequency in Hz).
struct Map2D {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::MatrixXd cells;  // x.size() rows, y.size() cols
  std::string x_label = "x";
  std::string y_label = "f_d_hz";
};

enum class Interp { nearest, linear };

// --- content hashing (FNV-1a, 64 bit) -------------------------------------
std::uint64_t fnv1a64(const std::string& bytes);
// Hash of the canonical (sorted-key) JSON serialization, as 16 hex chars.
std::string content_hash(const json& j);

// 17 significant digits: enough for binary64 values to round-trip exactly.
std::string fmt17(double v);

// --- file io ---------------------------------------------------------------
// Traces: CSV "f_d_hz, re_s21, im_s21"; maps: first row is the y axis
// (corner cell holds the x label), remaining rows are "x, cells...".  All
// numbers use 17 significant digits so doubles round-trip bit-exactly.
void write_trace_csv(const std::string& path, const ComplexTrace& t);
ComplexTrace read_trace_csv(const std::string& path);
void write_map_csv(const std::string& path, const Map2D& m);
Map2D read_map_csv(const std::string& path);

// JSON sidecar (schema "cqedsim-meta/1") recording the generating inputs and
// their content hash.  verify_sidecar recomputes the hash and returns false on
// mismatch (tampered or hand-edited inputs).
void write_sidecar(const std::string& path, const json& inputs);
json read_sidecar(const std::string& path);
bool verify_sidecar(const json& sidecar);

// --- normalization / slicing ------------------------------------------------
// Complex traces divide pointwise by the background; real maps divide by
// |background|^2.  The background is resampled onto the data axis by linear
// interpolation; it must cover the full axis span and stay away from zero.
ComplexTrace normalize_background(const ComplexTrace& data,
                                  const ComplexTrace& background);
Map2D normalize_background(const Map2D& data, const ComplexTrace& background);

// Cut through a map at constant x (axis = 'x') or constant y (axis = 'y').
// The returned trace carries the remaining axis in .f and the (real) cells in
// Re(.s21).
ComplexTrace linecut(const Map2D& m, char axis, double at,
                     Interp interp = Interp::linear);

// Convert a plunger-voltage axis to detuning [h*Hz] with the other gate held
// at its reference value; invert back exactly.
Eigen::VectorXd voltage_axis_to_detuning(const Eigen::VectorXd& v_pl,
                                         const DetuningCal& cal);
Eigen::VectorXd detuning_axis_to_voltage(const Eigen::VectorXd& eps,
                                         const DetuningCal& cal);

}  // namespace cqed
