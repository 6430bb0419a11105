#pragma once
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deloc/good_boxes.hpp"
#include "deloc/hamiltonian.hpp"
#include "deloc/spectral.hpp"

namespace deloc {
namespace io {

// shortest exact decimal for a double (17 significant digits round-trip)
std::string fmt(double v);
std::string fmt(const Vec& v, int dim);  // space-separated coordinates

// Point-set text format:
//   dim=<d>
//   window=<c1> .. <cd>,<W>
//   r=<r>          (only with params)
//   R=<R>
//   <x1> [<x2>]    one point per line
std::string write_point_set(const PointSet& ps);
PointSet read_point_set(const std::string& text);
void save_point_set(const PointSet& ps, const std::string& path);
PointSet load_point_set(const std::string& path);

// sparse matrix in coordinate form, one "row col value" per line, 0-based
std::string write_sparse(const SpMat& m);

// CSV with one row per mode: index, eigenvalue, residual, ipr, decay_rate
std::string eigen_csv(const std::vector<ModeProfile>& modes);

std::string good_scale_csv_header();
std::string good_scale_csv_row(const GoodScaleReport& rep);

// Minimal JSON value with deterministic serialisation: object keys keep
// insertion order, all numbers print at 17 significant digits.
class Json {
 public:
  Json() : val_(nullptr) {}
  Json(bool b) : val_(b) {}
  Json(double d) : val_(d) {}
  Json(long i) : val_(i) {}
  Json(int i) : val_(static_cast<long>(i)) {}
  Json(const char* s) : val_(std::string(s)) {}
  Json(std::string s) : val_(std::move(s)) {}

  static Json array();
  static Json object();

  Json& operator[](const std::string& key);      // object access, inserts
  void push_back(Json v);                        // array append

  std::string dump(int indent = 0) const;

 private:
  struct Object {
    std::vector<std::pair<std::string, Json>> items;
  };
  struct Array {
    std::vector<Json> items;
  };
  std::variant<std::nullptr_t, bool, long, double, std::string, Object, Array> val_;
  void write(std::string& out, int indent, int depth) const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// FNV-1a over a string; stable fingerprint for configs embedded in reports
std::uint64_t fingerprint(const std::string& text);

}  // namespace io
}  // namespace deloc
