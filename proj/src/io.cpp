#include "deloc/io.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace deloc {
namespace io {

std::string fmt(double v) {
  char buf[40];
  if (!std::isfinite(v)) {
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }
  // Shortest decimal that parses back to the identical bit pattern.  Length,
  // not precision, decides: at one significant digit 20 prints as "2e+01",
  // while two digits give the shorter "20".
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::bit_cast<std::uint64_t>(std::strtod(buf, nullptr)) ==
        std::bit_cast<std::uint64_t>(v)) {
      if (best.empty() || std::strlen(buf) < best.size()) best = buf;
    }
  }
  return best.empty() ? buf : best;
}

std::string fmt(const Vec& v, int dim) {
  std::string out = fmt(v[0]);
  if (dim == 2) {
    out += ' ';
    out += fmt(v[1]);
  }
  return out;
}

std::string write_point_set(const PointSet& ps) {
  std::string out;
  out += "dim=" + std::to_string(ps.dim) + "\n";
  out += "window=" + fmt(ps.window.center, ps.dim) + "," + fmt(ps.window.side) + "\n";
  if (ps.params) {
    out += "r=" + fmt(ps.params->r) + "\n";
    out += "R=" + fmt(ps.params->R) + "\n";
  }
  for (const auto& p : ps.points) out += fmt(p, ps.dim) + "\n";
  return out;
}

PointSet read_point_set(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int dim = 0;
  Box window;
  std::optional<double> r, R;
  std::vector<Vec> pts;
  auto fail = [](const std::string& why) -> std::invalid_argument {
    return std::invalid_argument("point set parse: " + why);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("dim=", 0) == 0) {
      dim = std::stoi(line.substr(4));
      if (dim != 1 && dim != 2) throw fail("dim must be 1 or 2");
      window.dim = dim;
    } else if (line.rfind("window=", 0) == 0) {
      if (dim == 0) throw fail("window before dim");
      std::string body = line.substr(7);
      auto comma = body.find(',');
      if (comma == std::string::npos) throw fail("window needs a ',<side>' part");
      std::istringstream cs(body.substr(0, comma));
      for (int c = 0; c < dim; ++c) {
        if (!(cs >> window.center[c])) throw fail("window centre coordinate");
      }
      std::string extra;
      if (cs >> extra) throw fail("window centre has extra data");
      window.side = std::stod(body.substr(comma + 1));
    } else if (line.rfind("r=", 0) == 0) {
      r = std::stod(line.substr(2));
    } else if (line.rfind("R=", 0) == 0) {
      R = std::stod(line.substr(2));
    } else {
      if (dim == 0) throw fail("point before dim");
      std::istringstream cs(line);
      Vec p{0.0, 0.0};
      for (int c = 0; c < dim; ++c) {
        if (!(cs >> p[c])) throw fail("point coordinate");
      }
      std::string extra;
      if (cs >> extra) throw fail("point has extra data");
      pts.push_back(p);
    }
  }
  if (dim == 0) throw fail("missing dim");
  if (!(window.side > 0.0)) throw fail("missing window");
  std::optional<DeloneParams> params;
  if (r && R) params = DeloneParams{*r, *R};
  if (r.has_value() != R.has_value()) throw fail("need both r and R or neither");
  return make_point_set(dim, std::move(pts), window, params);
}

void save_point_set(const PointSet& ps, const std::string& path) {
  write_text_file(path, write_point_set(ps));
}

PointSet load_point_set(const std::string& path) {
  return read_point_set(read_text_file(path));
}

std::string write_sparse(const SpMat& m) {
  std::string out;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      out += std::to_string(it.row()) + " " + std::to_string(it.col()) + " " +
             fmt(it.value()) + "\n";
    }
  }
  return out;
}

std::string eigen_csv(const std::vector<ModeProfile>& modes) {
  std::string out = "index,eigenvalue,residual,ipr,decay_rate\n";
  for (std::size_t i = 0; i < modes.size(); ++i) {
    out += std::to_string(i) + "," + fmt(modes[i].eigenvalue) + "," +
           fmt(modes[i].residual) + "," + fmt(modes[i].ipr) + "," +
           fmt(modes[i].decay_rate) + "\n";
  }
  return out;
}

std::string good_scale_csv_header() {
  return "L,x1,x2,E,m,zeta,p,n_trials,n_good,p_hat,ci_lo,ci_hi,threshold,verdict\n";
}

std::string good_scale_csv_row(const GoodScaleReport& rep) {
  std::string out;
  out += fmt(rep.L) + "," + fmt(rep.x[0]) + "," + fmt(rep.x[1]) + ",";
  out += fmt(rep.params.energy) + "," + fmt(rep.params.decay_rate) + "," +
         fmt(rep.params.zeta) + "," + fmt(rep.p_exponent) + ",";
  out += std::to_string(rep.n_trials) + "," + std::to_string(rep.n_good) + ",";
  out += fmt(rep.p_hat) + "," + fmt(rep.ci.lo) + "," + fmt(rep.ci.hi) + ",";
  out += fmt(rep.threshold) + "," + rep.verdict + "\n";
  return out;
}

Json Json::array() {
  Json j;
  j.val_ = Array{};
  return j;
}

Json Json::object() {
  Json j;
  j.val_ = Object{};
  return j;
}

Json& Json::operator[](const std::string& key) {
  if (!std::holds_alternative<Object>(val_)) val_ = Object{};
  auto& items = std::get<Object>(val_).items;
  for (auto& [k, v] : items) {
    if (k == key) return v;
  }
  items.emplace_back(key, Json());
  return items.back().second;
}

void Json::push_back(Json v) {
  if (!std::holds_alternative<Array>(val_)) val_ = Array{};
  std::get<Array>(val_).items.push_back(std::move(v));
}

namespace {
void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}
}  // namespace

void Json::write(std::string& out, int indent, int depth) const {
  auto pad = [&](int d) {
    if (indent > 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  if (std::holds_alternative<std::nullptr_t>(val_)) {
    out += "null";
  } else if (std::holds_alternative<bool>(val_)) {
    out += std::get<bool>(val_) ? "true" : "false";
  } else if (std::holds_alternative<long>(val_)) {
    out += std::to_string(std::get<long>(val_));
  } else if (std::holds_alternative<double>(val_)) {
    double d = std::get<double>(val_);
    if (std::isfinite(d)) {
      out += fmt(d);
    } else {
      // JSON has no literals for these; stringify to stay parseable
      write_escaped(out, fmt(d));
    }
  } else if (std::holds_alternative<std::string>(val_)) {
    write_escaped(out, std::get<std::string>(val_));
  } else if (std::holds_alternative<Object>(val_)) {
    const auto& items = std::get<Object>(val_).items;
    out += '{';
    for (std::size_t i = 0; i < items.size(); ++i) {
      pad(depth + 1);
      write_escaped(out, items[i].first);
      out += indent > 0 ? ": " : ":";
      items[i].second.write(out, indent, depth + 1);
      if (i + 1 < items.size()) out += ',';
    }
    if (!items.empty()) pad(depth);
    out += '}';
  } else {
    const auto& items = std::get<Array>(val_).items;
    out += '[';
    for (std::size_t i = 0; i < items.size(); ++i) {
      pad(depth + 1);
      items[i].write(out, indent, depth + 1);
      if (i + 1 < items.size()) out += ',';
    }
    if (!items.empty()) pad(depth);
    out += ']';
  }
}

std::string Json::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  if (indent > 0) out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::uint64_t fingerprint(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace io
}  // namespace deloc
