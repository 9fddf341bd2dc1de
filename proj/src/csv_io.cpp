#include "senav/csv_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "senav/errors.hpp"

namespace senav::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& s, const std::string& path, size_t line_no) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw io_error(path + ":" + std::to_string(line_no) + ": bad numeric field '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, const std::string& path, size_t line_no) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw io_error(path + ":" + std::to_string(line_no) + ": bad integer field '" + s + "'");
  }
  return v;
}

// Opens the file, checks the header, and hands each data row (split into
// fields, with its line number) to the sink.
template <typename RowFn>
void read_csv(const std::string& path, const std::string& header, size_t n_fields, RowFn&& row) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path + ": empty file, expected header");
  if (strip_cr(line) != header) {
    throw io_error(path + ":1: expected header '" + header + "'");
  }
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != n_fields) {
      throw io_error(path + ":" + std::to_string(line_no) + ": expected " +
                     std::to_string(n_fields) + " fields, got " + std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<ImuSample<double>> load_imu_csv(const std::string& path) {
  std::vector<ImuSample<double>> out;
  read_csv(path, "t,wx,wy,wz,ax,ay,az", 7, [&](const auto& f, size_t ln) {
    ImuSample<double> s;
    s.t = parse_double(f[0], path, ln);
    for (int i = 0; i < 3; ++i) s.omega[i] = parse_double(f[1 + i], path, ln);
    for (int i = 0; i < 3; ++i) s.accel[i] = parse_double(f[4 + i], path, ln);
    if (!out.empty() && s.t <= out.back().t) {
      throw io_error(path + ":" + std::to_string(ln) + ": non-monotone timestamp");
    }
    out.push_back(s);
  });
  return out;
}

std::vector<Feature<double>> load_features_csv(const std::string& path) {
  std::vector<Feature<double>> out;
  read_csv(path, "id,px,py,pz", 4, [&](const auto& f, size_t ln) {
    Feature<double> ft;
    ft.id = static_cast<int>(parse_long(f[0], path, ln));
    for (int i = 0; i < 3; ++i) ft.p[i] = parse_double(f[1 + i], path, ln);
    out.push_back(ft);
  });
  return out;
}

std::vector<ObservationFrame<double>> load_observations_csv(const std::string& path) {
  std::vector<ObservationFrame<double>> out;
  read_csv(path, "t,id,yx,yy,yz,s", 6, [&](const auto& f, size_t ln) {
    double t = parse_double(f[0], path, ln);
    FeatureObservation<double> ob;
    ob.id = static_cast<int>(parse_long(f[1], path, ln));
    for (int i = 0; i < 3; ++i) ob.y[i] = parse_double(f[2 + i], path, ln);
    ob.s = parse_double(f[5], path, ln);
    if (ob.s <= 0) {
      throw io_error(path + ":" + std::to_string(ln) + ": confidence weight must be > 0");
    }
    if (out.empty() || t != out.back().t) {
      if (!out.empty() && t < out.back().t) {
        throw io_error(path + ":" + std::to_string(ln) + ": non-monotone timestamp");
      }
      out.push_back(ObservationFrame<double>{t, {}});
    }
    out.back().observations.push_back(ob);
  });
  return out;
}

std::vector<TruthRecord> load_truth_csv(const std::string& path) {
  std::vector<TruthRecord> out;
  read_csv(path, "t,qw,qx,qy,qz,px,py,pz,vx,vy,vz", 11, [&](const auto& f, size_t ln) {
    TruthRecord r;
    r.t = parse_double(f[0], path, ln);
    Quat<double> q;
    for (int i = 0; i < 4; ++i) q[i] = parse_double(f[1 + i], path, ln);
    r.X.R = quat_to_rot(quat_normalize(q));
    for (int i = 0; i < 3; ++i) r.X.P[i] = parse_double(f[5 + i], path, ln);
    for (int i = 0; i < 3; ++i) r.X.V[i] = parse_double(f[8 + i], path, ln);
    if (!out.empty() && r.t <= out.back().t) {
      throw io_error(path + ":" + std::to_string(ln) + ": non-monotone timestamp");
    }
    out.push_back(r);
  });
  return out;
}

void write_imu_csv(const std::string& path, const std::vector<ImuSample<double>>& samples) {
  auto out = open_out(path);
  out << "t,wx,wy,wz,ax,ay,az\n";
  for (const auto& s : samples) {
    out << format_double(s.t);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(s.omega[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(s.accel[i]);
    out << '\n';
  }
}

void write_features_csv(const std::string& path, const std::vector<Feature<double>>& features) {
  auto out = open_out(path);
  out << "id,px,py,pz\n";
  for (const auto& f : features) {
    out << f.id;
    for (int i = 0; i < 3; ++i) out << ',' << format_double(f.p[i]);
    out << '\n';
  }
}

void write_observations_csv(const std::string& path,
                            const std::vector<ObservationFrame<double>>& frames) {
  auto out = open_out(path);
  out << "t,id,yx,yy,yz,s\n";
  for (const auto& fr : frames) {
    for (const auto& ob : fr.observations) {
      out << format_double(fr.t) << ',' << ob.id;
      for (int i = 0; i < 3; ++i) out << ',' << format_double(ob.y[i]);
      out << ',' << format_double(ob.s) << '\n';
    }
  }
}

void write_truth_csv(const std::string& path, const std::vector<TruthRecord>& records) {
  auto out = open_out(path);
  out << "t,qw,qx,qy,qz,px,py,pz,vx,vy,vz\n";
  for (const auto& r : records) {
    const Quat<double> q = rot_to_quat(r.X.R);
    out << format_double(r.t);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(q[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(r.X.P[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(r.X.V[i]);
    out << '\n';
  }
}

}  // namespace senav::io
