#pragma once

// CSV schemas (UTF-8, '.' decimal separator, LF):
//   IMU:          t,wx,wy,wz,ax,ay,az
//   features:     id,px,py,pz
//   observations: t,id,yx,yy,yz,s        rows sharing t form one frame
//   ground truth: t,qw,qx,qy,qz,px,py,pz,vx,vy,vz
// Loaders reject malformed rows (with the line number) and non-monotone
// timestamps.

#include <string>
#include <vector>

#include "senav/filter.hpp"
#include "senav/lie.hpp"
#include "senav/measurements.hpp"

namespace senav::io {

struct TruthRecord {
  double t = 0;
  NavState<double> X;
};

std::vector<ImuSample<double>> load_imu_csv(const std::string& path);
std::vector<Feature<double>> load_features_csv(const std::string& path);
std::vector<ObservationFrame<double>> load_observations_csv(const std::string& path);
std::vector<TruthRecord> load_truth_csv(const std::string& path);

void write_imu_csv(const std::string& path, const std::vector<ImuSample<double>>& samples);
void write_features_csv(const std::string& path, const std::vector<Feature<double>>& features);
void write_observations_csv(const std::string& path,
                            const std::vector<ObservationFrame<double>>& frames);
void write_truth_csv(const std::string& path, const std::vector<TruthRecord>& records);

/// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

}  // namespace senav::io
