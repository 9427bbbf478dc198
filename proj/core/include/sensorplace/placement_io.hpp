#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sensorplace/placement.hpp"

namespace sensorplace {

// Constraint files are JSON objects:
//   {
//     "forbidden_nodes": [3, 17],
//     "forbidden_boxes": [{"min": [x0, y0], "max": [x1, y1]}],
//     "forbidden_balls": [{"center": [x, y], "radius": 0.3}],
//     "min_distance": 0.25
//   }
// Every key is optional. Boxes and balls are resolved to node indices against
// `coords` at load time, so they need coordinates.
ConstraintSpec parse_constraints(const std::string& text, const Eigen::MatrixXd& coords, Index n);
ConstraintSpec load_constraints(const std::filesystem::path& path, const Eigen::MatrixXd& coords,
                                Index n);

// Sensor set files are JSON objects with the ordered "indices", their 1-based
// importance "rank", node "coords" when known, and "selection_volume".
std::string format_sensor_set(const SensorSet& sensors, const Eigen::MatrixXd& coords,
                              std::optional<double> volume);
void save_sensor_set(const std::filesystem::path& path, const SensorSet& sensors,
                     const Eigen::MatrixXd& coords, std::optional<double> volume);
SensorSet load_sensor_set(const std::filesystem::path& path);

}  // namespace sensorplace
