#include "sensorplace/placement_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sensorplace/errors.hpp"

namespace sensorplace {
namespace {

using nlohmann::json;

Eigen::VectorXd read_point(const json& j, Index dim, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != dim)
    throw ParseError(std::string(what) + " must be an array of " + std::to_string(dim) +
                     " numbers");
  Eigen::VectorXd out(dim);
  for (Index d = 0; d < dim; ++d) out(d) = j.at(static_cast<std::size_t>(d)).get<double>();
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ConstraintSpec parse_constraints(const std::string& text, const Eigen::MatrixXd& coords, Index n) {
  ConstraintSpec spec;
  try {
    const auto doc = json::parse(text);
    if (!doc.is_object()) throw ParseError("constraint file must hold a JSON object");

    std::vector<char> mark(static_cast<std::size_t>(n), 0);
    for (const auto& v : doc.value("forbidden_nodes", json::array())) {
      const auto i = v.get<Index>();
      if (i < 0 || i >= n)
        throw ParseError("forbidden node " + std::to_string(i) + " outside [0, " +
                         std::to_string(n) + ")");
      mark[static_cast<std::size_t>(i)] = 1;
    }

    const bool geometric = doc.contains("forbidden_boxes") || doc.contains("forbidden_balls");
    if (geometric && coords.size() == 0)
      throw ParseError("forbidden regions need node coordinates");
    const Index dim = coords.cols();
    for (const auto& box : doc.value("forbidden_boxes", json::array())) {
      const auto lo = read_point(box.at("min"), dim, "box min");
      const auto hi = read_point(box.at("max"), dim, "box max");
      for (Index i = 0; i < coords.rows(); ++i) {
        const Eigen::VectorXd x = coords.row(i).transpose();
        if ((x.array() >= lo.array()).all() && (x.array() <= hi.array()).all())
          mark[static_cast<std::size_t>(i)] = 1;
      }
    }
    for (const auto& ball : doc.value("forbidden_balls", json::array())) {
      const auto centre = read_point(ball.at("center"), dim, "ball center");
      const double radius = ball.at("radius").get<double>();
      for (Index i = 0; i < coords.rows(); ++i)
        if ((coords.row(i).transpose() - centre).norm() <= radius)
          mark[static_cast<std::size_t>(i)] = 1;
    }

    for (Index i = 0; i < n; ++i)
      if (mark[static_cast<std::size_t>(i)]) spec.forbidden.push_back(i);
    spec.min_distance = doc.value("min_distance", 0.0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("constraint file: ") + e.what());
  }
  try {
    spec.validate(n, coords.size() > 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("constraint file: ") + e.what());
  }
  return spec;
}

ConstraintSpec load_constraints(const std::filesystem::path& path, const Eigen::MatrixXd& coords,
                                Index n) {
  return parse_constraints(read_text(path), coords, n);
}

std::string format_sensor_set(const SensorSet& sensors, const Eigen::MatrixXd& coords,
                              std::optional<double> volume) {
  json doc;
  doc["indices"] = sensors.indices;
  json ranks = json::array();
  for (std::size_t i = 0; i < sensors.size(); ++i) ranks.push_back(i + 1);
  doc["rank"] = ranks;
  if (coords.size() > 0) {
    json points = json::array();
    for (auto idx : sensors.indices) {
      json point = json::array();
      for (Index d = 0; d < coords.cols(); ++d) point.push_back(coords(idx, d));
      points.push_back(point);
    }
    doc["coords"] = points;
  }
  doc["selection_volume"] = volume ? json(*volume) : json(nullptr);
  return doc.dump(2) + "\n";
}

void save_sensor_set(const std::filesystem::path& path, const SensorSet& sensors,
                     const Eigen::MatrixXd& coords, std::optional<double> volume) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << format_sensor_set(sensors, coords, volume);
}

SensorSet load_sensor_set(const std::filesystem::path& path) {
  try {
    const auto doc = json::parse(read_text(path));
    return SensorSet{doc.at("indices").get<std::vector<Index>>()};
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace sensorplace
