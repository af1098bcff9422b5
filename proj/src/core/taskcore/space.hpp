#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace taskred::core {

// A point of any space. Finite spaces use a single coordinate holding the index.
using Point = std::vector<double>;

class Space {
 public:
  enum class Kind { kFinite, kBox };

  static Space finite(std::size_t size);
  static Space box(std::vector<double> lower, std::vector<double> upper);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  std::size_t size() const;  // finite only
  std::size_t dims() const { return is_finite() ? 1 : lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  // Width of the network-facing encoding: one-hot for finite, raw for box.
  std::size_t feature_dim() const { return is_finite() ? size_ : lower_.size(); }
  void write_features(const Point& p, double* out) const;
  Eigen::VectorXd features(const Point& p) const;

  bool contains(const Point& p) const;
  bool operator==(const Space& other) const = default;

 private:
  Kind kind_ = Kind::kFinite;
  std::size_t size_ = 1;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

inline Point index_point(std::size_t i) { return Point{static_cast<double>(i)}; }
inline std::size_t point_index(const Point& p) { return static_cast<std::size_t>(p.at(0)); }

nlohmann::json to_json(const Space& space);
Space space_from_json(const nlohmann::json& doc);

}  // namespace taskred::core
