#include "taskcore/space.hpp"

#include <cmath>

#include "common/error.hpp"

namespace taskred::core {

Space Space::finite(std::size_t size) {
  if (size < 1) throw ConfigurationError("finite space size must be >= 1");
  Space s;
  s.kind_ = Kind::kFinite;
  s.size_ = size;
  return s;
}

Space Space::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw ConfigurationError("box space needs matching, non-empty lower/upper bounds");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) throw ConfigurationError("box space lower bound exceeds upper bound");
  }
  Space s;
  s.kind_ = Kind::kBox;
  s.size_ = 0;
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

std::size_t Space::size() const {
  if (!is_finite()) throw UnsupportedOperation("size() is only defined for finite spaces");
  return size_;
}

void Space::write_features(const Point& p, double* out) const {
  if (is_finite()) {
    for (std::size_t i = 0; i < size_; ++i) out[i] = 0.0;
    out[point_index(p)] = 1.0;
  } else {
    for (std::size_t i = 0; i < lower_.size(); ++i) out[i] = p[i];
  }
}

Eigen::VectorXd Space::features(const Point& p) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(feature_dim()));
  write_features(p, v.data());
  return v;
}

bool Space::contains(const Point& p) const {
  if (is_finite()) {
    return p.size() == 1 && p[0] >= 0.0 && p[0] < static_cast<double>(size_) && std::floor(p[0]) == p[0];
  }
  if (p.size() != lower_.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
  }
  return true;
}

nlohmann::json to_json(const Space& space) {
  if (space.is_finite()) return {{"kind", "finite"}, {"size", space.size()}};
  return {{"kind", "box"}, {"lower", space.lower()}, {"upper", space.upper()}};
}

Space space_from_json(const nlohmann::json& doc) {
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "finite") return Space::finite(doc.at("size").get<std::size_t>());
  if (kind == "box") return Space::box(doc.at("lower").get<std::vector<double>>(), doc.at("upper").get<std::vector<double>>());
  throw ConfigurationError("unknown space kind '" + kind + "'");
}

}  // namespace taskred::core
