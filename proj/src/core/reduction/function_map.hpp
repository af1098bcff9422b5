#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffnet/mlp.hpp"
#include "taskcore/space.hpp"

namespace taskred::reduction {

using core::Point;
using core::Space;

// A total function between finite index sets.
struct FiniteMap {
  std::size_t domain_size = 0;
  std::size_t codomain_size = 0;
  std::vector<std::size_t> table;

  static FiniteMap identity(std::size_t n);
  static FiniteMap from_table(std::size_t codomain_size, std::vector<std::size_t> table);

  std::size_t operator()(std::size_t x) const { return table[x]; }
  bool is_identity() const;
  // (next o this): x -> next(this(x)).
  FiniteMap then(const FiniteMap& next) const;
  bool operator==(const FiniteMap& other) const = default;
};

struct ClosedForm {
  std::string name;
  nlohmann::json params;
};

// Representation-carrying function between two spaces. Tabular and closed-form
// members always carry a materialized FiniteMap; neural members do not and are
// rejected by exact operations.
class MapBody {
 public:
  static MapBody tabular(FiniteMap map);
  static MapBody closed_form(ClosedForm form, FiniteMap materialized);
  static MapBody neural(diffnet::Mlp net, Space domain, Space codomain);

  bool is_finite() const { return table_.has_value(); }
  const FiniteMap& table() const;
  const std::optional<ClosedForm>& form() const { return form_; }
  const diffnet::Mlp* net() const { return net_ ? &*net_ : nullptr; }
  const Space& domain() const { return domain_; }
  const Space& codomain() const { return codomain_; }

  Point apply(const Point& x) const;

  nlohmann::json to_json() const;

 private:
  std::optional<FiniteMap> table_;
  std::optional<ClosedForm> form_;
  std::optional<diffnet::Mlp> net_;
  Space domain_;
  Space codomain_;
};

// h: O1 -> O2.
class Encoder {
 public:
  explicit Encoder(MapBody body) : body_(std::move(body)) {}
  static Encoder tabular(FiniteMap map) { return Encoder(MapBody::tabular(std::move(map))); }
  static Encoder identity(std::size_t observations);

  const MapBody& body() const { return body_; }
  const FiniteMap& table() const { return body_.table(); }
  Point operator()(const Point& o) const { return body_.apply(o); }
  // (next o this) as an encoder O1 -> O3.
  Encoder then(const Encoder& next) const;

 private:
  MapBody body_;
};

// g: A2 -> A1.
class Decoder {
 public:
  explicit Decoder(MapBody body) : body_(std::move(body)) {}
  static Decoder tabular(FiniteMap map) { return Decoder(MapBody::tabular(std::move(map))); }
  static Decoder identity(std::size_t actions);

  const MapBody& body() const { return body_; }
  const FiniteMap& table() const { return body_.table(); }
  Point operator()(const Point& a) const { return body_.apply(a); }
  // (this o inner): A3 -> A2 -> A1.
  Decoder after(const Decoder& inner) const;

 private:
  MapBody body_;
};

nlohmann::json to_json(const Encoder& h);
nlohmann::json to_json(const Decoder& g);
// Accepts tabular {domain_size, codomain_size, table} and closed-form {name, params}.
Encoder encoder_from_json(const nlohmann::json& doc);
Decoder decoder_from_json(const nlohmann::json& doc);

// Closed-form registry: "identity", "rot90_obs", "rot_action_mod4".
FiniteMap materialize_closed_form(const ClosedForm& form);

}  // namespace taskred::reduction
