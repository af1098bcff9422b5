#include "reduction/function_map.hpp"

#include "common/error.hpp"
#include "envs/gridworld.hpp"
#include "taskcore/policy.hpp"

namespace taskred::reduction {

FiniteMap FiniteMap::identity(std::size_t n) {
  FiniteMap m{n, n, std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) m.table[i] = i;
  return m;
}

FiniteMap FiniteMap::from_table(std::size_t codomain_size, std::vector<std::size_t> table) {
  if (table.empty()) throw ConfigurationError("a finite map needs a non-empty domain");
  for (auto y : table) {
    if (y >= codomain_size) throw ConfigurationError("finite map value " + std::to_string(y) + " outside codomain");
  }
  return FiniteMap{table.size(), codomain_size, std::move(table)};
}

bool FiniteMap::is_identity() const {
  if (domain_size != codomain_size) return false;
  for (std::size_t i = 0; i < domain_size; ++i) {
    if (table[i] != i) return false;
  }
  return true;
}

FiniteMap FiniteMap::then(const FiniteMap& next) const {
  if (codomain_size != next.domain_size) throw ConfigurationError("finite map composition: codomain/domain mismatch");
  FiniteMap out{domain_size, next.codomain_size, std::vector<std::size_t>(domain_size)};
  for (std::size_t i = 0; i < domain_size; ++i) out.table[i] = next.table[table[i]];
  return out;
}

MapBody MapBody::tabular(FiniteMap map) {
  MapBody b;
  b.domain_ = Space::finite(map.domain_size);
  b.codomain_ = Space::finite(map.codomain_size);
  b.table_ = std::move(map);
  return b;
}

MapBody MapBody::closed_form(ClosedForm form, FiniteMap materialized) {
  MapBody b = tabular(std::move(materialized));
  b.form_ = std::move(form);
  return b;
}

MapBody MapBody::neural(diffnet::Mlp net, Space domain, Space codomain) {
  if (net.input_dim() != domain.feature_dim()) throw ConfigurationError("neural map input does not match its domain");
  if (net.output_dim() != codomain.feature_dim()) throw ConfigurationError("neural map output does not match its codomain");
  MapBody b;
  b.domain_ = std::move(domain);
  b.codomain_ = std::move(codomain);
  b.net_ = std::move(net);
  return b;
}

const FiniteMap& MapBody::table() const {
  if (!table_) throw UnsupportedOperation("neural members are excluded from exact (tabular) operations");
  return *table_;
}

Point MapBody::apply(const Point& x) const {
  if (table_) return core::index_point((*table_)(core::point_index(x)));
  const auto feats = domain_.features(x);
  const auto out = net_->forward({feats.data(), static_cast<std::size_t>(feats.size())});
  if (codomain_.is_finite()) return core::index_point(core::argmax_lowest(out.data(), codomain_.size()));
  return Point(out.data(), out.data() + out.size());
}

nlohmann::json MapBody::to_json() const {
  if (form_) return {{"name", form_->name}, {"params", form_->params}};
  if (table_) return {{"domain_size", table_->domain_size}, {"codomain_size", table_->codomain_size}, {"table", table_->table}};
  return {{"neural", diffnet::to_json(*net_)}, {"domain", core::to_json(domain_)}, {"codomain", core::to_json(codomain_)}};
}

Encoder Encoder::identity(std::size_t observations) {
  return Encoder(MapBody::closed_form({"identity", {{"size", observations}}}, FiniteMap::identity(observations)));
}

Encoder Encoder::then(const Encoder& next) const { return Encoder::tabular(table().then(next.table())); }

Decoder Decoder::identity(std::size_t actions) {
  return Decoder(MapBody::closed_form({"identity", {{"size", actions}}}, FiniteMap::identity(actions)));
}

Decoder Decoder::after(const Decoder& inner) const { return Decoder::tabular(inner.table().then(table())); }

nlohmann::json to_json(const Encoder& h) { return h.body().to_json(); }
nlohmann::json to_json(const Decoder& g) { return g.body().to_json(); }

namespace {

MapBody body_from_json(const nlohmann::json& doc) {
  try {
    if (doc.contains("name")) {
      ClosedForm form{doc.at("name").get<std::string>(), doc.value("params", nlohmann::json::object())};
      FiniteMap m = materialize_closed_form(form);
      return MapBody::closed_form(std::move(form), std::move(m));
    }
    if (doc.contains("neural")) {
      return MapBody::neural(diffnet::mlp_from_json(doc.at("neural")), core::space_from_json(doc.at("domain")),
                             core::space_from_json(doc.at("codomain")));
    }
    const auto domain = doc.at("domain_size").get<std::size_t>();
    auto m = FiniteMap::from_table(doc.at("codomain_size").get<std::size_t>(), doc.at("table").get<std::vector<std::size_t>>());
    if (m.domain_size != domain) throw ConfigurationError("table length does not match domain_size");
    return MapBody::tabular(std::move(m));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed encoder/decoder document: ") + e.what());
  }
}

}  // namespace

Encoder encoder_from_json(const nlohmann::json& doc) { return Encoder(body_from_json(doc)); }
Decoder decoder_from_json(const nlohmann::json& doc) { return Decoder(body_from_json(doc)); }

FiniteMap materialize_closed_form(const ClosedForm& form) {
  try {
    if (form.name == "identity") return FiniteMap::identity(form.params.at("size").get<std::size_t>());
    if (form.name == "rot_action_mod4") return envs::rotation_action_map(form.params.at("k").get<int>());
    if (form.name == "rot90_obs") {
      envs::GridWorldParams p;
      p.n = form.params.at("n").get<int>();
      p.m = form.params.at("m").get<int>();
      p.layout_samples = form.params.value("layout_samples", std::size_t{0});
      const auto seed = form.params.value("layout_seed", std::uint64_t{0});
      return envs::rotation_observation_map(envs::GridUniverse::build(p, seed), form.params.at("k").get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("bad params for closed-form map '" + form.name + "': " + e.what());
  }
  throw ConfigurationError("unknown closed-form map '" + form.name + "' (known: identity, rot90_obs, rot_action_mod4)");
}

}  // namespace taskred::reduction
