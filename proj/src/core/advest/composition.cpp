#include "advest/composition.hpp"

#include <cmath>

#include "common/error.hpp"

namespace taskred::advest {

Matrix squash(const core::Space& box, const Matrix& u) {
  Matrix a(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double lo = box.lower()[static_cast<std::size_t>(i)], hi = box.upper()[static_cast<std::size_t>(i)];
    a.row(i) = (lo + 0.5 * (u.row(i).array().tanh() + 1.0) * (hi - lo)).matrix();
  }
  return a;
}

Matrix squash_derivative(const core::Space& box, const Matrix& u) {
  Matrix d(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double lo = box.lower()[static_cast<std::size_t>(i)], hi = box.upper()[static_cast<std::size_t>(i)];
    d.row(i) = (0.5 * (hi - lo) * (1.0 - u.row(i).array().tanh().square())).matrix();
  }
  return d;
}

DiscreteComposition::DiscreteComposition(core::Space o1, core::Space o2, core::Space a1, core::Space a2,
                                         EncoderVariant encoder, diffnet::Mlp policy, SoftMap decoder)
    : o1_(std::move(o1)), o2_(std::move(o2)), a1_(std::move(a1)), a2_(std::move(a2)), encoder_(std::move(encoder)),
      policy_(std::move(policy)), decoder_(std::move(decoder)) {
  for (std::size_t a = 0; a < decoder_.in(); ++a) decoder_table_.push_back(decoder_.greedy(a));
  if (auto* soft = std::get_if<SoftMap>(&encoder_)) {
    for (std::size_t o = 0; o < soft->in(); ++o) encoder_table_.push_back(soft->greedy(o));
  }
}

core::Point DiscreteComposition::act(const core::Point& observation) const {
  Vector logits;
  if (!encoder_table_.empty()) {
    const auto feats = o2_.features(core::index_point(encoder_table_[core::point_index(observation)]));
    logits = policy_.forward({feats.data(), static_cast<std::size_t>(feats.size())});
  } else {
    const Matrix x = o1_.features(observation);
    const Matrix y = std::get<VectorMap>(encoder_).forward(x);
    logits = policy_.forward({y.data(), static_cast<std::size_t>(y.size())});
  }
  const std::size_t a2 = core::argmax_lowest(logits.data(), static_cast<std::size_t>(logits.size()));
  return core::index_point(decoder_table_[a2]);
}

nlohmann::json DiscreteComposition::describe() const {
  nlohmann::json doc = {{"kind", "discrete"},
                        {"observations1", core::to_json(o1_)},
                        {"observations2", core::to_json(o2_)},
                        {"actions1", core::to_json(a1_)},
                        {"actions2", core::to_json(a2_)},
                        {"policy", diffnet::to_json(policy_)},
                        {"decoder", decoder_.to_json()}};
  if (auto* soft = std::get_if<SoftMap>(&encoder_)) doc["encoder"] = {{"finite", soft->to_json()}};
  else doc["encoder"] = {{"box", std::get<VectorMap>(encoder_).to_json()}};
  return doc;
}

ContinuousComposition::ContinuousComposition(core::Space o1, core::Space o2, core::Space a1, core::Space a2,
                                             VectorMap encoder, diffnet::Mlp mean, Vector log_std, VectorMap decoder)
    : o1_(std::move(o1)), o2_(std::move(o2)), a1_(std::move(a1)), a2_(std::move(a2)), encoder_(std::move(encoder)),
      mean_(std::move(mean)), log_std_(std::move(log_std)), decoder_(std::move(decoder)) {}

core::Point ContinuousComposition::act(const core::Point& observation) const {
  const Matrix x = o1_.features(observation);
  const Matrix y = encoder_.forward(x);
  const Matrix u = mean_.forward_batch(y);
  const Matrix a = squash(a1_, decoder_.forward(u));
  return core::Point(a.data(), a.data() + a.size());
}

nlohmann::json ContinuousComposition::describe() const {
  return {{"kind", "continuous"},
          {"observations1", core::to_json(o1_)},
          {"observations2", core::to_json(o2_)},
          {"actions1", core::to_json(a1_)},
          {"actions2", core::to_json(a2_)},
          {"encoder", encoder_.to_json()},
          {"policy", diffnet::to_json(mean_)},
          {"log_std", std::vector<double>(log_std_.data(), log_std_.data() + log_std_.size())},
          {"decoder", decoder_.to_json()}};
}

core::Policy composition_from_json(const nlohmann::json& doc) {
  try {
    const auto o1 = core::space_from_json(doc.at("observations1"));
    const auto o2 = core::space_from_json(doc.at("observations2"));
    const auto a1 = core::space_from_json(doc.at("actions1"));
    const auto a2 = core::space_from_json(doc.at("actions2"));
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "discrete") {
      const auto& enc = doc.at("encoder");
      DiscreteComposition::EncoderVariant encoder =
          enc.contains("finite") ? DiscreteComposition::EncoderVariant(SoftMap::from_json(enc.at("finite")))
                                 : DiscreteComposition::EncoderVariant(VectorMap::from_json(enc.at("box")));
      return core::Policy::mapped(std::make_shared<DiscreteComposition>(o1, o2, a1, a2, std::move(encoder),
                                                                        diffnet::mlp_from_json(doc.at("policy")),
                                                                        SoftMap::from_json(doc.at("decoder"))));
    }
    if (kind == "continuous") {
      const auto ls = doc.at("log_std").get<std::vector<double>>();
      return core::Policy::mapped(std::make_shared<ContinuousComposition>(
          o1, o2, a1, a2, VectorMap::from_json(doc.at("encoder")), diffnet::mlp_from_json(doc.at("policy")),
          Eigen::Map<const Vector>(ls.data(), static_cast<Eigen::Index>(ls.size())),
          VectorMap::from_json(doc.at("decoder"))));
    }
    throw ConfigurationError("unknown composition kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed composition checkpoint: ") + e.what());
  }
}

}  // namespace taskred::advest
