#include <doctest.h>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "envs/gridworld.hpp"
#include "fixtures.hpp"
#include "reduction/reduction.hpp"

using namespace taskred;
using namespace taskred::reduction;
using core::Policy;

namespace {

EncoderSpace identity_h(std::size_t n) { return EncoderSpace::explicit_list({Encoder::identity(n)}); }
DecoderSpace identity_g(std::size_t n) { return DecoderSpace::explicit_list({Decoder::identity(n)}); }

Decoder shift_decoder(std::size_t k, std::size_t n) {
  std::vector<std::size_t> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = (i + k) % n;
  return Decoder::tabular(FiniteMap::from_table(n, t));
}

// Two contexts, three actions; context c is solved by action (c + shift) mod 3.
core::TaskSpec shifted_bandit(std::size_t shift) {
  std::vector<std::vector<double>> r(2, std::vector<double>(3, 0.0));
  for (std::size_t c = 0; c < 2; ++c) r[c][(c + shift) % 3] = 1.0;
  return fixtures::bandit(r, 1.0, "shift");
}

struct Grid {
  envs::GridUniverse universe;
  std::vector<core::TaskSpec> tasks;
  std::vector<std::vector<Policy>> families;
};

Grid grid(int m) {
  envs::GridWorldParams p;
  p.n = 2;
  p.m = m;
  Grid g{envs::GridUniverse::build(p, 0), {}, {}};
  for (int d = 0; d < 4; ++d) {
    const auto dir = static_cast<envs::Direction>(d);
    g.tasks.push_back(envs::make_gridworld(g.universe, dir));
    g.families.push_back(envs::gridworld_admissible_family(g.universe, dir, 4, 0));
  }
  return g;
}

}  // namespace

TEST_CASE("finite maps compose and detect identity") {
  const auto f = FiniteMap::from_table(3, {1, 2, 0});
  CHECK_FALSE(f.is_identity());
  CHECK(f.then(f).then(f).is_identity());
  CHECK(FiniteMap::identity(4).is_identity());
  CHECK_THROWS_AS(FiniteMap::from_table(2, {0, 2}), ConfigurationError);
}

TEST_CASE("identity composition extensionally equals the inner policy") {
  const auto inner = Policy::tabular({2, 0, 1, 1}, 3);
  const auto c = compose(Decoder::identity(3), inner, Encoder::identity(4));
  CHECK(c->materialize().action_table() == inner.action_table());
}

TEST_CASE("compose rejects space mismatches") {
  const auto inner = Policy::tabular({0, 1}, 2);
  CHECK_THROWS_AS(compose(Decoder::identity(3), inner, Encoder::identity(2)), ConfigurationError);
  CHECK_THROWS_AS(compose(Decoder::identity(2), inner, Encoder::identity(3)), ConfigurationError);
}

TEST_CASE("nested compositions equal the single composition of composed maps") {
  Rng rng(5);
  auto random_map = [&](std::size_t dom, std::size_t cod) {
    std::vector<std::size_t> t(dom);
    for (auto& v : t) v = uniform_index(rng, cod);
    return FiniteMap::from_table(cod, t);
  };
  const auto h1 = Encoder::tabular(random_map(30, 12)), h2 = Encoder::tabular(random_map(12, 7));
  const auto g2 = Decoder::tabular(random_map(5, 4)), g1 = Decoder::tabular(random_map(4, 3));
  const auto inner = Policy::tabular(random_map(7, 5).table, 5);
  const auto nested = compose(g1, compose_policy(g2, inner, h2), h1);
  const auto flat = compose(g1.after(g2), inner, h1.then(h2));
  for (int i = 0; i < 20; ++i) {
    const auto o = core::index_point(uniform_index(rng, 30));
    CHECK(nested->act(o) == flat->act(o));
  }
}

TEST_CASE("gridworld rotation maps a solution for N into one for E") {
  const auto g = grid(0);
  const auto h = envs::rotation_encoder(g.universe, 1);
  const auto dec = envs::rotation_decoder(1);
  for (const auto& pi : g.families[0]) {
    const auto composed = compose_policy(dec, pi, h);
    CHECK(core::exact_return(g.tasks[1], composed) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("reflexivity with identity spaces") {
  const auto t = shifted_bandit(0);
  const auto fam = core::enumerate_admissible(t);
  const auto v = check_reduction(t, t, identity_h(2), identity_g(3), fam);
  CHECK(v.holds);
  CHECK(v.witnesses.size() == fam.size());
}

TEST_CASE("a harder task does not reduce without a relabeling decoder") {
  const auto tau1 = fixtures::bandit({{0, 1}}, 1.0);
  const auto tau2 = fixtures::bandit({{1, 0}}, 1.0);
  const auto fam = core::enumerate_admissible(tau2);
  REQUIRE(fam.size() == 1);
  const auto v = check_reduction(tau1, tau2, identity_h(1), identity_g(2), fam);
  CHECK_FALSE(v.holds);
  REQUIRE(v.counterexample.has_value());
  CHECK(*v.counterexample == 0);
  CHECK_FALSE(check_equivalence(tau1, tau2, identity_h(1), identity_g(2), identity_h(1), identity_g(2),
                                core::enumerate_admissible(tau1), fam));
}

TEST_CASE("check_reduction validates its family") {
  const auto t = fixtures::bandit({{1, 0}}, 1.0);
  const std::vector<Policy> bad{Policy::tabular({1}, 2)};
  CHECK_THROWS_AS(check_reduction(t, t, identity_h(1), identity_g(2), bad), PreconditionViolation);
  CHECK_THROWS_AS(check_reduction(t, t, identity_h(1), identity_g(2), {}), PreconditionViolation);
}

TEST_CASE("gridworld E reduces to N through rotation spaces") {
  const auto g = grid(0);
  const auto v = check_reduction(g.tasks[1], g.tasks[0], envs::rotation_encoder_space(g.universe),
                                 envs::rotation_decoder_space(), g.families[0]);
  CHECK(v.holds);
  CHECK(v.witnesses.size() == g.families[0].size());
  for (const auto& w : v.witnesses) {
    CHECK(w.encoder == 1);
    CHECK(w.decoder == 1);
  }
}

TEST_CASE("gridworld goal tasks are pairwise equivalent") {
  const auto g = grid(0);
  const auto H = envs::rotation_encoder_space(g.universe);
  const auto G = envs::rotation_decoder_space();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      CHECK(check_equivalence(g.tasks[i], g.tasks[j], H, G, H, G, g.families[i], g.families[j]));
    }
  }
}

TEST_CASE("space axioms") {
  const auto full2 = DecoderSpace::explicit_list({Decoder::tabular(FiniteMap::from_table(2, {0, 0})),
                                                  Decoder::tabular(FiniteMap::from_table(2, {0, 1})),
                                                  Decoder::tabular(FiniteMap::from_table(2, {1, 0})),
                                                  Decoder::tabular(FiniteMap::from_table(2, {1, 1}))});
  const auto all_h = EncoderSpace::explicit_list({Encoder::tabular(FiniteMap::from_table(2, {0, 0})),
                                                  Encoder::tabular(FiniteMap::from_table(2, {0, 1})),
                                                  Encoder::tabular(FiniteMap::from_table(2, {1, 0})),
                                                  Encoder::tabular(FiniteMap::from_table(2, {1, 1}))});
  CHECK(verify_space_axioms(SpaceFamily::uniform(2, all_h, full2)).hypotheses_hold());

  envs::GridWorldParams p;
  const auto u = envs::GridUniverse::build(p, 0);
  const auto rot = verify_space_axioms(SpaceFamily::uniform(3, envs::rotation_encoder_space(u), envs::rotation_decoder_space()));
  CHECK(rot.identity_ok);
  CHECK(rot.closure_ok);

  const auto no_id = DecoderSpace::explicit_list({shift_decoder(1, 3)});
  const auto report = verify_space_axioms(SpaceFamily::uniform(1, identity_h(2), no_id));
  CHECK_FALSE(report.identity_ok);
  const std::vector<core::TaskSpec> one{shifted_bandit(0)};
  CHECK_THROWS_AS(partial_order_audit(one, SpaceFamily::uniform(1, identity_h(2), no_id), {core::enumerate_admissible(one[0])}),
                  PreconditionViolation);
}

TEST_CASE("single task audit: reflexive, never strictly below itself") {
  const std::vector<core::TaskSpec> one{shifted_bandit(0)};
  const auto r = partial_order_audit(one, SpaceFamily::uniform(1, identity_h(2), identity_g(3)), {core::enumerate_admissible(one[0])});
  CHECK(r.reduces[0][0]);
  CHECK(r.all_passed());
}

TEST_CASE("cyclic relabelings are mutually equivalent") {
  const std::vector<core::TaskSpec> tasks{shifted_bandit(0), shifted_bandit(1), shifted_bandit(2)};
  const auto G = DecoderSpace::explicit_list({shift_decoder(0, 3), shift_decoder(1, 3), shift_decoder(2, 3)});
  std::vector<std::vector<Policy>> fams;
  for (const auto& t : tasks) fams.push_back(core::enumerate_admissible(t));
  const auto r = partial_order_audit(tasks, SpaceFamily::uniform(3, identity_h(2), G), fams);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.reduces[i][j]);
  }
  CHECK(r.all_passed());
}

TEST_CASE("order axiom checks catch a broken relation") {
  const std::vector<std::vector<bool>> R{{true, true, false}, {false, true, true}, {false, false, true}};
  const auto checks = order_axiom_checks(R);
  bool transitivity_failed = false;
  for (const auto& c : checks) {
    if (c.property == "transitivity") transitivity_failed = !c.passed && c.violation == std::vector<std::size_t>{0, 1, 2};
  }
  CHECK(transitivity_failed);
  const std::vector<std::vector<bool>> irreflexive{{false}};
  CHECK_FALSE(order_axiom_checks(irreflexive).front().passed);
}

TEST_CASE("gridworld order axioms with one obstacle") {
  const auto g = grid(1);
  const auto family = SpaceFamily::uniform(4, envs::rotation_encoder_space(g.universe), envs::rotation_decoder_space());
  const auto r = partial_order_audit(g.tasks, family, g.families);
  CHECK(r.all_passed());
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(r.reduces[i][j]);
  }
}

TEST_CASE("encoders and decoders round-trip through JSON") {
  envs::GridWorldParams p;
  const auto u = envs::GridUniverse::build(p, 0);
  const auto h = envs::rotation_encoder(u, 3);
  CHECK(encoder_from_json(to_json(h)).table() == h.table());
  const auto g = Decoder::tabular(FiniteMap::from_table(4, {3, 2, 1, 0}));
  CHECK(decoder_from_json(to_json(g)).table() == g.table());
  CHECK_THROWS_AS(decoder_from_json({{"name", "nope"}}), ConfigurationError);
}
