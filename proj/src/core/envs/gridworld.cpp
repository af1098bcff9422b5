#include "envs/gridworld.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <numeric>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace taskred::envs {

namespace {

constexpr std::array<Location, 4> kMoves = {Location{0, -1}, Location{1, 0}, Location{0, 1}, Location{-1, 0}};
constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

std::vector<Location> rotate_layout(const std::vector<Location>& layout, int k) {
  std::vector<Location> out;
  out.reserve(layout.size());
  for (auto l : layout) out.push_back(rotate_location(l, k));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Direction direction_from_string(const std::string& s) {
  if (s == "N" || s == "north") return Direction::kNorth;
  if (s == "E" || s == "east") return Direction::kEast;
  if (s == "S" || s == "south") return Direction::kSouth;
  if (s == "W" || s == "west") return Direction::kWest;
  throw ConfigurationError("unknown goal direction '" + s + "' (expected N, E, S or W)");
}

std::string to_string(Direction d) {
  static const char* names[] = {"N", "E", "S", "W"};
  return names[static_cast<int>(d)];
}

Location rotate_location(Location loc, int k) {
  k = ((k % 4) + 4) % 4;
  for (int i = 0; i < k; ++i) loc = {loc.b, -loc.a};
  return loc;
}

Location goal_location(Direction d, int n) {
  switch (d) {
    case Direction::kNorth: return {0, -n};
    case Direction::kEast: return {n, 0};
    case Direction::kSouth: return {0, n};
    case Direction::kWest: return {-n, 0};
  }
  return {};
}

Location move(Location from, int action, int step_d) {
  const auto delta = kMoves[static_cast<std::size_t>(action)];
  return {from.a + step_d * delta.a, from.b + step_d * delta.b};
}

bool GridUniverse::in_bounds(Location l) const {
  const int n = params_.n;
  return l.a >= -n && l.a <= n && l.b >= -n && l.b <= n;
}

bool GridUniverse::blocked(std::size_t layout, Location l) const {
  const auto& obs = layouts_[layout];
  return std::binary_search(obs.begin(), obs.end(), l);
}

bool GridUniverse::connected(const std::vector<Location>& obstacles) const {
  const int n = params_.n;
  std::set<Location> blocked_cells(obstacles.begin(), obstacles.end());
  std::set<Location> seen;
  std::deque<Location> queue;
  std::size_t free_cells = 0;
  for (int a = -n; a <= n; ++a) {
    for (int b = -n; b <= n; ++b) {
      if (blocked_cells.count({a, b})) continue;
      ++free_cells;
      if (queue.empty() && seen.empty()) {
        queue.push_back({a, b});
        seen.insert({a, b});
      }
    }
  }
  while (!queue.empty()) {
    const Location cur = queue.front();
    queue.pop_front();
    for (int act = 0; act < 4; ++act) {
      const Location nx = move(cur, act, 1);
      if (!in_bounds(nx) || blocked_cells.count(nx) || seen.count(nx)) continue;
      seen.insert(nx);
      queue.push_back(nx);
    }
  }
  return seen.size() == free_cells;
}

GridUniverse GridUniverse::build(const GridWorldParams& params, std::uint64_t layout_seed) {
  if (params.n < 1) throw ConfigurationError("gridworld half-width n must be >= 1");
  if (params.m < 0) throw ConfigurationError("gridworld obstacle count m must be >= 0");
  if (params.step_d < 1) throw ConfigurationError("gridworld step distance d must be >= 1");
  GridUniverse u;
  u.params_ = params;
  u.layout_seed_ = layout_seed;
  const int n = params.n;
  std::set<Location> goals;
  for (int d = 0; d < 4; ++d) goals.insert(goal_location(static_cast<Direction>(d), n));
  std::vector<Location> candidates;
  for (int a = -n; a <= n; ++a) {
    for (int b = -n; b <= n; ++b) {
      if (!goals.count({a, b})) candidates.push_back({a, b});
    }
  }
  const auto m = static_cast<std::size_t>(params.m);
  if (m > candidates.size()) throw ConfigurationError("more obstacles than free non-goal cells");
  // The robot needs at least one free non-goal cell to start from.
  if (candidates.size() - m < 1) throw ConfigurationError("obstacles leave no start cell");

  std::set<std::vector<Location>> layouts;
  if (params.layout_samples == 0) {
    std::vector<bool> pick(candidates.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(m), true);
    do {
      std::vector<Location> layout;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (pick[i]) layout.push_back(candidates[i]);
      }
      std::sort(layout.begin(), layout.end());
      if (u.connected(layout)) layouts.insert(layout);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    if (layouts.empty()) throw ConfigurationError("no obstacle layout leaves a path to the goal");
  } else {
    Rng rng(layout_seed);
    std::size_t attempts = 0;
    while (layouts.size() < params.layout_samples) {
      if (++attempts > params.retry_cap) {
        throw ConfigurationError("could not generate " + std::to_string(params.layout_samples) +
                                 " connected layouts within " + std::to_string(params.retry_cap) + " attempts");
      }
      auto pool = candidates;
      std::vector<Location> layout;
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
        layout.push_back(pool[i]);
      }
      std::sort(layout.begin(), layout.end());
      if (!u.connected(layout)) continue;
      for (int k = 0; k < 4; ++k) layouts.insert(rotate_layout(layout, k));
    }
  }
  u.layouts_.assign(layouts.begin(), layouts.end());
  for (std::size_t i = 0; i < u.layouts_.size(); ++i) u.layout_lookup_[u.layouts_[i]] = i;

  for (std::size_t l = 0; l < u.layouts_.size(); ++l) {
    for (int g = 0; g < 4; ++g) {
      for (int a = -n; a <= n; ++a) {
        for (int b = -n; b <= n; ++b) {
          const Location r{a, b};
          if (u.blocked(l, r)) continue;
          u.entry_lookup_[{l, g, a, b}] = u.entries_.size();
          u.entries_.push_back({l, g, r});
        }
      }
    }
  }
  return u;
}

std::size_t GridUniverse::index_of(std::size_t layout, int goal, Location robot) const {
  auto it = entry_lookup_.find({layout, goal, robot.a, robot.b});
  if (it == entry_lookup_.end()) throw ConfigurationError("map not in the gridworld universe");
  return it->second;
}

std::size_t GridUniverse::layout_index(const std::vector<Location>& sorted_obstacles) const {
  auto it = layout_lookup_.find(sorted_obstacles);
  if (it == layout_lookup_.end()) throw ConfigurationError("obstacle layout not in the gridworld universe");
  return it->second;
}

std::vector<Location> GridUniverse::observation_map(std::size_t obs) const {
  const Entry& e = entries_.at(obs);
  std::vector<Location> map = layouts_[e.layout];
  map.push_back(goal_location(static_cast<Direction>(e.goal), params_.n));
  map.push_back(e.robot);
  return map;
}

std::size_t GridUniverse::observation_index(const std::vector<Location>& map) const {
  if (map.size() != static_cast<std::size_t>(params_.m) + 2) throw ConfigurationError("map has the wrong number of locations");
  std::vector<Location> obstacles(map.begin(), map.end() - 2);
  std::sort(obstacles.begin(), obstacles.end());
  const Location goal = map[map.size() - 2];
  int g = -1;
  for (int d = 0; d < 4; ++d) {
    if (goal_location(static_cast<Direction>(d), params_.n) == goal) g = d;
  }
  if (g < 0) throw ConfigurationError("map goal is not one of the four goal cells");
  return index_of(layout_index(obstacles), g, map.back());
}

std::vector<std::size_t> GridUniverse::goal_distances() const {
  std::vector<std::size_t> dist(entries_.size(), kUnreachable);
  for (std::size_t l = 0; l < layouts_.size(); ++l) {
    for (int g = 0; g < 4; ++g) {
      const Location goal = goal_location(static_cast<Direction>(g), params_.n);
      std::deque<Location> queue{goal};
      dist[index_of(l, g, goal)] = 0;
      while (!queue.empty()) {
        const Location cur = queue.front();
        queue.pop_front();
        const std::size_t d = dist[index_of(l, g, cur)];
        // Predecessors: cells from which some action lands on `cur`.
        for (int act = 0; act < 4; ++act) {
          const Location prev = move(cur, (act + 2) % 4, params_.step_d);
          if (!in_bounds(prev) || blocked(l, prev)) continue;
          if (move(prev, act, params_.step_d) != cur) continue;
          auto& pd = dist[index_of(l, g, prev)];
          if (pd == kUnreachable) {
            pd = d + 1;
            queue.push_back(prev);
          }
        }
      }
    }
  }
  return dist;
}

GridWorldParams gridworld_params_from_json(const nlohmann::json& doc, std::uint64_t* layout_seed) {
  GridWorldParams p;
  std::uint64_t seed = 0;
  for (const auto& [key, value] : doc.items()) {
    if (key == "env") continue;
    if (key == "n") p.n = value.get<int>();
    else if (key == "m") p.m = value.get<int>();
    else if (key == "goal") p.goal = direction_from_string(value.get<std::string>());
    else if (key == "step_d") p.step_d = value.get<int>();
    else if (key == "layout_samples") p.layout_samples = value.get<std::size_t>();
    else if (key == "layout_seed") seed = value.get<std::uint64_t>();
    else if (key == "horizon") p.horizon = value.get<std::size_t>();
    else if (key == "retry_cap") p.retry_cap = value.get<std::size_t>();
    else throw ConfigurationError("unknown gridworld key '" + key + "'");
  }
  if (layout_seed) *layout_seed = seed;
  return p;
}

nlohmann::json GridUniverse::describe() const {
  return {{"n", params_.n},
          {"m", params_.m},
          {"step_d", params_.step_d},
          {"layout_samples", params_.layout_samples},
          {"layout_seed", layout_seed_}};
}

core::TaskSpec make_gridworld(const GridUniverse& u, Direction goal) {
  const auto& p = u.params();
  core::FiniteModel model;
  model.state_count = u.size();
  model.observation_count = u.size();
  model.action_count = 4;
  model.transition.resize(u.size() * 4);
  model.reward.assign(u.size() * 4, 0.0);
  model.sensor.resize(u.size());
  model.terminal.assign(u.size(), false);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < u.size(); ++s) {
    const auto& e = u.entry(s);
    const Location goal_cell = goal_location(static_cast<Direction>(e.goal), p.n);
    model.sensor[s] = {{s, 1.0}};
    model.terminal[s] = e.robot == goal_cell;
    for (int a = 0; a < 4; ++a) {
      Location target = move(e.robot, a, p.step_d);
      if (!u.in_bounds(target) || u.blocked(e.layout, target)) target = e.robot;
      const std::size_t next = u.index_of(e.layout, e.goal, target);
      model.transition[s * 4 + static_cast<std::size_t>(a)] = {{next, 1.0}};
      if (!model.terminal[s] && target == goal_cell) model.reward[s * 4 + static_cast<std::size_t>(a)] = 1.0;
    }
    if (e.goal == static_cast<int>(goal) && !model.terminal[s]) starts.push_back(s);
  }
  const double mass = 1.0 / static_cast<double>(starts.size());
  for (auto s : starts) model.init.push_back({s, mass});
  const std::size_t horizon = p.horizon ? p.horizon : static_cast<std::size_t>((2 * p.n + 1) * (2 * p.n + 1));
  nlohmann::json params = u.describe();
  params["env"] = "gridworld";
  params["goal"] = to_string(goal);
  params["horizon"] = horizon;
  return core::TaskSpec::finite("gridworld-" + to_string(goal), std::move(model), horizon, 1.0, std::move(params));
}

core::TaskSpec make_gridworld(const GridWorldParams& params, std::uint64_t layout_seed) {
  return make_gridworld(GridUniverse::build(params, layout_seed), params.goal);
}

reduction::FiniteMap rotation_observation_map(const GridUniverse& u, int k) {
  std::vector<std::size_t> table(u.size());
  for (std::size_t o = 0; o < u.size(); ++o) {
    auto map = u.observation_map(o);
    for (auto& loc : map) loc = rotate_location(loc, k);
    table[o] = u.observation_index(map);
  }
  return reduction::FiniteMap::from_table(u.size(), std::move(table));
}

reduction::FiniteMap rotation_action_map(int k) {
  k = ((k % 4) + 4) % 4;
  std::vector<std::size_t> table(4);
  for (std::size_t i = 0; i < 4; ++i) table[i] = (i + static_cast<std::size_t>(k)) % 4;
  return reduction::FiniteMap::from_table(4, std::move(table));
}

reduction::Encoder rotation_encoder(const GridUniverse& u, int k) {
  nlohmann::json params = u.describe();
  params["k"] = k;
  return reduction::Encoder(reduction::MapBody::closed_form({"rot90_obs", params}, rotation_observation_map(u, k)));
}

reduction::Decoder rotation_decoder(int k) {
  return reduction::Decoder(reduction::MapBody::closed_form({"rot_action_mod4", {{"k", k}}}, rotation_action_map(k)));
}

reduction::EncoderSpace rotation_encoder_space(const GridUniverse& u) {
  std::vector<reduction::Encoder> members;
  for (int k = 0; k < 4; ++k) members.push_back(rotation_encoder(u, k));
  return reduction::EncoderSpace::explicit_list(std::move(members), "rot90_obs");
}

reduction::DecoderSpace rotation_decoder_space() {
  std::vector<reduction::Decoder> members;
  for (int k = 0; k < 4; ++k) members.push_back(rotation_decoder(k));
  return reduction::DecoderSpace::explicit_list(std::move(members), "rot_action_mod4");
}

std::vector<core::Policy> gridworld_admissible_family(const GridUniverse& u, Direction goal, std::size_t random_count,
                                                      std::uint64_t seed) {
  const auto dist = u.goal_distances();
  const int g = static_cast<int>(goal);
  const auto& p = u.params();
  // Shortest-path actions on the task's support (its goal, robot not on it).
  std::vector<std::vector<std::size_t>> optimal(u.size());
  for (std::size_t s = 0; s < u.size(); ++s) {
    const auto& e = u.entry(s);
    if (e.goal != g || dist[s] == 0) continue;
    if (dist[s] == kUnreachable) throw PreconditionViolation("gridworld start cell cannot reach the goal");
    for (int a = 0; a < 4; ++a) {
      Location target = move(e.robot, a, p.step_d);
      if (!u.in_bounds(target) || u.blocked(e.layout, target)) continue;
      if (dist[u.index_of(e.layout, e.goal, target)] + 1 == dist[s]) optimal[s].push_back(static_cast<std::size_t>(a));
    }
  }
  std::vector<core::Policy> family;
  std::set<std::vector<std::size_t>> seen;
  auto add = [&](std::vector<std::size_t> table) {
    if (seen.insert(table).second) family.push_back(core::Policy::tabular(std::move(table), 4));
  };
  std::array<std::size_t, 4> order = {0, 1, 2, 3};
  do {
    std::vector<std::size_t> table(u.size(), order[0]);
    for (std::size_t s = 0; s < u.size(); ++s) {
      if (optimal[s].empty()) continue;
      for (auto a : order) {
        if (std::find(optimal[s].begin(), optimal[s].end(), a) != optimal[s].end()) {
          table[s] = a;
          break;
        }
      }
    }
    add(std::move(table));
  } while (std::next_permutation(order.begin(), order.end()));
  Rng rng(seed);
  for (std::size_t i = 0; i < random_count; ++i) {
    std::vector<std::size_t> table(u.size());
    for (std::size_t s = 0; s < u.size(); ++s) {
      table[s] = optimal[s].empty() ? uniform_index(rng, 4) : optimal[s][uniform_index(rng, optimal[s].size())];
    }
    add(std::move(table));
  }
  return family;
}

}  // namespace taskred::envs
