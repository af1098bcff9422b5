#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "reduction/function_map.hpp"
#include "reduction/reduction.hpp"
#include "taskcore/policy.hpp"
#include "taskcore/task.hpp"

namespace taskred::envs {

// Cardinal directions; the integer value is the action index.
enum class Direction : int { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

Direction direction_from_string(const std::string& s);
std::string to_string(Direction d);

// Map coordinates: (a, b) = (x, -y) of the world frame, i.e. columns grow
// eastward and rows grow southward. Observations list locations in this frame.
struct Location {
  int a = 0;
  int b = 0;
  auto operator<=>(const Location&) const = default;
};

// One quarter turn of a map location: (a, b) -> (b, -a), applied k times.
Location rotate_location(Location loc, int k);

// Goal cell of a direction on a world of half-width n, in map coordinates.
Location goal_location(Direction d, int n);

struct GridWorldParams {
  int n = 2;                       // world is [-n, n]^2
  int m = 0;                       // obstacle count, one cell each
  Direction goal = Direction::kNorth;
  int step_d = 1;                  // cells per move
  std::size_t layout_samples = 0;  // 0: every valid layout; otherwise sample this many (rotation-closed)
  std::size_t horizon = 0;         // 0: (2n+1)^2
  std::size_t retry_cap = 10000;
};

// Keys n, m, goal, step_d, layout_samples, layout_seed, horizon, retry_cap
// (and "env"); anything else is a ConfigurationError.
GridWorldParams gridworld_params_from_json(const nlohmann::json& doc, std::uint64_t* layout_seed);

// Every map shared by the four goal-direction tasks of one (n, m) family:
// (obstacle layout, goal direction, robot cell). States and observations are
// both indexed by this set; the layout set is closed under quarter turns.
class GridUniverse {
 public:
  struct Entry {
    std::size_t layout = 0;
    int goal = 0;
    Location robot;
  };

  static GridUniverse build(const GridWorldParams& params, std::uint64_t layout_seed);

  const GridWorldParams& params() const { return params_; }
  std::uint64_t layout_seed() const { return layout_seed_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t layout_count() const { return layouts_.size(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  const std::vector<Location>& layout(std::size_t i) const { return layouts_[i]; }
  bool in_bounds(Location l) const;
  bool blocked(std::size_t layout, Location l) const;

  std::size_t index_of(std::size_t layout, int goal, Location robot) const;
  std::size_t layout_index(const std::vector<Location>& sorted_obstacles) const;

  // Map observation as a location list: obstacles (lexicographic), goal, robot.
  std::vector<Location> observation_map(std::size_t obs) const;
  std::size_t observation_index(const std::vector<Location>& map) const;

  // True when every free cell of the layout reaches every other (flood fill).
  bool connected(const std::vector<Location>& obstacles) const;

  // BFS distance to the goal for each entry (SIZE_MAX when unreachable).
  std::vector<std::size_t> goal_distances() const;

  nlohmann::json describe() const;

 private:
  GridWorldParams params_;
  std::uint64_t layout_seed_ = 0;
  std::vector<std::vector<Location>> layouts_;
  std::map<std::vector<Location>, std::size_t> layout_lookup_;
  std::vector<Entry> entries_;
  std::map<std::tuple<std::size_t, int, int, int>, std::size_t> entry_lookup_;
};

Location move(Location from, int action, int step_d);

// Finite task: reward 1 on arriving at the goal, 0 otherwise; R* = 1.
core::TaskSpec make_gridworld(const GridWorldParams& params, std::uint64_t layout_seed);
core::TaskSpec make_gridworld(const GridUniverse& universe, Direction goal);

// Observation rotation on the universe (closed form "rot90_obs").
reduction::FiniteMap rotation_observation_map(const GridUniverse& universe, int k);
// (d, i) -> (d, i + k mod 4) (closed form "rot_action_mod4").
reduction::FiniteMap rotation_action_map(int k);

reduction::Encoder rotation_encoder(const GridUniverse& universe, int k);
reduction::Decoder rotation_decoder(int k);

// All four rotations, k = 0..3; closed under composition, k = 0 is the identity.
reduction::EncoderSpace rotation_encoder_space(const GridUniverse& universe);
reduction::DecoderSpace rotation_decoder_space();

// Admissible policies for one goal direction: every tie-break order over
// shortest-path actions (24 priority permutations) followed by `random_count`
// seeded policies choosing a random shortest-path action on the task's
// support and a random action elsewhere. Deduplicated, order deterministic.
std::vector<core::Policy> gridworld_admissible_family(const GridUniverse& universe, Direction goal, std::size_t random_count,
                                                      std::uint64_t seed);

}  // namespace taskred::envs
