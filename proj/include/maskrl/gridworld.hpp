#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskrl/common.hpp"
#include "maskrl/tensor.hpp"

namespace maskrl {

enum class Cell : uint8_t { Wall, Floor, Water, Goal, Key, DoorClosed };

enum class ActionKind : uint8_t { Up = 0, Right, Down, Left, Pickup, Open };

const char* action_name(ActionKind a);
ActionKind action_from_name(const std::string& name);

struct Layout {
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;  // row-major
  std::string name;

  // cached special-cell positions (row, col); -1 when absent
  int goal_row = -1, goal_col = -1;
  int key_row = -1, key_col = -1;
  int door_row = -1, door_col = -1;

  Cell at(int r, int c) const { return cells[static_cast<size_t>(r) * width + c]; }
  bool has_key_door() const { return key_row >= 0; }
};

// ASCII map: '#' Wall, '.' Floor, '~' Water, 'G' Goal, 'K' Key, 'D' closed
// Door; space also reads as Wall. Throws ParseError naming line/column.
Layout parse_layout(const std::string& text, const std::string& name = "");

struct EnvState {
  int agent_row = 0;
  int agent_col = 0;
  bool has_key = false;
  bool door_open = false;
  int steps_elapsed = 0;

  // steps_elapsed intentionally excluded: the clock always advances, only
  // environment effect counts
  bool same_config(const EnvState& o) const {
    return agent_row == o.agent_row && agent_col == o.agent_col && has_key == o.has_key &&
           door_open == o.door_open;
  }
};

struct EnvSpec {
  Layout layout;
  std::vector<ActionKind> action_set;
  int max_steps = 0;    // T
  float gamma = 0.99f;

  int num_actions() const { return static_cast<int>(action_set.size()); }
};

// action set [up,right,down,left] (+ pickup, open for Key&Door layouts),
// T = 4 * width * height
EnvSpec make_env_spec(Layout layout);

// observation channel indices; fixed 8-channel schema for every task so
// checkpoints transfer across domains
enum ObsChannel {
  kObsWall = 0,
  kObsFloor,
  kObsAgent,
  kObsGoal,
  kObsKeyPresent,
  kObsDoorClosed,
  kObsDoorOpen,
  kObsHasKey,
  kObsChannels
};

// multi-channel binary tensor [8, H, W]; optional integer upscale repeats
// each cell scale x scale (for the large-input extractor configuration)
Tensor encode_observation(const EnvSpec& spec, const EnvState& state, int scale = 1);

// inverse of encode_observation at scale 1 (steps_elapsed comes back as 0)
EnvState observation_to_state(const EnvSpec& spec, const Tensor& obs);

struct StepResult {
  EnvState state;
  float reward = 0.0f;
  bool done = false;
};

bool on_goal(const EnvSpec& spec, const EnvState& state);
bool episode_done(const EnvSpec& spec, const EnvState& state);

// agent placed uniformly over plain Floor cells (Goal/Key/Door excluded)
EnvState reset(const EnvSpec& spec, Rng& rng);
EnvState reset(const EnvSpec& spec, uint64_t rng_seed);

// one transition; throws UsageError when the episode is already done.
// Reward is 1 - 0.9 * t/T on reaching the goal, 0 otherwise.
StepResult step(const EnvSpec& spec, const EnvState& state, int action);

// true iff the action changes (agent_pos, has_key, door_open); the
// identity-distance reading of an applicable action
bool is_applicable(const EnvSpec& spec, const EnvState& state, int action);

// all reachable non-terminal (agent_pos, has_key, door_open) combinations,
// steps_elapsed fixed to 0, sorted; throws ConfigError when
// positions x flag-combinations exceeds 10^6
std::vector<EnvState> enumerate_states(const EnvSpec& spec);

// fraction of enumerated (state, action) pairs that are inapplicable
double pruned_fraction(const EnvSpec& spec);

// optimal number of steps to reach the goal from `state` via BFS over the
// full state graph; -1 when unreachable
int shortest_steps(const EnvSpec& spec, const EnvState& state);

// best achievable episode return from `start`: 1 - 0.9 * d*/T
float max_return(const EnvSpec& spec, const EnvState& start);

// stateful convenience wrapper used by the trainer; owns its rng stream
class GridEnv {
 public:
  GridEnv(EnvSpec spec, Rng rng) : spec_(std::move(spec)), rng_(rng) { reset(); }

  const EnvSpec& spec() const { return spec_; }
  const EnvState& state() const { return state_; }
  bool done() const { return done_; }

  EnvState reset() {
    state_ = maskrl::reset(spec_, rng_);
    done_ = false;
    return state_;
  }

  StepResult step(int action) {
    StepResult r = maskrl::step(spec_, state_, action);
    state_ = r.state;
    done_ = r.done;
    return r;
  }

 private:
  EnvSpec spec_;
  EnvState state_;
  bool done_ = false;
  Rng rng_;
};

// ---- bundled tasks ---------------------------------------------------------

extern const std::vector<std::string> kTaskNames;  // maze, xisland1, xisland2, doorkey1, doorkey2

bool is_task_name(const std::string& name);
const std::string& task_layout_text(const std::string& name);
EnvSpec make_task(const std::string& name);

}  // namespace maskrl
