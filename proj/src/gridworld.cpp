#include "maskrl/gridworld.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace maskrl {

const char* action_name(ActionKind a) {
  switch (a) {
    case ActionKind::Up: return "up";
    case ActionKind::Right: return "right";
    case ActionKind::Down: return "down";
    case ActionKind::Left: return "left";
    case ActionKind::Pickup: return "pickup";
    case ActionKind::Open: return "open";
  }
  return "?";
}

ActionKind action_from_name(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == action_name(static_cast<ActionKind>(i))) return static_cast<ActionKind>(i);
  throw ConfigError("unknown action name: " + name);
}

Layout parse_layout(const std::string& text, const std::string& name) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("layout " + name + ": empty map");

  const size_t width = lines[0].size();
  Layout layout;
  layout.name = name;
  layout.height = static_cast<int>(lines.size());
  layout.width = static_cast<int>(width);
  int floors = 0;
  for (size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].size() != width)
      throw ParseError("layout " + name + ": line " + std::to_string(r + 1) +
                       " has length " + std::to_string(lines[r].size()) + ", expected " +
                       std::to_string(width));
    for (size_t c = 0; c < width; ++c) {
      Cell cell;
      switch (lines[r][c]) {
        case '#':
        case ' ': cell = Cell::Wall; break;
        case '.': cell = Cell::Floor; ++floors; break;
        case '~': cell = Cell::Water; break;
        case 'G': cell = Cell::Goal; break;
        case 'K': cell = Cell::Key; break;
        case 'D': cell = Cell::DoorClosed; break;
        default:
          throw ParseError("layout " + name + ": unknown character '" +
                           std::string(1, lines[r][c]) + "' at line " + std::to_string(r + 1) +
                           ", column " + std::to_string(c + 1));
      }
      if (cell == Cell::Goal) {
        if (layout.goal_row >= 0)
          throw ParseError("layout " + name + ": duplicate goal at line " +
                           std::to_string(r + 1) + ", column " + std::to_string(c + 1));
        layout.goal_row = static_cast<int>(r);
        layout.goal_col = static_cast<int>(c);
      }
      if (cell == Cell::Key) {
        if (layout.key_row >= 0)
          throw ParseError("layout " + name + ": duplicate key at line " +
                           std::to_string(r + 1) + ", column " + std::to_string(c + 1));
        layout.key_row = static_cast<int>(r);
        layout.key_col = static_cast<int>(c);
      }
      if (cell == Cell::DoorClosed) {
        if (layout.door_row >= 0)
          throw ParseError("layout " + name + ": duplicate door at line " +
                           std::to_string(r + 1) + ", column " + std::to_string(c + 1));
        layout.door_row = static_cast<int>(r);
        layout.door_col = static_cast<int>(c);
      }
      layout.cells.push_back(cell);
    }
  }
  if (layout.goal_row < 0) throw ParseError("layout " + name + ": missing goal");
  if (floors == 0) throw ParseError("layout " + name + ": no floor cell");
  if ((layout.key_row >= 0) != (layout.door_row >= 0))
    throw ParseError("layout " + name + ": key and door must appear together");
  for (int r = 0; r < layout.height; ++r)
    for (int c = 0; c < layout.width; ++c) {
      const bool border = r == 0 || c == 0 || r == layout.height - 1 || c == layout.width - 1;
      if (border && layout.at(r, c) != Cell::Wall)
        throw ParseError("layout " + name + ": border not enclosed at line " +
                         std::to_string(r + 1) + ", column " + std::to_string(c + 1));
    }
  return layout;
}

EnvSpec make_env_spec(Layout layout) {
  EnvSpec spec;
  spec.action_set = {ActionKind::Up, ActionKind::Right, ActionKind::Down, ActionKind::Left};
  if (layout.has_key_door()) {
    spec.action_set.push_back(ActionKind::Pickup);
    spec.action_set.push_back(ActionKind::Open);
  }
  spec.max_steps = 4 * layout.width * layout.height;
  spec.layout = std::move(layout);
  return spec;
}

Tensor encode_observation(const EnvSpec& spec, const EnvState& state, int scale) {
  const Layout& lay = spec.layout;
  const int H = lay.height * scale, W = lay.width * scale;
  Tensor obs({kObsChannels, H, W});
  auto put = [&](int ch, int r, int c, float v) {
    for (int dr = 0; dr < scale; ++dr)
      for (int dc = 0; dc < scale; ++dc)
        obs[(static_cast<size_t>(ch) * H + r * scale + dr) * W + c * scale + dc] = v;
  };
  for (int r = 0; r < lay.height; ++r)
    for (int c = 0; c < lay.width; ++c) {
      const Cell cell = lay.at(r, c);
      if (cell == Cell::Wall) put(kObsWall, r, c, 1.0f);
      // a picked-up key leaves plain floor behind
      if (cell == Cell::Floor || (cell == Cell::Key && state.has_key))
        put(kObsFloor, r, c, 1.0f);
      if (cell == Cell::Goal) put(kObsGoal, r, c, 1.0f);
      if (cell == Cell::Key && !state.has_key) put(kObsKeyPresent, r, c, 1.0f);
      if (cell == Cell::DoorClosed) {
        if (state.door_open)
          put(kObsDoorOpen, r, c, 1.0f);
        else
          put(kObsDoorClosed, r, c, 1.0f);
      }
      if (state.has_key) put(kObsHasKey, r, c, 1.0f);
    }
  put(kObsAgent, state.agent_row, state.agent_col, 1.0f);
  return obs;
}

EnvState observation_to_state(const EnvSpec& spec, const Tensor& obs) {
  const int H = spec.layout.height, W = spec.layout.width;
  if (obs.rank() != 3 || obs.dim(0) != kObsChannels || obs.dim(1) != H || obs.dim(2) != W)
    throw UsageError("observation_to_state: shape mismatch");
  EnvState s;
  s.has_key = obs[static_cast<size_t>(kObsHasKey) * H * W] > 0.5f;
  s.door_open = false;
  int agents = 0;
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      if (obs[(static_cast<size_t>(kObsAgent) * H + r) * W + c] > 0.5f) {
        s.agent_row = r;
        s.agent_col = c;
        ++agents;
      }
      if (obs[(static_cast<size_t>(kObsDoorOpen) * H + r) * W + c] > 0.5f) s.door_open = true;
    }
  if (agents != 1) throw UsageError("observation_to_state: agent channel malformed");
  return s;
}

bool on_goal(const EnvSpec& spec, const EnvState& state) {
  return state.agent_row == spec.layout.goal_row && state.agent_col == spec.layout.goal_col;
}

bool episode_done(const EnvSpec& spec, const EnvState& state) {
  return on_goal(spec, state) || state.steps_elapsed >= spec.max_steps;
}

EnvState reset(const EnvSpec& spec, Rng& rng) {
  std::vector<std::pair<int, int>> eligible;
  for (int r = 0; r < spec.layout.height; ++r)
    for (int c = 0; c < spec.layout.width; ++c)
      if (spec.layout.at(r, c) == Cell::Floor) eligible.emplace_back(r, c);
  if (eligible.empty()) throw ConfigError("layout " + spec.layout.name + ": no start cell");
  const auto [r, c] = eligible[static_cast<size_t>(rng.below(static_cast<int>(eligible.size())))];
  EnvState s;
  s.agent_row = r;
  s.agent_col = c;
  return s;
}

EnvState reset(const EnvSpec& spec, uint64_t rng_seed) {
  Rng rng(rng_seed);
  return reset(spec, rng);
}

namespace {

// transition effect on (position, key, door); the episode clock is handled
// by step()
EnvState apply_action(const EnvSpec& spec, const EnvState& state, int action) {
  const Layout& lay = spec.layout;
  EnvState next = state;
  const ActionKind kind = spec.action_set[static_cast<size_t>(action)];
  switch (kind) {
    case ActionKind::Up:
    case ActionKind::Right:
    case ActionKind::Down:
    case ActionKind::Left: {
      static constexpr int dr[] = {-1, 0, 1, 0};
      static constexpr int dc[] = {0, 1, 0, -1};
      const int k = static_cast<int>(kind);
      const int r = state.agent_row + dr[k];
      const int c = state.agent_col + dc[k];
      const Cell target = lay.at(r, c);  // border walls guarantee in-bounds
      const bool enterable = target == Cell::Floor || target == Cell::Goal ||
                             target == Cell::Key ||
                             (target == Cell::DoorClosed && state.door_open);
      if (enterable) {
        next.agent_row = r;
        next.agent_col = c;
      }
      break;
    }
    case ActionKind::Pickup:
      if (!state.has_key && lay.at(state.agent_row, state.agent_col) == Cell::Key)
        next.has_key = true;
      break;
    case ActionKind::Open: {
      if (state.door_open || !state.has_key) break;
      const int dr = std::abs(state.agent_row - lay.door_row);
      const int dc = std::abs(state.agent_col - lay.door_col);
      if (dr + dc == 1) next.door_open = true;
      break;
    }
  }
  return next;
}

}  // namespace

StepResult step(const EnvSpec& spec, const EnvState& state, int action) {
  if (action < 0 || action >= spec.num_actions())
    throw UsageError("step: action index out of range");
  if (episode_done(spec, state)) throw UsageError("step: episode already done");
  StepResult out;
  out.state = apply_action(spec, state, action);
  out.state.steps_elapsed = state.steps_elapsed + 1;
  if (on_goal(spec, out.state))
    out.reward = 1.0f - 0.9f * static_cast<float>(out.state.steps_elapsed) /
                            static_cast<float>(spec.max_steps);
  out.done = episode_done(spec, out.state);
  return out;
}

bool is_applicable(const EnvSpec& spec, const EnvState& state, int action) {
  if (action < 0 || action >= spec.num_actions())
    throw UsageError("is_applicable: action index out of range");
  return !apply_action(spec, state, action).same_config(state);
}

namespace {

inline uint32_t state_key(const EnvState& s, int width) {
  return static_cast<uint32_t>((s.agent_row * width + s.agent_col) * 4 +
                               (s.has_key ? 2 : 0) + (s.door_open ? 1 : 0));
}

}  // namespace

std::vector<EnvState> enumerate_states(const EnvSpec& spec) {
  const long positions = static_cast<long>(spec.layout.width) * spec.layout.height;
  const long flags = spec.layout.has_key_door() ? 4 : 1;
  if (positions * flags > 1000000)
    throw ConfigError("enumerate_states: state bound exceeded (" +
                      std::to_string(positions * flags) + " > 1000000)");

  std::vector<EnvState> starts;
  for (int r = 0; r < spec.layout.height; ++r)
    for (int c = 0; c < spec.layout.width; ++c)
      if (spec.layout.at(r, c) == Cell::Floor) {
        EnvState s;
        s.agent_row = r;
        s.agent_col = c;
        starts.push_back(s);
      }

  std::unordered_set<uint32_t> seen;
  std::deque<EnvState> frontier;
  std::vector<EnvState> result;
  for (const EnvState& s : starts)
    if (seen.insert(state_key(s, spec.layout.width)).second) frontier.push_back(s);
  while (!frontier.empty()) {
    EnvState s = frontier.front();
    frontier.pop_front();
    result.push_back(s);
    for (int a = 0; a < spec.num_actions(); ++a) {
      EnvState n = apply_action(spec, s, a);
      n.steps_elapsed = 0;
      if (on_goal(spec, n)) continue;  // terminal states make no decisions
      if (seen.insert(state_key(n, spec.layout.width)).second) frontier.push_back(n);
    }
  }
  std::sort(result.begin(), result.end(), [&](const EnvState& a, const EnvState& b) {
    return state_key(a, spec.layout.width) < state_key(b, spec.layout.width);
  });
  return result;
}

double pruned_fraction(const EnvSpec& spec) {
  const std::vector<EnvState> states = enumerate_states(spec);
  long inapplicable = 0;
  for (const EnvState& s : states)
    for (int a = 0; a < spec.num_actions(); ++a)
      if (!is_applicable(spec, s, a)) ++inapplicable;
  return static_cast<double>(inapplicable) /
         (static_cast<double>(states.size()) * spec.num_actions());
}

int shortest_steps(const EnvSpec& spec, const EnvState& state) {
  if (on_goal(spec, state)) return 0;
  std::unordered_map<uint32_t, int> dist;
  std::deque<EnvState> frontier;
  EnvState s0 = state;
  s0.steps_elapsed = 0;
  dist[state_key(s0, spec.layout.width)] = 0;
  frontier.push_back(s0);
  while (!frontier.empty()) {
    EnvState s = frontier.front();
    frontier.pop_front();
    const int d = dist[state_key(s, spec.layout.width)];
    for (int a = 0; a < spec.num_actions(); ++a) {
      EnvState n = apply_action(spec, s, a);
      n.steps_elapsed = 0;
      if (n.same_config(s)) continue;
      if (on_goal(spec, n)) return d + 1;
      auto [it, inserted] = dist.emplace(state_key(n, spec.layout.width), d + 1);
      if (inserted) frontier.push_back(n);
    }
  }
  return -1;
}

float max_return(const EnvSpec& spec, const EnvState& start) {
  const int d = shortest_steps(spec, start);
  if (d < 0) throw ConfigError("max_return: goal unreachable from start state");
  return 1.0f - 0.9f * static_cast<float>(d) / static_cast<float>(spec.max_steps);
}

}  // namespace maskrl
