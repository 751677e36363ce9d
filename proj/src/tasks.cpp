#include "maskrl/gridworld.hpp"

namespace maskrl {

// The five bundled layouts. The same text is shipped as files under
// data/layouts/, one per task; a test keeps both copies in sync.

namespace {

const std::string kMaze =
    "########\n"
    "#......#\n"
    "######.#\n"
    "#....#.#\n"
    "#.#G.#.#\n"
    "#.####.#\n"
    "#......#\n"
    "########\n";

const std::string kXIsland1 =
    "########\n"
    "#~~..~~#\n"
    "#~....~#\n"
    "#......#\n"
    "#..~~..#\n"
    "#~....~#\n"
    "#~~.G~~#\n"
    "########\n";

const std::string kXIsland2 =
    "########\n"
    "#~~.G~~#\n"
    "#~....~#\n"
    "#......#\n"
    "#..~~..#\n"
    "#~....~#\n"
    "#~~..~~#\n"
    "########\n";

const std::string kDoorKey1 =
    "########\n"
    "#...#..#\n"
    "#...#..#\n"
    "#...D..#\n"
    "#...#..#\n"
    "#.K.#.G#\n"
    "#...#..#\n"
    "########\n";

const std::string kDoorKey2 =
    "########\n"
    "#...#.G#\n"
    "#...#..#\n"
    "#...D..#\n"
    "#...#..#\n"
    "#.K.#..#\n"
    "#...#..#\n"
    "########\n";

}  // namespace

const std::vector<std::string> kTaskNames = {"maze", "xisland1", "xisland2", "doorkey1",
                                             "doorkey2"};

bool is_task_name(const std::string& name) {
  for (const auto& t : kTaskNames)
    if (t == name) return true;
  return false;
}

const std::string& task_layout_text(const std::string& name) {
  if (name == "maze") return kMaze;
  if (name == "xisland1") return kXIsland1;
  if (name == "xisland2") return kXIsland2;
  if (name == "doorkey1") return kDoorKey1;
  if (name == "doorkey2") return kDoorKey2;
  throw ConfigError("unknown task: " + name + " (expected maze, xisland1, xisland2, "
                    "doorkey1 or doorkey2)");
}

EnvSpec make_task(const std::string& name) {
  return make_env_spec(parse_layout(task_layout_text(name), name));
}

}  // namespace maskrl
