#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "sest/treebank.hpp"

namespace sest::test {

inline std::string data_path(const std::string& name) { return std::string(SEST_TEST_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ConstituencyTree coordinator_tree() { return parse_constituency(read_text(data_path("coordinator.tree"))); }

inline DependencyTree unit_tree() { return parse_conllu(read_text(data_path("unit.conllu"))).at(0); }

// Zero-based positions in the fixtures.
inline constexpr std::size_t kCoordinator = 8;
inline constexpr std::size_t kUnit = 38;

}  // namespace sest::test
