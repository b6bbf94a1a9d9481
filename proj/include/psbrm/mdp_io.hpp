#pragma once

#include "psbrm/mdp.hpp"

#include <json.hpp>

#include <filesystem>

namespace psbrm {

// JSON layout:
//   { "num_states": S, "num_actions": A, "gamma": g,
//     "transitions": [ P_0, ..., P_{A-1} ],   // each S x S, rows s, columns s'
//     "rewards": R }                          // S x A
TabularMDP mdp_from_json(const nlohmann::json& doc);
nlohmann::json mdp_to_json(const TabularMDP& mdp);

/// Throws IoError if the file cannot be read or parsed, ValidationError on bad content.
TabularMDP load_mdp(const std::filesystem::path& path);

} // namespace psbrm
