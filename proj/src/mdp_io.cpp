#include "psbrm/mdp_io.hpp"

#include <fstream>

namespace psbrm {

namespace {

Matrix matrix_from_json(const nlohmann::json& rows, Eigen::Index expected_rows, Eigen::Index expected_cols,
                        const std::string& what)
{
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expected_rows)
        throw ValidationError(what + ": expected " + std::to_string(expected_rows) + " rows");
    Matrix out(expected_rows, expected_cols);
    for (Eigen::Index r = 0; r < expected_rows; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expected_cols)
            throw ValidationError(what + ": row " + std::to_string(r) + " must have " +
                                  std::to_string(expected_cols) + " entries");
        for (Eigen::Index c = 0; c < expected_cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number())
                throw ValidationError(what + ": non-numeric entry at (" + std::to_string(r) + ", " +
                                      std::to_string(c) + ")");
            out(r, c) = v.get<double>();
        }
    }
    return out;
}

} // namespace

TabularMDP mdp_from_json(const nlohmann::json& doc)
{
    try {
        const auto num_states = doc.at("num_states").get<Eigen::Index>();
        const auto num_actions = doc.at("num_actions").get<Eigen::Index>();
        if (num_states <= 0 || num_actions <= 0)
            throw ValidationError("num_states and num_actions must be positive");
        const auto& transitions = doc.at("transitions");
        if (!transitions.is_array() || static_cast<Eigen::Index>(transitions.size()) != num_actions)
            throw ValidationError("transitions must hold one matrix per action");
        std::vector<Matrix> per_action;
        for (Eigen::Index a = 0; a < num_actions; ++a)
            per_action.push_back(matrix_from_json(transitions[static_cast<std::size_t>(a)], num_states, num_states,
                                                  "transitions[" + std::to_string(a) + "]"));
        const Matrix rewards = matrix_from_json(doc.at("rewards"), num_states, num_actions, "rewards");
        return build_mdp(per_action, rewards, doc.at("gamma").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed MDP document: ") + e.what());
    }
}

nlohmann::json mdp_to_json(const TabularMDP& mdp)
{
    nlohmann::json transitions = nlohmann::json::array();
    for (Eigen::Index a = 0; a < mdp.num_actions(); ++a) {
        nlohmann::json matrix = nlohmann::json::array();
        for (Eigen::Index s = 0; s < mdp.num_states(); ++s) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index next = 0; next < mdp.num_states(); ++next)
                row.push_back(mdp.transition(s, a, next));
            matrix.push_back(row);
        }
        transitions.push_back(matrix);
    }
    nlohmann::json rewards = nlohmann::json::array();
    for (Eigen::Index s = 0; s < mdp.num_states(); ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index a = 0; a < mdp.num_actions(); ++a)
            row.push_back(mdp.reward(s, a));
        rewards.push_back(row);
    }
    return {{"num_states", mdp.num_states()},
            {"num_actions", mdp.num_actions()},
            {"gamma", mdp.discount()},
            {"transitions", transitions},
            {"rewards", rewards}};
}

TabularMDP load_mdp(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open MDP file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("MDP file " + path.string() + " is not valid JSON: " + e.what());
    }
    return mdp_from_json(doc);
}

} // namespace psbrm
