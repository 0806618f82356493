#include "sacd/mdp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sacd/errors.hpp"

namespace sacd {

using nlohmann::json;

void TabularMDP::validate() const {
    if (num_states <= 0) throw std::invalid_argument("TabularMDP: num_states must be positive");
    if (num_actions <= 0) throw std::invalid_argument("TabularMDP: num_actions must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("TabularMDP: gamma must lie in [0,1)");
    if (static_cast<int>(transition.size()) != num_states)
        throw std::invalid_argument("TabularMDP: transition tensor has wrong first dimension");
    for (int s = 0; s < num_states; ++s) {
        const Matrix& rows = transition[s];
        if (rows.rows() != num_actions || rows.cols() != num_states)
            throw std::invalid_argument("TabularMDP: transition tensor has wrong shape at state " +
                                        std::to_string(s));
        for (int a = 0; a < num_actions; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                double p = rows(a, s2);
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("TabularMDP: transition probability out of [0,1] at (" +
                                                std::to_string(s) + "," + std::to_string(a) + ")");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("TabularMDP: transition row does not sum to 1 at (" +
                                            std::to_string(s) + "," + std::to_string(a) + ")");
        }
    }
    if (reward.rows() != num_states || reward.cols() != num_actions)
        throw std::invalid_argument("TabularMDP: reward tensor has wrong shape");
    if (static_cast<int>(initial_dist.size()) != num_states)
        throw std::invalid_argument("TabularMDP: initial_dist has wrong length");
    double init_sum = 0.0;
    for (double p : initial_dist) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("TabularMDP: initial_dist entry out of [0,1]");
        init_sum += p;
    }
    if (std::abs(init_sum - 1.0) > 1e-9)
        throw std::invalid_argument("TabularMDP: initial_dist does not sum to 1");
    if (static_cast<int>(terminal.size()) != num_states)
        throw std::invalid_argument("TabularMDP: terminal mask has wrong length");
    for (int s = 0; s < num_states; ++s) {
        if (!terminal[s]) continue;
        for (int a = 0; a < num_actions; ++a) {
            if (std::abs(transition[s](a, s) - 1.0) > 1e-12)
                throw std::invalid_argument("TabularMDP: terminal state " + std::to_string(s) +
                                            " does not self-loop");
            if (reward(s, a) != 0.0)
                throw std::invalid_argument("TabularMDP: terminal state " + std::to_string(s) +
                                            " has nonzero reward");
        }
    }
}

std::string mdp_to_json(const TabularMDP& mdp) {
    json j;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["gamma"] = mdp.gamma;
    json trans = json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        json per_action = json::array();
        for (int a = 0; a < mdp.num_actions; ++a) {
            json row = json::array();
            for (int s2 = 0; s2 < mdp.num_states; ++s2) row.push_back(mdp.transition[s](a, s2));
            per_action.push_back(std::move(row));
        }
        trans.push_back(std::move(per_action));
    }
    j["transition"] = std::move(trans);
    json rew = json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        json row = json::array();
        for (int a = 0; a < mdp.num_actions; ++a) row.push_back(mdp.reward(s, a));
        rew.push_back(std::move(row));
    }
    j["reward"] = std::move(rew);
    j["initial_dist"] = mdp.initial_dist;
    j["terminal"] = mdp.terminal;
    return j.dump(2);
}

TabularMDP mdp_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("TabularMDP: invalid JSON: ") + e.what());
    }
    TabularMDP mdp;
    try {
        mdp.num_states = j.at("num_states").get<int>();
        mdp.num_actions = j.at("num_actions").get<int>();
        mdp.gamma = j.at("gamma").get<double>();
        const auto& trans = j.at("transition");
        mdp.transition.reserve(trans.size());
        for (const auto& per_action : trans) {
            Matrix m(per_action.size(), per_action.empty() ? 0 : per_action[0].size());
            for (std::size_t a = 0; a < per_action.size(); ++a) {
                const auto& row = per_action[a];
                if (static_cast<Eigen::Index>(row.size()) != m.cols())
                    throw std::invalid_argument("TabularMDP: ragged transition row");
                for (std::size_t s2 = 0; s2 < row.size(); ++s2) m(a, s2) = row[s2].get<double>();
            }
            mdp.transition.push_back(std::move(m));
        }
        const auto& rew = j.at("reward");
        mdp.reward.resize(rew.size(), rew.empty() ? 0 : rew[0].size());
        for (std::size_t s = 0; s < rew.size(); ++s) {
            const auto& row = rew[s];
            if (static_cast<Eigen::Index>(row.size()) != mdp.reward.cols())
                throw std::invalid_argument("TabularMDP: ragged reward row");
            for (std::size_t a = 0; a < row.size(); ++a) mdp.reward(s, a) = row[a].get<double>();
        }
        mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();
        mdp.terminal = j.at("terminal").get<std::vector<bool>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("TabularMDP: malformed document: ") + e.what());
    }
    mdp.validate();
    return mdp;
}

void save_mdp(const TabularMDP& mdp, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << mdp_to_json(mdp) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

TabularMDP load_mdp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return mdp_from_json(ss.str());
}

}  // namespace sacd
