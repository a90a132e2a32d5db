#pragma once

#include "mpr/bvp.hpp"
#include "mpr/channel.hpp"
#include "mpr/simulator.hpp"
#include "mpr/stability.hpp"
#include "mpr/symmetric.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpr {

// "a:b:step" inclusive range, or a single number
struct RangeSpec {
    double lo = 0, hi = 0, step = 0;
    std::vector<double> values() const;
    static RangeSpec parse(const std::string& s);
};

struct ExperimentConfig {
    std::optional<ChannelParams> channel;
    std::optional<Channel3> channel3;
    std::optional<Conditionals> conditionals; // when derived from phy
    std::optional<Policy> policy;
    std::vector<double> lambda;                   // single operating point
    std::optional<std::vector<double>> lambda1, lambda2, lambda3; // grid axes
    SymmetricParams symmetric;
    BvpOptions bvp;
    ClosureSpec closure;
    std::uint64_t slots = 1000000, warmup = 10000;
    std::string mode = "normal";
    bool bernoulli = false;
    int windows = 20;
    double hist_bin = 1.0;
    std::uint64_t seed = 1;
    std::string output;
    nlohmann::json raw; // parsed input, used for the provenance hash

    std::string hash() const;
    SimConfig sim_config() const;
};

// throws invalid_parameter with the offending key path
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// config with every block defaulted
ExperimentConfig default_config();

ChannelParams parse_channel(const nlohmann::json& j, const std::string& path,
                            std::optional<Conditionals>* cond = nullptr);
Channel3 parse_channel3(const nlohmann::json& j, const std::string& path);

} // namespace mpr
