#pragma once

#include "mpr/channel.hpp"
#include "mpr/stability.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mpr {

enum class SimMode { normal, dominant, interfering };
std::string to_string(SimMode m);
// "normal", "dominant:2", "interfering:1" (user ids 1-based)
void parse_mode(const std::string& s, SimMode& mode, int& user);

struct SimConfig {
    int users = 2;
    ChannelParams ch2;
    Channel3 ch3;
    Policy pol;
    std::vector<double> lambda;
    std::uint64_t slots = 1000000;
    std::uint64_t warmup = 10000;
    std::uint64_t seed = 1;
    SimMode mode = SimMode::normal;
    int mode_user = 0;       // 0-based
    bool bernoulli = false;  // Bernoulli instead of geometric arrivals
    int windows = 20;        // batches for CIs and the drift test
    double hist_bin = 1.0;   // delay histogram bin width (slots)
    bool trace = false;      // keep the per-slot queue lengths
    int capture_first = 0;   // user whose success outcomes head the channel draw

    void validate() const;
};

struct SimStats {
    std::uint64_t slots = 0, measured_slots = 0;
    std::vector<double> mean_queue, queue_ci;
    std::vector<double> mean_delay, delay_ci;
    std::vector<double> lambda_eff;
    std::vector<std::uint64_t> served; // packets with arrival after warmup that departed

    // whole-run accounting (includes warmup)
    std::vector<std::uint64_t> arrivals_total, departures_total, final_queue;

    // occupancy[mask]: fraction of measured slots where exactly the users in mask are non-empty
    std::vector<double> occupancy;
    std::vector<double> occupancy_se;

    // channel usage: attempts[mask], successes[u][mask] (real and dummy transmissions)
    std::vector<std::uint64_t> attempts;
    std::vector<std::vector<std::uint64_t>> successes;

    std::vector<std::vector<double>> window_queue; // [user][window]
    std::vector<Membership> user_verdict;
    Membership verdict = Membership::stable;
    std::vector<double> drift_t, drift_growth;

    std::vector<std::vector<std::uint64_t>> histogram; // [user][bin]
    std::vector<long double> delay_sum;
    double hist_bin = 1.0;

    std::vector<std::vector<std::uint32_t>> trace; // [user][slot]

    double both_empty() const { return occupancy.empty() ? 0.0 : occupancy[0]; }
    // probability that user u is empty
    double empty_prob(int u) const;
};

SimStats run(const SimConfig& cfg);

struct DriftResult {
    double slope = 0, t_stat = 0, growth = 0;
    double level_spread = 0; // CI half-width of the window means over (mean + 1)
    Membership verdict = Membership::stable;
};
DriftResult drift_verdict(const std::vector<double>& window_means);
Membership drift_test(const SimConfig& cfg, int windows = 20);

struct Histogram {
    double bin = 1.0;
    std::vector<std::vector<std::uint64_t>> counts;
    std::vector<std::uint64_t> total;
    std::vector<double> mean;
};
Histogram delay_distribution(const SimConfig& cfg);

// two-sample Kolmogorov-Smirnov statistic on binned data
double ks_statistic(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

} // namespace mpr
