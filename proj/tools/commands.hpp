#pragma once

#include "mpr/config.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

namespace mprq {

struct Global {
    std::string config_path;
    std::string output;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

// loads the config (or the built-in default) and applies --seed
mpr::ExperimentConfig load(const Global& g);

struct RegionArgs {
    int boundary = 0; // > 0: emit the boundary polyline with this many rays instead of the grid
};
int cmd_region(const Global& g, const RegionArgs& a, std::ostream& os);
int cmd_region3(const Global& g, std::ostream& os);
int cmd_closure(const Global& g, std::ostream& os);
int cmd_kernel(const Global& g, std::ostream& os);
int cmd_conformal_diag(const Global& g, std::ostream& os);

struct DelayBvpArgs {
    std::optional<double> lambda1, lambda2;
    bool sweep = false;
};
int cmd_delay_bvp(const Global& g, const DelayBvpArgs& a, std::ostream& os);

struct DelaySymArgs {
    std::string sweep_lambda;     // lo:hi:step
    std::string sweep_alpha_star; // lo:hi:step, with --fig5
    bool fig4 = false, fig5 = false;
};
int cmd_delay_symmetric(const Global& g, const DelaySymArgs& a, std::ostream& os);
int cmd_optimize_alpha(const Global& g, std::ostream& os);

struct SimulateArgs {
    std::optional<std::uint64_t> slots;
    std::optional<std::string> mode;
    std::string histogram;
};
int cmd_simulate(const Global& g, const SimulateArgs& a, std::ostream& os);

struct ValidateArgs {
    std::uint64_t slots = 4000000;
};
int cmd_validate(const Global& g, const ValidateArgs& a, std::ostream& os);

// runs f(i) for i in [0, n) on up to `threads` workers; results must go to per-index slots
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

} // namespace mprq
