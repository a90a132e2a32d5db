#include "commands.hpp"

#include "mpr/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"mprq: stability and delay of queue-aware ALOHA with multi-packet reception"};
    app.require_subcommand(1);

    mprq::Global g;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--output", g.output, "output file (default stdout)");
    app.add_option("--threads", g.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);

    auto* region = app.add_subcommand("region", "two-user stability region membership grid");
    mprq::RegionArgs region_args;
    region->add_option("--boundary", region_args.boundary, "emit the boundary polyline with N rays");
    auto* region3 = app.add_subcommand("region3", "three-user stability region membership grid");
    auto* closure = app.add_subcommand("closure", "closure of the stability region over the policy grid");
    auto* kernel = app.add_subcommand("kernel", "branch points and contours of the kernel");
    auto* cdiag = app.add_subcommand("conformal-diag", "conformal map table for contour M");

    auto* dbvp = app.add_subcommand("delay-bvp", "mean delay from the boundary value problem");
    mprq::DelayBvpArgs dbvp_args;
    double l1 = 0, l2 = 0;
    auto* l1_opt = dbvp->add_option("--lambda1", l1);
    auto* l2_opt = dbvp->add_option("--lambda2", l2);
    dbvp->add_flag("--sweep", dbvp_args.sweep, "sweep the config rate grid, CSV output");

    auto* dsym = app.add_subcommand("delay-symmetric", "symmetric closed-form delay and MPR bounds");
    mprq::DelaySymArgs dsym_args;
    dsym->add_option("--sweep-lambda", dsym_args.sweep_lambda, "lo:hi:step");
    dsym->add_option("--sweep-alpha-star", dsym_args.sweep_alpha_star, "lo:hi:step (with --fig5)");
    dsym->add_flag("--fig4", dsym_args.fig4, "collision, capture and MPR curves over lambda");
    dsym->add_flag("--fig5", dsym_args.fig5, "curves over alpha*");

    auto* opt = app.add_subcommand("optimize-alpha", "delay-optimal symmetric alpha");

    auto* sim = app.add_subcommand("simulate", "slotted Monte Carlo simulation");
    mprq::SimulateArgs sim_args;
    std::uint64_t slots = 0;
    std::string mode;
    auto* slots_opt = sim->add_option("--slots", slots);
    auto* mode_opt = sim->add_option("--mode", mode, "normal | dominant:K | interfering:K");
    sim->add_option("--histogram", sim_args.histogram, "write the delay histogram CSV here");

    auto* val = app.add_subcommand("validate", "formula-vs-simulation oracle suite");
    mprq::ValidateArgs val_args;
    val->add_option("--slots", val_args.slots, "slot budget per simulation check");

    for (auto* sc : app.get_subcommands({}))
        sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (*seed_opt)
        g.seed = seed;
    if (*l1_opt)
        dbvp_args.lambda1 = l1;
    if (*l2_opt)
        dbvp_args.lambda2 = l2;
    if (*slots_opt)
        sim_args.slots = slots;
    if (*mode_opt)
        sim_args.mode = mode;

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!g.output.empty()) {
        file.open(g.output);
        if (!file) {
            std::cerr << "error: cannot write " << g.output << "\n";
            return 2;
        }
        os = &file;
    }

    try {
        if (*region)
            return mprq::cmd_region(g, region_args, *os);
        if (*region3)
            return mprq::cmd_region3(g, *os);
        if (*closure)
            return mprq::cmd_closure(g, *os);
        if (*kernel)
            return mprq::cmd_kernel(g, *os);
        if (*cdiag)
            return mprq::cmd_conformal_diag(g, *os);
        if (*dbvp)
            return mprq::cmd_delay_bvp(g, dbvp_args, *os);
        if (*dsym)
            return mprq::cmd_delay_symmetric(g, dsym_args, *os);
        if (*opt)
            return mprq::cmd_optimize_alpha(g, *os);
        if (*sim)
            return mprq::cmd_simulate(g, sim_args, *os);
        if (*val)
            return mprq::cmd_validate(g, val_args, *os);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
