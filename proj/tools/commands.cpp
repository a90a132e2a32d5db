#include "commands.hpp"

#include "mpr/bvp.hpp"
#include "mpr/errors.hpp"
#include "mpr/report.hpp"
#include "mpr/simulator.hpp"
#include "mpr/symmetric.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace mprq {

using namespace mpr;
using nlohmann::json;

namespace {

constexpr double inf_v = std::numeric_limits<double>::infinity();

const ChannelParams& need_channel(const ExperimentConfig& c)
{
    if (!c.channel)
        throw invalid_parameter("config.channel: required by this command");
    return *c.channel;
}

const Policy& need_policy(const ExperimentConfig& c, std::size_t users)
{
    if (!c.policy)
        throw invalid_parameter("config.policy: required by this command");
    if (c.policy->users() != users)
        throw invalid_parameter("config.policy: " + std::to_string(users) + " users expected");
    return *c.policy;
}

std::vector<double> axis(const std::optional<std::vector<double>>& a)
{
    return a ? *a : std::vector<double>{};
}

std::array<double, 2> operating_point(const ExperimentConfig& c, const DelayBvpArgs* a = nullptr)
{
    std::array<double, 2> l{};
    if (c.lambda.size() == 2)
        l = {c.lambda[0], c.lambda[1]};
    else if (!c.lambda.empty())
        throw invalid_parameter("config.rates.lambda: two rates expected");
    if (a && a->lambda1)
        l[0] = *a->lambda1;
    if (a && a->lambda2)
        l[1] = *a->lambda2;
    return l;
}

// config-path context for module errors
template <class F>
auto in_context(const std::string& what, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const standing_assumption_error& e) {
        throw standing_assumption_error(what + ": " + e.what());
    } catch (const degenerate_error& e) {
        throw degenerate_error(what + ": " + e.what());
    }
}

std::string channel_label(const SymmetricParams& sp)
{
    if (sp.b == 0 && sp.c == 0)
        return "collision";
    return sp.c == 0 ? "capture" : "mpr";
}

// {D_exact_or_low, D_up}; inf when unstable
std::array<double, 2> symmetric_delay(const SymmetricParams& sp)
{
    try {
        if (sp.c == 0) {
            double d = delay_capture(sp);
            return {d, d};
        }
        auto b = delay_bounds_mpr(sp);
        return {b.low, b.up};
    } catch (const instability_error&) {
        return {inf_v, inf_v};
    }
}

} // namespace

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f)
{
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lk(m);
                    if (!err)
                        err = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
}

ExperimentConfig load(const Global& g)
{
    ExperimentConfig c = g.config_path.empty() ? default_config() : load_config(g.config_path);
    if (g.seed)
        c.seed = *g.seed;
    return c;
}

int cmd_region(const Global& g, const RegionArgs& a, std::ostream& os)
{
    auto cfg = load(g);
    const auto& ch = need_channel(cfg);
    const auto& pol = need_policy(cfg, 2);
    auto reg = in_context("config.policy", [&] { return two_user_region(ch, pol); });

    if (a.boundary > 0) {
        CsvWriter w(os, cfg.hash(), cfg.seed, {"angle", "lambda1", "lambda2"});
        for (int r = 0; r < a.boundary; ++r) {
            double th = a.boundary == 1 ? 0.0 : 0.5 * std::numbers::pi * r / (a.boundary - 1);
            double t = reg.ray_extent({std::cos(th), std::sin(th)});
            w.cell(th).cell(t * std::cos(th)).cell(t * std::sin(th)).end_row();
        }
        return 0;
    }
    CsvWriter w(os, cfg.hash(), cfg.seed, {"lambda1", "lambda2", "subregion", "stable"});
    for (double l1 : axis(cfg.lambda1))
        for (double l2 : axis(cfg.lambda2)) {
            std::vector<double> l{l1, l2};
            int idx = reg.which(l);
            w.cell(l1).cell(l2).cell(idx >= 0 ? reg.parts[idx].label : "-").cell(to_string(reg.classify(l)));
            w.end_row();
        }
    return 0;
}

int cmd_region3(const Global& g, std::ostream& os)
{
    auto cfg = load(g);
    if (!cfg.channel3)
        throw invalid_parameter("config.channel3: required by region3");
    const auto& pol = need_policy(cfg, 3);
    std::vector<std::array<double, 3>> pts;
    for (double l1 : axis(cfg.lambda1))
        for (double l2 : axis(cfg.lambda2))
            for (double l3 : axis(cfg.lambda3))
                pts.push_back({l1, l2, l3});
    std::vector<Region3Point> res(pts.size());
    auto solver = bvp_f1_solver(cfg.bvp);
    parallel_for(pts.size(), g.threads, [&](std::size_t i) {
        res[i] = in_context("config.channel3", [&] {
            return three_user_region(*cfg.channel3, pol, {pts[i][0], pts[i][1], pts[i][2]}, solver);
        });
    });
    CsvWriter w(os, cfg.hash(), cfg.seed, {"lambda1", "lambda2", "lambda3", "subregion", "stable"});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::string sub;
        for (int k = 0; k < 3; ++k)
            if (res[i].in_R[k])
                sub += (sub.empty() ? "R" : "+R") + std::to_string(k + 1);
        w.cell(pts[i][0]).cell(pts[i][1]).cell(pts[i][2]).cell(sub.empty() ? "-" : sub);
        w.cell(to_string(res[i].verdict)).end_row();
    }
    return 0;
}

int cmd_closure(const Global& g, std::ostream& os)
{
    auto cfg = load(g);
    const auto& ch = need_channel(cfg);
    ClosureSpec free = cfg.closure, tied = cfg.closure;
    free.tie_alpha_star = false;
    tied.tie_alpha_star = true;
    std::vector<ClosurePoint> a, b;
    parallel_for(2, g.threads, [&](std::size_t i) {
        if (i == 0)
            a = closure(ch, free);
        else
            b = closure(ch, tied);
    });
    CsvWriter w(os, cfg.hash(), cfg.seed,
                {"angle", "lambda1", "lambda2", "alpha1", "alpha2", "alpha_star1", "alpha_star2", "tied_lambda1",
                 "tied_lambda2", "contains"});
    for (std::size_t r = 0; r < a.size(); ++r) {
        double ra = std::hypot(a[r].lambda1, a[r].lambda2), rb = std::hypot(b[r].lambda1, b[r].lambda2);
        double al1 = NAN, al2 = NAN, as1 = NAN, as2 = NAN;
        if (a[r].best.users() == 2) {
            al1 = a[r].best.alpha[0];
            al2 = a[r].best.alpha[1];
            as1 = a[r].best.alpha_star[0];
            as2 = a[r].best.alpha_star[1];
        }
        w.cell(a[r].angle).cell(a[r].lambda1).cell(a[r].lambda2).cell(al1).cell(al2).cell(as1).cell(as2);
        w.cell(b[r].lambda1).cell(b[r].lambda2).cell(ra >= rb - 1e-12 ? 1 : 0).end_row();
    }
    return 0;
}

int cmd_kernel(const Global& g, std::ostream& os)
{
    auto cfg = load(g);
    auto l = operating_point(cfg);
    auto k = KernelCoeffs::from(need_channel(cfg), need_policy(cfg, 2), l[0], l[1]);
    auto bp = branch_points(k);
    int n = cfg.bvp.map.n_grid;
    CsvWriter w(os, cfg.hash(), cfg.seed, {"kind", "index", "phi", "re", "im"});
    for (int i = 0; i < 4; ++i)
        w.cell("branch_x").cell(i).cell(0.0).cell(bp.x[i]).cell(0.0).end_row();
    for (int i = 0; i < 4; ++i)
        w.cell("branch_y").cell(i).cell(0.0).cell(bp.y[i]).cell(0.0).end_row();
    auto emit = [&](const char* name, const Contour& c) {
        for (std::size_t j = 0; j < c.phi.size(); ++j) {
            cplx x = std::polar(c.rho[j], c.phi[j]);
            w.cell(name).cell((long long)j).cell(c.phi[j]).cell(x.real()).cell(x.imag()).end_row();
        }
    };
    if (k.l1 > 0)
        emit("M", contour_M(k, n));
    if (k.l2 > 0)
        emit("L", contour_L(k, n));
    return 0;
}

int cmd_conformal_diag(const Global& g, std::ostream& os)
{
    auto cfg = load(g);
    auto l = operating_point(cfg);
    auto k = KernelCoeffs::from(need_channel(cfg), need_policy(cfg, 2), l[0], l[1]);
    auto map = ConformalMap::solve_theodorsen(contour_M(k, cfg.bvp.map.n_grid), cfg.bvp.map);
    const auto& d = map.diagnostics();
    std::cerr << "theodorsen: iterations=" << d.iterations << " residual=" << fmt(d.residual)
              << " symmetry=" << fmt(d.symmetry_residual) << "\n";
    CsvWriter w(os, cfg.hash(), cfg.seed, {"j", "phi", "psi", "log_rho", "x_re", "x_im"});
    for (int j = 0; j < map.n_grid(); ++j) {
        cplx x = map.boundary_point(j);
        w.cell(j).cell(map.phi()[j]).cell(map.psi()[j]).cell(map.log_rho()[j]).cell(x.real()).cell(x.imag());
        w.end_row();
    }
    return 0;
}

int cmd_delay_bvp(const Global& g, const DelayBvpArgs& a, std::ostream& os)
{
    auto cfg = load(g);
    const auto& ch = need_channel(cfg);
    const auto& pol = need_policy(cfg, 2);
    if (!a.sweep) {
        auto l = operating_point(cfg, &a);
        auto sol = in_context("config", [&] { return solve_pair(ch, pol, l[0], l[1], cfg.bvp); });
        json j = to_json(mean_delay(sol));
        j["regime"] = to_string(sol.regime);
        j["chi"] = sol.chi;
        j["r"] = sol.r;
        j["H00"] = sol.H00;
        j["H10"] = sol.H10;
        j["H01"] = sol.H01;
        j["m1_method"] = sol.m1_method;
        j["m2_method"] = sol.m2_method;
        j["config_hash"] = cfg.hash();
        os << j.dump(2) << "\n";
        return 0;
    }
    std::vector<std::array<double, 2>> pts;
    for (double l1 : axis(cfg.lambda1))
        for (double l2 : axis(cfg.lambda2))
            pts.push_back({l1, l2});
    struct Row {
        DelayReport d;
        std::string regime = "-";
        int chi = 0, r = 0;
        bool stable = false;
    };
    std::vector<Row> rows(pts.size());
    parallel_for(pts.size(), g.threads, [&](std::size_t i) {
        Row& row = rows[i];
        try {
            auto sol = solve_pair(ch, pol, pts[i][0], pts[i][1], cfg.bvp);
            row.d = mean_delay(sol);
            row.regime = to_string(sol.regime);
            row.chi = sol.chi;
            row.r = sol.r;
            row.stable = true;
        } catch (const instability_error&) {
        }
    });
    CsvWriter w(os, cfg.hash(), cfg.seed, {"lambda1", "lambda2", "M1", "M2", "D1", "D2", "regime", "chi", "r"});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Row& row = rows[i];
        w.cell(pts[i][0]).cell(pts[i][1]);
        if (row.stable) {
            w.cell(row.d.M1).cell(row.d.M2).cell(row.d.D1).cell(row.d.D2).cell(row.regime).cell(row.chi).cell(row.r);
        } else {
            w.cell(inf_v).cell(inf_v).cell(inf_v).cell(inf_v).cell("-").cell("-").cell("-");
        }
        w.end_row();
    }
    return 0;
}

int cmd_delay_symmetric(const Global& g, const DelaySymArgs& a, std::ostream& os)
{
    auto cfg = load(g);
    SymmetricParams base = cfg.symmetric;
    std::vector<SymmetricParams> curves;
    if (a.fig4 || a.fig5) {
        SymmetricParams col = base, cap = base, mpr_ = base;
        col.b = col.c = 0;
        cap.b = base.b > 0 ? base.b : 0.2;
        cap.c = 0;
        mpr_.b = cap.b;
        mpr_.c = base.c > 0 ? base.c : 0.3;
        curves = {col, cap, mpr_};
    } else {
        curves = {base};
    }
    for (auto& sp : curves)
        sp.validate();

    if (a.fig5) {
        std::string range = a.sweep_alpha_star.empty() ? "0.6:1:0.02" : a.sweep_alpha_star;
        auto xs = RangeSpec::parse(range).values();
        CsvWriter w(os, cfg.hash(), cfg.seed, {"alpha_star", "D_exact_or_low", "D_up", "channel"});
        for (const auto& sp : curves)
            for (double as : xs) {
                SymmetricParams s = sp;
                s.alpha_star = as;
                auto d = symmetric_delay(s);
                w.cell(as).cell(d[0]).cell(d[1]).cell(channel_label(s)).end_row();
            }
        return 0;
    }
    std::string range = a.sweep_lambda.empty() ? "0.01:0.3:0.005" : a.sweep_lambda;
    auto xs = RangeSpec::parse(range).values();
    CsvWriter w(os, cfg.hash(), cfg.seed, {"lambda", "D_exact_or_low", "D_up", "channel"});
    for (const auto& sp : curves)
        for (double l : xs) {
            SymmetricParams s = sp;
            s.lambda = l;
            auto d = l > 0 ? symmetric_delay(s) : std::array<double, 2>{NAN, NAN};
            w.cell(l).cell(d[0]).cell(d[1]).cell(channel_label(s)).end_row();
        }
    return 0;
}

int cmd_optimize_alpha(const Global& g, std::ostream& os)
{
    auto cfg = load(g);
    auto r = optimal_alpha(cfg.symmetric);
    json j = {{"alpha_tilde", r.alpha}, {"branch", r.branch}, {"feasible", r.feasible},
              {"s1", r.s1},             {"s2", r.s2},         {"config_hash", cfg.hash()}};
    os << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const Global& g, const SimulateArgs& a, std::ostream& os)
{
    auto cfg = load(g);
    if (a.slots)
        cfg.slots = *a.slots;
    if (a.mode)
        cfg.mode = *a.mode;
    SimConfig sc = cfg.sim_config();
    if (sc.warmup >= sc.slots)
        sc.warmup = sc.slots / 10;
    auto st = run(sc);
    json j = to_json(st);
    j["config_hash"] = cfg.hash();
    j["seed"] = sc.seed;
    j["mode"] = cfg.mode;
    os << j.dump(2) << "\n";
    if (!a.histogram.empty()) {
        std::ofstream h(a.histogram);
        if (!h)
            throw invalid_parameter("cannot write histogram file '" + a.histogram + "'");
        CsvWriter w(h, cfg.hash(), sc.seed, {"user", "bin_lo", "bin_hi", "count"});
        for (int u = 0; u < sc.users; ++u)
            for (std::size_t b = 0; b < st.histogram[u].size(); ++b) {
                if (!st.histogram[u][b])
                    continue;
                w.cell(u + 1).cell(b * sc.hist_bin).cell((b + 1) * sc.hist_bin).cell((long long)st.histogram[u][b]);
                w.end_row();
            }
    }
    return 0;
}

} // namespace mprq
