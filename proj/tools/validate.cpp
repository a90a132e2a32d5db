#include "commands.hpp"

#include "mpr/bvp.hpp"
#include "mpr/errors.hpp"
#include "mpr/report.hpp"
#include "mpr/simulator.hpp"
#include "mpr/symmetric.hpp"

#include <cmath>
#include <limits>

namespace mprq {

using namespace mpr;
using nlohmann::json;

namespace {

// t quantile for 19 dof; batch-means CIs use 20 windows
constexpr double t19 = 2.093;

// slot budget the tolerances are calibrated at; smaller budgets widen them by sqrt(ref / slots)
constexpr double reference_slots = 4e6;

struct Suite {
    json checks = json::array();
    int passed = 0, failed = 0, inconclusive = 0;
    double tol_scale = 1;

    // |measured - expected| <= 4 se + tol; a check whose noise swamps the expected value is inconclusive,
    // unless the simulated system itself drifted away while the formula predicts a finite value
    void stat(const std::string& name, double measured, double expected, double se, double tol,
              Membership sim = Membership::stable)
    {
        double allowed = 4 * se + tol * tol_scale;
        std::string status;
        if (!std::isfinite(measured) || (sim == Membership::unstable && std::isfinite(expected)))
            status = "fail";
        else if (std::abs(measured - expected) <= allowed)
            status = "pass";
        else if (4 * se > 0.5 * std::abs(expected))
            status = "inconclusive";
        else
            status = "fail";
        add(name, status, measured, expected, allowed, se);
    }

    void exact(const std::string& name, double measured, double expected, double tol)
    {
        bool ok = std::isfinite(measured) && std::abs(measured - expected) <= tol;
        add(name, ok ? "pass" : "fail", measured, expected, tol, 0);
    }

    void flag(const std::string& name, bool ok, const std::string& note = "")
    {
        json j = {{"name", name}, {"status", ok ? "pass" : "fail"}};
        if (!note.empty())
            j["note"] = note;
        checks.push_back(j);
        ok ? ++passed : ++failed;
    }

    void error(const std::string& name, const std::string& what)
    {
        checks.push_back({{"name", name}, {"status", "fail"}, {"error", what}});
        ++failed;
    }

    void add(const std::string& name, const std::string& status, double m, double e, double tol, double se)
    {
        json j = {{"name", name}, {"status", status}, {"measured", num(m)}, {"expected", num(e)},
                  {"tolerance", num(tol)}};
        if (se > 0)
            j["se"] = num(se);
        checks.push_back(j);
        if (status == "pass")
            ++passed;
        else if (status == "fail")
            ++failed;
        else
            ++inconclusive;
    }

    template <class F>
    void guarded(const std::string& name, F&& f)
    {
        try {
            f();
        } catch (const std::exception& e) {
            error(name, e.what());
        }
    }
};

SimConfig base_sim(std::uint64_t slots, std::uint64_t seed)
{
    SimConfig sc;
    sc.slots = slots;
    sc.warmup = std::max<std::uint64_t>(slots / 100, 1);
    sc.seed = seed;
    return sc;
}

Policy policy2(double a1, double a2, double s1, double s2)
{
    Policy p;
    p.alpha = {a1, a2};
    p.alpha_star = {s1, s2};
    return p;
}

} // namespace

int cmd_validate(const Global& g, const ValidateArgs& a, std::ostream& os)
{
    auto cfg = load(g);
    const std::uint64_t slots = a.slots;
    if (slots < 1000)
        throw invalid_parameter("validate: --slots must be at least 1000");
    Suite s;
    s.tol_scale = std::max(1.0, std::sqrt(reference_slots / double(slots)));

    // ---- deterministic checks ----
    s.guarded("region_collision_R1", [&] {
        auto reg = two_user_region(preset(PresetKind::collision, 1, 1), policy2(0.5, 0.5, 1, 1));
        bool ok = !reg.parts.empty() && reg.parts[0].label == "R1";
        for (int i = 0; i <= 20 && ok; ++i)
            for (int j = 0; j <= 20 && ok; ++j) {
                double l1 = 0.013 + 0.05 * i, l2 = 0.007 + 0.0125 * j;
                bool in = l1 < 1 - 3 * l2 && l2 < 0.25;
                bool got = true;
                for (const auto& c : reg.parts[0].constraints)
                    got = got && c.slack({l1, l2}) > 0;
                ok = in == got;
            }
        s.flag("region_collision_R1", ok, "R1 = {l1 < 1 - 3 l2, l2 < 0.25}");
    });

    s.guarded("branch_point_ordering", [&] {
        SymmetricParams sp;
        auto k = KernelCoeffs::from(sp.channel(), sp.policy(), 0.2, 0.2);
        auto bp = branch_points(k);
        bool ok = 0 <= bp.x[0] && bp.x[0] < bp.x[1] && bp.x[1] <= 1 && 1 < bp.x[2] && bp.x[2] < bp.x[3] &&
                  bp.x[3] < 6.0;
        s.flag("branch_point_ordering", ok);
    });

    s.guarded("unit_circle_identity", [&] {
        auto map = ConformalMap::solve_theodorsen(unit_circle(256));
        double err = 0;
        for (int j = 0; j < map.n_grid(); ++j)
            err = std::max(err, std::abs(map.psi()[j] - map.phi()[j]));
        err = std::max(err, std::abs(map.gamma0(cplx(0.3, 0.4)) - cplx(0.3, 0.4)));
        s.exact("unit_circle_identity", err, 0, 1e-8);
    });

    s.guarded("bvp_symmetric_closed_form", [&] {
        SymmetricParams sp;
        sp.b = 0.2;
        sp.lambda = 0.15;
        auto sol = solve_pair(sp.channel(), sp.policy(), sp.lambda, sp.lambda, cfg.bvp);
        double d = mean_delay(sol).D1, e = delay_capture(sp);
        s.exact("bvp_symmetric_closed_form", d, e, 1e-4 * e);
    });

    s.guarded("balanced_H00", [&] {
        // sigma1/tau1 + sigma2/tau2 = 1
        KernelCoeffs k{0.1, 0.1, 0.3, 0.2, 0.6, 0.4};
        auto sol = solve_pair(k, cfg.bvp);
        s.exact("balanced_H00", sol.H00, 1 - k.rho(), 1e-8);
    });

    s.guarded("optimal_alpha_grid", [&] {
        SymmetricParams sp;
        sp.b = 0.2;
        sp.lambda = 0.1;
        auto opt = optimal_alpha(sp);
        double best = std::numeric_limits<double>::infinity(), arg = 0;
        for (int i = 1; i <= 10000; ++i) {
            SymmetricParams t = sp;
            t.alpha = i * 1e-4;
            try {
                double d = delay_capture(t);
                if (d < best) {
                    best = d;
                    arg = t.alpha;
                }
            } catch (const instability_error&) {
            }
        }
        s.exact("optimal_alpha_grid", arg, opt.alpha, 1.5e-4);
    });

    // ---- simulation checks ----
    s.guarded("single_queue_delay", [&] {
        SimConfig sc = base_sim(slots, cfg.seed);
        sc.ch2 = preset(PresetKind::capture, 0.9, 1.0, 0.2);
        sc.pol = policy2(0.6, 0.6, 1, 1);
        sc.lambda = {0.3, 0.0};
        auto st = run(sc);
        s.stat("single_queue_delay", st.mean_delay[0], single_queue_delay(0.3, 1.0), st.delay_ci[0] / t19, 1e-3,
               st.verdict);
    });

    s.guarded("symmetric_capture_delay", [&] {
        // expected value from the reference parameters; the simulated system comes from the config
        SymmetricParams ref;
        ref.b = 0;
        ref.lambda = 0.2;
        SymmetricParams sim = cfg.symmetric;
        sim.lambda = 0.2;
        SimConfig sc = base_sim(slots, cfg.seed + 1);
        sc.ch2 = sim.channel();
        sc.pol = sim.policy();
        sc.lambda = {sim.lambda, sim.lambda};
        auto st = run(sc);
        double d = 0.5 * (st.mean_delay[0] + st.mean_delay[1]);
        double se = 0.5 * std::hypot(st.delay_ci[0], st.delay_ci[1]) / t19;
        double e = delay_capture(ref);
        s.stat("symmetric_capture_delay", d, e, se, 0.02 * e, st.verdict);
    });

    s.guarded("mpr_bounds", [&] {
        SymmetricParams sp;
        sp.b = 0.2;
        sp.c = 0.3;
        sp.lambda = 0.15;
        auto b = delay_bounds_mpr(sp);
        SimConfig sc = base_sim(slots, cfg.seed + 2);
        sc.ch2 = sp.channel();
        sc.pol = sp.policy();
        sc.lambda = {sp.lambda, sp.lambda};
        auto st = run(sc);
        double d = 0.5 * (st.mean_delay[0] + st.mean_delay[1]);
        double se = 0.5 * std::hypot(st.delay_ci[0], st.delay_ci[1]) / t19;
        s.stat("mpr_bounds", d, 0.5 * (b.low + b.up), se, 0.5 * (b.up - b.low), st.verdict);
    });

    s.guarded("asymmetric_bvp_vs_sim", [&] {
        auto ch = preset(PresetKind::capture, 0.9, 1.0, 0.2);
        auto pol = policy2(0.5, 0.7, 1.0, 0.9);
        double l1 = 0.1, l2 = 0.12;
        auto sol = solve_pair(ch, pol, l1, l2, cfg.bvp);
        auto dr = mean_delay(sol);
        SimConfig sc = base_sim(slots, cfg.seed + 3);
        sc.ch2 = ch;
        sc.pol = pol;
        sc.lambda = {l1, l2};
        auto st = run(sc);
        s.stat("asymmetric_delay_user1", st.mean_delay[0], dr.D1, st.delay_ci[0] / t19, 0.05 * dr.D1, st.verdict);
        s.stat("asymmetric_delay_user2", st.mean_delay[1], dr.D2, st.delay_ci[1] / t19, 0.05 * dr.D2, st.verdict);
        s.stat("H00_vs_both_empty", st.occupancy[0], sol.H00, st.occupancy_se[0], 2e-3);
        s.stat("H10_vs_user2_empty", st.empty_prob(1), sol.H10, st.occupancy_se[0] + st.occupancy_se[1], 2e-3);
        // success frequency of user 1 when both transmitted
        double n = (double)st.attempts[3];
        double f = st.successes[0][3] / n, p = ch.P1_12 + ch.P12_12;
        s.stat("pair_success_frequency", f, p, std::sqrt(p * (1 - p) / n), 0);
    });

    s.guarded("drift_inside_outside", [&] {
        auto ch = preset(PresetKind::collision, 1, 1);
        auto pol = policy2(0.5, 0.5, 1, 1);
        auto reg = two_user_region(ch, pol);
        double ext = reg.ray_extent({1, 0});
        SimConfig sc = base_sim(slots, cfg.seed + 4);
        sc.ch2 = ch;
        sc.pol = pol;
        sc.lambda = {0.3 * ext, 0.05};
        auto in = run(sc).verdict;
        sc.lambda = {1.2 * ext, 0.0};
        auto out = run(sc).verdict;
        s.flag("drift_inside_stable", in == Membership::stable, to_string(in));
        s.flag("drift_outside_unstable", out == Membership::unstable, to_string(out));
    });

    s.guarded("three_user_F1", [&] {
        auto ch = preset3(PresetKind::capture, 0.9, 1.0, 0.2);
        Policy pol;
        pol.alpha = {0.4, 0.4, 0.4};
        pol.alpha_star = {0.5, 0.5, 0.5};
        double l2 = 0.05, l3 = 0.06;
        auto F = solve_modified_F1(ch, pol, l2, l3, cfg.bvp);
        SimConfig sc = base_sim(slots, cfg.seed + 5);
        sc.users = 3;
        sc.ch3 = ch;
        sc.pol = pol;
        sc.lambda = {0.0, l2, l3};
        sc.mode = SimMode::dominant;
        sc.mode_user = 0;
        auto st = run(sc);
        // users 2 and 3 empty: masks 0 and 1
        double emp = st.occupancy[0] + st.occupancy[1];
        s.stat("three_user_F1_00", emp, F.F00, st.occupancy_se[0] + st.occupancy_se[1], 2e-3);
    });

    s.guarded("symmetric_histograms_ks", [&] {
        SymmetricParams sp;
        sp.b = 0.2;
        sp.lambda = 0.15;
        SimConfig sc = base_sim(slots, cfg.seed + 6);
        sc.ch2 = sp.channel();
        sc.pol = sp.policy();
        sc.lambda = {sp.lambda, sp.lambda};
        auto st = run(sc);
        double d = ks_statistic(st.histogram[0], st.histogram[1]);
        double n1 = st.served[0], n2 = st.served[1];
        // 1% level critical value, inflated for the dependence between packets of one queue
        double crit = 4 * 1.63 * std::sqrt((n1 + n2) / (n1 * n2));
        s.exact("symmetric_histograms_ks", d, 0, crit);
    });

    json out = {{"passed", s.passed}, {"failed", s.failed}, {"inconclusive", s.inconclusive},
                {"slots", slots}, {"seed", cfg.seed}, {"config_hash", cfg.hash()}, {"checks", s.checks}};
    os << out.dump(2) << "\n";
    return s.failed == 0 ? 0 : 1;
}

} // namespace mprq
