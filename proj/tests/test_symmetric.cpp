#include <doctest.h>

#include "oracle/chain.hpp"

#include "mpr/errors.hpp"
#include "mpr/symmetric.hpp"

#include <cmath>

using namespace mpr;

namespace {

// the symmetric system as a chain: one-decoded, both-decoded and alone service probabilities
oracle::ChainSummary chain_of(const SymmetricParams& sp, int N = 120)
{
    double a = sp.alpha;
    double s = a * (1 - a) * sp.p + a * a * sp.b;
    double kappa = a * a * sp.c;
    double t = sp.alpha_star * sp.p_tilde;
    return oracle::chain_stationary(sp.lambda, sp.lambda, s, s, t, t, kappa, N);
}

} // namespace

TEST_CASE("capture delay against the chain")
{
    for (double b : {0.0, 0.1, 0.2})
        for (double l : {0.05, 0.1, 0.15, 0.2}) {
            SymmetricParams sp;
            sp.b = b;
            sp.lambda = l;
            if (l >= sp.mu_both() * 0.9)
                continue;
            auto ch = chain_of(sp);
            REQUIRE(ch.tail < 1e-12);
            CHECK(delay_capture(sp) == doctest::Approx(ch.M1 / l).epsilon(1e-7));
            CHECK(mean_queue(sp) == doctest::Approx(ch.M1).epsilon(1e-7));
        }
}

TEST_CASE("MPR: the phi term with the true P(both busy) gives the chain delay, bounds bracket it")
{
    for (double c : {0.1, 0.3})
        for (double l : {0.05, 0.12, 0.2}) {
            SymmetricParams sp;
            sp.b = 0.2;
            sp.c = c;
            sp.lambda = l;
            auto ch = chain_of(sp);
            REQUIRE(ch.tail < 1e-12);
            double D = ch.M1 / l;
            CHECK(delay_with_phi(sp, ch.P11) == doctest::Approx(D).epsilon(1e-7));
            auto bd = delay_bounds_mpr(sp);
            CHECK(bd.low <= D + 1e-12);
            CHECK(D <= bd.up + 1e-12);
            CHECK(bd.up - bd.low == doctest::Approx(bd.width));
            CHECK(bd.low <= bd.up);
        }
}

TEST_CASE("capture lowers the delay, MPR lowers it further")
{
    SymmetricParams sp;
    sp.lambda = 0.15;
    double collision = delay_capture(sp);
    sp.b = 0.2;
    double capture = delay_capture(sp);
    sp.c = 0.3;
    double mpr = chain_of(sp).M1 / sp.lambda;
    CHECK(capture < collision);
    CHECK(mpr < capture);
    CHECK(delay_bounds_mpr(sp).low < capture);
}

TEST_CASE("delay is non-increasing in alpha*")
{
    SymmetricParams sp;
    sp.b = 0.2;
    sp.lambda = 0.12;
    double prev = INFINITY;
    for (int i = 0; i <= 20; ++i) {
        sp.alpha_star = 0.6 + 0.02 * i;
        double d = delay_capture(sp);
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
}

TEST_CASE("literal display differs from the exact delay unless p = 1")
{
    SymmetricParams sp;
    sp.b = 0.1;
    sp.lambda = 0.1;
    CHECK(std::abs(delay_capture_literal(sp) - delay_capture(sp)) > 1e-3);
    sp.p = 1.0;
    CHECK(delay_capture_literal(sp) == doctest::Approx(delay_capture(sp)));
}

TEST_CASE("optimal alpha maximizes the both-busy service rate on [0, alpha*]")
{
    auto grid_argmax = [](SymmetricParams sp) {
        double best = -1, arg = 0;
        for (int i = 0; i <= 100000; ++i) {
            sp.alpha = sp.alpha_star * i / 100000.0;
            if (sp.mu_both() > best) {
                best = sp.mu_both();
                arg = sp.alpha;
            }
        }
        return arg;
    };
    SymmetricParams sp;
    sp.b = 0.2;
    sp.lambda = 0.1;
    auto o = optimal_alpha(sp);
    CHECK(o.branch == "interior");
    CHECK(o.alpha == doctest::Approx(0.9 / 1.4));
    CHECK(o.alpha == doctest::Approx(grid_argmax(sp)).epsilon(1e-4));
    CHECK(o.feasible);
    // s1, s2 solve alpha (p + alpha (b - p)) = lambda
    for (double r : {o.s1, o.s2}) {
        sp.alpha = r;
        CHECK(sp.mu_both() == doctest::Approx(0.1));
    }

    SymmetricParams q;
    q.b = 0.2;
    q.alpha_star = 0.6;
    auto o2 = optimal_alpha(q);
    CHECK(o2.branch == "alpha_star");
    CHECK(o2.alpha == 0.6);
    CHECK(o2.alpha == doctest::Approx(grid_argmax(q)).epsilon(1e-4));

    SymmetricParams heavy;
    heavy.b = 0.2;
    heavy.lambda = 0.5;
    CHECK(!optimal_alpha(heavy).feasible);
}

TEST_CASE("optimal alpha preconditions")
{
    SymmetricParams sp;
    sp.b = 0.9;
    CHECK_THROWS_AS(optimal_alpha(sp), standing_assumption_error);
    sp.b = 0.2;
    sp.c = 0.1;
    CHECK_THROWS_AS(optimal_alpha(sp), invalid_parameter);
}

TEST_CASE("single queue delay against the chain")
{
    for (double l : {0.1, 0.3, 0.5}) {
        auto ch = oracle::chain_stationary(l, 0.0, 0.2, 0.2, 0.8, 0.8, 0.0, 200);
        CHECK(single_queue_delay(l, 0.8) == doctest::Approx(ch.M1 / l).epsilon(1e-7));
    }
    CHECK(single_queue_delay(0.3, 1.0) == doctest::Approx(1 / 0.7));
    CHECK_THROWS_AS(single_queue_delay(0.9, 0.8), instability_error);
    CHECK_THROWS_AS(single_queue_delay(0.1, 0.0), degenerate_error);
}

TEST_CASE("parameter validation and instability")
{
    SymmetricParams sp;
    sp.b = 0.5;
    sp.c = 0.2;
    CHECK_THROWS_AS(sp.validate(), invalid_parameter);
    SymmetricParams u;
    u.lambda = 0.5;
    CHECK_THROWS_AS(delay_capture(u), instability_error);
    u.lambda = 0;
    CHECK_THROWS_AS(delay_capture(u), invalid_parameter);
    SymmetricParams m;
    m.c = 0.2;
    CHECK_THROWS_AS(delay_capture(m), invalid_parameter);
}
