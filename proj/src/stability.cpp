#include "mpr/stability.hpp"
#include "mpr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mpr {

DerivedCoeffs derive(const ChannelParams& ch, const Policy& pol)
{
    ch.validate();
    pol.validate(2);
    const double a1 = pol.alpha[0], a2 = pol.alpha[1];
    DerivedCoeffs c;
    c.alpha_hat1 = alpha_hat1(ch, pol);
    c.alpha_hat2 = alpha_hat2(ch, pol);
    c.tau1 = pol.alpha_star[0] * ch.Pt1_1;
    c.tau2 = pol.alpha_star[1] * ch.Pt2_2;
    c.d1 = a1 * ((1 - a2) * ch.P1_1 + a2 * ch.P1_12) - c.tau1;
    c.d2 = a2 * ((1 - a1) * ch.P2_2 + a1 * ch.P2_12) - c.tau2;
    c.d_hat1 = c.d1 + a1 * a2 * ch.P12_12;
    c.d_hat2 = c.d2 + a1 * a2 * ch.P12_12;
    c.sigma1 = a1 * c.alpha_hat2;
    c.sigma2 = a2 * c.alpha_hat1;
    return c;
}

double LinearConstraint::slack(const std::vector<double>& lambda) const
{
    double bound = c0 + (rhs >= 0 ? c1 * lambda.at(rhs) : 0.0);
    return bound - lambda.at(lhs);
}

std::string to_string(Membership m)
{
    switch (m) {
    case Membership::stable: return "stable";
    case Membership::unstable: return "unstable";
    case Membership::marginal: return "marginal";
    }
    return "?";
}

Membership StabilityRegion::classify(const std::vector<double>& lambda, double tol) const
{
    bool marginal = false;
    for (const auto& part : parts) {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& c : part.constraints)
            worst = std::min(worst, c.slack(lambda));
        if (worst > tol)
            return Membership::stable;
        if (worst >= -tol)
            marginal = true;
    }
    return marginal ? Membership::marginal : Membership::unstable;
}

int StabilityRegion::which(const std::vector<double>& lambda) const
{
    for (std::size_t p = 0; p < parts.size(); ++p) {
        bool ok = true;
        for (const auto& c : parts[p].constraints)
            ok = ok && c.slack(lambda) > 0.0;
        if (ok)
            return int(p);
    }
    return -1;
}

double StabilityRegion::ray_extent(const std::vector<double>& dir) const
{
    double best = 0.0;
    for (const auto& part : parts) {
        double t = std::numeric_limits<double>::infinity();
        for (const auto& c : part.constraints) {
            double coef = dir.at(c.lhs) - (c.rhs >= 0 ? c.c1 * dir.at(c.rhs) : 0.0);
            if (coef > 0)
                t = std::min(t, c.c0 / coef);
            else if (c.c0 <= 0)
                t = 0.0;
        }
        best = std::max(best, std::max(t, 0.0));
    }
    return best;
}

namespace {

// R_a = { lambda_a < tau_a + dh_a lambda_b / sigma_b, lambda_b < sigma_b }
Subregion make_part(const std::string& label, int a, int b, double tau_a, double dh_a, double sigma_b)
{
    Subregion s;
    s.label = label;
    if (sigma_b <= 0.0) {
        // lambda_b < 0 is infeasible; keep an empty part so labels stay aligned
        s.constraints.push_back({b, -1, 0.0, 0.0});
        return s;
    }
    s.constraints.push_back({a, b, tau_a, dh_a / sigma_b});
    s.constraints.push_back({b, -1, sigma_b, 0.0});
    return s;
}

void check_d(double d1, double d2)
{
    if (d1 >= 0.0 || d2 >= 0.0) {
        std::ostringstream os;
        os << "standing assumption d_k < 0 violated for user " << (d1 >= 0.0 ? 1 : 2) << " (d1 = " << d1
           << ", d2 = " << d2 << ")";
        throw standing_assumption_error(os.str());
    }
}

} // namespace

StabilityRegion two_user_region(const ChannelParams& ch, const Policy& pol)
{
    DerivedCoeffs c = derive(ch, pol);
    check_d(c.d1, c.d2);
    StabilityRegion r;
    r.parts.push_back(make_part("R1", 0, 1, c.tau1, c.d_hat1, c.sigma2));
    r.parts.push_back(make_part("R2", 1, 0, c.tau2, c.d_hat2, c.sigma1));
    r.indicator = convexity_indicator(ch, pol);
    r.convex = r.indicator >= 1.0 - 1e-12;
    return r;
}

StabilityRegion pair_region(double sigma1, double sigma2, double tau1, double tau2)
{
    check_d(sigma1 - tau1, sigma2 - tau2);
    StabilityRegion r;
    r.parts.push_back(make_part("R1", 0, 1, tau1, sigma1 - tau1, sigma2));
    r.parts.push_back(make_part("R2", 1, 0, tau2, sigma2 - tau2, sigma1));
    r.indicator = sigma1 / tau1 + sigma2 / tau2;
    r.convex = r.indicator >= 1.0 - 1e-12;
    return r;
}

std::string to_string(Convexity c)
{
    switch (c) {
    case Convexity::convex: return "convex";
    case Convexity::non_convex: return "non-convex";
    case Convexity::triangle: return "time-sharing-triangle";
    }
    return "?";
}

double convexity_indicator(const ChannelParams& ch, const Policy& pol, bool literal_remark)
{
    DerivedCoeffs c = derive(ch, pol);
    double second = literal_remark ? pol.alpha[1] * c.alpha_hat2 : c.sigma2;
    return c.sigma1 / c.tau1 + second / c.tau2;
}

Convexity is_convex(const ChannelParams& ch, const Policy& pol, bool literal_remark)
{
    double ind = convexity_indicator(ch, pol, literal_remark);
    if (std::abs(ind - 1.0) <= 1e-12)
        return Convexity::triangle;
    return ind > 1.0 ? Convexity::convex : Convexity::non_convex;
}

std::vector<ClosurePoint> closure(const ChannelParams& ch, const ClosureSpec& spec)
{
    if (spec.grid < 2)
        throw invalid_parameter("closure: grid resolution must be >= 2");
    if (spec.rays < 2)
        throw invalid_parameter("closure: need at least 2 rays");
    ch.validate();

    const int g = spec.grid;
    const int gs = spec.star_grid > 0 ? spec.star_grid : g;
    std::vector<ClosurePoint> out(spec.rays);
    std::vector<std::vector<double>> dirs(spec.rays);
    for (int r = 0; r < spec.rays; ++r) {
        double th = 0.5 * std::numbers::pi * r / (spec.rays - 1);
        out[r].angle = th;
        dirs[r] = {std::cos(th), std::sin(th)};
    }
    std::vector<double> best(spec.rays, -1.0);

    auto level = [](int i, int n, double lo) { return lo + (1.0 - lo) * i / (n - 1); };
    for (int i1 = 0; i1 < g; ++i1)
        for (int i2 = 0; i2 < g; ++i2) {
            double a1 = level(i1, g, 0.0), a2 = level(i2, g, 0.0);
            int n1 = spec.tie_alpha_star ? 1 : gs, n2 = spec.tie_alpha_star ? 1 : gs;
            for (int j1 = 0; j1 < n1; ++j1)
                for (int j2 = 0; j2 < n2; ++j2) {
                    Policy pol;
                    pol.alpha = {a1, a2};
                    pol.alpha_star = spec.tie_alpha_star
                                         ? std::vector<double>{a1, a2}
                                         : std::vector<double>{level(j1, gs, a1), level(j2, gs, a2)};
                    StabilityRegion reg;
                    try {
                        reg = two_user_region(ch, pol);
                    } catch (const standing_assumption_error&) {
                        continue;
                    }
                    for (int r = 0; r < spec.rays; ++r) {
                        double t = reg.ray_extent(dirs[r]);
                        if (t > best[r]) {
                            best[r] = t;
                            out[r].best = pol;
                        }
                    }
                }
        }
    for (int r = 0; r < spec.rays; ++r) {
        double t = std::max(best[r], 0.0);
        out[r].lambda1 = t * dirs[r][0];
        out[r].lambda2 = t * dirs[r][1];
    }
    return out;
}

// ---- three users ----

double alpha_hat3(const Channel3& ch, const Policy& pol, int k, int i, int j)
{
    const double ai = pol.alpha[i], aj = pol.alpha[j];
    unsigned mk = 1u << k, mi = 1u << i, mj = 1u << j;
    return (1 - ai) * (1 - aj) * ch.succ(0, k, mk) + ai * (1 - aj) * ch.succ(0, k, mk | mi) +
           aj * (1 - ai) * ch.succ(0, k, mk | mj) + ai * aj * ch.succ(0, k, mk | mi | mj);
}

// user j's success when i transmits with alpha_i (or alpha_i*), one user empty
double alpha_bar3(const Channel3& ch, const Policy& pol, int i, int j, bool star)
{
    double a = star ? pol.alpha_star[i] : pol.alpha[i];
    unsigned mi = 1u << i, mj = 1u << j;
    return (1 - a) * ch.succ(1, j, mj) + a * ch.succ(1, j, mi | mj);
}

DominantPair dominant_pair(const Channel3& ch, const Policy& pol, int k)
{
    ch.validate();
    pol.validate(3);
    if (k < 0 || k > 2)
        throw invalid_parameter("dominant_pair: user index out of range");
    DominantPair dp;
    dp.k = k;
    dp.i = next_user(k);
    dp.j = next_user(dp.i);
    const int i = dp.i, j = dp.j;
    // i looks at j, j looks at k (never empty), k looks at i
    dp.sigma_i = pol.alpha[i] * alpha_hat3(ch, pol, i, k, j);
    dp.tau_i = pol.alpha_star[i] * alpha_bar3(ch, pol, k, i, false);
    dp.sigma_j = pol.alpha[j] * alpha_hat3(ch, pol, j, k, i);
    dp.tau_j = pol.alpha[j] * alpha_bar3(ch, pol, k, j, true);
    double di = dp.sigma_i - dp.tau_i, dj = dp.sigma_j - dp.tau_j;
    dp.delta = di * dj - dp.sigma_i * dp.sigma_j;

    dp.succ_k00 = pol.alpha_star[k] * ch.alone[k];
    dp.succ_k10 = pol.alpha[k] * alpha_bar3(ch, pol, i, k, true);
    dp.succ_k01 = pol.alpha_star[k] * alpha_bar3(ch, pol, j, k, false);
    dp.succ_k11 = pol.alpha[k] * alpha_hat3(ch, pol, k, i, j);
    return dp;
}

double dominant_success(const DominantPair& dp, const F1Values& f)
{
    double p00 = f.F00, p10 = f.F10 - f.F00, p01 = f.F01 - f.F00;
    double p11 = 1.0 - f.F10 - f.F01 + f.F00;
    return dp.succ_k00 * p00 + dp.succ_k10 * p10 + dp.succ_k01 * p01 + dp.succ_k11 * p11;
}

Region3Point three_user_region(const Channel3& ch, const Policy& pol, const std::vector<double>& lambda,
                               const F1Solver& solver, double tol)
{
    if (lambda.size() != 3)
        throw invalid_parameter("three_user_region: three rates expected");
    for (double l : lambda)
        if (!(l >= 0.0))
            throw invalid_parameter("arrival rates must be non-negative");
    Region3Point out;
    bool marginal = false;
    for (int k = 0; k < 3; ++k) {
        out.p_suc[k] = std::numeric_limits<double>::quiet_NaN();
        DominantPair dp = dominant_pair(ch, pol, k);
        const double li = lambda[dp.i], lj = lambda[dp.j];
        const bool silent_i = li == 0 && dp.sigma_i == 0 && dp.tau_i == 0;
        const bool silent_j = lj == 0 && dp.sigma_j == 0 && dp.tau_j == 0;
        if (silent_i || silent_j) {
            // a member that never transmits leaves a single queue
            double l = silent_i ? lj : li, t = silent_i ? dp.tau_j : dp.tau_i;
            if (!(silent_i && silent_j)) {
                if (std::abs(l - t) <= tol)
                    marginal = true;
                if (!(l < t - tol))
                    continue;
            }
            double h = (silent_i && silent_j) ? 1.0 : 1.0 - l / t;
            out.F[k] = silent_i ? F1Values{h, h, 1.0} : F1Values{h, 1.0, h};
            out.p_suc[k] = dominant_success(dp, out.F[k]);
            double slack = out.p_suc[k] - lambda[k];
            out.in_R[k] = slack > tol;
            if (std::abs(slack) <= tol)
                marginal = true;
            continue;
        }
        if (std::abs(dp.delta) < 1e-14)
            throw degenerate_error("dominant system " + std::to_string(k + 1) +
                                   ": d_i* d_j* - sigma_i sigma_j vanishes");
        StabilityRegion pr = pair_region(dp.sigma_i, dp.sigma_j, dp.tau_i, dp.tau_j);
        Membership pm = pr.classify({lambda[dp.i], lambda[dp.j]}, tol);
        if (pm == Membership::marginal)
            marginal = true;
        if (pm != Membership::stable)
            continue;
        out.F[k] = solver(dp, lambda[dp.i], lambda[dp.j]);
        out.p_suc[k] = dominant_success(dp, out.F[k]);
        double slack = out.p_suc[k] - lambda[k];
        out.in_R[k] = slack > tol;
        if (std::abs(slack) <= tol)
            marginal = true;
    }
    if (out.in_R[0] || out.in_R[1] || out.in_R[2])
        out.verdict = Membership::stable;
    else
        out.verdict = marginal ? Membership::marginal : Membership::unstable;
    return out;
}

} // namespace mpr
