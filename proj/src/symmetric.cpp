#include "mpr/symmetric.hpp"
#include "mpr/errors.hpp"

#include <cmath>
#include <sstream>

namespace mpr {

namespace {

void check_stable(const SymmetricParams& sp)
{
    if (!(sp.tau() > 0))
        throw degenerate_error("alpha* p~ = 0: a lone node is never served");
    if (!(sp.lambda < sp.mu_both())) {
        std::ostringstream os;
        os << "lambda = " << sp.lambda << " >= alpha(p + alpha(b+c-p)) = " << sp.mu_both();
        throw instability_error(os.str());
    }
}

} // namespace

void SymmetricParams::validate() const
{
    for (double v : {alpha, alpha_star, p, p_tilde, b, c})
        if (!(v >= 0 && v <= 1))
            throw invalid_parameter("symmetric parameters must be probabilities");
    if (2 * b + c > 1 + 1e-12)
        throw invalid_parameter("2b + c exceeds 1");
    if (!(lambda >= 0))
        throw invalid_parameter("lambda must be non-negative");
}

ChannelParams SymmetricParams::channel() const
{
    return preset(PresetKind::mpr, p, p_tilde, b, c);
}

Policy SymmetricParams::policy() const
{
    Policy pol;
    pol.alpha = {alpha, alpha};
    pol.alpha_star = {alpha_star, alpha_star};
    return pol;
}

double delay_with_phi(const SymmetricParams& sp, double p_both_busy)
{
    sp.validate();
    check_stable(sp);
    if (!(sp.lambda > 0))
        throw invalid_parameter("delay needs lambda > 0");
    const double mu = sp.mu_both(), e = sp.e(), den = 2 * sp.tau() * (mu - sp.lambda);
    double base = (2 * mu + sp.lambda * e) / den;
    double phi = -sp.alpha * sp.alpha * sp.c * e * p_both_busy / (sp.lambda * den);
    return base + phi;
}

double delay_capture(const SymmetricParams& sp)
{
    if (sp.c != 0.0)
        throw invalid_parameter("delay_capture needs c = 0; use delay_bounds_mpr");
    return delay_with_phi(sp, 0.0);
}

double delay_capture_literal(const SymmetricParams& sp)
{
    sp.validate();
    check_stable(sp);
    const double a = sp.alpha, mu = sp.mu_both();
    return (2 * (a + a * a * (sp.b + sp.c - sp.p)) + sp.lambda * sp.e()) / (2 * sp.tau() * (mu - sp.lambda));
}

double mean_queue(const SymmetricParams& sp, double p_both_busy)
{
    sp.validate();
    check_stable(sp);
    const double mu = sp.mu_both(), e = sp.e(), den = 2 * sp.tau() * (mu - sp.lambda);
    return (sp.lambda * (2 * mu + sp.lambda * e) - sp.alpha * sp.alpha * sp.c * e * p_both_busy) / den;
}

DelayBounds delay_bounds_mpr(const SymmetricParams& sp)
{
    DelayBounds out;
    out.base = delay_with_phi(sp, 0.0);
    const double e = sp.e(), den = 2 * sp.lambda * sp.tau() * (sp.mu_both() - sp.lambda);
    out.width = std::abs(sp.alpha * sp.alpha * sp.c * e) / den;
    if (e < 0) {
        out.low = out.base;
        out.up = out.base + out.width;
    } else {
        out.low = out.base - out.width;
        out.up = out.base;
    }
    return out;
}

OptimalAlpha optimal_alpha(const SymmetricParams& sp)
{
    if (!(sp.p > 0 && sp.p <= 1) || !(sp.b >= 0))
        throw invalid_parameter("optimal_alpha: need 0 < p <= 1 and b >= 0");
    if (sp.b >= sp.p)
        throw standing_assumption_error("optimal_alpha assumes b < p");
    if (!(sp.alpha_star > 0 && sp.alpha_star <= 1))
        throw invalid_parameter("optimal_alpha: alpha* must lie in (0,1]");
    if (sp.c != 0.0)
        throw invalid_parameter("optimal_alpha covers the capture model only (c = 0)");
    OptimalAlpha out;
    const double thr = sp.p * (2 * sp.alpha_star - 1) / (2 * sp.alpha_star);
    if (sp.b >= thr) {
        out.alpha = sp.alpha_star;
        out.branch = "alpha_star";
    } else {
        out.alpha = sp.p / (2 * (sp.p - sp.b));
        out.branch = "interior";
    }
    // (b-p) a^2 + p a - lambda = 0
    const double qa = sp.b - sp.p, qb = sp.p, qc = -sp.lambda;
    double disc = qb * qb - 4 * qa * qc;
    if (disc >= 0) {
        double sq = std::sqrt(disc);
        double r1 = (-qb + sq) / (2 * qa), r2 = (-qb - sq) / (2 * qa);
        out.s1 = std::min(r1, r2);
        out.s2 = std::max(r1, r2);
        out.feasible = out.s1 < out.alpha && out.alpha < out.s2;
    }
    return out;
}

double single_queue_delay(double lambda, double tau)
{
    if (!(tau > 0))
        throw degenerate_error("service probability must be positive");
    if (!(lambda >= 0) || !(lambda < tau))
        throw instability_error("single queue: lambda >= service rate");
    return 1.0 / (tau - lambda);
}

} // namespace mpr
