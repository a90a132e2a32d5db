#pragma once

#include "mpr/channel.hpp"

#include <string>
#include <utility>

namespace mpr {

struct SymmetricParams {
    double alpha = 0.6, alpha_star = 1.0;
    double p = 0.9, p_tilde = 1.0, b = 0.0, c = 0.0;
    double lambda = 0.1;

    double mu_both() const { return alpha * (p + alpha * (b + c - p)); }
    double d() const { return alpha * ((1 - alpha) * p + alpha * b) - alpha_star * p_tilde; }
    double e() const { return d() + alpha * alpha * c; } // d + alpha^2 c
    double tau() const { return alpha_star * p_tilde; }

    void validate() const;
    ChannelParams channel() const;
    Policy policy() const;
};

// exact mean delay of the capture model (c = 0)
double delay_capture(const SymmetricParams& sp);
// the display as printed, numerator 2(alpha + alpha^2(b-p)); comparison only
double delay_capture_literal(const SymmetricParams& sp);
// M = lambda D for a given P(N1>0, N2>0)
double mean_queue(const SymmetricParams& sp, double p_both_busy = 0.0);
double delay_with_phi(const SymmetricParams& sp, double p_both_busy);

struct DelayBounds {
    double low = 0, up = 0;
    double base = 0;  // phi = 0 term
    double width = 0; // |alpha^2 c e| / (2 lambda alpha* p~ (mu - lambda))
};
DelayBounds delay_bounds_mpr(const SymmetricParams& sp);

struct OptimalAlpha {
    double alpha = 0;
    std::string branch; // "alpha_star" | "interior"
    bool feasible = false;
    double s1 = 0, s2 = 0; // roots of alpha (p + alpha (b - p)) = lambda
};
OptimalAlpha optimal_alpha(const SymmetricParams& sp);

// single queue with geometric arrivals and Bernoulli(tau) service
double single_queue_delay(double lambda, double tau);

} // namespace mpr
