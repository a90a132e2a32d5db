#pragma once

#include "mpr/channel.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mpr {

struct DerivedCoeffs {
    double alpha_hat1 = 0, alpha_hat2 = 0;
    double d1 = 0, d2 = 0;
    double d_hat1 = 0, d_hat2 = 0;
    double sigma1 = 0, sigma2 = 0; // alpha_1 alpha_hat_2, alpha_2 alpha_hat_1
    double tau1 = 0, tau2 = 0;     // alpha_k* Pt_k
};

DerivedCoeffs derive(const ChannelParams& ch, const Policy& pol);

// lambda[lhs] < c0 + c1 * lambda[rhs]   (rhs < 0 means a constant bound)
struct LinearConstraint {
    int lhs = 0;
    int rhs = -1;
    double c0 = 0;
    double c1 = 0;

    double slack(const std::vector<double>& lambda) const;
};

struct Subregion {
    std::string label; // "R1", "R2", ...
    std::vector<LinearConstraint> constraints;
};

enum class Membership { stable, unstable, marginal };
std::string to_string(Membership m);

struct StabilityRegion {
    std::vector<Subregion> parts;
    bool convex = false;
    double indicator = 0;

    // strict inequalities; |slack| <= tol on the deciding constraint -> marginal
    Membership classify(const std::vector<double>& lambda, double tol = 1e-12) const;
    // index of the first subregion containing lambda strictly, -1 if none
    int which(const std::vector<double>& lambda) const;
    // largest t with t*dir inside the region (dir non-negative)
    double ray_extent(const std::vector<double>& dir) const;
};

// throws standing_assumption_error if some d_k >= 0
StabilityRegion two_user_region(const ChannelParams& ch, const Policy& pol);

// region for a capture-class pair given by its service rates
// (sigma: both busy, tau: other queue empty)
StabilityRegion pair_region(double sigma1, double sigma2, double tau1, double tau2);

enum class Convexity { convex, non_convex, triangle };
std::string to_string(Convexity c);

double convexity_indicator(const ChannelParams& ch, const Policy& pol, bool literal_remark = false);
Convexity is_convex(const ChannelParams& ch, const Policy& pol, bool literal_remark = false);

struct ClosureSpec {
    int grid = 21;
    int rays = 90;
    bool tie_alpha_star = false; // alpha* = alpha
    int star_grid = 0;           // alpha* points in [alpha,1]; 0 -> same as grid
};

struct ClosurePoint {
    double angle = 0;
    double lambda1 = 0, lambda2 = 0;
    Policy best;
};

std::vector<ClosurePoint> closure(const ChannelParams& ch, const ClosureSpec& spec);

// ---- three users ----

inline int next_user(int k) { return (k + 1) % 3; }

// effective pair seen in dominant system M_k: users i = next(k), j = next(i) with k
// always transmitting (dummies when empty)
struct DominantPair {
    int k = 0, i = 1, j = 2;
    double sigma_i = 0, sigma_j = 0, tau_i = 0, tau_j = 0;
    double delta = 0; // d_i d_j - sigma_i sigma_j
    // success rates of k for the four occupancy states of (i, j)
    double succ_k00 = 0, succ_k10 = 0, succ_k01 = 0, succ_k11 = 0;
};

DominantPair dominant_pair(const Channel3& ch, const Policy& pol, int k);

double alpha_hat3(const Channel3& ch, const Policy& pol, int k, int i, int j);
double alpha_bar3(const Channel3& ch, const Policy& pol, int i, int j, bool star);

// F(0,0), F(1,0) = P(N_j = 0), F(0,1) = P(N_i = 0) for the dominant pair
struct F1Values {
    double F00 = 1, F10 = 1, F01 = 1;
};
using F1Solver = std::function<F1Values(const DominantPair&, double lambda_i, double lambda_j)>;

struct Region3Point {
    std::array<bool, 3> in_R{};
    std::array<double, 3> p_suc{}; // P_suc^(k)(M_k), NaN when the pair is unstable
    std::array<F1Values, 3> F{};
    Membership verdict = Membership::unstable;
};

Region3Point three_user_region(const Channel3& ch, const Policy& pol, const std::vector<double>& lambda,
                               const F1Solver& solver, double tol = 1e-9);

double dominant_success(const DominantPair& dp, const F1Values& f);

} // namespace mpr
