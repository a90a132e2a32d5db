#pragma once

#include "mpr/conformal.hpp"
#include "mpr/kernel.hpp"
#include "mpr/stability.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mpr {

enum class Regime { balanced, unbalanced };
std::string to_string(Regime r);

struct BvpOptions {
    TheodorsenOptions map;   // n_grid, tol, ...
    double balanced_tol = 1e-9; // |indicator - 1| below this -> Dirichlet problem
    double consistency_tol = 1e-9;
};

struct FlowConstants {
    double rho = 0;
    double indicator = 0;
    Regime regime = Regime::unbalanced;
    // H(1,0) = h10_const + h10_slope H(0,0), likewise H(0,1); unbalanced regime only
    double h10_const = 0, h10_slope = 0, h01_const = 0, h01_slope = 0;
    // known in the balanced regime (and once resolved)
    std::optional<double> H00;

    double H10(double h00) const { return h10_const + h10_slope * h00; }
    double H01(double h00) const { return h01_const + h01_slope * h00; }
};

// throws instability_error outside the region, standing_assumption_error for d_k >= 0
FlowConstants flow_constants(const KernelCoeffs& k, double balanced_tol = 1e-9);

// (lambda1, lambda2) implied by the occupancy constants through conservation of flow
std::array<double, 2> flow_rates(const KernelCoeffs& k, double H00, double H10, double H01);

struct PoleAnalysis {
    std::array<double, 3> Q{}, Z{}, S{}; // coefficients, lowest degree first
    double Q0 = 0, Q1 = 0, Z0 = 0, Z1 = 0, S0 = 0, S1 = 0;
    bool star_branch = false;   // tau_1 <= (sigma_2 + (1+l2) sigma_1)/(1+l2): xbar = positive root of Z
    double xbar = 0;            // NaN when Z has no root beyond 1
    int r = 0;
    bool xbar_inside_M = false;
    double Y0_xbar_mod = 0;     // |Y0(xbar)|
    double A_at_xbar = 0;       // |A(xbar, Y0(xbar))|, relative
    bool W_positive = true;     // S(y) > 0 on (0,1)
    // the "1" values agree with the subregion line conditions
    bool line_R1 = false, line_R2 = false;
};

PoleAnalysis pole_analysis(const KernelCoeffs& k, const Contour& M);
PoleAnalysis pole_analysis(const KernelCoeffs& k);

enum class SideKind { riemann_hilbert, dirichlet };

// H(x,0) of a pair on the interior of its contour M. For the swapped pair this gives H(0,y).
struct SideSolution {
    KernelCoeffs pair;
    ConformalMap map;
    SideKind kind = SideKind::riemann_hilbert;
    Series T;              // Schwarz series of theta (RH) or w (Dirichlet)
    cplx D = 0;            // RH constant
    double shift = 0;      // RH: K1 H(0,0)
    cplx c = 0;            // Dirichlet additive constant
    int r = 0;
    double xbar = 0;
    double H00 = 0;
    double H10 = 0;        // H(1,0) when 1 is inside the contour, else NaN
    int winding = 0;       // raw winding of U along the contour
    int chi = 0;           // -(1/pi) [arg U]
    double bc_residual = 0;
    double J_residual = 0;
    double odd_residual = 0; // Dirichlet only
    std::vector<cplx> boundary;        // x_j on the contour
    std::vector<cplx> boundary_values; // H(x_j, 0)

    cplx value(cplx x) const;
    Jet jet(cplx x0, std::size_t order) const;
};

SideSolution solve_riemann_hilbert(const KernelCoeffs& k, const ConformalMap& map, const PoleAnalysis& poles);
SideSolution solve_dirichlet(const KernelCoeffs& k, const ConformalMap& map);

// winding of U = A/B along M; no stability check (for diagnostics on unstable rates)
struct IndexReport {
    int winding = 0;
    int chi = 0;
};
IndexReport compute_index(const KernelCoeffs& k, const BvpOptions& opt = {});

struct BvpSolution {
    KernelCoeffs pair;
    Regime regime = Regime::unbalanced;
    double rho = 0, indicator = 0;
    double H00 = 1, H10 = 1, H01 = 1;
    double H1_10 = 0, H2_01 = 0;
    double M1 = 0, M2 = 0;
    std::string m1_method, m2_method; // "direct", "cross", "single-queue", "empty"
    std::optional<SideSolution> side_M, side_L;
    std::optional<PoleAnalysis> poles_M, poles_L;
    double H00_mismatch = 0; // when both sides were solved
    int chi = 0, r = 0;
    int theodorsen_iterations = 0;
    int n_grid = 0;

    // H(x,0), H(0,y) inside the respective contours
    cplx H_x0(cplx x) const;
    cplx H_0y(cplx y) const;
    // full generating function from the functional equation
    cplx H(cplx x, cplx y) const;
};

BvpSolution solve_pair(const KernelCoeffs& k, const BvpOptions& opt = {});
BvpSolution solve_pair(const ChannelParams& ch, const Policy& pol, double lambda1, double lambda2,
                       const BvpOptions& opt = {});

struct DelayReport {
    double lambda1 = 0, lambda2 = 0;
    double M1 = 0, M2 = 0;
    double D1 = 0, D2 = 0; // NaN when the rate is 0
    double D1_low = 0, D1_up = 0;
    std::string provenance; // "closed-form" | "bvp" | "simulation"
    double ci1 = 0, ci2 = 0;
};

DelayReport mean_delay(const BvpSolution& sol);

// dominant-system occupancy for three users
F1Values dominant_F(const DominantPair& dp, double lambda_i, double lambda_j, const BvpOptions& opt = {});
F1Values solve_modified_F1(const Channel3& ch, const Policy& pol, double lambda2, double lambda3,
                           const BvpOptions& opt = {});
F1Solver bvp_f1_solver(const BvpOptions& opt = {});

} // namespace mpr
