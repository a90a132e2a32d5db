#include "mpr/bvp.hpp"
#include "mpr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mpr {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();
const cplx I(0.0, 1.0);

double quad_eval(const std::array<double, 3>& p, double x) { return (p[2] * x + p[1]) * x + p[0]; }

void check_rates(const KernelCoeffs& k)
{
    if (!(k.l1 >= 0) || !(k.l2 >= 0))
        throw invalid_parameter("arrival rates must be non-negative");
    if (!(k.t1 > 0) || !(k.t2 > 0))
        throw degenerate_error("alone service rates must be positive");
}

// U = A/B at the kernel branch Y0 for boundary points xs
std::vector<cplx> boundary_U(const KernelCoeffs& k, const std::vector<cplx>& xs, int r, double xbar)
{
    std::vector<cplx> U(xs.size());
    double scale = std::abs(k.s1) + std::abs(k.d2());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        cplx y = kernel_roots_in_y(k, xs[j]).r0;
        cplx b = k.B(xs[j], y);
        if (std::abs(b) < 1e-13 * scale)
            throw numerical_failure("B(x, Y0(x)) vanishes on the contour");
        U[j] = k.A(xs[j], y) / b;
        if (r == 1)
            U[j] /= (xs[j] - xbar);
    }
    return U;
}

// continuous argument along the closed sample loop; returns the winding number
int unwrap_arg(const std::vector<cplx>& U, std::vector<double>& theta)
{
    const std::size_t n = U.size();
    theta.resize(n);
    theta[0] = std::arg(U[0]);
    for (std::size_t j = 1; j < n; ++j)
        theta[j] = theta[j - 1] + std::arg(U[j] / U[j - 1]);
    double total = theta[n - 1] - theta[0] + std::arg(U[0] / U[n - 1]);
    return int(std::lround(total / (2 * std::numbers::pi)));
}

// H_1(1,0) of pair k when 1 lies outside its contour M: differentiate
// A H(x,0) + B H(0,y) + C H(0,0) = 0 along the kernel branch through (1,1)
double cross_derivative(const KernelCoeffs& k, const SideSolution& other, double H00)
{
    if (std::abs(k.l1 - k.s1) < 1e-9 * std::max(1.0, k.s1))
        throw degenerate_error("lambda_1 equals alpha_1 alpha_hat_2: kernel branch through (1,1) is singular");
    const std::size_t O = 5;
    const Jet one(O, 1.0);
    Jet y(O, 1.0, 1.0);
    Jet ah = k.l1 * y * (k.l2 * (y - 1.0) - 1.0);
    Jet bh = k.k0() * y - k.s2 - (k.l2 * (1 + k.l1)) * (y * y);
    Jet ch = -k.s1 * y;
    Jet x(O, 1.0);
    for (int it = 0; it < 8; ++it) {
        Jet K = ah * x * x + bh * x + ch;
        Jet Kx = 2.0 * ah * x + bh;
        x -= K / Kx;
    }
    Jet ix = one / x, iy = one / y;
    Jet A = k.d1() * (one - ix) + k.s2 * (one - iy);
    Jet B = k.s1 * (one - ix) + k.d2() * (one - iy);
    Jet C = k.d1() * (ix - one) + k.d2() * (iy - one);
    Jet Hy = other.jet(1.0, O);
    Jet num = (B * Hy + C * H00) * cplx(-1.0);
    if (std::abs(A[0]) > 1e-10 || std::abs(num[0]) > 1e-7)
        throw numerical_failure("cross-side expansion: kernel relation not satisfied at (1,1)");
    Jet Q = num.shift_down() / A.shift_down();
    return (Q[1] / x[1]).real();
}

} // namespace

std::string to_string(Regime r) { return r == Regime::balanced ? "balanced" : "unbalanced"; }

FlowConstants flow_constants(const KernelCoeffs& k, double balanced_tol)
{
    check_rates(k);
    StabilityRegion reg = pair_region(k.s1, k.s2, k.t1, k.t2);
    if (reg.classify({k.l1, k.l2}) != Membership::stable) {
        std::ostringstream os;
        os << "rates (" << k.l1 << ", " << k.l2 << ") are not strictly inside the stability region";
        throw instability_error(os.str());
    }
    FlowConstants fc;
    fc.rho = k.rho();
    fc.indicator = k.indicator();
    if (std::abs(fc.indicator - 1.0) < balanced_tol) {
        fc.regime = Regime::balanced;
        fc.H00 = 1.0 - fc.rho;
        return fc;
    }
    const double D = k.delta(), d1 = k.d1(), d2 = k.d2();
    fc.h10_const = (k.s1 * (k.l2 - k.t2) - k.l1 * d2) / D;
    fc.h10_slope = -k.t1 * d2 / D;
    fc.h01_const = (k.s2 * (k.l1 - k.t1) - k.l2 * d1) / D;
    fc.h01_slope = -k.t2 * d1 / D;
    return fc;
}

std::array<double, 2> flow_rates(const KernelCoeffs& k, double H00, double H10, double H01)
{
    double both = 1 - H01 - H10 + H00;
    return {k.s1 * both + k.t1 * (H10 - H00), k.s2 * both + k.t2 * (H01 - H00)};
}

PoleAnalysis pole_analysis(const KernelCoeffs& k) { return pole_analysis(k, contour_M(k, 256)); }

PoleAnalysis pole_analysis(const KernelCoeffs& k, const Contour& M)
{
    const double l1 = k.l1, l2 = k.l2, s1 = k.s1, s2 = k.s2, t1 = k.t1, t2 = k.t2;
    const double d1 = k.d1(), d2 = k.d2(), L = l1 + l2 + l1 * l2;
    PoleAnalysis p;
    p.Z = {-t1 * d1, L * d1 + (s2 + d1) * t1, -l1 * (s2 + (1 + l2) * d1)};
    p.Q = {s2 * s2 * t1, s2 * (d1 * L - t1 * (d1 + s2)), -l2 * d1 * (d1 + (1 + l1) * s2)};
    p.S = {-t2 * d2, d2 * L + t2 * (d2 + s1), -l2 * (s1 + d2 * (1 + l1))};
    p.Q0 = p.Q[0];
    p.Z0 = p.Z[0];
    p.S0 = p.S[0];
    p.Q1 = quad_eval(p.Q, 1.0);
    p.Z1 = quad_eval(p.Z, 1.0);
    p.S1 = quad_eval(p.S, 1.0);
    if (!(p.Q0 > 0 && p.Z0 > 0 && p.S0 > 0)) {
        std::ostringstream os;
        os << "resultant signs at 0 violated (Q(0) = " << p.Q0 << ", Z(0) = " << p.Z0 << ", S(0) = " << p.S0
           << "); d_k < 0 must hold";
        throw inconsistent_parameters(os.str());
    }
    p.line_R1 = l1 < t1 + d1 * l2 / s2;
    p.line_R2 = l2 < t2 + d2 * l1 / s1;
    p.star_branch = p.Z[2] < 0;

    // candidate xbar: a root of Z beyond 1
    p.xbar = nan_v;
    std::vector<double> roots;
    if (std::abs(p.Z[2]) < 1e-300) {
        if (p.Z[1] != 0)
            roots.push_back(-p.Z[0] / p.Z[1]);
    } else {
        double disc = p.Z[1] * p.Z[1] - 4 * p.Z[2] * p.Z[0];
        if (disc >= 0) {
            double sq = std::sqrt(disc);
            double q = -0.5 * (p.Z[1] + std::copysign(sq, p.Z[1]));
            roots.push_back(q / p.Z[2]);
            if (q != 0)
                roots.push_back(p.Z[0] / q);
        }
    }
    std::sort(roots.begin(), roots.end());
    if (p.star_branch) {
        for (double r : roots)
            if (r > 0)
                p.xbar = r;
        if (!(p.xbar > 1))
            p.xbar = nan_v;
    } else {
        for (double r : roots)
            if (r > 1) {
                p.xbar = r;
                break;
            }
    }
    if (std::isfinite(p.xbar)) {
        p.xbar_inside_M = M.inside(cplx(p.xbar, 0));
        cplx y0 = kernel_roots_in_y(k, p.xbar).r0;
        p.Y0_xbar_mod = std::abs(y0);
        p.A_at_xbar = std::abs(k.A(p.xbar, y0)) / (std::abs(d1) + std::abs(s2));
        if (p.xbar_inside_M && p.Y0_xbar_mod <= 1 && p.A_at_xbar < 1e-8)
            p.r = 1;
    }
    for (int j = 1; j < 200; ++j)
        if (!(quad_eval(p.S, j / 200.0) > 0))
            p.W_positive = false;
    return p;
}

cplx SideSolution::value(cplx x) const
{
    cplx z = map.gamma(x);
    if (kind == SideKind::dirichlet)
        return -I * T.eval(z) + c;
    cplx E = std::exp(-I * T.eval(z));
    if (r == 1)
        E /= (x - xbar);
    return D * E - shift;
}

Jet SideSolution::jet(cplx x0, std::size_t order) const
{
    Jet g = map.gamma_jet(x0, order);
    Jet Tz = compose(T.taylor(g[0], order), g);
    if (kind == SideKind::dirichlet)
        return Tz * (-I) + c;
    Jet E = exp(Tz * (-I));
    if (r == 1)
        E = E / Jet(order, x0 - xbar, 1.0);
    return E * D - shift;
}

SideSolution solve_riemann_hilbert(const KernelCoeffs& k, const ConformalMap& map, const PoleAnalysis& poles)
{
    const double Dlt = k.delta();
    if (std::abs(Dlt) < 1e-14)
        throw degenerate_error("Riemann-Hilbert formulation needs d1 d2 != sigma1 sigma2 (unbalanced regime)");
    if (!map.contour().inside(1.0))
        throw domain_error("Riemann-Hilbert normalization needs x = 1 inside the contour");
    SideSolution s;
    s.pair = k;
    s.map = map;
    s.kind = SideKind::riemann_hilbert;
    s.r = poles.r;
    s.xbar = poles.r ? poles.xbar : 0.0;

    const int n = map.n_grid();
    s.boundary.resize(n);
    for (int j = 0; j < n; ++j)
        s.boundary[j] = map.boundary_point(j);
    std::vector<cplx> U = boundary_U(k, s.boundary, s.r, s.xbar);
    std::vector<double> theta;
    s.winding = unwrap_arg(U, theta);
    s.chi = -2 * s.winding;
    if (s.winding != 0) {
        std::ostringstream os;
        os << "index chi = " << s.chi << " != 0 (rates outside the region or inconsistent parameters)";
        throw index_error(os.str());
    }
    for (int j = 0; j < n; ++j)
        s.J_residual = std::max(s.J_residual, std::abs(std::abs(std::conj(U[j]) / U[j]) - 1.0));
    if (s.J_residual > 1e-10)
        throw numerical_failure("|J(t)| deviates from 1");
    s.T = schwarz_series(theta);

    const double a = (k.s1 * (k.l2 - k.t2) - k.l1 * k.d2()) / Dlt;
    const double K1 = k.t1 * k.d2() / Dlt;
    cplx E1 = std::exp(-I * s.T.eval(map.gamma(1.0)));
    cplx E0 = std::exp(-I * s.T.eval(0.0));
    if (s.r == 1) {
        E1 /= (1.0 - s.xbar);
        E0 /= (-s.xbar);
    }
    s.D = a / E1;
    s.H00 = (s.D * E0 / (1 + K1)).real();
    s.shift = K1 * s.H00;
    s.H10 = a - K1 * s.H00;

    s.boundary_values.resize(n);
    for (int j = 0; j < n; ++j) {
        cplx G = s.D * std::exp(-I * s.T.eval(std::polar(1.0, map.phi()[j])));
        cplx UG = U[j] * G;
        s.bc_residual = std::max(s.bc_residual, std::abs(UG.imag()) / std::abs(UG));
        s.boundary_values[j] = (s.r ? G / (s.boundary[j] - s.xbar) : G) - s.shift;
    }
    return s;
}

SideSolution solve_dirichlet(const KernelCoeffs& k, const ConformalMap& map)
{
    SideSolution s;
    s.pair = k;
    s.map = map;
    s.kind = SideKind::dirichlet;
    const int n = map.n_grid();
    const double rho = k.rho();
    s.boundary.resize(n);
    std::vector<double> w(n);
    std::vector<cplx> U(n);
    for (int j = 0; j < n; ++j) {
        cplx x = map.boundary_point(j);
        s.boundary[j] = x;
        cplx y = kernel_roots_in_y(k, x).r0;
        cplx A = k.A(x, y);
        if (std::abs(A) < 1e-13)
            throw numerical_failure("A(x, Y0(x)) vanishes on the contour (pole on M)");
        w[j] = (1 - rho) * (k.C(x, y) / A).imag();
        U[j] = A / k.B(x, y);
    }
    std::vector<double> theta;
    s.winding = unwrap_arg(U, theta);
    s.chi = -2 * s.winding;
    for (int j = 0; j < n; ++j)
        s.odd_residual = std::max(s.odd_residual, std::abs(w[j] + w[(n - j) % n]));
    s.T = schwarz_series(w);
    s.c = cplx(1 - rho, s.T.coef[0].real());
    s.H00 = 1 - rho;
    s.H10 = map.contour().inside(1.0) ? s.value(1.0).real() : nan_v;
    s.boundary_values.resize(n);
    for (int j = 0; j < n; ++j) {
        cplx h = -I * s.T.eval(std::polar(1.0, map.phi()[j])) + s.c;
        s.boundary_values[j] = h;
        s.bc_residual = std::max(s.bc_residual, std::abs((I * h).real() - w[j]));
    }
    return s;
}

IndexReport compute_index(const KernelCoeffs& k, const BvpOptions& opt)
{
    Contour M = contour_M(k, opt.map.n_grid);
    std::vector<cplx> xs(M.phi.size());
    for (std::size_t j = 0; j < xs.size(); ++j)
        xs[j] = std::polar(M.rho[j], M.phi[j]);
    std::vector<double> theta;
    IndexReport r;
    r.winding = unwrap_arg(boundary_U(k, xs, 0, 0.0), theta);
    r.chi = -2 * r.winding;
    return r;
}

namespace {

SideSolution solve_side(const KernelCoeffs& k, Regime regime, const BvpOptions& opt, PoleAnalysis& poles)
{
    Contour M = contour_M(k, opt.map.n_grid);
    ConformalMap map = ConformalMap::solve_theodorsen(M, opt.map);
    poles = pole_analysis(k, M);
    if (regime == Regime::balanced) {
        if (poles.r == 1)
            throw numerical_failure("balanced regime with a pole of H(x,0) inside the contour is not supported");
        return solve_dirichlet(k, map);
    }
    return solve_riemann_hilbert(k, map, poles);
}

} // namespace

BvpSolution solve_pair(const KernelCoeffs& k, const BvpOptions& opt)
{
    check_rates(k);
    BvpSolution sol;
    sol.pair = k;
    sol.rho = k.rho();
    sol.indicator = k.indicator();
    sol.n_grid = opt.map.n_grid;
    FlowConstants fc = flow_constants(k, opt.balanced_tol);
    sol.regime = fc.regime;

    if (k.l1 == 0 && k.l2 == 0) {
        sol.m1_method = sol.m2_method = "empty";
        return sol;
    }
    if (k.l2 == 0 || k.l1 == 0) {
        // the other queue never fills: single-queue geometric law
        bool first = k.l2 == 0;
        double l = first ? k.l1 : k.l2, t = first ? k.t1 : k.t2;
        double M = l / (t - l);
        sol.H00 = 1 - l / t;
        (first ? sol.H10 : sol.H01) = 1.0;
        (first ? sol.H01 : sol.H10) = sol.H00;
        (first ? sol.M1 : sol.M2) = M;
        (first ? sol.H1_10 : sol.H2_01) = M;
        sol.m1_method = first ? "single-queue" : "empty";
        sol.m2_method = first ? "empty" : "single-queue";
        return sol;
    }
    if (!(k.s1 > 0) || !(k.s2 > 0))
        throw degenerate_error("boundary value formulation needs alpha_k alpha_hat_k > 0 for both users");

    const bool inM = k.l1 < k.s1, inL = k.l2 < k.s2;
    if (inM) {
        PoleAnalysis p;
        sol.side_M = solve_side(k, sol.regime, opt, p);
        sol.poles_M = p;
        sol.theodorsen_iterations = sol.side_M->map.diagnostics().iterations;
    }
    if (inL) {
        PoleAnalysis p;
        sol.side_L = solve_side(k.swapped(), sol.regime, opt, p);
        sol.poles_L = p;
        sol.theodorsen_iterations = std::max(sol.theodorsen_iterations, sol.side_L->map.diagnostics().iterations);
    }
    const SideSolution& main = sol.side_M ? *sol.side_M : *sol.side_L;
    sol.chi = main.chi;
    sol.r = main.r;

    if (sol.regime == Regime::balanced) {
        sol.H00 = *fc.H00;
        if (sol.side_M) {
            sol.H10 = sol.side_M->H10;
            sol.H01 = 1 - (k.l1 + k.d1() * (sol.H10 - sol.H00)) / k.s1;
        } else {
            sol.H01 = sol.side_L->H10;
            sol.H10 = 1 - (k.l2 + k.d2() * (sol.H01 - sol.H00)) / k.s2;
        }
    } else {
        sol.H00 = main.H00;
        sol.H10 = fc.H10(sol.H00);
        sol.H01 = fc.H01(sol.H00);
    }
    if (sol.side_M && sol.side_L)
        sol.H00_mismatch = std::abs(sol.side_M->H00 - sol.side_L->H00);

    if (sol.side_M) {
        sol.H1_10 = sol.side_M->jet(1.0, 2)[1].real();
        sol.m1_method = "direct";
    } else {
        sol.H1_10 = cross_derivative(k, *sol.side_L, sol.H00);
        sol.m1_method = "cross";
    }
    if (sol.side_L) {
        sol.H2_01 = sol.side_L->jet(1.0, 2)[1].real();
        sol.m2_method = "direct";
    } else {
        sol.H2_01 = cross_derivative(k.swapped(), *sol.side_M, sol.H00);
        sol.m2_method = "cross";
    }
    sol.M1 = (k.l1 + k.d1() * sol.H1_10) / (k.s1 - k.l1);
    sol.M2 = (k.l2 + k.d2() * sol.H2_01) / (k.s2 - k.l2);

    const double tol = opt.consistency_tol;
    bool ok = sol.H00 > 0 && sol.H00 <= 1 + tol && sol.H10 >= sol.H00 - tol && sol.H10 <= 1 + tol &&
              sol.H01 >= sol.H00 - tol && sol.H01 <= 1 + tol && sol.M1 >= -tol && sol.M2 >= -tol;
    if (!ok) {
        std::ostringstream os;
        os << "solution is not a probability law (H00 = " << sol.H00 << ", H10 = " << sol.H10 << ", H01 = " << sol.H01
           << ", M1 = " << sol.M1 << ", M2 = " << sol.M2 << "); rates are outside the region";
        throw instability_error(os.str());
    }
    return sol;
}

BvpSolution solve_pair(const ChannelParams& ch, const Policy& pol, double lambda1, double lambda2,
                       const BvpOptions& opt)
{
    return solve_pair(KernelCoeffs::from(ch, pol, lambda1, lambda2), opt);
}

cplx BvpSolution::H_x0(cplx x) const
{
    const auto& k = pair;
    if (k.l1 == 0 && k.l2 == 0)
        return 1.0;
    if (k.l2 == 0)
        return (k.t1 - k.l1) / (k.t1 - k.l1 * x);
    if (k.l1 == 0)
        return H00;
    if (side_M && side_M->map.contour().inside(x))
        return side_M->value(x);
    if (side_L) {
        cplx y = kernel_roots_in_y(k, x).r0;
        if (side_L->map.contour().inside(y))
            return -(k.B(x, y) * side_L->value(y) + k.C(x, y) * H00) / k.A(x, y);
    }
    throw domain_error("H(x,0): point outside the region covered by the solution");
}

cplx BvpSolution::H_0y(cplx y) const
{
    const auto& k = pair;
    if (k.l1 == 0 && k.l2 == 0)
        return 1.0;
    if (k.l1 == 0)
        return (k.t2 - k.l2) / (k.t2 - k.l2 * y);
    if (k.l2 == 0)
        return H00;
    if (side_L && side_L->map.contour().inside(y))
        return side_L->value(y);
    if (side_M) {
        cplx x = kernel_roots_in_x(k, y).r0;
        if (side_M->map.contour().inside(x))
            return -(k.A(x, y) * side_M->value(x) + k.C(x, y) * H00) / k.B(x, y);
    }
    throw domain_error("H(0,y): point outside the region covered by the solution");
}

cplx BvpSolution::H(cplx x, cplx y) const
{
    const auto& k = pair;
    if (k.l1 == 0 && k.l2 == 0)
        return 1.0;
    if (k.l2 == 0)
        return H_x0(x);
    if (k.l1 == 0 || x == 0.0)
        return H_0y(y);
    if (y == 0.0)
        return H_x0(x);
    cplx R = k.R(x, y);
    if (std::abs(R) > 1e-8)
        return (k.A(x, y) * H_x0(x) + k.B(x, y) * H_0y(y) + k.C(x, y) * H00) / R;
    // on the kernel: ratio of y-derivatives along fixed x
    if (!side_L || !side_L->map.contour().inside(y))
        throw numerical_failure("H(x,y) near the kernel zero set needs H(0,y) derivatives");
    const std::size_t O = 2;
    Jet yj(O, y, 1.0);
    Jet one(O, 1.0);
    Jet iy = one / yj;
    double d1 = k.d1(), d2 = k.d2();
    cplx ix = 1.0 / x;
    Jet A = d1 * (1.0 - ix) * one + k.s2 * (one - iy);
    Jet B = k.s1 * (1.0 - ix) * one + d2 * (one - iy);
    Jet C = d1 * (ix - 1.0) * one + d2 * (iy - one);
    Jet num = A * H_x0(x) + B * side_L->jet(y, O) + C * H00;
    Jet Rj = (one * (1.0 + k.l1 * (1.0 - x))) * (one * (1 + k.l2) - k.l2 * yj) - one + k.s1 * (1.0 - ix) * one +
             k.s2 * (one - iy);
    if (std::abs(Rj[1]) < 1e-14)
        throw numerical_failure("H(x,y): kernel has a double zero");
    return num[1] / Rj[1];
}

DelayReport mean_delay(const BvpSolution& sol)
{
    DelayReport d;
    d.lambda1 = sol.pair.l1;
    d.lambda2 = sol.pair.l2;
    d.M1 = sol.M1;
    d.M2 = sol.M2;
    d.D1 = d.lambda1 > 0 ? sol.M1 / d.lambda1 : nan_v;
    d.D2 = d.lambda2 > 0 ? sol.M2 / d.lambda2 : nan_v;
    d.D1_low = d.D1_up = d.D1;
    d.provenance = "bvp";
    return d;
}

F1Values dominant_F(const DominantPair& dp, double lambda_i, double lambda_j, const BvpOptions& opt)
{
    if (std::abs(dp.delta) < 1e-14)
        throw degenerate_error("dominant pair: d_i* d_j* - sigma_i sigma_j vanishes");
    KernelCoeffs k{lambda_i, lambda_j, dp.sigma_i, dp.sigma_j, dp.tau_i, dp.tau_j};
    BvpSolution s = solve_pair(k, opt);
    return {s.H00, s.H10, s.H01};
}

F1Values solve_modified_F1(const Channel3& ch, const Policy& pol, double lambda2, double lambda3,
                           const BvpOptions& opt)
{
    return dominant_F(dominant_pair(ch, pol, 0), lambda2, lambda3, opt);
}

F1Solver bvp_f1_solver(const BvpOptions& opt)
{
    return [opt](const DominantPair& dp, double li, double lj) { return dominant_F(dp, li, lj, opt); };
}

} // namespace mpr
