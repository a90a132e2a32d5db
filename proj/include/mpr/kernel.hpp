#pragma once

#include "mpr/channel.hpp"

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace mpr {

using cplx = std::complex<double>;

// Capture-class two-user pair. sigma_k: service of k when both queues are busy,
// tau_k: service of k when the other queue is empty.
struct KernelCoeffs {
    double l1 = 0, l2 = 0;
    double s1 = 0, s2 = 0;
    double t1 = 0, t2 = 0;

    double d1() const { return s1 - t1; }
    double d2() const { return s2 - t2; }
    double k0() const { return l1 + l2 + l1 * l2 + s1 + s2; }
    double delta() const { return d1() * d2() - s1 * s2; }
    double indicator() const { return s1 / t1 + s2 / t2; }
    double rho() const { return l1 / t1 + l2 / t2; }

    KernelCoeffs swapped() const { return {l2, l1, s2, s1, t2, t1}; }

    // requires P12_12 = 0
    static KernelCoeffs from(const ChannelParams& ch, const Policy& pol, double lambda1, double lambda2);

    // K(x,y) = x y R(x,y) = a(x) y^2 + b(x) y + c(x) = ah(y) x^2 + bh(y) x + ch(y)
    std::array<cplx, 3> abc_x(cplx x) const;
    std::array<cplx, 3> abc_y(cplx y) const;
    cplx K(cplx x, cplx y) const;
    cplx R(cplx x, cplx y) const { return K(x, y) / (x * y); }

    cplx A(cplx x, cplx y) const { return d1() * (1.0 - 1.0 / x) + s2 * (1.0 - 1.0 / y); }
    cplx B(cplx x, cplx y) const { return s1 * (1.0 - 1.0 / x) + d2() * (1.0 - 1.0 / y); }
    cplx C(cplx x, cplx y) const { return d1() * (1.0 / x - 1.0) + d2() * (1.0 / y - 1.0); }

    // discriminants as polynomials, lowest degree first (degree 4)
    std::array<double, 5> Dx_poly() const;
    std::array<double, 5> Dy_poly() const;

    // modulus law of contour M: g(y) = s1 / (l1 (1 + l2 - l2 y))
    double g(double y) const;
    double zeta(double delta, double y1, double y2) const;
};

struct RootPair {
    cplx r0, r1;             // r0: smaller modulus
    bool degenerate = false; // leading coefficient vanished; r1 is infinite
};

RootPair kernel_roots_in_y(const KernelCoeffs& k, cplx x);
RootPair kernel_roots_in_x(const KernelCoeffs& k, cplx y);

double poly_eval(const std::array<double, 5>& p, double x);

struct BranchPoints {
    std::array<double, 4> x{};
    std::array<double, 4> y{};
    // false when the outer pair is complex; x[2], x[3] (y[2], y[3]) are then NaN
    bool x_outer_real = true, y_outer_real = true;
};

// throws numerical_failure unless the inner pair is real and ordered in [0, 1]
BranchPoints branch_points(const KernelCoeffs& k);

// Star-shaped closed curve rho(phi) e^{i phi}.
class Contour {
public:
    Contour() = default;
    Contour(std::function<double(double)> radius, int n_samples);

    double radius(double phi) const { return radius_(phi); }
    bool inside(cplx x) const;
    cplx point(double phi) const { return std::polar(radius(phi), phi); }

    std::vector<double> phi, rho;
    double beta0 = 0, beta1 = 0; // rightmost / leftmost real points
    double slit_lo = 0, slit_hi = 0; // image slit [y1,y2] (kernel contours only)
    bool from_kernel = false;
    KernelCoeffs pair;              // valid if from_kernel
    double modulus_law(double delta) const; // m(delta), kernel contours only

private:
    std::function<double(double)> radius_;
};

Contour unit_circle(int n_samples = 512);
// ellipse with semi-axes a (real) and b
Contour ellipse(double a, double b, int n_samples = 512);
Contour contour_M(const KernelCoeffs& k, int n_samples = 512);
// contour L lives in the y plane; built from the swapped pair
Contour contour_L(const KernelCoeffs& k, int n_samples = 512);

// winding number of a closed polygon about 0
int winding_number(const std::vector<cplx>& pts);
bool has_self_intersection(const std::vector<cplx>& pts);

} // namespace mpr
