#include "mpr/kernel.hpp"
#include "mpr/errors.hpp"
#include "mpr/stability.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace mpr {

KernelCoeffs KernelCoeffs::from(const ChannelParams& ch, const Policy& pol, double lambda1, double lambda2)
{
    if (ch.P12_12 != 0.0)
        throw invalid_parameter("kernel analysis needs the capture subclass (P12_12 = 0)");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
        throw invalid_parameter("arrival rates must be non-negative");
    DerivedCoeffs c = derive(ch, pol);
    return {lambda1, lambda2, c.sigma1, c.sigma2, c.tau1, c.tau2};
}

std::array<cplx, 3> KernelCoeffs::abc_x(cplx x) const
{
    cplx a = l2 * x * (l1 * (x - 1.0) - 1.0);
    cplx b = x * k0() - s1 - l1 * (1 + l2) * x * x;
    cplx c = -s2 * x;
    return {a, b, c};
}

std::array<cplx, 3> KernelCoeffs::abc_y(cplx y) const
{
    cplx a = l1 * y * (l2 * (y - 1.0) - 1.0);
    cplx b = y * k0() - s2 - l2 * (1 + l1) * y * y;
    cplx c = -s1 * y;
    return {a, b, c};
}

cplx KernelCoeffs::K(cplx x, cplx y) const
{
    auto [a, b, c] = abc_x(x);
    return (a * y + b) * y + c;
}

std::array<double, 5> KernelCoeffs::Dy_poly() const
{
    const double k = k0(), e = l2 * (1 + l1);
    return {s2 * s2, -2 * s2 * k, k * k + 2 * s2 * e - 4 * s1 * l1 * (1 + l2),
            -2 * k * e + 4 * s1 * l1 * l2, e * e};
}

std::array<double, 5> KernelCoeffs::Dx_poly() const { return swapped().Dy_poly(); }

double KernelCoeffs::g(double y) const { return s1 / (l1 * (1 + l2 - l2 * y)); }

double KernelCoeffs::zeta(double delta, double y1, double y2) const
{
    double A = l2 * (1 + l1 * (1 - 2 * delta));
    double k = k0() - 2 * l1 * (1 + l2) * delta;
    if (std::abs(A) < 1e-300)
        return s2 / k;
    double disc = std::max(k * k - 4 * s2 * A, 0.0);
    double sq = std::sqrt(disc);
    double r0 = (k - sq) / (2 * A), r1 = (k + sq) / (2 * A);
    double mid = 0.5 * (y1 + y2);
    return std::abs(r0 - mid) <= std::abs(r1 - mid) ? r0 : r1;
}

namespace {

RootPair quad_roots(cplx a, cplx b, cplx c)
{
    RootPair out;
    if (std::abs(a) <= 1e-300 * (std::abs(b) + std::abs(c))) {
        out.r0 = -c / b;
        out.r1 = cplx(INFINITY, 0);
        out.degenerate = true;
        return out;
    }
    cplx sq = std::sqrt(b * b - 4.0 * a * c);
    // stable pair: q = -(b + sign sq)/2
    cplx q = (std::real(std::conj(b) * sq) >= 0) ? -0.5 * (b + sq) : -0.5 * (b - sq);
    cplx u = q / a, v = (q != 0.0) ? c / q : cplx(0);
    if (std::abs(u) <= std::abs(v)) {
        out.r0 = u;
        out.r1 = v;
    } else {
        out.r0 = v;
        out.r1 = u;
    }
    return out;
}

double newton_polish(const std::array<double, 5>& p, double x)
{
    for (int it = 0; it < 3; ++it) {
        double f = p[4], df = 0;
        for (int j = 3; j >= 0; --j) {
            df = df * x + f;
            f = f * x + p[j];
        }
        if (df == 0)
            break;
        double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-16 * (1 + std::abs(x)))
            break;
    }
    return x;
}

// sorted real roots; a complex pair lands in slots 2, 3 as NaN
std::array<double, 4> quartic_roots(const std::array<double, 5>& p, const char* what, bool& outer_real)
{
    if (p[4] == 0.0)
        throw numerical_failure(std::string(what) + ": discriminant is not a quartic");
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    for (int i = 1; i < 4; ++i)
        comp(i, i - 1) = 1.0;
    for (int i = 0; i < 4; ++i)
        comp(i, 3) = -p[i] / p[4];
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    auto ev = es.eigenvalues();
    double scale = 0;
    for (int i = 0; i < 4; ++i)
        scale = std::max(scale, std::abs(ev(i)));
    std::vector<double> re;
    cplx cpx = 0;
    for (int i = 0; i < 4; ++i) {
        if (std::abs(ev(i).imag()) > 1e-6 * (1 + scale))
            cpx = ev(i);
        else
            re.push_back(newton_polish(p, ev(i).real()));
    }
    std::sort(re.begin(), re.end());
    std::array<double, 4> r;
    r.fill(std::numeric_limits<double>::quiet_NaN());
    outer_real = re.size() == 4;
    if (re.size() == 4) {
        std::copy(re.begin(), re.end(), r.begin());
    } else if (re.size() == 2 && cpx.real() > re[1]) {
        r[0] = re[0];
        r[1] = re[1];
    } else {
        std::ostringstream os;
        os << what << ": unexpected branch point pattern, complex root " << cpx.real() << "+" << cpx.imag() << "i";
        throw numerical_failure(os.str());
    }
    return r;
}

} // namespace

RootPair kernel_roots_in_y(const KernelCoeffs& k, cplx x)
{
    auto [a, b, c] = k.abc_x(x);
    return quad_roots(a, b, c);
}

RootPair kernel_roots_in_x(const KernelCoeffs& k, cplx y)
{
    auto [a, b, c] = k.abc_y(y);
    return quad_roots(a, b, c);
}

double poly_eval(const std::array<double, 5>& p, double x)
{
    double f = 0;
    for (int j = 4; j >= 0; --j)
        f = f * x + p[j];
    return f;
}

BranchPoints branch_points(const KernelCoeffs& k)
{
    if (!(k.l1 > 0) || !(k.l2 > 0))
        throw invalid_parameter("branch_points: both arrival rates must be positive");
    BranchPoints bp;
    bp.x = quartic_roots(k.Dx_poly(), "D_x", bp.x_outer_real);
    bp.y = quartic_roots(k.Dy_poly(), "D_y", bp.y_outer_real);
    auto check = [](const std::array<double, 4>& r, const std::array<double, 5>& p, double cap, const char* n) {
        bool inner = 0 <= r[0] && r[0] < r[1] && r[1] <= 1 + 1e-12;
        if (std::isnan(r[2])) {
            // only the slit (r0, r1) is used downstream
            if (!inner || !(poly_eval(p, 0.5 * (r[0] + r[1])) < 0) || !(poly_eval(p, 0.5 * (r[1] + 1)) > 0))
                throw numerical_failure(std::string(n) + ": inner branch points out of order");
            return;
        }
        if (!(inner && 1 < r[2] && r[2] < r[3] && r[3] < cap)) {
            std::ostringstream os;
            os << n << " branch points violate the ordering: " << r[0] << ", " << r[1] << ", " << r[2] << ", "
               << r[3];
            throw numerical_failure(os.str());
        }
        if (!(poly_eval(p, 0.5 * (r[0] + r[1])) < 0 && poly_eval(p, 0.5 * (r[2] + r[3])) < 0 &&
              poly_eval(p, 0.5 * (r[1] + r[2])) > 0))
            throw numerical_failure(std::string(n) + ": discriminant sign pattern not as expected");
    };
    check(bp.x, k.Dx_poly(), (1 + k.l1) / k.l1, "x");
    check(bp.y, k.Dy_poly(), (1 + k.l2) / k.l2, "y");
    return bp;
}

Contour::Contour(std::function<double(double)> radius, int n_samples) : radius_(std::move(radius))
{
    if (n_samples < 4)
        throw invalid_parameter("contour: need at least 4 samples");
    phi.resize(n_samples);
    rho.resize(n_samples);
    for (int j = 0; j < n_samples; ++j) {
        phi[j] = 2 * std::numbers::pi * j / n_samples;
        rho[j] = radius_(phi[j]);
    }
    beta0 = radius_(0.0);
    beta1 = -radius_(std::numbers::pi);
}

bool Contour::inside(cplx x) const
{
    double r = std::abs(x);
    if (r == 0)
        return true;
    double a = std::arg(x);
    if (a < 0)
        a += 2 * std::numbers::pi;
    return r < radius(a);
}

double Contour::modulus_law(double delta) const
{
    if (!from_kernel)
        throw invalid_parameter("modulus law only exists for kernel contours");
    return pair.g(pair.zeta(delta, slit_lo, slit_hi));
}

Contour unit_circle(int n_samples)
{
    return Contour([](double) { return 1.0; }, n_samples);
}

Contour ellipse(double a, double b, int n_samples)
{
    if (!(a > 0) || !(b > 0))
        throw invalid_parameter("ellipse: semi-axes must be positive");
    return Contour(
        [a, b](double t) {
            double c = std::cos(t) / a, s = std::sin(t) / b;
            return 1.0 / std::sqrt(c * c + s * s);
        },
        n_samples);
}

Contour contour_M(const KernelCoeffs& k, int n_samples)
{
    BranchPoints bp = branch_points(k);
    const double y1 = bp.y[0], y2 = bp.y[1];
    if (!(y2 < (1 + k.l2) / k.l2))
        throw numerical_failure("contour M: y_2 beyond (1+l2)/l2");
    const double b0 = std::sqrt(k.g(y2)), b1 = -std::sqrt(k.g(y1));
    auto m = [k, y1, y2](double d) { return k.g(k.zeta(d, y1, y2)); };
    auto radius = [m, b0, b1](double ph) {
        double c = std::cos(ph);
        if (std::abs(c) < 1e-15)
            return std::sqrt(m(0.0));
        auto f = [&](double d) { return d - c * std::sqrt(m(d)); };
        double lo = c > 0 ? 0.0 : b1, hi = c > 0 ? b0 : 0.0;
        double flo = f(lo), fhi = f(hi);
        if (flo * fhi > 0)
            return c > 0 ? b0 : -b1;
        if (flo == 0)
            return std::sqrt(m(lo));
        if (fhi == 0)
            return std::sqrt(m(hi));
        std::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(52);
        std::pair<double, double> br;
        try {
            br = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "contour: per-angle solve failed at phi = " << ph << ": " << e.what();
            throw numerical_failure(os.str());
        }
        return std::sqrt(m(0.5 * (br.first + br.second)));
    };
    Contour c(radius, n_samples);
    c.beta0 = b0;
    c.beta1 = b1;
    c.slit_lo = y1;
    c.slit_hi = y2;
    c.from_kernel = true;
    c.pair = k;
    return c;
}

Contour contour_L(const KernelCoeffs& k, int n_samples) { return contour_M(k.swapped(), n_samples); }

int winding_number(const std::vector<cplx>& pts)
{
    double total = 0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        cplx a = pts[j], b = pts[(j + 1) % pts.size()];
        total += std::arg(b / a);
    }
    return int(std::lround(total / (2 * std::numbers::pi)));
}

bool has_self_intersection(const std::vector<cplx>& pts)
{
    const std::size_t n = pts.size();
    auto cross = [](cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); };
    for (std::size_t i = 0; i < n; ++i) {
        cplx p = pts[i], r = pts[(i + 1) % n] - p;
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1)
                continue;
            cplx q = pts[j], s = pts[(j + 1) % n] - q;
            double den = cross(r, s);
            if (den == 0)
                continue;
            double t = cross(q - p, s) / den, u = cross(q - p, r) / den;
            if (t > 0 && t < 1 && u > 0 && u < 1)
                return true;
        }
    }
    return false;
}

} // namespace mpr
