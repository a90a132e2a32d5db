#include <doctest.h>

#include "mpr/errors.hpp"
#include "mpr/kernel.hpp"
#include "mpr/symmetric.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mpr;

namespace {

KernelCoeffs symmetric_pair(double lambda)
{
    SymmetricParams sp; // alpha 0.6, alpha* 1, p 0.9, p~ 1, b = 0
    return KernelCoeffs::from(sp.channel(), sp.policy(), lambda, lambda);
}

// R written out from the queue evolution: D(x,y)^{-1} - 1 + service terms
cplx R_direct(const KernelCoeffs& k, cplx x, cplx y)
{
    return (1.0 + k.l1 * (1.0 - x)) * (1.0 + k.l2 * (1.0 - y)) - 1.0 + k.s1 * (1.0 - 1.0 / x) +
           k.s2 * (1.0 - 1.0 / y);
}

const std::vector<KernelCoeffs> samples = {
    {0.1, 0.2, 0.25, 0.3, 0.8, 0.7},
    {0.3, 0.1, 0.2, 0.3, 0.9, 0.6},
    {0.15, 0.25, 0.2, 0.35, 0.5, 0.45},
    {0.2, 0.2, 0.288, 0.288, 1.0, 1.0},
};

} // namespace

TEST_CASE("K = x y R at random complex points")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const auto& k : samples)
        for (int i = 0; i < 50; ++i) {
            cplx x(u(rng), u(rng)), y(u(rng), u(rng));
            CHECK(std::abs(k.K(x, y) - x * y * R_direct(k, x, y)) < 1e-12 * (1 + std::abs(k.K(x, y))));
        }
}

TEST_CASE("discriminant polynomials equal b^2 - 4ac of the quadratic in the other variable")
{
    for (const auto& k : samples) {
        for (double y = -1.0; y <= 3.0; y += 0.37) {
            // K as a quadratic in x with y fixed, coefficients read off R_direct
            cplx yy(y, 0);
            double a = k.l1 * y * (k.l2 * (y - 1) - 1);
            double b = y * (k.l1 + k.l2 + k.l1 * k.l2 + k.s1 + k.s2) - k.s2 - k.l2 * (1 + k.l1) * y * y;
            double c = -k.s1 * y;
            // check the coefficients against K first
            for (double x : {0.3, -0.7, 1.9})
                CHECK(std::abs(k.K(cplx(x, 0), yy) - (a * x * x + b * x + c)) < 1e-12);
            CHECK(poly_eval(k.Dy_poly(), y) == doctest::Approx(b * b - 4 * a * c).epsilon(1e-10));
        }
        auto s = k.swapped();
        CHECK(poly_eval(k.Dx_poly(), 0.77) == doctest::Approx(poly_eval(s.Dy_poly(), 0.77)));
    }
}

TEST_CASE("x = 1: Y0(1) = 1 when l2 < s2, other root s2 / l2")
{
    for (const auto& k : samples) {
        if (!(k.l2 < k.s2))
            continue;
        auto r = kernel_roots_in_y(k, 1.0);
        CHECK(std::abs(r.r0 - 1.0) < 1e-12);
        CHECK(std::abs(r.r1 - k.s2 / k.l2) < 1e-10);
    }
}

TEST_CASE("|Y0(x)| <= 1 on the unit circle")
{
    for (const auto& k : samples)
        for (int j = 0; j < 256; ++j) {
            cplx x = std::polar(1.0, 2 * std::numbers::pi * j / 256);
            auto r = kernel_roots_in_y(k, x);
            CHECK(std::abs(r.r0) <= 1 + 1e-10);
            CHECK(std::abs(r.r0) <= std::abs(r.r1));
            CHECK(std::abs(k.K(x, r.r0)) < 1e-10);
        }
}

TEST_CASE("branch points: ordering and sign pattern for the symmetric instance at lambda = 0.2")
{
    auto k = symmetric_pair(0.2);
    auto bp = branch_points(k);
    CHECK(0 <= bp.x[0]);
    CHECK(bp.x[0] < bp.x[1]);
    CHECK(bp.x[1] <= 1);
    CHECK(1 < bp.x[2]);
    CHECK(bp.x[2] < bp.x[3]);
    CHECK(bp.x[3] < 6.0);
    auto D = k.Dx_poly();
    CHECK(poly_eval(D, 0.5 * (bp.x[0] + bp.x[1])) < 0);
    CHECK(poly_eval(D, 0.5 * (bp.x[1] + bp.x[2])) > 0);
    for (double r : bp.x)
        CHECK(std::abs(poly_eval(D, r)) < 1e-12);
}

TEST_CASE("branch points need positive rates")
{
    CHECK_THROWS_AS(branch_points({0.0, 0.1, 0.2, 0.2, 1, 1}), invalid_parameter);
}

TEST_CASE("kernel analysis rejects tables with a both-decoded event")
{
    SymmetricParams sp;
    sp.b = 0.2;
    sp.c = 0.3;
    CHECK_THROWS_AS(KernelCoeffs::from(sp.channel(), sp.policy(), 0.1, 0.1), invalid_parameter);
}

TEST_CASE("contour M: extreme points and Y0 on the slit")
{
    for (const auto& k : samples) {
        auto bp = branch_points(k);
        auto M = contour_M(k, 256);
        CHECK(M.rho[0] == doctest::Approx(M.beta0).epsilon(1e-12));
        CHECK(M.rho[128] == doctest::Approx(-M.beta1).epsilon(1e-12));
        for (std::size_t j = 0; j < M.phi.size(); ++j) {
            cplx x = std::polar(M.rho[j], M.phi[j]);
            auto r = kernel_roots_in_y(k, x);
            // one of the two roots lies on the slit [y1, y2]
            auto on_slit = [&](cplx y) {
                return std::abs(y.imag()) < 1e-6 && y.real() >= bp.y[0] - 1e-6 && y.real() <= bp.y[1] + 1e-6;
            };
            CHECK((on_slit(r.r0) || on_slit(r.r1)));
            // modulus law
            CHECK(std::abs(std::norm(x) - M.modulus_law(x.real())) < 1e-8);
        }
        std::vector<cplx> pts;
        for (std::size_t j = 0; j < M.phi.size(); ++j)
            pts.push_back(std::polar(M.rho[j], M.phi[j]));
        CHECK(winding_number(pts) == 1);
        CHECK(!has_self_intersection(pts));
    }
}

TEST_CASE("contour L: X0 on the slit [x1, x2]")
{
    for (const auto& k : samples) {
        auto bp = branch_points(k);
        auto L = contour_L(k, 128);
        CHECK(L.rho[0] == doctest::Approx(L.beta0));
        for (std::size_t j = 0; j < L.phi.size(); ++j) {
            cplx y = std::polar(L.rho[j], L.phi[j]);
            auto r = kernel_roots_in_x(k, y);
            auto on_slit = [&](cplx x) {
                return std::abs(x.imag()) < 1e-6 && x.real() >= bp.x[0] - 1e-6 && x.real() <= bp.x[1] + 1e-6;
            };
            CHECK((on_slit(r.r0) || on_slit(r.r1)));
        }
    }
}

TEST_CASE("contour geometry helpers")
{
    auto c = unit_circle(64);
    CHECK(c.inside(cplx(0.5, 0.5)));
    CHECK(!c.inside(cplx(0.8, 0.8)));
    auto e = ellipse(2.0, 1.0, 64);
    CHECK(e.rho[0] == doctest::Approx(2.0));
    CHECK(e.rho[16] == doctest::Approx(1.0));
    CHECK(e.inside(cplx(1.9, 0.0)));
    CHECK_THROWS_AS(unit_circle(2), invalid_parameter);
    std::vector<cplx> bowtie = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK(has_self_intersection(bowtie));
    CHECK_THROWS_AS(c.modulus_law(0.1), invalid_parameter);
}

TEST_CASE("outer branch points may form a complex pair; the inner slit stays real")
{
    KernelCoeffs k{0.327052, 0.129136, 0.504638, 0.742583, 0.638899, 0.942324};
    auto bp = branch_points(k);
    CHECK(!bp.x_outer_real);
    CHECK(std::isnan(bp.x[2]));
    CHECK(0 <= bp.x[0]);
    CHECK(bp.x[0] < bp.x[1]);
    CHECK(bp.x[1] <= 1);
    auto D = k.Dx_poly();
    CHECK(std::abs(poly_eval(D, bp.x[0])) < 1e-12);
    CHECK(std::abs(poly_eval(D, bp.x[1])) < 1e-12);
    // no real root beyond 1: D_x stays positive there
    for (double x = 1.01; x < (1 + k.l1) / k.l1 + 5; x += 0.05)
        CHECK(poly_eval(D, x) > 0);
}
