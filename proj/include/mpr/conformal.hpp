#pragma once

#include "mpr/jet.hpp"
#include "mpr/kernel.hpp"

#include <complex>
#include <vector>

namespace mpr {

// Power series sum_k coef[k] z^k
struct Series {
    std::vector<cplx> coef;

    cplx eval(cplx z) const;
    cplx deriv(cplx z) const;
    // Taylor coefficients about z0 up to the given order
    Jet taylor(cplx z0, std::size_t order) const;
};

// Series S analytic in the disk with Re S(e^{i phi_j}) = u_j on the uniform grid.
// The imaginary part is fixed by Im S(0) = 0.
Series schwarz_series(const std::vector<double>& u);

// harmonic conjugate on the uniform grid (multiplier -i sign(k), mean dropped)
std::vector<double> conjugate(const std::vector<double>& u);

struct TheodorsenOptions {
    int n_grid = 512;
    double tol = 1e-10;
    int max_iter = 200;
    double damping = 0.5;
};

struct MapDiagnostics {
    int iterations = 0;
    double residual = 0;
    std::vector<double> history;
    double symmetry_residual = 0; // max |psi(phi) + psi(2pi - phi) - 2pi|
};

class ConformalMap {
public:
    static ConformalMap solve_theodorsen(const Contour& c, const TheodorsenOptions& opt = {});

    int n_grid() const { return int(phi_.size()); }
    const std::vector<double>& phi() const { return phi_; }
    const std::vector<double>& psi() const { return psi_; }
    const std::vector<double>& log_rho() const { return u_; }
    const MapDiagnostics& diagnostics() const { return diag_; }
    const Series& schwarz() const { return S_; }
    const Contour& contour() const { return contour_; }

    // boundary image of e^{i phi_j}
    cplx boundary_point(int j) const { return std::polar(std::exp(u_[j]), psi_[j]); }

    cplx gamma0(cplx z) const;
    cplx gamma0_prime(cplx z) const;
    // inverse map, x strictly inside the contour
    cplx gamma(cplx x) const;
    cplx gamma_prime(cplx x) const;
    // Taylor jet of gamma(x0 + h)
    Jet gamma_jet(cplx x0, std::size_t order) const;

private:
    Contour contour_;
    std::vector<double> phi_, psi_, u_;
    Series S_;
    MapDiagnostics diag_;
};

} // namespace mpr
