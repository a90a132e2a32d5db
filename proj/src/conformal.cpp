#include "mpr/conformal.hpp"
#include "mpr/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mpr {

namespace {

// forward real DFT: c_k = sum_j u_j e^{-2 pi i jk/n}, k = 0..n/2
std::vector<cplx> rfft(const std::vector<double>& u)
{
    const int n = int(u.size());
    std::vector<double> in(u);
    std::vector<cplx> out(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
    return out;
}

std::vector<double> irfft(std::vector<cplx> c, int n)
{
    std::vector<double> out(n);
    fftw_plan p = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(c.data()), out.data(), FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
    for (auto& v : out)
        v /= n;
    return out;
}

void check_grid(std::size_t n)
{
    if (n < 8 || n % 2 != 0)
        throw invalid_parameter("uniform grid size must be even and >= 8");
}

} // namespace

cplx Series::eval(cplx z) const
{
    cplx r = 0;
    for (auto it = coef.rbegin(); it != coef.rend(); ++it)
        r = r * z + *it;
    return r;
}

cplx Series::deriv(cplx z) const
{
    cplx r = 0;
    for (std::size_t k = coef.size(); k-- > 1;)
        r = r * z + double(k) * coef[k];
    return r;
}

Jet Series::taylor(cplx z0, std::size_t order) const
{
    Jet out(order);
    std::vector<cplx> c = coef;
    double fact = 1;
    for (std::size_t k = 0; k < order && !c.empty(); ++k) {
        cplx v = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it)
            v = v * z0 + *it;
        out[k] = v / fact;
        std::vector<cplx> d(c.size() > 1 ? c.size() - 1 : 0);
        for (std::size_t j = 1; j < c.size(); ++j)
            d[j - 1] = double(j) * c[j];
        c.swap(d);
        fact *= double(k + 1);
    }
    return out;
}

Series schwarz_series(const std::vector<double>& u)
{
    check_grid(u.size());
    const int n = int(u.size());
    auto c = rfft(u);
    Series s;
    s.coef.resize(n / 2 + 1);
    s.coef[0] = c[0].real() / n;
    for (int k = 1; k < n / 2; ++k)
        s.coef[k] = 2.0 * c[k] / double(n);
    s.coef[n / 2] = c[n / 2].real() / n;
    return s;
}

std::vector<double> conjugate(const std::vector<double>& u)
{
    check_grid(u.size());
    const int n = int(u.size());
    auto c = rfft(u);
    c[0] = 0;
    c[n / 2] = 0;
    for (int k = 1; k < n / 2; ++k)
        c[k] *= cplx(0, -1);
    return irfft(std::move(c), n);
}

ConformalMap ConformalMap::solve_theodorsen(const Contour& contour, const TheodorsenOptions& opt)
{
    check_grid(std::size_t(opt.n_grid));
    if (!(opt.damping > 0 && opt.damping <= 1))
        throw invalid_parameter("Theodorsen damping must lie in (0,1]");
    const int n = opt.n_grid;
    ConformalMap m;
    m.contour_ = contour;
    m.phi_.resize(n);
    for (int j = 0; j < n; ++j)
        m.phi_[j] = 2 * std::numbers::pi * j / n;
    m.psi_ = m.phi_;
    m.u_.resize(n);

    auto eval_u = [&] {
        for (int j = 0; j < n; ++j) {
            double r = contour.radius(m.psi_[j]);
            if (!(r > 0))
                throw numerical_failure("Theodorsen: contour radius not positive");
            m.u_[j] = std::log(r);
        }
    };
    bool converged = false;
    for (int it = 1; it <= opt.max_iter; ++it) {
        eval_u();
        auto k = conjugate(m.u_);
        double res = 0;
        for (int j = 0; j < n; ++j) {
            double next = m.phi_[j] + k[j];
            res = std::max(res, std::abs(next - m.psi_[j]));
            m.psi_[j] = (1 - opt.damping) * m.psi_[j] + opt.damping * next;
        }
        m.diag_.history.push_back(res);
        m.diag_.iterations = it;
        m.diag_.residual = res;
        if (res < opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "Theodorsen iteration did not converge in " << opt.max_iter << " iterations; residual history:";
        const auto& h = m.diag_.history;
        for (std::size_t i = h.size() > 5 ? h.size() - 5 : 0; i < h.size(); ++i)
            os << ' ' << h[i];
        throw numerical_failure(os.str());
    }
    eval_u();
    m.S_ = schwarz_series(m.u_);

    double sym = 0;
    for (int j = 1; j < n; ++j)
        sym = std::max(sym, std::abs(m.psi_[j] + m.psi_[n - j] - 2 * std::numbers::pi));
    sym = std::max(sym, std::abs(m.psi_[0]));
    m.diag_.symmetry_residual = sym;
    return m;
}

cplx ConformalMap::gamma0(cplx z) const
{
    if (std::abs(z) > 1 + 1e-12)
        throw domain_error("gamma0: point outside the closed unit disk");
    return z * std::exp(S_.eval(z));
}

cplx ConformalMap::gamma0_prime(cplx z) const
{
    if (std::abs(z) > 1 + 1e-12)
        throw domain_error("gamma0': point outside the closed unit disk");
    return std::exp(S_.eval(z)) * (1.0 + z * S_.deriv(z));
}

cplx ConformalMap::gamma(cplx x) const
{
    if (!contour_.inside(x))
        throw domain_error("gamma: point not strictly inside the contour");
    cplx z = x * std::exp(-S_.coef[0].real());
    for (int it = 0; it < 100; ++it) {
        if (std::abs(z) >= 1) // keep Newton inside the disk
            z /= std::abs(z) * (1 + 1e-9);
        cplx f = z * std::exp(S_.eval(z)) - x;
        cplx dz = f / gamma0_prime(z);
        z -= dz;
        if (std::abs(dz) < 1e-15 * (1 + std::abs(z)))
            return z;
    }
    cplx f = gamma0(z) - x;
    if (std::abs(f) < 1e-11)
        return z;
    std::ostringstream os;
    os << "gamma: Newton did not converge at x = " << x << " (residual " << std::abs(f) << ")";
    throw numerical_failure(os.str());
}

cplx ConformalMap::gamma_prime(cplx x) const
{
    cplx d = gamma0_prime(gamma(x));
    if (std::abs(d) < 1e-14)
        throw numerical_failure("gamma': gamma0' vanishes");
    return 1.0 / d;
}

Jet ConformalMap::gamma_jet(cplx x0, std::size_t order) const
{
    cplx z0 = gamma(x0);
    Jet zj(order, z0, 1.0);
    Jet g0 = zj * exp(S_.taylor(z0, order));
    Jet s = revert(g0);
    s[0] = z0;
    return s;
}

} // namespace mpr
