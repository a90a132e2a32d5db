#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mpr {

// Truncated Taylor series c[0] + c[1] h + ... + c[n-1] h^{n-1} in a small increment h.
class Jet {
public:
    using cplx = std::complex<double>;

    explicit Jet(std::size_t order, cplx c0 = 0.0, cplx c1 = 0.0) : c_(order, cplx(0))
    {
        if (order == 0)
            throw std::invalid_argument("jet order must be positive");
        c_[0] = c0;
        if (order > 1)
            c_[1] = c1;
    }

    std::size_t order() const { return c_.size(); }
    cplx& operator[](std::size_t k) { return c_[k]; }
    const cplx& operator[](std::size_t k) const { return c_[k]; }

    Jet& operator+=(const Jet& o)
    {
        for (std::size_t k = 0; k < c_.size(); ++k)
            c_[k] += o.c_[k];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        for (std::size_t k = 0; k < c_.size(); ++k)
            c_[k] -= o.c_[k];
        return *this;
    }
    Jet& operator*=(cplx s)
    {
        for (auto& v : c_)
            v *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, cplx s) { return a *= s; }
    friend Jet operator*(cplx s, Jet a) { return a *= s; }
    friend Jet operator+(Jet a, cplx s)
    {
        a.c_[0] += s;
        return a;
    }
    friend Jet operator-(Jet a, cplx s)
    {
        a.c_[0] -= s;
        return a;
    }
    friend Jet operator-(cplx s, const Jet& a) { return (a * cplx(-1.0)) + s; }

    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet r(a.order());
        for (std::size_t i = 0; i < a.order(); ++i)
            for (std::size_t j = 0; i + j < a.order(); ++j)
                r.c_[i + j] += a.c_[i] * b.c_[j];
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b)
    {
        if (b.c_[0] == cplx(0))
            throw std::domain_error("jet division by a series with zero constant term");
        Jet q(a.order());
        for (std::size_t k = 0; k < a.order(); ++k) {
            cplx s = a.c_[k];
            for (std::size_t j = 0; j < k; ++j)
                s -= q.c_[j] * b.c_[k - j];
            q.c_[k] = s / b.c_[0];
        }
        return q;
    }

    // drop the leading coefficient (assumed zero) and shift down: f/h
    Jet shift_down() const
    {
        Jet r(order());
        for (std::size_t k = 1; k < order(); ++k)
            r.c_[k - 1] = c_[k];
        return r;
    }

    // d/dh
    Jet derivative() const
    {
        Jet r(order());
        for (std::size_t k = 1; k < order(); ++k)
            r.c_[k - 1] = double(k) * c_[k];
        return r;
    }

private:
    std::vector<cplx> c_;
};

inline Jet exp(const Jet& a)
{
    Jet b = a;
    b[0] = 0.0;
    Jet r(a.order(), 1.0), term(a.order(), 1.0);
    for (std::size_t k = 1; k < a.order(); ++k) {
        term = term * b * std::complex<double>(1.0 / double(k));
        r += term;
    }
    return r * std::exp(a[0]);
}

// f given as Taylor coefficients about g[0]; returns f(g)
inline Jet compose(const Jet& f, const Jet& g)
{
    Jet h = g;
    h[0] = 0.0;
    Jet r(g.order()), p(g.order(), 1.0);
    for (std::size_t k = 0; k < g.order() && k < f.order(); ++k) {
        r += p * f[k];
        p = p * h;
    }
    return r;
}

// inverse series: s(u) with g(g0 + ...)(s(u)) = g[0] + u, i.e. g(s) - g[0] = u; requires g[1] != 0
inline Jet revert(const Jet& g)
{
    const std::size_t n = g.order();
    if (n < 2 || g[1] == std::complex<double>(0))
        throw std::domain_error("series reversion needs a non-zero linear term");
    Jet s(n, 0.0, 1.0 / g[1]);
    Jet gd = g.derivative();
    Jet target(n, g[0], 1.0);
    for (std::size_t it = 0; it < n + 2; ++it) {
        Jet gs(n), ds(n), p(n, 1.0);
        for (std::size_t k = 0; k < n; ++k) {
            gs += p * g[k];
            ds += p * gd[k];
            p = p * s;
        }
        s -= (gs - target) / ds;
    }
    return s;
}

} // namespace mpr
