#pragma once

// Truncated Markov chain of the two-queue capture/MPR system, solved by power iteration.
// Independent of the library: only the transition rule of the protocol is encoded here.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct ChainSummary {
    double H00 = 0, H10 = 0, H01 = 0; // P(both empty), P(N2 = 0), P(N1 = 0)
    double M1 = 0, M2 = 0;
    double P11 = 0;                   // P(both non-empty)
    double tail = 0;                  // mass in the last row/column
    int iterations = 0;
    int N = 0;
    std::vector<double> P; // P[i * N + j] = P(N1 = i, N2 = j)

    // generating function E[x^N1 y^N2] for real arguments
    double gf(double x, double y) const
    {
        double s = 0, xi = 1;
        for (int i = 0; i < N; ++i, xi *= x) {
            double yj = 1;
            for (int j = 0; j < N; ++j, yj *= y)
                s += P[i * N + j] * xi * yj;
        }
        return s;
    }
};

inline std::vector<double> geometric_pmf(double lam)
{
    std::vector<double> p;
    double q = lam / (1 + lam), v = 1 / (1 + lam);
    do {
        p.push_back(v);
        v *= q;
    } while (v > 1e-18 && p.size() < 400);
    return p;
}

// s: service of k when both are busy, t: service when alone, kappa: both served (both busy)
inline ChainSummary chain_stationary(double l1, double l2, double s1, double s2, double t1, double t2,
                                     double kappa = 0.0, int N = 80, double tol = 1e-13, int max_iter = 200000)
{
    auto a1 = geometric_pmf(l1), a2 = geometric_pmf(l2);
    std::vector<double> P(N * N, 0.0), Q(N * N), R(N * N);
    P[0] = 1;
    auto at = [N](std::vector<double>& v, int i, int j) -> double& { return v[i * N + j]; };
    ChainSummary out;
    for (int it = 0; it < max_iter; ++it) {
        std::fill(Q.begin(), Q.end(), 0.0);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                double p = at(P, i, j);
                if (p == 0)
                    continue;
                if (i == 0 && j == 0) {
                    at(Q, 0, 0) += p;
                } else if (j == 0) {
                    at(Q, i, 0) += p * (1 - t1);
                    at(Q, i - 1, 0) += p * t1;
                } else if (i == 0) {
                    at(Q, 0, j) += p * (1 - t2);
                    at(Q, 0, j - 1) += p * t2;
                } else {
                    at(Q, i, j) += p * (1 - s1 - s2 - kappa);
                    at(Q, i - 1, j) += p * s1;
                    at(Q, i, j - 1) += p * s2;
                    at(Q, i - 1, j - 1) += p * kappa;
                }
            }
        // arrivals, separable
        std::fill(R.begin(), R.end(), 0.0);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                double q = at(Q, i, j);
                if (q == 0)
                    continue;
                for (int k = 0; k < (int)a2.size() && j + k < N; ++k)
                    at(R, i, j + k) += q * a2[k];
            }
        std::fill(Q.begin(), Q.end(), 0.0);
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < (int)a1.size() && i + k < N; ++k) {
                double w = a1[k];
                for (int j = 0; j < N; ++j)
                    at(Q, i + k, j) += at(R, i, j) * w;
            }
        double tot = 0;
        for (double v : Q)
            tot += v;
        double diff = 0;
        for (int x = 0; x < N * N; ++x) {
            Q[x] /= tot;
            diff += std::abs(Q[x] - P[x]);
        }
        P.swap(Q);
        out.iterations = it + 1;
        if (diff < tol)
            break;
    }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            double p = at(P, i, j);
            if (j == 0)
                out.H10 += p;
            if (i == 0)
                out.H01 += p;
            if (i > 0 && j > 0)
                out.P11 += p;
            out.M1 += i * p;
            out.M2 += j * p;
            if (i == N - 1 || j == N - 1)
                out.tail += p;
        }
    out.H00 = at(P, 0, 0);
    out.N = N;
    out.P = P;
    return out;
}

} // namespace oracle
