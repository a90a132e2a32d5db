#include "mpr/channel.hpp"
#include "mpr/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace mpr {

namespace {

void check_prob(double v, const char* name)
{
    if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << name << " = " << v << " is not a probability";
        throw invalid_parameter(os.str());
    }
}

void check_positive(const std::vector<double>& v, std::size_t n, const char* name)
{
    if (v.size() != n)
        throw invalid_parameter(std::string(name) + ": expected one entry per user");
    for (double x : v)
        if (!(x > 0.0))
            throw invalid_parameter(std::string(name) + " must be strictly positive");
}

} // namespace

void PhyParams::validate() const
{
    std::size_t n = power.size();
    if (n < 1 || n > 3)
        throw invalid_parameter("phy: 1 to 3 users supported");
    check_positive(power, n, "power");
    if (!power_alone.empty())
        check_positive(power_alone, n, "power_alone");
    check_positive(distance, n, "distance");
    check_positive(fading, n, "fading");
    check_positive(threshold, n, "threshold");
    if (!(path_loss >= 0.0))
        throw invalid_parameter("path_loss must be >= 0");
    if (!(noise >= 0.0))
        throw invalid_parameter("noise must be >= 0");
}

double PhyParams::gain(int i, bool alone) const
{
    double p = (alone && !power_alone.empty()) ? power_alone[i] : power[i];
    return p * std::pow(distance[i], -path_loss);
}

double success_prob(const PhyParams& phy, int i, const std::vector<int>& T, bool alone)
{
    // threshold 0 is allowed here (always succeeds); validate() is stricter
    for (std::size_t k = 0; k < phy.users(); ++k) {
        if (!(phy.power[k] > 0.0) || !(phy.distance[k] > 0.0) || !(phy.fading[k] > 0.0))
            throw invalid_parameter("success_prob: powers, distances and fading must be positive");
    }
    bool found = false;
    for (int k : T)
        found = found || k == i;
    if (!found)
        throw invalid_parameter("success_prob: i must belong to T");

    double gamma = phy.threshold[i];
    double sig = phy.fading[i] * phy.gain(i, alone);
    double p = std::exp(-gamma * phy.noise / sig);
    for (int k : T) {
        if (k == i)
            continue;
        p /= 1.0 + gamma * phy.fading[k] * phy.gain(k) / sig;
    }
    return p;
}

void ChannelParams::validate() const
{
    check_prob(P1_1, "P1_1");
    check_prob(P2_2, "P2_2");
    check_prob(Pt1_1, "Pt1_1");
    check_prob(Pt2_2, "Pt2_2");
    check_prob(P1_12, "P1_12");
    check_prob(P2_12, "P2_12");
    check_prob(P12_12, "P12_12");
    if (P1_12 + P2_12 + P12_12 > 1.0 + 1e-12)
        throw invalid_parameter("P1_12 + P2_12 + P12_12 exceeds 1");
}

std::vector<std::string> ChannelParams::warnings() const
{
    std::vector<std::string> w;
    for (int i = 0; i < 2; ++i) {
        double both = P_pair(i) + P12_12;
        if (Pt(i) < P(i) || P(i) < both) {
            std::ostringstream os;
            os << "user " << i + 1 << ": expected Pt >= P >= P_pair (monotone table)";
            w.push_back(os.str());
        }
    }
    return w;
}

void Channel3::validate() const
{
    for (int lev = 0; lev < 2; ++lev)
        for (unsigned mask = 1; mask < 8; ++mask) {
            double sum = 0.0;
            for (int k = 0; k < 3; ++k) {
                double v = P[lev][k][mask];
                check_prob(v, "P3 entry");
                if (!(mask & (1u << k)) && v != 0.0)
                    throw invalid_parameter("P3 entry set for a user outside the transmitting set");
                sum += v;
            }
            if (sum > 1.0 + 1e-12)
                throw invalid_parameter("3-user table: success probabilities of one set exceed 1");
        }
    for (double a : alone)
        check_prob(a, "alone");
}

void Policy::validate(std::size_t n) const
{
    if (alpha.size() != n || alpha_star.size() != n)
        throw invalid_parameter("policy: expected one alpha and alpha_star per user");
    for (std::size_t k = 0; k < n; ++k) {
        check_prob(alpha[k], "alpha");
        check_prob(alpha_star[k], "alpha_star");
    }
}

std::vector<std::string> Policy::warnings() const
{
    std::vector<std::string> w;
    for (std::size_t k = 0; k < alpha.size() && k < alpha_star.size(); ++k)
        if (alpha[k] > alpha_star[k]) {
            std::ostringstream os;
            os << "user " << k + 1 << ": alpha > alpha_star";
            w.push_back(os.str());
        }
    return w;
}

PresetKind parse_preset(const std::string& s)
{
    if (s == "collision")
        return PresetKind::collision;
    if (s == "capture")
        return PresetKind::capture;
    if (s == "mpr")
        return PresetKind::mpr;
    throw invalid_parameter("unknown channel preset '" + s + "'");
}

std::string to_string(PresetKind k)
{
    switch (k) {
    case PresetKind::collision: return "collision";
    case PresetKind::capture: return "capture";
    case PresetKind::mpr: return "mpr";
    }
    return "?";
}

ChannelParams preset(PresetKind kind, double p, double p_tilde, double b, double c)
{
    if (kind == PresetKind::collision) {
        b = 0.0;
        c = 0.0;
    } else if (kind == PresetKind::capture) {
        c = 0.0;
    }
    for (double v : {p, p_tilde, b, c})
        check_prob(v, "preset parameter");
    if (2 * b + c > 1.0 + 1e-12)
        throw invalid_parameter("preset: 2b + c exceeds 1");
    ChannelParams ch;
    ch.P1_1 = ch.P2_2 = p;
    ch.Pt1_1 = ch.Pt2_2 = p_tilde;
    ch.P1_12 = ch.P2_12 = b;
    ch.P12_12 = c;
    return ch;
}

Channel3 preset3(PresetKind kind, double p, double p_tilde, double b, double b3)
{
    if (kind == PresetKind::collision) {
        b = 0.0;
        b3 = 0.0;
    } else if (kind == PresetKind::mpr) {
        throw invalid_parameter("3-user tables are capture class; use collision or capture");
    }
    for (double v : {p, p_tilde, b, b3})
        check_prob(v, "preset parameter");
    if (2 * b > 1.0 + 1e-12 || 3 * b3 > 1.0 + 1e-12)
        throw invalid_parameter("preset3: pair/triple success probabilities exceed 1");
    Channel3 ch;
    for (int lev = 0; lev < 2; ++lev)
        for (unsigned mask = 1; mask < 8; ++mask) {
            int n = __builtin_popcount(mask);
            for (int k = 0; k < 3; ++k) {
                if (!(mask & (1u << k)))
                    continue;
                double v = n == 1 ? (lev == 0 ? p : p_tilde) : (n == 2 ? b : b3);
                ch.P[lev][k][mask] = v;
            }
        }
    ch.alone = {p_tilde, p_tilde, p_tilde};
    return ch;
}

Conditionals derive_conditionals(const PhyParams& phy, std::size_t samples, std::uint64_t seed)
{
    phy.validate();
    if (phy.users() != 2)
        throw invalid_parameter("derive_conditionals: two-user layout expected");
    if (samples < 2)
        throw invalid_parameter("derive_conditionals: need at least 2 samples");

    Conditionals out;
    ChannelParams& t = out.table;
    t.P1_1 = success_prob(phy, 0, {0});
    t.P2_2 = success_prob(phy, 1, {1});
    t.Pt1_1 = success_prob(phy, 0, {0}, true);
    t.Pt2_2 = success_prob(phy, 1, {1}, true);

    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> e1(1.0 / phy.fading[0]), e2(1.0 / phy.fading[1]);
    double g1 = phy.gain(0), g2 = phy.gain(1);
    std::size_t n1 = 0, n2 = 0, n12 = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        double r1 = e1(rng) * g1, r2 = e2(rng) * g2;
        bool ok1 = r1 >= phy.threshold[0] * (phy.noise + r2);
        bool ok2 = r2 >= phy.threshold[1] * (phy.noise + r1);
        if (ok1 && ok2)
            ++n12;
        else if (ok1)
            ++n1;
        else if (ok2)
            ++n2;
    }
    double N = double(samples);
    t.P1_12 = n1 / N;
    t.P2_12 = n2 / N;
    t.P12_12 = n12 / N;
    auto se = [N](double p) { return std::sqrt(p * (1 - p) / N); };
    out.samples = samples;
    out.se_1 = se(t.P1_12);
    out.se_2 = se(t.P2_12);
    out.se_12 = se(t.P12_12);
    out.marginal_residual_1 = std::abs(success_prob(phy, 0, {0, 1}) - t.P1_12 - t.P12_12);
    out.marginal_residual_2 = std::abs(success_prob(phy, 1, {0, 1}) - t.P2_12 - t.P12_12);
    return out;
}

Channel3 derive_conditionals3(const PhyParams& phy, std::size_t samples, std::uint64_t seed)
{
    phy.validate();
    if (phy.users() != 3)
        throw invalid_parameter("derive_conditionals3: three-user layout expected");

    Channel3 ch;
    for (int k = 0; k < 3; ++k) {
        unsigned m = 1u << k;
        ch.P[0][k][m] = success_prob(phy, k, {k});
        ch.P[1][k][m] = success_prob(phy, k, {k}, true);
        ch.alone[k] = success_prob(phy, k, {k}, true);
    }

    // "only k decoded" for multi-user sets; simultaneous decodes are not representable
    std::mt19937_64 rng(seed);
    std::array<std::exponential_distribution<double>, 3> ex{
        std::exponential_distribution<double>(1.0 / phy.fading[0]),
        std::exponential_distribution<double>(1.0 / phy.fading[1]),
        std::exponential_distribution<double>(1.0 / phy.fading[2])};
    std::array<std::array<std::size_t, 3>, 8> cnt{};
    for (std::size_t s = 0; s < samples; ++s) {
        std::array<double, 3> r;
        for (int k = 0; k < 3; ++k)
            r[k] = ex[k](rng) * phy.gain(k);
        for (unsigned mask : {3u, 5u, 6u, 7u}) {
            int winners = 0, who = -1;
            for (int k = 0; k < 3; ++k) {
                if (!(mask & (1u << k)))
                    continue;
                double interf = phy.noise;
                for (int j = 0; j < 3; ++j)
                    if (j != k && (mask & (1u << j)))
                        interf += r[j];
                if (r[k] >= phy.threshold[k] * interf) {
                    ++winners;
                    who = k;
                }
            }
            if (winners == 1)
                ++cnt[mask][who];
        }
    }
    for (unsigned mask : {3u, 5u, 6u, 7u})
        for (int k = 0; k < 3; ++k)
            if (mask & (1u << k)) {
                double v = double(cnt[mask][k]) / double(samples);
                ch.P[0][k][mask] = v;
                ch.P[1][k][mask] = v;
            }
    return ch;
}

double alpha_hat1(const ChannelParams& ch, const Policy& pol)
{
    double a1 = pol.alpha[0];
    return (1 - a1) * ch.P2_2 + a1 * (ch.P2_12 + ch.P12_12);
}

double alpha_hat2(const ChannelParams& ch, const Policy& pol)
{
    double a2 = pol.alpha[1];
    return (1 - a2) * ch.P1_1 + a2 * (ch.P1_12 + ch.P12_12);
}

} // namespace mpr
