#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mpr {

// Physical layer description for the SINR/Rayleigh success model.
// Users are 0-based; all links go to one common destination.
struct PhyParams {
    std::vector<double> power;       // W
    std::vector<double> power_alone; // W, used for the tilde entries; empty -> same as power
    std::vector<double> distance;    // m
    std::vector<double> fading;      // Rayleigh parameter v (mean of the exponential gain)
    std::vector<double> threshold;   // SINR threshold gamma_i
    double path_loss = 4.0;          // h
    double noise = 1e-9;             // W at the destination

    std::size_t users() const { return power.size(); }
    void validate() const;
    double gain(int i, bool alone = false) const; // g(i) = P_tx r^-h
};

// success probability of user i when the set T transmits (T contains i)
double success_prob(const PhyParams& phy, int i, const std::vector<int>& T, bool alone = false);

// Two-user table. P12_12 = both succeed; the remainder is P0_12.
struct ChannelParams {
    double P1_1 = 1, P2_2 = 1;    // only i transmits, other queue non-empty
    double Pt1_1 = 1, Pt2_2 = 1;  // only i transmits, other queue empty
    double P1_12 = 0, P2_12 = 0;  // both transmit, only i decoded
    double P12_12 = 0;            // both transmit, both decoded

    double P0_12() const { return 1.0 - P1_12 - P2_12 - P12_12; }
    bool capture() const { return P12_12 == 0.0; }
    void validate() const;
    std::vector<std::string> warnings() const;

    double P(int i) const { return i == 0 ? P1_1 : P2_2; }
    double Pt(int i) const { return i == 0 ? Pt1_1 : Pt2_2; }
    double P_pair(int i) const { return i == 0 ? P1_12 : P2_12; }

    bool operator==(const ChannelParams&) const = default;
};

// Three-user capture-class table (at most one success per slot).
// level 0: no user empty, 1: exactly one user empty; alone[k]: k is the only non-empty user.
// Transmitting sets are bit masks over users {0,1,2}.
struct Channel3 {
    std::array<std::array<std::array<double, 8>, 3>, 2> P{};
    std::array<double, 3> alone{};

    double succ(int level, int k, unsigned mask) const { return P[level][k][mask]; }
    double& at(int level, int k, unsigned mask) { return P[level][k][mask]; }
    void validate() const;
};

struct Policy {
    std::vector<double> alpha;
    std::vector<double> alpha_star;

    std::size_t users() const { return alpha.size(); }
    void validate(std::size_t n) const;
    std::vector<std::string> warnings() const;
};

enum class PresetKind { collision, capture, mpr };

PresetKind parse_preset(const std::string& s);
std::string to_string(PresetKind k);

ChannelParams preset(PresetKind kind, double p, double p_tilde, double b = 0.0, double c = 0.0);

// symmetric 3-user table: singles p (no empty user) / p_tilde (someone empty),
// pairs b, triple b3, alone p_tilde
Channel3 preset3(PresetKind kind, double p, double p_tilde, double b = 0.0, double b3 = 0.0);

struct Conditionals {
    ChannelParams table;
    std::size_t samples = 0;
    double se_1 = 0, se_2 = 0, se_12 = 0;  // standard errors of the MC entries
    double marginal_residual_1 = 0;        // |Ps(1,{1,2}) - P1_12 - P12_12|
    double marginal_residual_2 = 0;
};

Conditionals derive_conditionals(const PhyParams& phy, std::size_t samples = 1000000,
                                 std::uint64_t seed = 1);

Channel3 derive_conditionals3(const PhyParams& phy, std::size_t samples = 1000000,
                              std::uint64_t seed = 1);

// alpha-hat composites of the two-user model
double alpha_hat1(const ChannelParams& ch, const Policy& pol);
double alpha_hat2(const ChannelParams& ch, const Policy& pol);

} // namespace mpr
