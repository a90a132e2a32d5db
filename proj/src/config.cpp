#include "mpr/config.hpp"
#include "mpr/errors.hpp"
#include "mpr/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mpr {

using nlohmann::json;

std::vector<double> RangeSpec::values() const
{
    std::vector<double> out;
    if (step <= 0) {
        out.push_back(lo);
        return out;
    }
    long n = (long)std::floor((hi - lo) / step + 1e-9);
    // snap to 12 significant digits so 0.1:0.3:0.1 gives 0.3, not 0.30000000000000004
    for (long i = 0; i <= n; ++i) {
        double v = lo + i * step;
        int k = 11 - (int)std::floor(std::log10(std::abs(v)));
        if (v != 0 && k >= 0 && k <= 22) {
            double p = std::pow(10.0, k);
            v = std::round(v * p) / p;
        }
        out.push_back(v);
    }
    return out;
}

RangeSpec RangeSpec::parse(const std::string& s)
{
    RangeSpec r;
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string tok;
    try {
        while (std::getline(ss, tok, ':'))
            parts.push_back(std::stod(tok));
    } catch (const std::exception&) {
        throw invalid_parameter("bad range '" + s + "', expected lo:hi:step");
    }
    if (parts.size() == 1) {
        r.lo = r.hi = parts[0];
    } else if (parts.size() == 3) {
        r.lo = parts[0];
        r.hi = parts[1];
        r.step = parts[2];
        if (!(r.step > 0) || r.hi < r.lo)
            throw invalid_parameter("bad range '" + s + "': need step > 0 and hi >= lo");
    } else {
        throw invalid_parameter("bad range '" + s + "', expected lo:hi:step");
    }
    return r;
}

namespace {

// reads an object, remembering which keys were used
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw invalid_parameter(path_ + ": expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k)
    {
        used_.insert(k);
        return j_.at(k);
    }

    template <class T>
    T get(const std::string& k, T def)
    {
        if (!j_.contains(k))
            return def;
        used_.insert(k);
        try {
            return j_.at(k).get<T>();
        } catch (const json::exception& e) {
            throw invalid_parameter(at(k) + ": " + e.what());
        }
    }

    template <class T>
    T need(const std::string& k)
    {
        if (!j_.contains(k))
            throw invalid_parameter(at(k) + ": missing");
        return get<T>(k, T{});
    }

    std::string at(const std::string& k) const { return path_ + "." + k; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw invalid_parameter(at(it.key()) + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

template <class F>
auto with_path(const std::string& path, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const invalid_parameter& e) {
        std::string m = e.what();
        if (m.rfind(path, 0) == 0)
            throw;
        throw invalid_parameter(path + ": " + m);
    }
}

PhyParams parse_phy(const json& j, const std::string& path)
{
    Reader r(j, path);
    PhyParams phy;
    phy.power = r.need<std::vector<double>>("power");
    phy.power_alone = r.get<std::vector<double>>("power_alone", {});
    phy.distance = r.need<std::vector<double>>("distance");
    phy.fading = r.need<std::vector<double>>("fading");
    phy.threshold = r.need<std::vector<double>>("threshold");
    phy.path_loss = r.get<double>("path_loss", phy.path_loss);
    phy.noise = r.get<double>("noise", phy.noise);
    r.finish();
    with_path(path, [&] { phy.validate(); });
    return phy;
}

// number, "lo:hi:step" or an explicit (possibly empty) list
std::vector<double> parse_range(const json& j, const std::string& path)
{
    std::vector<double> v;
    if (j.is_number())
        v = {j.get<double>()};
    else if (j.is_string())
        v = with_path(path, [&] { return RangeSpec::parse(j.get<std::string>()).values(); });
    else if (j.is_array() && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); }))
        v = j.get<std::vector<double>>();
    else
        throw invalid_parameter(path + ": expected a number, a list or \"lo:hi:step\"");
    for (double x : v)
        if (!(x >= 0))
            throw invalid_parameter(path + ": rates must be >= 0");
    return v;
}

} // namespace

ChannelParams parse_channel(const json& j, const std::string& path, std::optional<Conditionals>* cond)
{
    Reader r(j, path);
    ChannelParams ch;
    if (r.has("preset")) {
        auto kind = with_path(r.at("preset"), [&] { return parse_preset(r.need<std::string>("preset")); });
        double p = r.need<double>("p");
        double pt = r.get<double>("p_tilde", p);
        double b = r.get<double>("b", 0.0);
        double c = r.get<double>("c", 0.0);
        ch = with_path(path, [&] { return preset(kind, p, pt, b, c); });
    } else if (r.has("phy")) {
        auto phy = parse_phy(r.raw("phy"), r.at("phy"));
        if (phy.users() != 2)
            throw invalid_parameter(r.at("phy") + ": two users expected");
        auto samples = r.get<std::size_t>("samples", 1000000);
        auto seed = r.get<std::uint64_t>("seed", 1);
        Conditionals c = derive_conditionals(phy, samples, seed);
        ch = c.table;
        if (cond)
            *cond = c;
    } else {
        ch.P1_1 = r.need<double>("P1_1");
        ch.P2_2 = r.need<double>("P2_2");
        ch.Pt1_1 = r.get<double>("Pt1_1", ch.P1_1);
        ch.Pt2_2 = r.get<double>("Pt2_2", ch.P2_2);
        ch.P1_12 = r.get<double>("P1_12", 0.0);
        ch.P2_12 = r.get<double>("P2_12", 0.0);
        ch.P12_12 = r.get<double>("P12_12", 0.0);
    }
    r.finish();
    with_path(path, [&] { ch.validate(); });
    return ch;
}

Channel3 parse_channel3(const json& j, const std::string& path)
{
    Reader r(j, path);
    Channel3 ch;
    if (r.has("preset")) {
        auto kind = with_path(r.at("preset"), [&] { return parse_preset(r.need<std::string>("preset")); });
        double p = r.need<double>("p");
        double pt = r.get<double>("p_tilde", p);
        double b = r.get<double>("b", 0.0);
        double b3 = r.get<double>("b3", 0.0);
        ch = with_path(path, [&] { return preset3(kind, p, pt, b, b3); });
    } else if (r.has("phy")) {
        auto phy = parse_phy(r.raw("phy"), r.at("phy"));
        if (phy.users() != 3)
            throw invalid_parameter(r.at("phy") + ": three users expected");
        auto samples = r.get<std::size_t>("samples", 1000000);
        auto seed = r.get<std::uint64_t>("seed", 1);
        ch = derive_conditionals3(phy, samples, seed);
    } else {
        // {"levels": [[[8 values] x3] x2], "alone": [3 values]}
        auto lv = r.need<std::vector<std::vector<std::vector<double>>>>("levels");
        auto alone = r.need<std::vector<double>>("alone");
        if (lv.size() != 2 || alone.size() != 3)
            throw invalid_parameter(path + ": levels must be 2 x 3 x 8 and alone 3 values");
        for (int l = 0; l < 2; ++l) {
            if (lv[l].size() != 3)
                throw invalid_parameter(path + ".levels: 3 users per level");
            for (int k = 0; k < 3; ++k) {
                if (lv[l][k].size() != 8)
                    throw invalid_parameter(path + ".levels: 8 masks per user");
                for (int m = 0; m < 8; ++m)
                    ch.P[l][k][m] = lv[l][k][m];
            }
        }
        for (int k = 0; k < 3; ++k)
            ch.alone[k] = alone[k];
    }
    r.finish();
    with_path(path, [&] { ch.validate(); });
    return ch;
}

ExperimentConfig parse_config(const json& j)
{
    ExperimentConfig cfg;
    cfg.raw = j;
    Reader top(j, "config");

    if (top.has("channel")) {
        std::optional<Conditionals> cond;
        cfg.channel = parse_channel(top.raw("channel"), "config.channel", &cond);
        cfg.conditionals = cond;
    }
    if (top.has("channel3"))
        cfg.channel3 = parse_channel3(top.raw("channel3"), "config.channel3");

    if (top.has("policy")) {
        Reader r(top.raw("policy"), "config.policy");
        Policy pol;
        pol.alpha = r.need<std::vector<double>>("alpha");
        pol.alpha_star = r.get<std::vector<double>>("alpha_star", pol.alpha);
        r.finish();
        with_path("config.policy", [&] { pol.validate(pol.alpha.size()); });
        cfg.policy = pol;
    }

    if (top.has("rates")) {
        Reader r(top.raw("rates"), "config.rates");
        cfg.lambda = r.get<std::vector<double>>("lambda", {});
        for (double l : cfg.lambda)
            if (!(l >= 0))
                throw invalid_parameter("config.rates.lambda: rates must be >= 0");
        if (r.has("lambda1"))
            cfg.lambda1 = parse_range(r.raw("lambda1"), r.at("lambda1"));
        if (r.has("lambda2"))
            cfg.lambda2 = parse_range(r.raw("lambda2"), r.at("lambda2"));
        if (r.has("lambda3"))
            cfg.lambda3 = parse_range(r.raw("lambda3"), r.at("lambda3"));
        r.finish();
    }

    if (top.has("symmetric")) {
        Reader r(top.raw("symmetric"), "config.symmetric");
        auto& s = cfg.symmetric;
        s.alpha = r.get<double>("alpha", s.alpha);
        s.alpha_star = r.get<double>("alpha_star", s.alpha_star);
        s.p = r.get<double>("p", s.p);
        s.p_tilde = r.get<double>("p_tilde", s.p_tilde);
        s.b = r.get<double>("b", s.b);
        s.c = r.get<double>("c", s.c);
        s.lambda = r.get<double>("lambda", s.lambda);
        r.finish();
        with_path("config.symmetric", [&] { s.validate(); });
    }

    if (top.has("numeric")) {
        Reader r(top.raw("numeric"), "config.numeric");
        auto& m = cfg.bvp.map;
        m.n_grid = r.get<int>("n_grid", m.n_grid);
        m.tol = r.get<double>("tol", m.tol);
        m.max_iter = r.get<int>("max_iter", m.max_iter);
        m.damping = r.get<double>("damping", m.damping);
        cfg.bvp.balanced_tol = r.get<double>("balanced_tol", cfg.bvp.balanced_tol);
        cfg.bvp.consistency_tol = r.get<double>("consistency_tol", cfg.bvp.consistency_tol);
        cfg.closure.grid = r.get<int>("closure_grid", cfg.closure.grid);
        cfg.closure.rays = r.get<int>("closure_rays", cfg.closure.rays);
        cfg.closure.star_grid = r.get<int>("closure_star_grid", cfg.closure.star_grid);
        cfg.closure.tie_alpha_star = r.get<bool>("tie_alpha_star", cfg.closure.tie_alpha_star);
        r.finish();
        if (m.n_grid < 16 || (m.n_grid & (m.n_grid - 1)))
            throw invalid_parameter("config.numeric.n_grid: power of two >= 16 required");
        if (!(m.tol > 0) || m.max_iter < 1 || !(m.damping > 0 && m.damping <= 1))
            throw invalid_parameter("config.numeric: tol > 0, max_iter >= 1, damping in (0,1] required");
        if (cfg.closure.grid < 2 || cfg.closure.rays < 2)
            throw invalid_parameter("config.numeric: closure grid and rays must be >= 2");
    }

    if (top.has("simulation")) {
        Reader r(top.raw("simulation"), "config.simulation");
        cfg.slots = r.get<std::uint64_t>("slots", cfg.slots);
        cfg.warmup = r.get<std::uint64_t>("warmup", cfg.warmup);
        cfg.mode = r.get<std::string>("mode", cfg.mode);
        cfg.bernoulli = r.get<bool>("bernoulli", cfg.bernoulli);
        cfg.windows = r.get<int>("windows", cfg.windows);
        cfg.hist_bin = r.get<double>("hist_bin", cfg.hist_bin);
        r.finish();
        SimMode m;
        int u;
        with_path("config.simulation.mode", [&] { parse_mode(cfg.mode, m, u); });
        if (cfg.warmup >= cfg.slots)
            throw invalid_parameter("config.simulation: warmup must be < slots");
    }

    cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);
    cfg.output = top.get<std::string>("output", cfg.output);
    top.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw invalid_parameter("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw invalid_parameter("config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

ExperimentConfig default_config()
{
    json j = {
        {"channel", {{"preset", "capture"}, {"p", 0.9}, {"p_tilde", 1.0}, {"b", 0.2}, {"c", 0.0}}},
        {"policy", {{"alpha", {0.6, 0.6}}, {"alpha_star", {1.0, 1.0}}}},
        {"rates", {{"lambda", {0.1, 0.1}}}},
    };
    return parse_config(j);
}

std::string ExperimentConfig::hash() const
{
    return fnv1a_hex(raw.dump());
}

SimConfig ExperimentConfig::sim_config() const
{
    SimConfig sc;
    if (!policy)
        throw invalid_parameter("config.policy: required for simulation");
    sc.users = (int)policy->users();
    if (sc.users == 2) {
        if (!channel)
            throw invalid_parameter("config.channel: required for a 2-user simulation");
        sc.ch2 = *channel;
    } else if (sc.users == 3) {
        if (!channel3)
            throw invalid_parameter("config.channel3: required for a 3-user simulation");
        sc.ch3 = *channel3;
    } else {
        throw invalid_parameter("config.policy: 2 or 3 users");
    }
    sc.pol = *policy;
    sc.lambda = lambda;
    sc.slots = slots;
    sc.warmup = warmup;
    sc.seed = seed;
    parse_mode(mode, sc.mode, sc.mode_user);
    sc.bernoulli = bernoulli;
    sc.windows = windows;
    sc.hist_bin = hist_bin;
    return sc;
}

} // namespace mpr
