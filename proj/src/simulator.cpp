#include "mpr/simulator.hpp"
#include "mpr/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

namespace mpr {

std::string to_string(SimMode m)
{
    switch (m) {
    case SimMode::normal: return "normal";
    case SimMode::dominant: return "dominant";
    case SimMode::interfering: return "interfering";
    }
    return "?";
}

void parse_mode(const std::string& s, SimMode& mode, int& user)
{
    user = 0;
    if (s == "normal") {
        mode = SimMode::normal;
        return;
    }
    auto pos = s.find(':');
    std::string head = s.substr(0, pos);
    if (head == "dominant")
        mode = SimMode::dominant;
    else if (head == "interfering")
        mode = SimMode::interfering;
    else
        throw invalid_parameter("unknown simulation mode '" + s + "'");
    if (pos == std::string::npos)
        throw invalid_parameter("mode '" + s + "' needs a user, e.g. " + head + ":1");
    int u = std::stoi(s.substr(pos + 1));
    if (u < 1 || u > 3)
        throw invalid_parameter("mode user must be 1..3");
    user = u - 1;
}

void SimConfig::validate() const
{
    if (users != 2 && users != 3)
        throw invalid_parameter("simulator supports 2 or 3 users");
    if ((int)lambda.size() != users)
        throw invalid_parameter("lambda must have one entry per user");
    for (double l : lambda) {
        if (!(l >= 0) || !std::isfinite(l))
            throw invalid_parameter("arrival rates must be finite and non-negative");
        if (bernoulli && l > 1)
            throw invalid_parameter("Bernoulli arrivals need lambda <= 1");
    }
    pol.validate(users);
    if (users == 2)
        ch2.validate();
    else
        ch3.validate();
    if (warmup >= slots)
        throw invalid_parameter("warmup must be shorter than the run");
    if (windows < 2)
        throw invalid_parameter("need at least 2 windows");
    if (!(hist_bin > 0))
        throw invalid_parameter("histogram bin width must be positive");
    if (mode != SimMode::normal && (mode_user < 0 || mode_user >= users))
        throw invalid_parameter("mode user out of range");
    if (capture_first < 0 || capture_first >= users)
        throw invalid_parameter("capture_first out of range");
}

double SimStats::empty_prob(int u) const
{
    double s = 0;
    for (std::size_t m = 0; m < occupancy.size(); ++m)
        if (!(m & (1u << u)))
            s += occupancy[m];
    return s;
}

namespace {

enum Purpose { arrival = 0, transmit = 1, channel = 2 };

struct Stream {
    std::mt19937_64 gen;
    Stream(std::uint64_t seed, int user, int purpose)
    {
        std::seed_seq ss{(std::uint32_t)(seed & 0xffffffffu), (std::uint32_t)(seed >> 32), (std::uint32_t)user,
                         (std::uint32_t)purpose};
        gen.seed(ss);
    }
    // uniform on [0,1)
    double u() { return (gen() >> 11) * 0x1.0p-53; }
};

double t_quantile(int dof)
{
    boost::math::students_t dist(dof);
    return boost::math::quantile(boost::math::complement(dist, 0.025));
}

struct Outcome {
    unsigned winners;
    double prob;
};

// success outcomes of a slot, with the outcomes of `first` leading
std::vector<Outcome> outcomes(const SimConfig& cfg, unsigned tx, unsigned nonempty)
{
    std::vector<Outcome> out;
    if (tx == 0)
        return out;
    if (cfg.users == 2) {
        const auto& ch = cfg.ch2;
        if (tx != 3u) {
            int i = tx == 1u ? 0 : 1;
            bool other_empty = !(nonempty & (1u << (1 - i)));
            out.push_back({tx, other_empty ? ch.Pt(i) : ch.P(i)});
            return out;
        }
        Outcome o0{1u, ch.P1_12}, o1{2u, ch.P2_12}, both{3u, ch.P12_12};
        if (cfg.capture_first == 0)
            out = {o0, both, o1};
        else
            out = {o1, both, o0};
        return out;
    }
    int empties = 3 - std::popcount(nonempty);
    int order[3] = {cfg.capture_first, 0, 0};
    for (int k = 0, n = 1; k < 3; ++k)
        if (k != cfg.capture_first)
            order[n++] = k;
    for (int k : order) {
        if (!(tx & (1u << k)))
            continue;
        double p;
        if (empties >= 2)
            p = cfg.ch3.alone[k];
        else
            p = cfg.ch3.succ(empties, k, tx);
        out.push_back({1u << k, p});
    }
    return out;
}

} // namespace

SimStats run(const SimConfig& cfg)
{
    cfg.validate();
    const int N = cfg.users;
    const unsigned n_masks = 1u << N;
    const std::uint64_t measured = cfg.slots - cfg.warmup;

    std::vector<Stream> arr, trx;
    for (int u = 0; u < N; ++u) {
        arr.emplace_back(cfg.seed, u, arrival);
        trx.emplace_back(cfg.seed, u, transmit);
    }
    Stream chan(cfg.seed, 99, channel);

    std::vector<double> log_q(N);
    for (int u = 0; u < N; ++u) {
        double l = cfg.lambda[u];
        log_q[u] = l > 0 ? std::log(l / (1 + l)) : 0.0;
    }

    SimStats st;
    st.slots = cfg.slots;
    st.measured_slots = measured;
    st.hist_bin = cfg.hist_bin;
    st.mean_queue.assign(N, 0);
    st.queue_ci.assign(N, 0);
    st.mean_delay.assign(N, NAN);
    st.delay_ci.assign(N, NAN);
    st.lambda_eff.assign(N, 0);
    st.served.assign(N, 0);
    st.arrivals_total.assign(N, 0);
    st.departures_total.assign(N, 0);
    st.final_queue.assign(N, 0);
    st.occupancy.assign(n_masks, 0);
    st.occupancy_se.assign(n_masks, 0);
    st.attempts.assign(n_masks, 0);
    st.successes.assign(N, std::vector<std::uint64_t>(n_masks, 0));
    st.histogram.assign(N, {});
    st.delay_sum.assign(N, 0);
    if (cfg.trace)
        st.trace.assign(N, std::vector<std::uint32_t>(cfg.slots));

    const int W = cfg.windows;
    std::vector<std::vector<long double>> wq(N, std::vector<long double>(W, 0));
    std::vector<std::vector<long double>> wd(N, std::vector<long double>(W, 0));
    std::vector<std::vector<std::uint64_t>> wn(N, std::vector<std::uint64_t>(W, 0));
    std::vector<std::vector<std::uint64_t>> wocc(n_masks, std::vector<std::uint64_t>(W, 0));
    std::vector<std::uint64_t> wlen(W, 0);
    std::vector<std::uint64_t> arrivals_measured(N, 0);

    std::vector<std::deque<std::uint64_t>> q(N);
    const bool forced_mode = cfg.mode != SimMode::normal;

    for (std::uint64_t t = 0; t < cfg.slots; ++t) {
        const bool meas = t >= cfg.warmup;
        const int w = meas ? (int)std::min<std::uint64_t>((t - cfg.warmup) * W / measured, W - 1) : 0;

        unsigned real = 0; // users with packets
        for (int u = 0; u < N; ++u)
            if (!q[u].empty())
                real |= 1u << u;
        unsigned nonempty = real;
        if (forced_mode)
            nonempty |= 1u << cfg.mode_user;

        if (meas) {
            ++wlen[w];
            ++wocc[real][w];
            for (int u = 0; u < N; ++u)
                wq[u][w] += q[u].size();
        }
        if (cfg.trace)
            for (int u = 0; u < N; ++u)
                st.trace[u][t] = (std::uint32_t)q[u].size();

        // transmission decisions, one draw per user per slot
        unsigned tx = 0;
        for (int u = 0; u < N; ++u) {
            double v = trx[u].u();
            bool active = (nonempty >> u) & 1u;
            if (!active)
                continue;
            if (cfg.mode == SimMode::interfering && u == cfg.mode_user) {
                tx |= 1u << u;
                continue;
            }
            int nb = N == 2 ? 1 - u : next_user(u);
            double prob = ((nonempty >> nb) & 1u) ? cfg.pol.alpha[u] : cfg.pol.alpha_star[u];
            if (v < prob)
                tx |= 1u << u;
        }

        double vc = chan.u();
        unsigned winners = 0;
        double acc = 0;
        for (const auto& o : outcomes(cfg, tx, nonempty)) {
            acc += o.prob;
            if (vc < acc) {
                winners = o.winners;
                break;
            }
        }
        if (meas && tx) {
            ++st.attempts[tx];
            for (int u = 0; u < N; ++u)
                if (winners & (1u << u))
                    ++st.successes[u][tx];
        }

        // departures
        for (int u = 0; u < N; ++u) {
            if (!(winners & (1u << u)) || q[u].empty())
                continue;
            std::uint64_t a = q[u].front();
            q[u].pop_front();
            ++st.departures_total[u];
            if (a >= cfg.warmup) {
                std::uint64_t d = t - a;
                ++st.served[u];
                st.delay_sum[u] += d;
                auto bin = (std::size_t)std::floor(d / cfg.hist_bin);
                auto& h = st.histogram[u];
                if (h.size() <= bin)
                    h.resize(bin + 1, 0);
                ++h[bin];
                int wd_idx = (int)std::min<std::uint64_t>((t - cfg.warmup) * W / measured, W - 1);
                wd[u][wd_idx] += d;
                ++wn[u][wd_idx];
            }
        }

        // arrivals at the end of the slot
        for (int u = 0; u < N; ++u) {
            double v = arr[u].u();
            std::uint64_t k = 0;
            double l = cfg.lambda[u];
            if (l > 0) {
                if (cfg.bernoulli)
                    k = v < l ? 1 : 0;
                else
                    k = (std::uint64_t)std::floor(std::log1p(-v) / log_q[u]);
            }
            for (std::uint64_t j = 0; j < k; ++j)
                q[u].push_back(t);
            st.arrivals_total[u] += k;
            if (meas)
                arrivals_measured[u] += k;
        }
    }

    const double tq = t_quantile(W - 1);
    auto mean_ci = [&](const std::vector<double>& xs, double& mean, double& ci) {
        double m = 0;
        for (double x : xs)
            m += x;
        m /= xs.size();
        double v = 0;
        for (double x : xs)
            v += (x - m) * (x - m);
        v /= (xs.size() - 1);
        mean = m;
        ci = tq * std::sqrt(v / xs.size());
    };

    st.window_queue.assign(N, std::vector<double>(W, 0));
    st.user_verdict.assign(N, Membership::stable);
    st.drift_t.assign(N, 0);
    st.drift_growth.assign(N, 0);
    for (int u = 0; u < N; ++u) {
        long double tot = 0;
        for (int w = 0; w < W; ++w) {
            st.window_queue[u][w] = wlen[w] ? (double)(wq[u][w] / wlen[w]) : 0.0;
            tot += wq[u][w];
        }
        st.mean_queue[u] = (double)(tot / measured);
        double m_unused;
        mean_ci(st.window_queue[u], m_unused, st.queue_ci[u]);

        if (st.served[u] > 0) {
            st.mean_delay[u] = (double)(st.delay_sum[u] / st.served[u]);
            std::vector<double> dm;
            for (int w = 0; w < W; ++w)
                if (wn[u][w] > 0)
                    dm.push_back((double)(wd[u][w] / wn[u][w]));
            if (dm.size() >= 2)
                mean_ci(dm, m_unused, st.delay_ci[u]);
        }
        st.lambda_eff[u] = (double)arrivals_measured[u] / measured;
        st.final_queue[u] = q[u].size();

        DriftResult dr = drift_verdict(st.window_queue[u]);
        st.user_verdict[u] = dr.verdict;
        st.drift_t[u] = dr.t_stat;
        st.drift_growth[u] = dr.growth;
        if (dr.verdict == Membership::unstable)
            st.verdict = Membership::unstable;
        else if (dr.verdict == Membership::marginal && st.verdict == Membership::stable)
            st.verdict = Membership::marginal;
    }
    for (unsigned m = 0; m < n_masks; ++m) {
        std::vector<double> xs(W);
        for (int w = 0; w < W; ++w)
            xs[w] = wlen[w] ? (double)wocc[m][w] / wlen[w] : 0.0;
        double m_unused;
        mean_ci(xs, m_unused, st.occupancy_se[m]);
        st.occupancy_se[m] /= tq;
        long double tot = 0;
        for (int w = 0; w < W; ++w)
            tot += wocc[m][w];
        st.occupancy[m] = (double)(tot / measured);
    }
    return st;
}

DriftResult drift_verdict(const std::vector<double>& y)
{
    DriftResult r;
    const std::size_t n = y.size();
    if (n < 3)
        throw invalid_parameter("drift test needs at least 3 windows");
    double xm = (n - 1) / 2.0, ym = 0;
    for (double v : y)
        ym += v;
    ym /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (i - xm) * (i - xm);
        sxy += (i - xm) * (y[i] - ym);
    }
    r.slope = sxy / sxx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - ym - r.slope * (i - xm);
        sse += e * e;
    }
    double se = std::sqrt(sse / (n - 2) / sxx);
    r.t_stat = se > 0 ? r.slope / se : (r.slope > 0 ? INFINITY : 0.0);
    r.growth = r.slope * n / (ym + 1.0);
    double var = 0;
    for (double v : y)
        var += (v - ym) * (v - ym);
    var /= (n - 1);
    // batch-means half-width relative to the level: a settled level means the queue is bounded
    r.level_spread = t_quantile(int(n) - 1) * std::sqrt(var / n) / (ym + 1.0);
    bool bounded = r.level_spread <= 0.2;
    if (r.t_stat > 3 && r.growth > 0.25)
        r.verdict = Membership::unstable;
    else if (bounded && (r.t_stat <= 3 || r.growth < 0.05))
        r.verdict = Membership::stable;
    else
        r.verdict = Membership::marginal;
    return r;
}

Membership drift_test(const SimConfig& cfg, int windows)
{
    if (windows < 10)
        throw invalid_parameter("drift test needs at least 10 windows");
    SimConfig c = cfg;
    c.windows = windows;
    return run(c).verdict;
}

Histogram delay_distribution(const SimConfig& cfg)
{
    SimStats st = run(cfg);
    Histogram h;
    h.bin = cfg.hist_bin;
    h.counts = st.histogram;
    for (int u = 0; u < cfg.users; ++u) {
        h.total.push_back(st.served[u]);
        h.mean.push_back(st.mean_delay[u]);
    }
    return h;
}

double ks_statistic(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b)
{
    long double na = 0, nb = 0;
    for (auto v : a)
        na += v;
    for (auto v : b)
        nb += v;
    if (na == 0 || nb == 0)
        throw invalid_parameter("KS statistic needs two non-empty samples");
    std::size_t n = std::max(a.size(), b.size());
    long double ca = 0, cb = 0, d = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ca += i < a.size() ? a[i] : 0;
        cb += i < b.size() ? b[i] : 0;
        d = std::max(d, std::abs(ca / na - cb / nb));
    }
    return (double)d;
}

} // namespace mpr
