#include "mpr/report.hpp"
#include "mpr/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace mpr {

std::string fnv1a_hex(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, const std::string& config_hash, std::uint64_t seed,
                     const std::vector<std::string>& header)
    : os_(os), ncols_(header.size())
{
    os_ << "# config_hash=" << config_hash << " seed=" << seed << "\n";
    for (std::size_t i = 0; i < header.size(); ++i)
        os_ << (i ? "," : "") << header[i];
    os_ << "\n";
}

CsvWriter& CsvWriter::cell(double v)
{
    return cell(fmt(v));
}

CsvWriter& CsvWriter::cell(long long v)
{
    return cell(std::to_string(v));
}

CsvWriter& CsvWriter::cell(const std::string& s)
{
    if (col_ >= ncols_)
        throw invalid_parameter("csv: too many cells in row");
    os_ << (col_ ? "," : "") << s;
    ++col_;
    return *this;
}

void CsvWriter::end_row()
{
    if (col_ != ncols_)
        throw invalid_parameter("csv: row has " + std::to_string(col_) + " of " + std::to_string(ncols_) + " cells");
    os_ << "\n";
    col_ = 0;
}

nlohmann::json num(double v)
{
    if (std::isfinite(v))
        return v;
    return fmt(v);
}

namespace {

nlohmann::json nums(const std::vector<double>& v)
{
    auto a = nlohmann::json::array();
    for (double x : v)
        a.push_back(num(x));
    return a;
}

} // namespace

nlohmann::json to_json(const SimStats& st)
{
    nlohmann::json j;
    j["slots"] = st.slots;
    j["measured_slots"] = st.measured_slots;
    j["mean_queue"] = nums(st.mean_queue);
    j["queue_ci"] = nums(st.queue_ci);
    j["mean_delay"] = nums(st.mean_delay);
    j["delay_ci"] = nums(st.delay_ci);
    j["lambda_eff"] = nums(st.lambda_eff);
    j["served"] = st.served;
    j["arrivals_total"] = st.arrivals_total;
    j["departures_total"] = st.departures_total;
    j["final_queue"] = st.final_queue;
    auto occ = nlohmann::json::object();
    const int N = (int)st.mean_queue.size();
    for (std::size_t m = 0; m < st.occupancy.size(); ++m) {
        std::string key;
        for (int u = 0; u < N; ++u)
            key += (m >> u) & 1u ? '1' : '0';
        occ[key] = {{"p", st.occupancy[m]}, {"se", st.occupancy_se[m]}};
    }
    j["occupancy"] = occ; // key: per-user busy flags, user 1 first
    auto rates = nlohmann::json::array();
    for (std::size_t m = 1; m < st.attempts.size(); ++m) {
        if (!st.attempts[m])
            continue;
        nlohmann::json r;
        r["set"] = m;
        r["attempts"] = st.attempts[m];
        std::vector<double> f;
        for (int u = 0; u < N; ++u)
            f.push_back((double)st.successes[u][m] / st.attempts[m]);
        r["success_rate"] = f;
        rates.push_back(r);
    }
    j["success_rates"] = rates;
    j["verdict"] = to_string(st.verdict);
    std::vector<std::string> uv;
    for (auto v : st.user_verdict)
        uv.push_back(to_string(v));
    j["user_verdict"] = uv;
    j["drift_t"] = nums(st.drift_t);
    j["drift_growth"] = nums(st.drift_growth);
    return j;
}

nlohmann::json to_json(const DelayReport& d)
{
    return {{"lambda1", d.lambda1}, {"lambda2", d.lambda2}, {"M1", num(d.M1)}, {"M2", num(d.M2)},
            {"D1", num(d.D1)},      {"D2", num(d.D2)},      {"D1_low", num(d.D1_low)},
            {"D1_up", num(d.D1_up)}, {"provenance", d.provenance}, {"ci1", num(d.ci1)}, {"ci2", num(d.ci2)}};
}

nlohmann::json to_json(const ChannelParams& ch)
{
    return {{"P1_1", ch.P1_1},   {"P2_2", ch.P2_2},   {"Pt1_1", ch.Pt1_1},  {"Pt2_2", ch.Pt2_2},
            {"P1_12", ch.P1_12}, {"P2_12", ch.P2_12}, {"P12_12", ch.P12_12}};
}

} // namespace mpr
