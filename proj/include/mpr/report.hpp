#pragma once

#include "mpr/bvp.hpp"
#include "mpr/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace mpr {

std::string fnv1a_hex(const std::string& s);

// CSV with a provenance comment line and a header row
class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::string& config_hash, std::uint64_t seed,
              const std::vector<std::string>& header);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell((long long)v); }
    CsvWriter& cell(const std::string& s);
    CsvWriter& cell(const char* s) { return cell(std::string(s)); }
    void end_row();

private:
    std::ostream& os_;
    std::size_t ncols_;
    std::size_t col_ = 0;
};

// shortest round-trip representation; non-finite values print as inf / -inf / nan
std::string fmt(double v);
// JSON number, or the fmt() string when not finite
nlohmann::json num(double v);

nlohmann::json to_json(const SimStats& st);
nlohmann::json to_json(const DelayReport& d);
nlohmann::json to_json(const ChannelParams& ch);

} // namespace mpr
