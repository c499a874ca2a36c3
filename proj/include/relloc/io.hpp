#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "relloc/wave1d.hpp"
#include "relloc/wave3d.hpp"

namespace relloc {

/// Comma-delimited text with '#'-prefixed header lines. Values are
/// printed with 17 significant digits, so files round-trip bit-exactly
/// and identical configs produce identical bytes.
void write_csv(const std::filesystem::path& path, const std::string& title,
               const std::vector<std::string>& columns,
               const std::vector<const std::vector<double>*>& values);

std::string format_double(double v);

nlohmann::json to_json(const ScatterOutcome1D& e);
nlohmann::json to_json(const ScatterOutcome3D& e);
nlohmann::json to_json(const EventLog1D& log);
nlohmann::json to_json(const EventLog3D& log);

/// Schema-versioned run record: config snapshot, event logs and result
/// arrays, pretty-printed with sorted keys (byte-stable across reruns).
void write_run_record(const std::filesystem::path& path,
                      const nlohmann::json& record);
nlohmann::json read_run_record(const std::filesystem::path& path);

inline constexpr const char* kRunRecordSchema = "relloc-run/1";

}  // namespace relloc
