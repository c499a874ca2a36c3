#include "relloc/io.hpp"

#include <cstdio>
#include <fstream>

#include "relloc/errors.hpp"

namespace relloc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::string& title,
               const std::vector<std::string>& columns,
               const std::vector<const std::vector<double>*>& values) {
  if (columns.size() != values.size() || values.empty())
    throw invalid_parameter_error("write_csv: column/value mismatch");
  const std::size_t rows = values.front()->size();
  for (const auto* v : values)
    if (v->size() != rows)
      throw invalid_parameter_error("write_csv: ragged columns");

  std::ofstream out(path);
  if (!out)
    throw invalid_parameter_error("write_csv: cannot open " + path.string());
  out << "# " << title << "\n# columns: ";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  out << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < values.size(); ++c)
      out << (c ? "," : "") << format_double((*values[c])[r]);
    out << "\n";
  }
}

namespace {
const char* kind_name(EventKind k) {
  return k == EventKind::NonScattered ? "NS" : "S";
}
}  // namespace

nlohmann::json to_json(const ScatterOutcome1D& e) {
  nlohmann::json j;
  j["kind"] = kind_name(e.kind);
  if (e.kind == EventKind::Scattered) j["theta"] = e.theta;
  j["wavelength"] = e.wavelength;
  return j;
}

nlohmann::json to_json(const ScatterOutcome3D& e) {
  nlohmann::json j;
  j["kind"] = kind_name(e.kind);
  if (e.kind == EventKind::Scattered) {
    j["theta"] = e.theta;
    j["phi"] = e.phi;
  }
  j["wavelength"] = e.wavelength;
  return j;
}

namespace {
template <class Log>
nlohmann::json log_to_json(const Log& log) {
  nlohmann::json j;
  j["seed"] = log.seed;
  j["photon_count"] = log.photon_count();
  auto& events = j["events"] = nlohmann::json::array();
  for (const auto& e : log.events) events.push_back(to_json(e));
  return j;
}
}  // namespace

nlohmann::json to_json(const EventLog1D& log) { return log_to_json(log); }
nlohmann::json to_json(const EventLog3D& log) { return log_to_json(log); }

void write_run_record(const std::filesystem::path& path,
                      const nlohmann::json& record) {
  std::ofstream out(path);
  if (!out)
    throw invalid_parameter_error("write_run_record: cannot open " +
                                  path.string());
  out << record.dump(2) << "\n";
}

nlohmann::json read_run_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw invalid_parameter_error("read_run_record: cannot open " +
                                  path.string());
  return nlohmann::json::parse(in);
}

}  // namespace relloc
