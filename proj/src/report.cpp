#include "charflow/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "charflow/error.hpp"

namespace charflow::report {

using nlohmann::json;

json envelope(const std::string& command, const Scenario& scenario, bool pass, json results,
              bool timestamp) {
  json tol = json::object();
  for (const auto& [k, v] : scenario.tolerances) tol[k] = v;
  json j = {
      {"schema", "charflow." + command + "/1"},
      {"command", command},
      {"scenario", {{"name", scenario.name}, {"origin", scenario.origin}}},
      {"tolerances", tol},
      {"verdict", pass ? "pass" : "fail"},
      {"results", std::move(results)},
  };
  if (timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = buf;
  }
  return j;
}

json error_object(const std::string& stage, const std::string& message, const std::string& kind) {
  return {{"schema", "charflow.error/1"}, {"stage", stage}, {"message", message}, {"kind", kind}};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string curve_csv(const CharacteristicCurve& curve, const SolutionField& field) {
  std::ostringstream os;
  os << "# schema: charflow.curve/1\n";
  os << "t,x,u_along,provenance\n";
  const auto u = values_along(curve, field);
  const std::string prov = curve.provenance_label();
  for (std::size_t i = 0; i < curve.size(); ++i)
    os << format_double(curve.t[i]) << ',' << format_double(curve.x[i]) << ',' << format_double(u[i])
       << ',' << prov << '\n';
  return os.str();
}

std::string param_csv(const LagrangianParam& param, const SolutionField& field) {
  std::ostringstream os;
  os << "# schema: charflow.param/1\n";
  os << "y,t,x,u,source\n";
  const auto src = extract_lagrangian_source(param, field);
  for (std::size_t j = 0; j < param.size(); ++j) {
    const auto& c = param.columns[j];
    const auto u = values_along(c, field);
    for (std::size_t i = 0; i < c.size(); ++i)
      os << format_double(param.y[j]) << ',' << format_double(c.t[i]) << ',' << format_double(c.x[i]) << ','
         << format_double(u[i]) << ',' << format_double(src[j][i].value) << '\n';
  }
  return os.str();
}

void write_text(const std::string& dir, const std::string& file, const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = fs::path(dir) / file;
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  out << text;
}

}  // namespace charflow::report
