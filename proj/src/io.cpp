#include "immreg/io.hpp"

#include "immreg/error.hpp"

#include <fstream>

namespace immreg {

using nlohmann::json;

ImmersionCoeffs parse_immersion_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("immersion file: top level must be an object");
  for (const auto& [key, _] : doc.items())
    if (key != "L" && key != "coeffs") throw ConfigError("immersion file: unknown field '" + key + "'");
  if (!doc.contains("L") || !doc["L"].is_number_integer())
    throw ConfigError("immersion file: 'L' must be an integer");
  if (!doc.contains("coeffs") || !doc["coeffs"].is_object())
    throw ConfigError("immersion file: 'coeffs' must be an object");
  const json& c = doc["coeffs"];
  for (const auto& [key, _] : c.items())
    if (key != "x" && key != "y" && key != "z")
      throw ConfigError("immersion file: unknown coefficient field '" + key + "'");
  ImmersionCoeffs out;
  out.L = doc["L"].get<int>();
  if (out.L < 1) throw ConfigError("immersion file: L must be >= 1");
  const int n = num_coeffs(out.L);
  out.coeffs.resize(n, 3);
  const char* names[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    if (!c.contains(names[a]) || !c[names[a]].is_array())
      throw ConfigError(std::string("immersion file: missing coefficient array '") + names[a] + "'");
    const json& arr = c[names[a]];
    if (static_cast<int>(arr.size()) != n)
      throw ConfigError(std::string("immersion file: '") + names[a] + "' must have (L+1)^2 = " +
                        std::to_string(n) + " entries");
    for (int k = 0; k < n; ++k) {
      if (!arr[k].is_number()) throw ConfigError("immersion file: non-numeric coefficient");
      out.coeffs(k, a) = arr[k].get<double>();
    }
  }
  return out;
}

json immersion_to_json(const ImmersionMap& F) {
  const Matrix c = F.coeff_matrix();
  json coeffs = json::object();
  const char* names[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    std::vector<double> v(c.rows());
    for (int k = 0; k < c.rows(); ++k) v[k] = c(k, a);
    coeffs[names[a]] = v;
  }
  return json{{"L", F.grid().L()}, {"coeffs", coeffs}};
}

ImmersionCoeffs read_immersion_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open immersion file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("immersion file '" + path.string() + "': " + e.what());
  }
  return parse_immersion_json(doc);
}

void write_immersion_file(const std::filesystem::path& path, const ImmersionMap& F) {
  write_json(path, immersion_to_json(F));
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json error_record(const std::string& kind, const std::string& message) {
  return json{{"schema", kSchema}, {"status", "error"}, {"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace immreg
