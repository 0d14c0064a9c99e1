#pragma once

// File formats:
//  - immersion JSON: {"L": int, "coeffs": {"x": [...], "y": [...], "z": [...]}}
//    with real orthonormal harmonic coefficients in (l, m) lexicographic
//    order; unknown fields are rejected.
//  - report.json documents carry "schema": "immreg/1".

#include "immreg/geometry.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace immreg {

inline constexpr const char* kSchema = "immreg/1";

struct ImmersionCoeffs {
  int L = 0;
  Matrix coeffs;  // num_coeffs(L) x 3
};

ImmersionCoeffs parse_immersion_json(const nlohmann::json& doc);
nlohmann::json immersion_to_json(const ImmersionMap& F);

ImmersionCoeffs read_immersion_file(const std::filesystem::path& path);
void write_immersion_file(const std::filesystem::path& path, const ImmersionMap& F);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Machine-readable error record.
nlohmann::json error_record(const std::string& kind, const std::string& message);

}  // namespace immreg
