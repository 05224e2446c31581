#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "ciflow/vector_field.hpp"

namespace ciflow::io {

// Field container layout (all little-endian):
//   int64 d | int64 N | float64 L | int64 component count |
//   component-major float64 physical samples, each row-major (last axis fastest).
// A JSON sidecar `<file>.json` repeats the header and carries free-form metadata.

inline constexpr std::size_t kFieldHeaderBytes = 32;

void write_field(const std::filesystem::path& path, const VectorField& v,
                 const nlohmann::json& metadata = nlohmann::json::object());
VectorField read_field(const std::filesystem::path& path);

/// Header + layout description written next to every field file.
nlohmann::json field_sidecar(const VectorField& v, const nlohmann::json& metadata);

/// CSV for plotting: x,y[,z],u1,u2[,u3], one row per grid point.
void write_field_csv(const std::filesystem::path& path, const VectorField& v);

/// Shortest round-trippable decimal form of a double, as used in every CSV.
std::string format_double(double value);

}  // namespace ciflow::io
