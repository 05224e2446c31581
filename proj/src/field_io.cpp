#include "ciflow/field_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace ciflow::io {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error("field container truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

nlohmann::json field_sidecar(const VectorField& v, const nlohmann::json& metadata) {
  const auto& g = v.grid();
  return {{"format", "ciflow-field"},
          {"version", 1},
          {"d", g.dim()},
          {"N", g.n()},
          {"L", g.period()},
          {"components", g.dim()},
          {"dtype", "float64-le"},
          {"header_bytes", kFieldHeaderBytes},
          {"layout", "component-major; row-major samples, last axis fastest"},
          {"metadata", metadata}};
}

void write_field(const std::filesystem::path& path, const VectorField& v, const nlohmann::json& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto& g = v.grid();
  put_le<std::int64_t>(out, g.dim());
  put_le<std::int64_t>(out, g.n());
  put_le<double>(out, g.period());
  put_le<std::int64_t>(out, g.dim());
  for (int j = 0; j < g.dim(); ++j)
    for (double x : v.physical(j)) put_le<double>(out, x);
  if (!out) throw std::runtime_error("failed writing " + path.string());

  std::ofstream side(path.string() + ".json");
  side << field_sidecar(v, metadata).dump(2) << '\n';
}

VectorField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto d = get_le<std::int64_t>(in);
  const auto n = get_le<std::int64_t>(in);
  const auto period = get_le<double>(in);
  const auto comps = get_le<std::int64_t>(in);
  if (comps != d) throw std::runtime_error("field container: component count differs from dimension");
  const SpectralGrid grid(static_cast<int>(d), static_cast<int>(n), period);
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(comps), std::vector<double>(grid.size()));
  for (auto& comp : samples)
    for (auto& x : comp) x = get_le<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("field container has trailing bytes");
  return VectorField::from_physical(grid, samples);
}

void write_field_csv(const std::filesystem::path& path, const VectorField& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto& g = v.grid();
  static constexpr const char* kCoord[] = {"x", "y", "z"};
  for (int a = 0; a < g.dim(); ++a) out << kCoord[a] << ',';
  for (int j = 0; j < g.dim(); ++j) out << 'u' << j + 1 << (j + 1 < g.dim() ? "," : "\n");
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec x = g.position(p);
    for (int a = 0; a < g.dim(); ++a) out << format_double(x[a]) << ',';
    for (int j = 0; j < g.dim(); ++j) out << format_double(v.physical(j)[p]) << (j + 1 < g.dim() ? "," : "\n");
  }
}

}  // namespace ciflow::io
