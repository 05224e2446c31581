#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ciflow/field_io.hpp"
#include "ciflow/operators.hpp"
#include "doctest.h"

using namespace ciflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ciflow_test_field_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("write/read round trip preserves samples bit for bit") {
  for (int d : {2, 3}) {
    for (int r = 0; r < 5; ++r) {
      const SpectralGrid g(d, d == 2 ? 16 : 8, 1.0 + r);
      const auto v = random_field(g, 40 + r, 3, 0.5, r % 2 == 0);
      const auto path = scratch("rt.bin");
      io::write_field(path, v);
      const auto w = io::read_field(path);
      CHECK(w.grid() == g);
      for (int j = 0; j < d; ++j)
        CHECK(std::memcmp(w.physical(j).data(), v.physical(j).data(), v.physical(j).size_bytes()) == 0);
      const auto again = scratch("rt2.bin");
      io::write_field(again, w);
      CHECK(slurp(path) == slurp(again));
    }
  }
}

TEST_CASE("container header layout") {
  const SpectralGrid g(2, 8, 3.5);
  const auto v = VectorField::from_function(g, [](const Vec& x) { return Vec{x[0] * 0.0 + 1.0, 2.0}; });
  const auto path = scratch("header.bin");
  io::write_field(path, v, {{"label", "const"}});
  const std::string bytes = slurp(path);
  REQUIRE(bytes.size() == io::kFieldHeaderBytes + 2 * 64 * sizeof(double));
  // Little-endian decoding by hand.
  const auto u64 = [&](std::size_t off) {
    std::uint64_t x = 0;
    for (int b = 7; b >= 0; --b) x = (x << 8) | static_cast<unsigned char>(bytes[off + b]);
    return x;
  };
  const auto f64 = [&](std::size_t off) {
    const std::uint64_t bits = u64(off);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  };
  CHECK(u64(0) == 2);
  CHECK(u64(8) == 8);
  CHECK(f64(16) == 3.5);
  CHECK(u64(24) == 2);
  CHECK(f64(32) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f64(32 + 64 * 8) == doctest::Approx(2.0).epsilon(1e-15));

  const auto side = nlohmann::json::parse(slurp(path.string() + ".json"));
  CHECK(side["format"] == "ciflow-field");
  CHECK(side["d"] == 2);
  CHECK(side["N"] == 8);
  CHECK(side["L"] == 3.5);
  CHECK(side["header_bytes"] == io::kFieldHeaderBytes);
  CHECK(side["metadata"]["label"] == "const");
}

TEST_CASE("row-major sample order, last axis fastest") {
  const SpectralGrid g(2, 4);
  const auto v = VectorField::from_function(g, [](const Vec& x) { return Vec{std::sin(x[0]), std::sin(x[1])}; });
  const auto path = scratch("order.bin");
  io::write_field(path, v);
  const std::string bytes = slurp(path);
  const auto sample = [&](int comp, int i0, int i1) {
    double x;
    std::memcpy(&x, bytes.data() + io::kFieldHeaderBytes + 8 * (comp * 16 + i0 * 4 + i1), 8);
    return x;
  };
  const double h = g.spacing();
  CHECK(sample(0, 1, 0) == doctest::Approx(std::sin(h)).epsilon(1e-14));
  CHECK(sample(1, 0, 1) == doctest::Approx(std::sin(h)).epsilon(1e-14));
  CHECK(std::abs(sample(0, 0, 1)) <= 1e-15);
}

TEST_CASE("malformed containers are rejected") {
  const SpectralGrid g(2, 4);
  const auto v = random_field(g, 1, 1, 0.0, false);
  const auto path = scratch("bad.bin");
  io::write_field(path, v);
  const std::string good = slurp(path);

  const auto put = [&](const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
  };
  put(good + "x");
  CHECK_THROWS(io::read_field(path));
  put(good.substr(0, good.size() - 1));
  CHECK_THROWS(io::read_field(path));
  std::string wrong = good;
  wrong[24] = 3;
  put(wrong);
  CHECK_THROWS(io::read_field(path));
  CHECK_THROWS(io::read_field(scratch("missing.bin")));
}

TEST_CASE("field CSV columns") {
  const SpectralGrid g(3, 4);
  const auto v = random_field(g, 2, 1, 0.0, false);
  const auto path = scratch("field.csv");
  io::write_field_csv(path, v);
  std::istringstream in(slurp(path));
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,z,u1,u2,u3");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == g.size());
}

TEST_CASE("doubles are printed in shortest round-trip form") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(1e-300) == "1e-300");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(io::format_double(x)) == x);
}
