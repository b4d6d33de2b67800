#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "agf/imageio.hpp"
#include "oracles.hpp"

using agf::Tensor;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "agf_imageio_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_SUITE("imageio") {

TEST_CASE("P5 bytes scale to [0,1] by 1/255") {
  const auto p = scratch_file("direct.pgm");
  write_bytes(p, std::string("P5\n2 2\n255\n") + '\x00' + '\xff' + '\x80' + '\x40');
  const Tensor t = agf::read_image(p.string());
  REQUIRE(t.height() == 2);
  REQUIRE(t.width() == 2);
  REQUIRE(t.channels() == 1);
  CHECK(t.at(0, 0) == 0.0f);
  CHECK(t.at(0, 1) == 1.0f);
  CHECK(t.at(1, 0) == 128.0f / 255.0f);
  CHECK(t.at(1, 1) == 64.0f / 255.0f);
}

TEST_CASE("image round trip stays within the quantization half-step") {
  std::mt19937 rng(31);
  for (int channels : {1, 3}) {
    const Tensor t = oracles::random_tensor(rng, 9, 7, channels, 0.0f, 1.0f);
    const auto p = scratch_file(channels == 1 ? "rt.pgm" : "rt.ppm");
    agf::write_image(p.string(), t);
    const Tensor back = agf::read_image(p.string());
    REQUIRE(back.channels() == channels);
    CHECK(oracles::max_abs_diff(back, t) <= 1.0 / 510.0 + 1e-9);
  }
}

TEST_CASE("netpbm header with comments parses") {
  const auto p = scratch_file("comments.pgm");
  write_bytes(p, std::string("P5\n# a comment\n 2 # inline\n1\n255\n") + '\x10' + '\x20');
  const Tensor t = agf::read_image(p.string());
  CHECK(t.width() == 2);
  CHECK(t.height() == 1);
}

TEST_CASE("unsupported magic is rejected") {
  const auto p = scratch_file("bad.pgm");
  write_bytes(p, "P7\n2 2\n255\n    ");
  CHECK_THROWS_AS((void)agf::read_image(p.string()), agf::UnsupportedFormat);
}

TEST_CASE("short raster is rejected") {
  const auto p = scratch_file("short.pgm");
  write_bytes(p, std::string("P5\n2 2\n255\n") + '\x00' + '\x01');
  CHECK_THROWS_AS((void)agf::read_image(p.string()), agf::TruncatedPayload);
}

TEST_CASE("huge declared raster is rejected against the file size, not allocated") {
  const auto p = scratch_file("huge.pgm");
  write_bytes(p, "P5\n60000 60000\n255\nxx");
  CHECK_THROWS_AS((void)agf::read_image(p.string()), agf::TruncatedPayload);
}

TEST_CASE("write rejects values outside [0,1] and odd channel counts") {
  Tensor t = Tensor::full(2, 2, 1, 0.5f);
  t.at(0, 0) = 1.5f;
  CHECK_THROWS_AS(agf::write_image(scratch_file("oob.pgm").string(), t), agf::ValueOutOfRange);
  const Tensor two(2, 2, 2);
  CHECK_THROWS_AS(agf::write_image(scratch_file("c2.pgm").string(), two), agf::UnsupportedFormat);
}

TEST_CASE("write quantizes with round-half-up") {
  Tensor t(1, 2, 1);
  t.at(0, 0) = 0.5f / 255.0f;   // exactly half a step above zero
  t.at(0, 1) = 0.49f / 255.0f;  // just below half a step
  const auto p = scratch_file("round.pgm");
  agf::write_image(p.string(), t);
  std::ifstream in(p, std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const unsigned char hi = static_cast<unsigned char>(contents[contents.size() - 2]);
  const unsigned char lo = static_cast<unsigned char>(contents[contents.size() - 1]);
  CHECK(hi == 1);
  CHECK(lo == 0);
}

TEST_CASE("tensor round trip is bitwise") {
  std::mt19937 rng(32);
  const Tensor t = oracles::random_tensor(rng, 5, 7, 3, -10.0f, 10.0f);
  const auto p = scratch_file("rt.tnsr");
  agf::write_tensor(p.string(), t);
  const Tensor back = agf::read_tensor(p.string());
  REQUIRE(back.same_shape(t));
  CHECK(std::memcmp(back.values().data(), t.values().data(), t.size() * sizeof(float)) == 0);
}

TEST_CASE("truncated tensor payload is rejected before allocation") {
  // Header claims 10x10x4 = 400 floats but only 399 follow.
  std::string bytes = "TNSR";
  const auto push_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  push_u32(10);
  push_u32(10);
  push_u32(4);
  bytes.append(399 * 4, '\0');
  const auto p = scratch_file("trunc.tnsr");
  write_bytes(p, bytes);
  CHECK_THROWS_AS((void)agf::read_tensor(p.string()), agf::TruncatedPayload);
}

TEST_CASE("empty or unrecognized tensor files are rejected") {
  const auto p = scratch_file("empty.tnsr");
  write_bytes(p, "");
  CHECK_THROWS_AS((void)agf::read_tensor(p.string()), agf::CorruptHeader);
  const auto q = scratch_file("magic.tnsr");
  write_bytes(q, "XXXX\0\0\0\0\0\0\0\0\0\0\0\0");
  CHECK_THROWS_AS((void)agf::read_tensor(q.string()), agf::CorruptHeader);
}

TEST_CASE("missing file reports an I/O error") {
  CHECK_THROWS_AS((void)agf::read_tensor("/nonexistent/nowhere.tnsr"), agf::FileError);
  CHECK_THROWS_AS((void)agf::read_image("/nonexistent/nowhere.pgm"), agf::FileError);
}

TEST_CASE("gamma correction") {
  SUBCASE("gamma 1 is the identity") {
    std::mt19937 rng(33);
    const Tensor t = oracles::random_tensor(rng, 4, 4, 1, 0.0f, 1.0f);
    const Tensor g = agf::gamma_correct(t, 1.0f);
    CHECK(oracles::max_abs_diff(g, t) == 0.0);
  }
  SUBCASE("0 and 1 are fixed points for any gamma") {
    Tensor t(1, 2, 1);
    t.at(0, 1) = 1.0f;
    for (float gamma : {0.4f, 1.0f, 2.2f, 5.0f}) {
      const Tensor g = agf::gamma_correct(t, gamma);
      CHECK(g.at(0, 0) == 0.0f);
      CHECK(g.at(0, 1) == 1.0f);
    }
  }
  SUBCASE("quarter at gamma 2 maps to one half") {
    const Tensor t = Tensor::full(1, 1, 1, 0.25f);
    CHECK(agf::gamma_correct(t, 2.0f).at(0, 0) == doctest::Approx(0.5f));
  }
  SUBCASE("domain violations") {
    const Tensor t = Tensor::full(1, 1, 1, 0.5f);
    CHECK_THROWS_AS((void)agf::gamma_correct(t, 0.0f), agf::NonPositiveGamma);
    CHECK_THROWS_AS((void)agf::gamma_correct(t, -1.0f), agf::NonPositiveGamma);
    const Tensor bad = Tensor::full(1, 1, 1, 1.5f);
    CHECK_THROWS_AS((void)agf::gamma_correct(bad, 2.2f), agf::ValueOutOfRange);
  }
}

}  // TEST_SUITE
