#include "agf/imageio.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

namespace agf {

namespace {

constexpr std::array<char, 4> kTensorMagic = {'T', 'N', 'S', 'R'};

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {
      static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
      static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), bytes.size());
}

std::uint32_t read_u32_le(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size()))
    throw CorruptHeader(std::string("unexpected end of data reading ") + what);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "' for reading");
  return in;
}

// netpbm headers separate tokens with whitespace and allow '#' comments up to
// the end of line.
std::string next_pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw CorruptHeader("truncated netpbm header");
  return tok;
}

int parse_pnm_dimension(const std::string& tok, const char* what) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw CorruptHeader(std::string("malformed netpbm ") + what + " '" + tok + "'");
  long v = 0;
  try {
    v = std::stol(tok);
  } catch (const std::exception&) {
    throw CorruptHeader(std::string("malformed netpbm ") + what + " '" + tok + "'");
  }
  if (v < 1 || v > std::numeric_limits<int>::max())
    throw CorruptHeader(std::string("netpbm ") + what + " out of range");
  return static_cast<int>(v);
}

}  // namespace

Tensor read_image(const std::string& path) {
  std::ifstream in = open_input(path);
  std::array<char, 2> magic{};
  if (!in.read(magic.data(), magic.size())) throw CorruptHeader("file too short for a netpbm magic");
  int channels = 0;
  if (magic[0] == 'P' && magic[1] == '5')
    channels = 1;
  else if (magic[0] == 'P' && magic[1] == '6')
    channels = 3;
  else
    throw UnsupportedFormat("expected binary PGM (P5) or PPM (P6) in '" + path + "'");

  const int width = parse_pnm_dimension(next_pnm_token(in), "width");
  const int height = parse_pnm_dimension(next_pnm_token(in), "height");
  const int maxval = parse_pnm_dimension(next_pnm_token(in), "maxval");
  if (maxval != 255) throw UnsupportedFormat("only maxval 255 netpbm files are supported");
  // The header ends with exactly one whitespace byte before the raster.

  // Validate the declared raster against the actual file size before
  // allocating anything.
  const std::uint64_t needed = std::uint64_t(width) * height * channels;
  const auto raster_start = in.tellg();
  in.seekg(0, std::ios::end);
  const std::uint64_t available = static_cast<std::uint64_t>(in.tellg() - raster_start);
  in.seekg(raster_start);
  if (available < needed)
    throw TruncatedPayload("netpbm raster shorter than the header declares");

  const std::size_t pixel_count = static_cast<std::size_t>(width) * height;
  std::vector<unsigned char> raster(pixel_count * channels);
  if (!in.read(reinterpret_cast<char*>(raster.data()), raster.size()))
    throw TruncatedPayload("netpbm raster shorter than the header declares");

  Tensor t(height, width, channels);
  if (channels == 1) {
    float* p = t.plane(0);
    for (std::size_t i = 0; i < pixel_count; ++i) p[i] = raster[i] / 255.0f;
  } else {
    for (int c = 0; c < 3; ++c) {
      float* p = t.plane(c);
      for (std::size_t i = 0; i < pixel_count; ++i) p[i] = raster[i * 3 + c] / 255.0f;
    }
  }
  return t;
}

void write_image(const std::string& path, const Tensor& t) {
  int channels = t.channels();
  if (channels != 1 && channels != 3)
    throw UnsupportedFormat("netpbm output requires 1 (PGM) or 3 (PPM) channels");
  for (float v : t.values())
    if (!(v >= 0.0f && v <= 1.0f))
      throw ValueOutOfRange("image values must lie in [0, 1] to quantize");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  out << (channels == 1 ? "P5" : "P6") << "\n" << t.width() << " " << t.height() << "\n255\n";

  const std::size_t pixel_count = t.plane_size();
  std::vector<unsigned char> raster(pixel_count * channels);
  for (int c = 0; c < channels; ++c) {
    const float* p = t.plane(c);
    for (std::size_t i = 0; i < pixel_count; ++i) {
      const float scaled = std::floor(p[i] * 255.0f + 0.5f);  // round half up
      raster[channels == 1 ? i : i * 3 + c] = static_cast<unsigned char>(scaled);
    }
  }
  if (!out.write(reinterpret_cast<const char*>(raster.data()), raster.size()))
    throw FileError("failed writing raster to '" + path + "'");
}

Tensor read_tensor_record(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()))
    throw CorruptHeader("unexpected end of data reading tensor magic");
  if (magic != kTensorMagic) throw CorruptHeader("bad tensor magic, expected TNSR");
  const std::uint32_t height = read_u32_le(in, "tensor height");
  const std::uint32_t width = read_u32_le(in, "tensor width");
  const std::uint32_t channels = read_u32_le(in, "tensor channels");
  if (height == 0 || width == 0 || channels == 0)
    throw CorruptHeader("tensor dimensions must be nonzero");
  const std::uint64_t count = std::uint64_t(height) * width * channels;
  if (count > (std::uint64_t(1) << 31))
    throw CorruptHeader("tensor payload implausibly large");

  Tensor t(static_cast<int>(height), static_cast<int>(width), static_cast<int>(channels));
  auto dst = t.values();
  std::vector<unsigned char> buf(4096 * 4);
  std::size_t filled = 0;
  while (filled < count) {
    const std::size_t want = std::min(buf.size() / 4, static_cast<std::size_t>(count - filled));
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(want * 4)))
      throw TruncatedPayload("tensor payload shorter than the header declares");
    for (std::size_t i = 0; i < want; ++i) {
      const std::uint32_t bits = std::uint32_t(buf[i * 4]) | std::uint32_t(buf[i * 4 + 1]) << 8 |
                                 std::uint32_t(buf[i * 4 + 2]) << 16 |
                                 std::uint32_t(buf[i * 4 + 3]) << 24;
      dst[filled + i] = std::bit_cast<float>(bits);
    }
    filled += want;
  }
  if (!t.all_finite()) throw ValueOutOfRange("tensor payload contains non-finite values");
  return t;
}

void write_tensor_record(std::ostream& out, const Tensor& t) {
  out.write(kTensorMagic.data(), kTensorMagic.size());
  write_u32_le(out, static_cast<std::uint32_t>(t.height()));
  write_u32_le(out, static_cast<std::uint32_t>(t.width()));
  write_u32_le(out, static_cast<std::uint32_t>(t.channels()));
  for (float v : t.values()) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    write_u32_le(out, bits);
  }
  if (!out) throw FileError("failed writing tensor record");
}

Tensor read_tensor(const std::string& path) {
  std::ifstream in = open_input(path);
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (file_size < 16) throw CorruptHeader("tensor file too short for a TNSR header");

  // Validate the declared payload against the actual file size before
  // allocating anything.
  std::array<char, 16> header{};
  if (!in.read(header.data(), header.size())) throw CorruptHeader("cannot read TNSR header");
  in.seekg(0, std::ios::beg);
  const auto dim = [&](int offset) {
    return std::uint32_t(static_cast<unsigned char>(header[offset])) |
           std::uint32_t(static_cast<unsigned char>(header[offset + 1])) << 8 |
           std::uint32_t(static_cast<unsigned char>(header[offset + 2])) << 16 |
           std::uint32_t(static_cast<unsigned char>(header[offset + 3])) << 24;
  };
  const std::uint64_t expected = 16 + 4 * (std::uint64_t(dim(4)) * dim(8) * dim(12));
  if (file_size < expected) throw TruncatedPayload("tensor file shorter than the header declares");
  if (file_size > expected) throw CorruptHeader("tensor file has trailing bytes");

  return read_tensor_record(in);
}

void write_tensor(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  write_tensor_record(out, t);
}

Tensor gamma_correct(const Tensor& t, float gamma) {
  if (!(gamma > 0.0f)) throw NonPositiveGamma("gamma must be positive");
  for (float v : t.values())
    if (!(v >= 0.0f && v <= 1.0f)) throw ValueOutOfRange("gamma correction expects values in [0, 1]");
  return pow_elem(t, 1.0f / gamma);
}

}  // namespace agf
