#pragma once

#include <iosfwd>
#include <string>

#include "agf/tensor.hpp"

namespace agf {

// Binary netpbm: PGM (P5) reads as one channel, PPM (P6) as three, maxval 255.
// Pixels map to [0, 1] on read; writes expect [0, 1] and quantize with
// round-half-up.
Tensor read_image(const std::string& path);
void write_image(const std::string& path, const Tensor& t);

// Raw tensor container: "TNSR" magic, three little-endian u32 dims, then the
// planar float32 payload. Lossless round trip.
Tensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const Tensor& t);

// Stream-level TNSR records; the weights archive concatenates these.
Tensor read_tensor_record(std::istream& in);
void write_tensor_record(std::ostream& out, const Tensor& t);

// out = t^(1/gamma) per element, t in [0, 1], gamma > 0.
Tensor gamma_correct(const Tensor& t, float gamma);

}  // namespace agf
