#include "agf/attention.hpp"

#include <array>
#include <fstream>
#include <map>

#include "agf/imageio.hpp"

namespace agf {

namespace {

constexpr const char* kEntryNames[] = {"branch_o.weight", "branch_o.bias", "branch_i.weight",
                                       "branch_i.bias",   "head.weight",   "head.bias"};

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

}  // namespace

AttentionWeights default_attention_weights(int channels) {
  if (channels < 1) throw InvalidDimension("attention weights need at least one channel");
  const float c = static_cast<float>(channels);
  LinearMap branch{Tensor(channels, channels, 1), Tensor(1, channels, 1)};
  for (int i = 0; i < channels; ++i) branch.weight.at(i, i) = 1.0f / c;
  LinearMap head{Tensor::full(1, channels, 1, 1.0f / c), Tensor(1, 1, 1)};
  return {branch, branch, std::move(head)};
}

void save_weights(const std::string& path, const AttentionWeights& weights) {
  weights.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  const Tensor* blocks[] = {&weights.branch_filtering.weight, &weights.branch_filtering.bias,
                            &weights.branch_guidance.weight,  &weights.branch_guidance.bias,
                            &weights.head.weight,             &weights.head.bias};
  for (int i = 0; i < 6; ++i) {
    const std::string name = kEntryNames[i];
    write_u32_le(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor_record(out, *blocks[i]);
  }
  if (!out) throw FileError("failed writing weights archive '" + path + "'");
}

AttentionWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "' for reading");

  std::map<std::string, Tensor> entries;
  while (true) {
    std::array<unsigned char, 4> len_bytes{};
    if (!in.read(reinterpret_cast<char*>(len_bytes.data()), len_bytes.size())) {
      if (in.gcount() == 0) break;  // clean end of archive
      throw CorruptHeader("truncated entry name length in weights archive");
    }
    const std::uint32_t len = std::uint32_t(len_bytes[0]) | std::uint32_t(len_bytes[1]) << 8 |
                              std::uint32_t(len_bytes[2]) << 16 | std::uint32_t(len_bytes[3]) << 24;
    if (len == 0 || len > 4096) throw CorruptHeader("implausible entry name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw CorruptHeader("truncated entry name");
    entries.insert_or_assign(std::move(name), read_tensor_record(in));
  }

  const auto take = [&](const char* name) -> Tensor {
    auto it = entries.find(name);
    if (it == entries.end())
      throw MissingEntry(std::string("weights archive lacks entry '") + name + "'");
    return std::move(it->second);
  };
  AttentionWeights w{{take("branch_o.weight"), take("branch_o.bias")},
                     {take("branch_i.weight"), take("branch_i.bias")},
                     {take("head.weight"), take("head.bias")}};
  w.validate();
  return w;
}

}  // namespace agf
