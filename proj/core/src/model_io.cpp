// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <fstream>

#include "hullforge/errors.hpp"
#include "hullforge/net.hpp"

namespace hullforge {

namespace {

constexpr char kMagic[4] = {'V', 'A', 'E', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw Error("parse", "model file " + path + ": truncated");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

void save_model(const Model<float>& model, const std::filesystem::path& path) {
  const NetPlan plan = make_plan(model.config);
  if (model.params.size() != plan.param_count) {
    throw Error("validation", "parameter vector does not match the architecture");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write model file " + path.string());
  out.write(kMagic, 4);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(model.config.patch_size));
  write_u32(out, static_cast<std::uint32_t>(model.config.latent_dim));
  write_u32(out, static_cast<std::uint32_t>(model.config.kernel));
  write_u32(out, static_cast<std::uint32_t>(model.config.encoder_channels.size()));
  for (const int c : model.config.encoder_channels) write_u32(out, static_cast<std::uint32_t>(c));
  for (const int f : model.config.skip_flags) write_u32(out, static_cast<std::uint32_t>(f));

  const auto chain = layer_chain(model.config);
  write_u32(out, static_cast<std::uint32_t>(chain.size()));
  for (const auto& layer : chain) {
    write_u32(out, static_cast<std::uint32_t>(layer.kind));
    write_u32(out, static_cast<std::uint32_t>(layer.in_channels));
    write_u32(out, static_cast<std::uint32_t>(layer.out_channels));
    write_u32(out, static_cast<std::uint32_t>(layer.kernel));
    write_u32(out, static_cast<std::uint32_t>(layer.stride));
    write_u32(out, static_cast<std::uint32_t>(layer.skip_tag));
  }

  write_u32(out, static_cast<std::uint32_t>(model.params.size() & 0xffffffffu));
  write_u32(out, static_cast<std::uint32_t>(model.params.size() >> 32));
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(model.params.data()),
            static_cast<std::streamsize>(model.params.size() * 4));
  if (!out) throw Error("io", "short write to model file " + path.string());
}

Model<float> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open model file " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error("parse", "model file " + path.string() + ": bad magic");
  }
  const std::uint32_t version = read_u32(in, path.string());
  if (version != kFormatVersion) {
    throw Error("parse", "model file " + path.string() + ": unsupported format version");
  }

  Model<float> model;
  model.config.patch_size = static_cast<int>(read_u32(in, path.string()));
  model.config.latent_dim = static_cast<int>(read_u32(in, path.string()));
  model.config.kernel = static_cast<int>(read_u32(in, path.string()));
  const std::uint32_t layers = read_u32(in, path.string());
  if (layers == 0 || layers > 64) {
    throw Error("parse", "model file " + path.string() + ": implausible encoder depth");
  }
  for (std::uint32_t i = 0; i < layers; ++i) {
    model.config.encoder_channels.push_back(static_cast<int>(read_u32(in, path.string())));
  }
  for (std::uint32_t i = 0; i < layers; ++i) {
    model.config.skip_flags.push_back(static_cast<int>(read_u32(in, path.string())));
  }

  NetPlan plan;
  try {
    plan = make_plan(model.config);
  } catch (const Error& e) {
    throw Error("parse", "model file " + path.string() + ": " + e.what());
  }

  // The stored chain is redundant with the config; require an exact match
  // so a corrupted or hand-edited header cannot slip through.
  const auto expect = layer_chain(model.config);
  const std::uint32_t chain_len = read_u32(in, path.string());
  if (chain_len != expect.size()) {
    throw Error("validation", "model file " + path.string() + ": layer chain length mismatch");
  }
  for (const auto& want : expect) {
    const auto kind = read_u32(in, path.string());
    const auto in_ch = read_u32(in, path.string());
    const auto out_ch = read_u32(in, path.string());
    const auto kernel = read_u32(in, path.string());
    const auto stride = read_u32(in, path.string());
    const auto tag = read_u32(in, path.string());
    if (kind != static_cast<std::uint32_t>(want.kind) ||
        in_ch != static_cast<std::uint32_t>(want.in_channels) ||
        out_ch != static_cast<std::uint32_t>(want.out_channels) ||
        kernel != static_cast<std::uint32_t>(want.kernel) ||
        stride != static_cast<std::uint32_t>(want.stride) ||
        tag != static_cast<std::uint32_t>(want.skip_tag)) {
      throw Error("validation", "model file " + path.string() + ": layer chain mismatch");
    }
  }

  const std::uint64_t lo = read_u32(in, path.string());
  const std::uint64_t hi = read_u32(in, path.string());
  const std::uint64_t count = lo | hi << 32;
  if (count != plan.param_count) {
    throw Error("validation", "model file " + path.string() + ": parameter count mismatch");
  }
  model.params.resize(count);
  in.read(reinterpret_cast<char*>(model.params.data()), static_cast<std::streamsize>(count * 4));
  if (static_cast<std::uint64_t>(in.gcount()) != count * 4) {
    throw Error("parse", "model file " + path.string() + ": truncated parameter payload");
  }
  return model;
}

}  // namespace hullforge
