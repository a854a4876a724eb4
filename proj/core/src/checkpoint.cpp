#include "cawm/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace cawm {

namespace {

constexpr char kMagic[5] = {'C', 'A', 'W', 'M', '1'};

void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

uint32_t read_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw CorruptCheckpointError("checkpoint truncated while reading " + what);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

float read_f32(std::istream& is, const std::string& what) {
    uint32_t bits = read_u32(is, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_vec(std::ostream& os, const std::vector<int64_t>& v) {
    write_u32(os, static_cast<uint32_t>(v.size()));
    for (int64_t x : v) write_u32(os, static_cast<uint32_t>(x));
}

std::vector<int64_t> read_vec(std::istream& is, const std::string& what) {
    uint32_t n = read_u32(is, what);
    if (n > 1024) throw CorruptCheckpointError("implausible list length in " + what);
    std::vector<int64_t> v(n);
    for (auto& x : v) x = read_u32(is, what);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                     const NetConfig& cfg, float alpha) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 5);
    write_vec(os, cfg.block_counts);
    write_u32(os, static_cast<uint32_t>(cfg.base_channels));
    write_vec(os, cfg.channel_schedule);
    write_u32(os, static_cast<uint32_t>(cfg.ssm_state_dim));
    write_u32(os, static_cast<uint32_t>(cfg.cdsm_depth));
    write_u32(os, static_cast<uint32_t>(cfg.embed_dim));
    write_f32(os, alpha);
    write_u32(os, static_cast<uint32_t>(params.size()));
    for (const auto& [name, t] : params) {
        write_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        const Shape s = t.shape();
        write_u32(os, static_cast<uint32_t>(s.b));
        write_u32(os, static_cast<uint32_t>(s.c));
        write_u32(os, static_cast<uint32_t>(s.h));
        write_u32(os, static_cast<uint32_t>(s.w));
        for (float v : t.data()) write_f32(os, v);
    }
    if (!os) throw IoError("write failure on checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[5];
    if (!is.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0)
        throw CorruptCheckpointError("bad checkpoint magic in " + path);
    LoadedCheckpoint out;
    out.config.block_counts = read_vec(is, "block_counts");
    out.config.base_channels = read_u32(is, "base_channels");
    out.config.channel_schedule = read_vec(is, "channel_schedule");
    out.config.ssm_state_dim = read_u32(is, "ssm_state_dim");
    out.config.cdsm_depth = read_u32(is, "cdsm_depth");
    out.config.embed_dim = read_u32(is, "embed_dim");
    out.alpha = read_f32(is, "alpha");
    const uint32_t n = read_u32(is, "entry count");
    out.entries.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        CheckpointEntry e;
        uint32_t name_len = read_u32(is, "entry name length");
        if (name_len > 4096)
            throw CorruptCheckpointError("implausible entry name length");
        e.name.resize(name_len);
        if (!is.read(e.name.data(), name_len))
            throw CorruptCheckpointError("checkpoint truncated in entry name");
        e.shape.b = read_u32(is, e.name);
        e.shape.c = read_u32(is, e.name);
        e.shape.h = read_u32(is, e.name);
        e.shape.w = read_u32(is, e.name);
        e.values.resize(static_cast<size_t>(e.shape.numel()));
        for (auto& v : e.values) v = read_f32(is, e.name);
        out.entries.push_back(std::move(e));
    }
    return out;
}

void restore_params(ParamStore<float>& params, const LoadedCheckpoint& ckpt) {
    if (params.size() != ckpt.entries.size())
        throw CorruptCheckpointError(
            "checkpoint entry count " + std::to_string(ckpt.entries.size()) +
            " != parameter count " + std::to_string(params.size()));
    for (const auto& e : ckpt.entries) {
        if (!params.contains(e.name))
            throw CorruptCheckpointError("checkpoint entry '" + e.name +
                                         "' has no matching parameter");
        Tensor<float>& p = params.get(e.name);
        if (!(p.shape() == e.shape))
            throw CorruptCheckpointError("shape mismatch for entry '" + e.name + "': " +
                                         e.shape.str() + " vs " + p.shape().str());
        p.data() = e.values;
    }
}

}  // namespace cawm
