#pragma once

// Binary checkpoint format, little-endian, magic "CAWM1":
//   magic[5] | config | alpha:f32 | n_entries:u32 |
//   { name_len:u32, name, shape:4xu32, data:f32[numel] } per entry
// Entries follow ParamStore insertion order, so save -> load -> save is
// byte-identical.

#include <string>
#include <vector>

#include "cawm/network.hpp"
#include "cawm/optim.hpp"

namespace cawm {

struct CheckpointEntry {
    std::string name;
    Shape shape;
    std::vector<float> values;
};

struct LoadedCheckpoint {
    NetConfig config;
    float alpha = 0.5f;
    std::vector<CheckpointEntry> entries;
};

void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                     const NetConfig& cfg, float alpha);

LoadedCheckpoint load_checkpoint(const std::string& path);

// Copies loaded values into a freshly constructed store; names and shapes
// must match exactly.
void restore_params(ParamStore<float>& params, const LoadedCheckpoint& ckpt);

}  // namespace cawm
