#pragma once

#include "tnet/nn/layers.hpp"

#include <cstdint>
#include <string>

namespace tnet::nn {

// Binary checkpoint: magic "TNETCKPT", u32 version, model kind, u64 seed,
// then named parameter blocks (name, rank, dims, float32 little-endian
// values). A plain-text manifest with names, shapes and counts is written
// alongside as <path>.manifest.txt.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const std::string& model_kind, std::uint64_t seed,
                     const ParamSet& params);

// Loads into an already-constructed parameter set; every name and shape
// must match exactly. Returns the stored seed.
std::uint64_t load_checkpoint(const std::string& path, const std::string& expected_kind,
                              ParamSet& params);

std::string checkpoint_kind(const std::string& path);

} // namespace tnet::nn
