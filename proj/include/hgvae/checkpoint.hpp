#pragma once

#include <filesystem>
#include <string>

#include "hgvae/config.hpp"
#include "hgvae/trainer.hpp"

namespace hgvae {

/// Training state plus what is needed to rebuild the trainer around it.
struct Checkpoint {
  TrainingConfig config;
  TrainerState state;
  std::string data_dir;  // dataset the run was trained on, may be empty
};

/// Binary container: magic `HGV1`, little-endian, a u32 entry count, then per
/// entry a u32-prefixed name, a u8 dtype (0 f64, 1 i64, 2 utf8), a u32 rank,
/// u64 dims and the raw payload. Matrices are stored row-major.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Throws DataError on a malformed file or a config hash mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hgvae
