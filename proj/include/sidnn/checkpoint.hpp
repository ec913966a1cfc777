#pragma once

// Binary checkpoint:
//   8 bytes   magic "SIDCKPT1"
//   uint32    header length L (little-endian)
//   L bytes   JSON header: model spec, data widths, seed, standardizer, config echo
//   uint64    parameter count P (little-endian)
//   P * 8     parameters as IEEE-754 binary64, little-endian, in for_each_param order

#include <filesystem>

#include <json.hpp>

#include "sidnn/experiment.hpp"

namespace sidnn {

struct Checkpoint {
  ExperimentConfig config;
  std::size_t n_inputs = 0;
  std::size_t n_outputs = 0;
  Standardizer standardizer;
  HammersteinModel model;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sidnn
