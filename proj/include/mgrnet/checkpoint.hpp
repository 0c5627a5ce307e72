#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mgrnet/tensor.hpp"

namespace mgrnet {

// Checkpoint container: magic "MGRNET01", then per parameter: u32 LE name
// length, UTF-8 name, u32 LE rank, u32 LE extents, raw f32 LE values.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& params);

// Raw read of every entry in file order.
std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path);

// Loads into an existing parameter list; the name sets and shapes must match
// exactly, and unknown magic is rejected.
void load_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor*>>& params);

}  // namespace mgrnet
