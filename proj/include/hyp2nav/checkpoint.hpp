#pragma once

#include <string>
#include <vector>

#include "hyp2nav/tensor.hpp"

// Versioned checkpoint container: a small JSON header (format version, array
// of {name, rows, cols, manifold} descriptors, plus free-form metadata such
// as embedding dimension and layer sizes) followed by raw row-major float64
// data for each parameter in header order.

namespace hyp2nav::ckpt {

inline constexpr char kMagic[8] = {'H', '2', 'N', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kVersion = 1;

// `meta` is a JSON object serialized as text (the caller builds it with the
// json library); stored verbatim in the header.
void save(const std::string& path, const std::vector<const ad::Param*>& params,
          const std::string& meta_json);

// Loads into existing params, matching by name. Every stored param must find
// a target with the same shape; extra targets (not present in the file) are
// an error too. Throws std::runtime_error with a descriptive message.
void load(const std::string& path, const std::vector<ad::Param*>& params);

// Reads just the metadata JSON text without touching parameter data.
std::string read_meta(const std::string& path);

}  // namespace hyp2nav::ckpt
