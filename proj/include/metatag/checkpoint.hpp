#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "metatag/tagger.hpp"

namespace metatag {

// Binary container, all integers little-endian:
//   "PTAG", u32 version, u64 blob length, UTF-8 config blob,
//   then for each parameter listed in the blob:
//   u64 name length, name, u64 rank, u64 extents..., binary64 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Canonical "key = value" description of the model: hyperparameters, tag
// inventory, source languages and vocabularies, parameter order. The last
// line is a fingerprint over the lines before it.
std::string config_blob(TaggerModel& model);
std::string model_fingerprint(TaggerModel& model);

std::string serialize_checkpoint(TaggerModel& model);
TaggerModel deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(TaggerModel& model, const std::string& path);
TaggerModel load_checkpoint(const std::string& path);
// Also insists on a particular tag inventory (same tags, same order).
TaggerModel load_checkpoint(const std::string& path, std::span<const std::string> expected_tags);

}  // namespace metatag
