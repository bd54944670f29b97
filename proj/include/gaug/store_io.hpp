#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaug/embedding_store.hpp"
#include "gaug/error.hpp"
#include "gaug/neighborhood_index.hpp"

namespace gaug {

enum class StoreErrorCode {
    Io,
    BadMagic,
    VersionMismatch,
    Truncated,
    ChecksumMismatch,
    InvalidPayload,
};

const char* to_string(StoreErrorCode code);

class StoreError : public Error {
public:
    StoreError(StoreErrorCode code, const std::string& what)
        : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
    StoreErrorCode code() const { return code_; }

private:
    StoreErrorCode code_;
};

inline constexpr char kEmbeddingMagic[8] = {'G', 'A', 'U', 'G', 'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;
inline constexpr char kIndexMagic[8] = {'G', 'A', 'U', 'G', 'I', 'D', 'X', '1'};
inline constexpr std::uint32_t kIndexFormatVersion = 1;

// Embedding file, little-endian:
//   "GAUGEMB1" | u32 version | u64 N | u32 d | u8 has_labels |
//   N*d f32 row-major | [N u32 labels] | u32 crc32(all preceding bytes)
std::vector<std::uint8_t> encode_store(const EmbeddingStore& store);
EmbeddingStore decode_store(const std::vector<std::uint8_t>& bytes);

void persist_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore load_store(const std::filesystem::path& path);

// Index file: "GAUGIDX1" | u32 version | u64 N | u32 k | N*k u32 ids | u32 crc32
std::vector<std::uint8_t> encode_index(const NeighborhoodIndex& index);
NeighborhoodIndex decode_index(const std::vector<std::uint8_t>& bytes);

void persist_index(const NeighborhoodIndex& index, const std::filesystem::path& path);
NeighborhoodIndex load_index(const std::filesystem::path& path);

}  // namespace gaug
