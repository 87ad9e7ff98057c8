#pragma once

// IDX container: 00 00 <dtype> <ndims>, ndims big-endian u32 sizes, payload.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace posittrain {

namespace idx_dtype {
inline constexpr std::uint8_t kUByte = 0x08;
inline constexpr std::uint8_t kSByte = 0x09;
inline constexpr std::uint8_t kShort = 0x0B;
inline constexpr std::uint8_t kInt = 0x0C;
inline constexpr std::uint8_t kFloat = 0x0D;
inline constexpr std::uint8_t kDouble = 0x0E;
}  // namespace idx_dtype

/// Element size in bytes; 0 for unknown codes.
std::size_t idx_dtype_size(std::uint8_t dtype);

struct IdxArray {
    std::uint8_t dtype = idx_dtype::kUByte;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload;  // big-endian elements as stored

    std::size_t element_count() const;
    /// 00 00 dtype ndims as a u32, e.g. 0x00000803 for ubyte images.
    std::uint32_t magic() const { return (std::uint32_t{dtype} << 8) | static_cast<std::uint32_t>(dims.size()); }

    friend bool operator==(const IdxArray&, const IdxArray&) = default;
};

class IdxParseError : public std::runtime_error {
public:
    IdxParseError(const std::string& what, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

IdxArray parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx(const IdxArray& array);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// Inflates a gzip member.
std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> packed);
/// Reads and parses an IDX file; a ".gz" path is inflated first.
IdxArray read_idx_file(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Lowercase hex MD5 digest.
std::string md5_hex(std::span<const std::uint8_t> bytes);

}  // namespace posittrain
