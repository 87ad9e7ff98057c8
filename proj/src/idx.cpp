#include "posittrain/idx.hpp"

#include <fstream>
#include <iterator>

#include <openssl/evp.h>
#include <zlib.h>

namespace posittrain {

std::size_t idx_dtype_size(std::uint8_t dtype) {
    switch (dtype) {
        case idx_dtype::kUByte:
        case idx_dtype::kSByte: return 1;
        case idx_dtype::kShort: return 2;
        case idx_dtype::kInt:
        case idx_dtype::kFloat: return 4;
        case idx_dtype::kDouble: return 8;
        default: return 0;
    }
}

std::size_t IdxArray::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

IdxParseError::IdxParseError(const std::string& what, std::size_t offset)
    : std::runtime_error("IDX parse error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw IdxParseError("truncated magic", bytes.size());
    if (bytes[0] != 0 || bytes[1] != 0) throw IdxParseError("bad magic (expected two zero bytes)", bytes[0] != 0 ? 0 : 1);
    IdxArray out;
    out.dtype = bytes[2];
    const std::size_t elem = idx_dtype_size(out.dtype);
    if (elem == 0) throw IdxParseError("unsupported dtype code " + std::to_string(out.dtype), 2);
    const std::size_t ndims = bytes[3];
    if (ndims == 0) throw IdxParseError("zero dimensions", 3);

    std::size_t offset = 4;
    if (bytes.size() < offset + 4 * ndims) throw IdxParseError("truncated dimension header", bytes.size());
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndims; ++i, offset += 4) {
        out.dims.push_back(read_be32(bytes, offset));
        count *= out.dims.back();
    }
    const std::size_t payload = count * elem;
    if (bytes.size() < offset + payload) throw IdxParseError("truncated payload", bytes.size());
    if (bytes.size() > offset + payload) throw IdxParseError("trailing bytes after payload", offset + payload);
    out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
    return out;
}

std::vector<std::uint8_t> serialize_idx(const IdxArray& array) {
    if (idx_dtype_size(array.dtype) == 0) throw std::invalid_argument("serialize_idx: unsupported dtype");
    if (array.dims.empty() || array.dims.size() > 255) throw std::invalid_argument("serialize_idx: bad rank");
    if (array.payload.size() != array.element_count() * idx_dtype_size(array.dtype))
        throw std::invalid_argument("serialize_idx: payload does not match dims");
    std::vector<std::uint8_t> out{0, 0, array.dtype, static_cast<std::uint8_t>(array.dims.size())};
    for (auto d : array.dims) write_be32(out, d);
    out.insert(out.end(), array.payload.begin(), array.payload.end());
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> packed) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw std::runtime_error("zlib init failed");
    zs.next_in = const_cast<Bytef*>(packed.data());
    zs.avail_in = static_cast<uInt>(packed.size());
    std::vector<std::uint8_t> out;
    std::uint8_t chunk[1 << 16];
    int rc = Z_OK;
    while (rc == Z_OK) {
        zs.next_out = chunk;
        zs.avail_out = sizeof chunk;
        rc = inflate(&zs, Z_NO_FLUSH);
        out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
        if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
    }
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("corrupt or truncated gzip stream");
    return out;
}

IdxArray read_idx_file(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    if (path.extension() == ".gz") bytes = gunzip(bytes);
    return parse_idx(bytes);
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string md5_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_md5(), nullptr) != 1)
        throw std::runtime_error("MD5 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

}  // namespace posittrain
