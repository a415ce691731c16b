#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// FIPS 180-4 SHA-256, used to fingerprint run artifacts and checkpoint
// configuration blocks.

namespace qcw {

struct Sha256 {
    Sha256();
    void update(const void* data, std::size_t n);
    std::string hex_digest();  // finalizes; call once

  private:
    void process_block(const std::uint8_t* p);
    std::uint32_t h_[8];
    std::uint8_t buf_[64];
    std::size_t buf_len_ = 0;
    std::uint64_t total_ = 0;
};

std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);  // throws on unreadable file

} // namespace qcw
