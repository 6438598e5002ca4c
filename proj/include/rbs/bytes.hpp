#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rbs {

using Bytes = std::vector<uint8_t>;

inline void put_u8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void put_u32(Bytes& out, uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void put_u64(Bytes& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

// Length-prefixed variable field.
inline void put_bytes(Bytes& out, const Bytes& b) {
    put_u32(out, static_cast<uint32_t>(b.size()));
    out.insert(out.end(), b.begin(), b.end());
}

inline void put_str(Bytes& out, std::string_view s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

inline Bytes from_string(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

std::string to_hex(const uint8_t* data, size_t n);

inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

}  // namespace rbs
