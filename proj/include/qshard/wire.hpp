#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "qshard/transport.hpp"

namespace qshard::wire {

/// Socket frame layout, fixed regardless of host endianness:
///   tag     u32 little-endian
///   length  u64 little-endian, number of complex elements
///   payload length * (re f64 LE, im f64 LE)
inline constexpr std::size_t header_bytes = 12;

namespace detail {

inline void put_u32(std::uint8_t* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline void put_u64(std::uint8_t* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint32_t get_u32(const std::uint8_t* in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(const std::uint8_t* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

inline void put_f64(std::uint8_t* out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline double get_f64(const std::uint8_t* in) { return std::bit_cast<double>(get_u64(in)); }

} // namespace detail

inline std::vector<std::uint8_t> encode_frame(std::uint32_t tag, std::span<const cxd> payload) {
    std::vector<std::uint8_t> out(header_bytes + payload.size() * 16);
    detail::put_u32(out.data(), tag);
    detail::put_u64(out.data() + 4, payload.size());
    std::uint8_t* w = out.data() + header_bytes;
    for (const cxd& c : payload) {
        detail::put_f64(w, c.real());
        detail::put_f64(w + 8, c.imag());
        w += 16;
    }
    return out;
}

struct FrameHeader {
    std::uint32_t tag;
    std::uint64_t length;
};

inline FrameHeader decode_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < header_bytes) throw TransportError("frame: truncated header");
    return {detail::get_u32(bytes.data()), detail::get_u64(bytes.data() + 4)};
}

inline void decode_payload(std::span<const std::uint8_t> bytes, std::span<cxd> out) {
    if (bytes.size() != out.size() * 16) throw TransportError("frame: truncated payload");
    const std::uint8_t* r = bytes.data();
    for (cxd& c : out) {
        c = cxd(detail::get_f64(r), detail::get_f64(r + 8));
        r += 16;
    }
}

} // namespace qshard::wire
