#pragma once

// Little-endian primitives shared by the binary file formats.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "overseg/errors.hpp"

namespace overseg::detail {

class LeWriter {
public:
    explicit LeWriter(std::ostream& sink) : sink_(sink) {}

    void bytes(const void* data, std::size_t n) {
        sink_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!sink_) throw IoError("write failure after " + std::to_string(written_) + " bytes");
        written_ += n;
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }

    std::size_t written() const noexcept { return written_; }

private:
    void put(std::uint64_t v, int n) {
        unsigned char buf[8];
        for (int i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(buf, static_cast<std::size_t>(n));
    }

    std::ostream& sink_;
    std::size_t written_ = 0;
};

/// Reader that reports the byte offset of whatever it failed on.
class LeReader {
public:
    LeReader(std::istream& source, const char* format) : source_(source), format_(format) {}

    void bytes(void* data, std::size_t n, const char* what) {
        source_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(source_.gcount()) != n)
            throw FormatError(std::string(format_) + ": truncated " + what + " at byte " + std::to_string(offset_),
                              offset_);
        offset_ += n;
    }
    std::uint8_t u8(const char* what) {
        std::uint8_t v;
        bytes(&v, 1, what);
        return v;
    }
    std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(get(2, what)); }
    std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
    std::uint64_t u64(const char* what) { return get(8, what); }
    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    bool at_end() { return source_.peek() == std::char_traits<char>::eof(); }

    std::uint64_t offset() const noexcept { return offset_; }

    [[noreturn]] void fail(const std::string& what, std::uint64_t at) const {
        throw FormatError(std::string(format_) + ": " + what + " at byte " + std::to_string(at), at);
    }

private:
    std::uint64_t get(int n, const char* what) {
        unsigned char buf[8];
        bytes(buf, static_cast<std::size_t>(n), what);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }

    std::istream& source_;
    const char* format_;
    std::uint64_t offset_ = 0;
};

}  // namespace overseg::detail
