// Little-endian byte encoding shared by the EMB1 and MDL1 codecs.
#ifndef LSAR_SRC_BYTES_HPP
#define LSAR_SRC_BYTES_HPP

#include "lsar/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

namespace lsar::detail {

class ByteWriter {
public:
    void raw(std::string_view bytes) { out_.append(bytes); }

    template <typename UInt>
    void uint(UInt value) {
        for (std::size_t i = 0; i < sizeof(UInt); ++i) {
            out_.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
        }
    }

    void f32(float value) { uint(std::bit_cast<std::uint32_t>(value)); }
    void f64(double value) { uint(std::bit_cast<std::uint64_t>(value)); }

    void short_string(std::string_view s, const char* what) {
        if (s.size() > 0xFFFF) throw FormatError(std::string(what) + " longer than 65535 bytes");
        uint(static_cast<std::uint16_t>(s.size()));
        raw(s);
    }

    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    std::string_view raw(std::size_t n) {
        need(n);
        auto view = bytes_.substr(pos_, n);
        pos_ += n;
        return view;
    }

    template <typename UInt>
    UInt uint() {
        need(sizeof(UInt));
        std::uint64_t value = 0;
        for (std::size_t i = 0; i < sizeof(UInt); ++i) {
            value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(UInt);
        return static_cast<UInt>(value);
    }

    float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

    std::string short_string() {
        const auto n = uint<std::uint16_t>();
        return std::string(raw(n));
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("unexpected end of file");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lsar::detail

#endif
