#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "kgrec/common/error.hpp"

namespace kgrec::io {

// Little-endian primitives shared by the checkpoint and index formats.

template <typename T>
concept Scalar = std::is_arithmetic_v<T>;

namespace detail {
template <Scalar T>
T to_little(T value) {
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
        return value;
    } else {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        }
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }
}
}  // namespace detail

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(std::string_view raw) { out_.write(raw.data(), static_cast<std::streamsize>(raw.size())); }

    template <Scalar T>
    void put(T value) {
        value = detail::to_little(value);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    template <Scalar T>
    void put_all(std::span<const T> values) {
        if constexpr (std::endian::native == std::endian::little) {
            out_.write(reinterpret_cast<const char*>(values.data()),
                       static_cast<std::streamsize>(values.size_bytes()));
        } else {
            for (T v : values) put(v);
        }
    }

    void check(const std::string& what) const {
        if (!out_) throw Error("write failed: " + what);
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string bytes(std::size_t n) {
        std::string raw(n, '\0');
        in_.read(raw.data(), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("truncated input");
        return raw;
    }

    template <Scalar T>
    T get() {
        T value{};
        in_.read(reinterpret_cast<char*>(&value), sizeof(T));
        if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) {
            throw FormatError("truncated input");
        }
        return detail::to_little(value);
    }

    template <Scalar T>
    void get_all(std::span<T> out) {
        in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes()));
        if (in_.gcount() != static_cast<std::streamsize>(out.size_bytes())) {
            throw FormatError("truncated input");
        }
        if constexpr (std::endian::native != std::endian::little) {
            for (T& v : out) v = detail::to_little(v);
        }
    }

    /// Guards length prefixes against absurd values from corrupt files.
    std::uint64_t get_count(std::uint64_t limit, const char* what) {
        auto n = get<std::uint64_t>();
        if (n > limit) throw FormatError(std::string("implausible ") + what + " count");
        return n;
    }

    [[nodiscard]] bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::istream& in_;
};

}  // namespace kgrec::io
