#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <type_traits>

namespace owc::detail {

template <class T>
T to_little_endian(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::little) {
        return value;
    } else {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }
}

template <class T>
void write_le(std::ostream& os, T value) {
    value = to_little_endian(value);
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
bool read_le(std::istream& is, T& value) {
    if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) return false;
    value = to_little_endian(value);
    return true;
}

}  // namespace owc::detail
