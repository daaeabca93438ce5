#pragma once

#include <array>
#include <cstdint>

namespace secnet {

// Arithmetic in GF(2^8) with the AES reduction polynomial
// x^8 + x^4 + x^3 + x + 1 (0x11b). Addition is XOR; multiplication goes
// through log/exp tables built from the generator 0x03.
namespace gf_detail {

constexpr std::uint8_t xtime_mul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t p = 0;
    for (int i = 0; i < 8; ++i) {
        if (b & 1) p ^= a;
        bool hi = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (hi) a ^= 0x1b;
        b >>= 1;
    }
    return p;
}

struct Tables {
    std::array<std::uint8_t, 256> log{};
    std::array<std::uint8_t, 510> exp{};
};

constexpr Tables build_tables() {
    Tables t{};
    std::uint8_t x = 1;
    for (int i = 0; i < 255; ++i) {
        t.exp[i] = x;
        t.log[x] = static_cast<std::uint8_t>(i);
        x = xtime_mul(x, 0x03);
    }
    for (int i = 255; i < 510; ++i) t.exp[i] = t.exp[i - 255];
    t.log[0] = 0;  // unused sentinel
    return t;
}

inline constexpr Tables tables = build_tables();

}  // namespace gf_detail

class gf256 {
public:
    constexpr gf256() = default;
    constexpr explicit gf256(std::uint8_t v) : v_(v) {}

    constexpr std::uint8_t value() const { return v_; }
    constexpr bool is_zero() const { return v_ == 0; }

    friend constexpr gf256 operator+(gf256 a, gf256 b) { return gf256(static_cast<std::uint8_t>(a.v_ ^ b.v_)); }
    friend constexpr gf256 operator-(gf256 a, gf256 b) { return a + b; }

    friend constexpr gf256 operator*(gf256 a, gf256 b) {
        if (a.v_ == 0 || b.v_ == 0) return gf256(0);
        const auto& t = gf_detail::tables;
        return gf256(t.exp[t.log[a.v_] + t.log[b.v_]]);
    }

    constexpr gf256 inverse() const {
        // inverse of zero is undefined; callers guard
        const auto& t = gf_detail::tables;
        return gf256(t.exp[255 - t.log[v_]]);
    }

    friend constexpr gf256 operator/(gf256 a, gf256 b) { return a * b.inverse(); }

    constexpr gf256& operator+=(gf256 o) { v_ ^= o.v_; return *this; }
    constexpr gf256& operator*=(gf256 o) { *this = *this * o; return *this; }

    friend constexpr bool operator==(gf256 a, gf256 b) { return a.v_ == b.v_; }
    friend constexpr bool operator!=(gf256 a, gf256 b) { return a.v_ != b.v_; }

private:
    std::uint8_t v_ = 0;
};

constexpr gf256 gf_zero{0};
constexpr gf256 gf_one{1};

}  // namespace secnet
