#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace radonlab {

// Exact rational over 64-bit terms with 128-bit intermediates. The region
// arithmetic works with numbers like 1/2 + eps/(2*N_P) where eps arrives as
// a decimal string, so magnitudes stay far below the overflow guard.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    static long long checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Rational overflow");
        return static_cast<long long>(v);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(checked(static_cast<__int128>(a.num) * b.den +
                                static_cast<__int128>(b.num) * a.den),
                        checked(static_cast<__int128>(a.den) * b.den));
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(checked(static_cast<__int128>(a.num) * b.den -
                                static_cast<__int128>(b.num) * a.den),
                        checked(static_cast<__int128>(a.den) * b.den));
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(checked(static_cast<__int128>(a.num) * b.num),
                        checked(static_cast<__int128>(a.den) * b.den));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num == 0) throw std::invalid_argument("Rational: division by zero");
        return Rational(checked(static_cast<__int128>(a.num) * b.den),
                        checked(static_cast<__int128>(a.den) * b.num));
    }

    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

    Rational abs() const { return num < 0 ? Rational(-num, den) : *this; }
    Rational inverse() const { return Rational(1) / *this; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }

    // Accepts "3", "-1/4" and decimal forms like "0.06" (parsed exactly).
    static Rational parse(const std::string& text) {
        if (text.empty()) throw std::invalid_argument("Rational: empty string");
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
        }
        const auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(std::stoll(text));
        const bool neg = text[0] == '-';
        std::string digits = text.substr(neg ? 1 : 0);
        const auto d = digits.find('.');
        std::string frac = digits.substr(d + 1);
        if (frac.size() > 17) frac = frac.substr(0, 17);  // decimal provenance precision
        long long den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den = checked(static_cast<__int128>(den) * 10);
        const std::string ip = digits.substr(0, d);
        const long long whole = ip.empty() ? 0 : std::stoll(ip);
        const long long part = frac.empty() ? 0 : std::stoll(frac);
        const long long n = checked(static_cast<__int128>(whole) * den + part);
        return Rational(neg ? -n : n, den);
    }
};

}  // namespace radonlab
