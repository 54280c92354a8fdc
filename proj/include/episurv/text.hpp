/*
 * Copyright (C) 2026 The episurv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace episurv::text
{

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

inline char ascii_lower(char c)
{
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline char ascii_upper(char c)
{
    return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

inline std::string to_lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        c = ascii_lower(c);
    }
    return out;
}

inline bool iequals(std::string_view a, std::string_view b)
{
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ascii_lower(a[i]) != ascii_lower(b[i])) {
            return false;
        }
    }
    return true;
}

inline bool is_valid_utf8(std::string_view s)
{
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        if (c < 0x80) {
            extra = 0;
        }
        else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            extra = 1;
        }
        else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        }
        else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            extra = 3;
        }
        else {
            return false;
        }
        if (i + extra >= s.size() && extra > 0) {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
                return false;
            }
        }
        i += extra + 1;
    }
    return true;
}

inline std::string latin1_to_utf8(std::string_view s)
{
    std::string out;
    out.reserve(s.size() + s.size() / 4);
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (c < 0x80) {
            out.push_back(ch);
        }
        else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

enum class Encoding
{
    Auto, ///< UTF-8 when valid, otherwise Latin-1
    Utf8,
    Latin1,
};

/// Free text as UTF-8. Invalid UTF-8 under Auto is reinterpreted as Latin-1;
/// under Utf8 it is kept byte-for-byte.
inline std::string to_utf8(std::string_view s, Encoding enc)
{
    switch (enc) {
    case Encoding::Latin1:
        return latin1_to_utf8(s);
    case Encoding::Utf8:
        return std::string(s);
    case Encoding::Auto:
        break;
    }
    return is_valid_utf8(s) ? std::string(s) : latin1_to_utf8(s);
}

namespace detail
{
// Base letter for code points U+00C0..U+00FF, 0 where there is none.
inline char latin1_base(unsigned cp)
{
    static constexpr const char* table =
        // C0..CF
        "aaaaaaaceeeeiiii"
        // D0..DF
        "dnooooo\0ouuuuyts"
        // E0..EF
        "aaaaaaaceeeeiiii"
        // F0..FF
        "dnooooo\0ouuuuyty";
    if (cp < 0xC0 || cp > 0xFF) {
        return 0;
    }
    return table[cp - 0xC0];
}
} // namespace detail

/// Case- and accent-folded ASCII form used as a lookup key. Accepts UTF-8 or
/// Latin-1 input; punctuation other than letters and digits becomes a single
/// space, and surrounding whitespace is removed.
inline std::string fold(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    auto emit = [&](char c) {
        if (pending_space && !out.empty()) {
            out.push_back(' ');
        }
        pending_space = false;
        out.push_back(c);
    };
    const bool utf8 = is_valid_utf8(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
                emit(static_cast<char>(c));
            }
            else if (c >= 'A' && c <= 'Z') {
                emit(ascii_lower(static_cast<char>(c)));
            }
            else {
                pending_space = true;
            }
            continue;
        }
        unsigned cp = c;
        if (utf8) {
            if ((c & 0xE0) == 0xC0 && i + 1 < s.size()) {
                cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
                i += 1;
            }
            else {
                // three and four byte sequences carry no foldable letters
                std::size_t extra = (c & 0xF0) == 0xE0 ? 2 : 3;
                i += extra;
                pending_space = true;
                continue;
            }
        }
        if (char base = detail::latin1_base(cp)) {
            emit(base);
        }
        else {
            pending_space = true;
        }
    }
    return out;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s)
{
    s = trim(s);
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    Int value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

/// Strict "YYYY-MM-DD"; nullopt when malformed or not a calendar date.
inline std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view s)
{
    s = trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return std::nullopt;
    }
    auto y = parse_int<int>(s.substr(0, 4));
    auto m = parse_int<unsigned>(s.substr(5, 2));
    auto d = parse_int<unsigned>(s.substr(8, 2));
    if (!y || !m || !d) {
        return std::nullopt;
    }
    std::chrono::year_month_day date{std::chrono::year{*y}, std::chrono::month{*m}, std::chrono::day{*d}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

inline std::string format_date(const std::chrono::year_month_day& d)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

/// Fixed two-decimal rendering with round-half-up (away from zero). Values are
/// nudged by a relative 1e-12 so exact decimal halves survive binary rounding.
inline std::string format_fixed2(double v)
{
    const double scaled = std::abs(v) * 100.0;
    const double rounded = std::floor(scaled * (1.0 + 1e-12) + 0.5);
    auto cents = static_cast<long long>(rounded);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", (v < 0 && cents != 0) ? "-" : "", cents / 100, cents % 100);
    return buf;
}

} // namespace episurv::text
