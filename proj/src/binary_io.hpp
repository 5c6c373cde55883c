// SPDX-License-Identifier: Apache-2.0
//
// mfa-chest: low-rank mixture models for MMSE channel estimation
// Copyright (C) 2026 The mfa-chest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Little-endian primitive I/O with byte-offset tracking for error reports.

#include "mfa/types.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string_view>

namespace mfa::detail
{

class LeWriter
{
  public:
    explicit LeWriter(std::ostream &out) : out_(out) {}

    void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

    template <typename T> void scalar(T value)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        std::array<char, sizeof(T)> buf{};
        if constexpr (std::is_floating_point_v<T>)
        {
            using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
            put_le(std::bit_cast<U>(value), buf);
        }
        else
        {
            put_le(static_cast<std::make_unsigned_t<T>>(value), buf);
        }
        out_.write(buf.data(), buf.size());
    }

    void complex(Complex z)
    {
        scalar(z.real());
        scalar(z.imag());
    }

    void check(const char *what)
    {
        if (!out_)
            throw std::runtime_error(std::string("write failed: ") + what);
    }

  private:
    template <typename U, std::size_t S> static void put_le(U v, std::array<char, S> &buf)
    {
        for (std::size_t i = 0; i < S; ++i)
            buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }

    std::ostream &out_;
};

class LeReader
{
  public:
    explicit LeReader(std::istream &in) : in_(in) {}

    std::uint64_t offset() const { return offset_; }

    void expect_magic(std::string_view magic)
    {
        std::array<char, 4> buf{};
        read_raw(buf.data(), magic.size(), "magic");
        if (std::string_view(buf.data(), magic.size()) != magic)
            throw FormatError("bad magic, expected \"" + std::string(magic) + "\"", 0);
    }

    template <typename T> T scalar(const char *what)
    {
        std::array<unsigned char, sizeof(T)> buf{};
        read_raw(reinterpret_cast<char *>(buf.data()), sizeof(T), what);
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                     std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                        std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
        U v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<U>(buf[i]) << (8 * i);
        if constexpr (std::is_floating_point_v<T>)
            return std::bit_cast<T>(v);
        else
            return static_cast<T>(v);
    }

    Complex complex(const char *what)
    {
        const double re = scalar<double>(what);
        const double im = scalar<double>(what);
        return {re, im};
    }

    // Bytes left in a seekable stream, or -1 when the stream cannot seek.
    std::int64_t remaining()
    {
        const auto here = in_.tellg();
        if (here < 0)
            return -1;
        in_.seekg(0, std::ios::end);
        const auto end = in_.tellg();
        in_.seekg(here);
        if (end < 0 || !in_)
        {
            in_.clear();
            return -1;
        }
        return static_cast<std::int64_t>(end - here);
    }

    // Rejects payload sizes that the stream can no longer satisfy before allocating.
    void require_available(std::uint64_t bytes, const char *what)
    {
        const std::int64_t left = remaining();
        if (left >= 0 && static_cast<std::uint64_t>(left) < bytes)
            throw FormatError(std::string("truncated input while reading ") + what,
                              offset_ + static_cast<std::uint64_t>(left));
    }

    // Fails if anything follows the expected payload.
    void expect_end()
    {
        if (in_.peek() != std::char_traits<char>::eof())
            throw FormatError("trailing bytes after payload", offset_);
    }

  private:
    void read_raw(char *dst, std::size_t n, const char *what)
    {
        in_.read(dst, static_cast<std::streamsize>(n));
        const auto got = static_cast<std::size_t>(in_.gcount());
        if (got != n)
            throw FormatError(std::string("truncated input while reading ") + what, offset_ + got);
        offset_ += n;
    }

    std::istream &in_;
    std::uint64_t offset_ = 0;
};

} // namespace mfa::detail
