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

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace episurv
{

/// Streaming delimited-text reader.
///
/// Reads one physical line at a time into a reused buffer; a quoted field may
/// span lines. Fields are unquoted into a second reused buffer, so resident
/// memory is proportional to the longest row, never to the input size.
class CsvReader
{
public:
    explicit CsvReader(std::istream& in, char delimiter = ',',
                       std::uint64_t byte_limit = std::numeric_limits<std::uint64_t>::max())
        : in_(in)
        , delimiter_(delimiter)
        , byte_limit_(byte_limit)
    {
    }

    void set_delimiter(char d) noexcept { delimiter_ = d; }
    char delimiter() const noexcept { return delimiter_; }

    /// Splits the current row again under a new delimiter (header sniffing).
    void resplit(char d, std::vector<std::string_view>& fields)
    {
        delimiter_ = d;
        fields.clear();
        split(fields);
    }

    /// The current row as read, before field splitting.
    std::string_view raw_row() const noexcept { return row_; }

    /// Reads the next row. Empty lines are skipped. Returns false at end of input
    /// or once the byte limit has been consumed. Views stay valid until the next call.
    bool next(std::vector<std::string_view>& fields)
    {
        fields.clear();
        while (true) {
            if (!read_line(row_)) {
                return false;
            }
            row_start_line_ = line_;
            // a row with an odd number of quotes continues on the next physical line
            while (std::count(row_.begin(), row_.end(), '"') % 2 != 0) {
                if (!read_line(continuation_)) {
                    break;
                }
                row_.push_back('\n');
                row_.append(continuation_);
            }
            if (!row_.empty()) {
                break;
            }
        }
        split(fields);
        peak_buffer_ = std::max(peak_buffer_, row_.capacity() + unquoted_.capacity() + continuation_.capacity());
        return true;
    }

    /// 1-based physical line number where the last row started.
    std::uint64_t line() const noexcept { return row_start_line_; }
    std::uint64_t bytes_read() const noexcept { return bytes_; }
    /// Largest combined capacity of the internal row buffers seen so far.
    std::size_t peak_buffer_bytes() const noexcept { return peak_buffer_; }
    std::size_t longest_row() const noexcept { return longest_row_; }

    /// Starting line number for readers that begin mid-file.
    void set_line_offset(std::uint64_t line) noexcept { line_ = line; }

private:
    bool read_line(std::string& out)
    {
        if (bytes_ >= byte_limit_) {
            return false;
        }
        if (!std::getline(in_, out)) {
            return false;
        }
        ++line_;
        bytes_ += out.size() + (in_.eof() ? 0 : 1);
        if (!out.empty() && out.back() == '\r') {
            out.pop_back();
        }
        if (line_ == 1 && out.size() >= 3 && out.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            out.erase(0, 3);
        }
        longest_row_ = std::max(longest_row_, out.size());
        return true;
    }

    void split(std::vector<std::string_view>& fields)
    {
        // Quoted fields are copied into unquoted_ so escaped quotes collapse.
        // Reserve up front so views into unquoted_ are never invalidated.
        unquoted_.clear();
        if (unquoted_.capacity() < row_.size()) {
            unquoted_.reserve(row_.size());
        }
        const std::string_view row(row_);
        std::size_t i = 0;
        while (true) {
            if (i < row.size() && row[i] == '"') {
                const std::size_t begin = unquoted_.size();
                ++i;
                while (i < row.size()) {
                    if (row[i] == '"') {
                        if (i + 1 < row.size() && row[i + 1] == '"') {
                            unquoted_.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    unquoted_.push_back(row[i]);
                    ++i;
                }
                // tolerate stray characters between closing quote and delimiter
                while (i < row.size() && row[i] != delimiter_) {
                    unquoted_.push_back(row[i]);
                    ++i;
                }
                fields.emplace_back(unquoted_.data() + begin, unquoted_.size() - begin);
            }
            else {
                const std::size_t end = std::min(row.find(delimiter_, i), row.size());
                fields.push_back(row.substr(i, end - i));
                i = end;
            }
            if (i >= row.size()) {
                break;
            }
            ++i; // delimiter
            if (i == row.size()) {
                fields.emplace_back();
                break;
            }
        }
    }

    std::istream& in_;
    char delimiter_;
    std::uint64_t byte_limit_;
    std::string row_;
    std::string continuation_;
    std::string unquoted_;
    std::uint64_t line_ = 0;
    std::uint64_t row_start_line_ = 0;
    std::uint64_t bytes_ = 0;
    std::size_t peak_buffer_ = 0;
    std::size_t longest_row_ = 0;
};

} // namespace episurv
