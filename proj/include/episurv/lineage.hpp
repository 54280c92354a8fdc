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

#include "episurv/schema.hpp"
#include "episurv/text.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace episurv
{

enum class LineageError
{
    Empty,
    Malformed,
};

/// Pango lineage grammar: an alphabetic alias root followed by zero or more
/// numeric dot-separated segments ("B", "B.1.617.2", "AY.20"). Letters are
/// upper-cased; returns the canonical form or the reason it was rejected.
struct LineageParse
{
    std::string canonical;
    std::optional<LineageError> error;
};

inline LineageParse parse_lineage(std::string_view text)
{
    text = text::trim(text);
    if (text.empty()) {
        return {{}, LineageError::Empty};
    }
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size() && ((text[i] >= 'A' && text[i] <= 'Z') || (text[i] >= 'a' && text[i] <= 'z'))) {
        out.push_back(text::ascii_upper(text[i]));
        ++i;
    }
    if (out.empty()) {
        return {{}, LineageError::Malformed};
    }
    while (i < text.size()) {
        if (text[i] != '.') {
            return {{}, LineageError::Malformed};
        }
        out.push_back('.');
        ++i;
        const std::size_t start = i;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
            out.push_back(text[i]);
            ++i;
        }
        if (i == start) {
            return {{}, LineageError::Malformed};
        }
    }
    return {std::move(out), std::nullopt};
}

inline bool is_valid_lineage(std::string_view text) { return !parse_lineage(text).error; }

/// True when `prefix` names `lineage` or one of its dotted descendants.
/// Both arguments must be canonical.
inline bool lineage_has_prefix(std::string_view lineage, std::string_view prefix)
{
    if (lineage.size() < prefix.size() || lineage.compare(0, prefix.size(), prefix) != 0) {
        return false;
    }
    return lineage.size() == prefix.size() || lineage[prefix.size()] == '.';
}

struct SampleRecord
{
    std::string accession;
    std::optional<Date> collection_date;
    std::string state; // division, verbatim
    std::string pango_lineage; // canonical
    std::string gisaid_clade;
    std::string patient_status; // verbatim; bucketed by genomics
    std::optional<int> age_years;
    Sex sex = Sex::Unspecified;
    std::optional<std::string> vaccine;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

} // namespace episurv
