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

/// Shipped marginal presets, embedded from data/presets at configure time.

#include "episurv/preset_data.hpp"
#include "episurv/text.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace episurv
{

enum class PresetKind
{
    Epi,
    Genomic,
};

struct Preset
{
    std::string_view name;
    PresetKind kind;
    std::string_view json;
};

inline constexpr std::array<Preset, 2> kPresets = {{
    {"epi-national", PresetKind::Epi, preset_data::kEpiNational},
    {"genomic-delta", PresetKind::Genomic, preset_data::kGenomicDelta},
}};

/// Looks a preset up by name or by the annex table it reproduces
/// ("table1".."table7" are epidemiological, "table8".."table13" genomic).
inline std::optional<Preset> find_preset(std::string_view name)
{
    for (const auto& p : kPresets) {
        if (text::iequals(p.name, name)) {
            return p;
        }
    }
    const auto lower = text::to_lower(name);
    if (lower.rfind("table", 0) == 0) {
        if (auto n = text::parse_int<int>(std::string_view(lower).substr(5))) {
            if (*n >= 1 && *n <= 7) {
                return kPresets[0];
            }
            if (*n >= 8 && *n <= 13) {
                return kPresets[1];
            }
        }
    }
    return std::nullopt;
}

} // namespace episurv
