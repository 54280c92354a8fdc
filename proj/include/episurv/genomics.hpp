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

/// Variant catalog, Pango pattern matching, patient-status typology and the
/// variant / clade / state cross-tabs built over genomic samples.

#include "episurv/csv.hpp"
#include "episurv/epi_metrics.hpp"
#include "episurv/errors.hpp"
#include "episurv/lineage.hpp"
#include "episurv/text.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace episurv
{

struct PangoAlternative
{
    std::string root; // canonical lineage
    bool include_descendants = false;

    friend bool operator==(const PangoAlternative&, const PangoAlternative&) = default;
};

struct PangoPattern
{
    std::vector<PangoAlternative> alternatives;

    std::string to_string() const
    {
        std::string out;
        for (const auto& alt : alternatives) {
            if (!out.empty()) {
                out.push_back('+');
            }
            out += alt.root;
            if (alt.include_descendants) {
                out += ".x";
            }
        }
        return out;
    }

    friend bool operator==(const PangoPattern&, const PangoPattern&) = default;
};

/// "B.1.1.7+Q.x": alternatives split on '+', whitespace trimmed, a trailing
/// ".x" / ".X" marks the alternative as covering its descendants.
inline PangoPattern parse_pattern(std::string_view text)
{
    if (text::trim(text).empty()) {
        throw PatternError("empty pattern");
    }
    PangoPattern p;
    std::size_t pos = 0;
    while (true) {
        const std::size_t plus = text.find('+', pos);
        std::string_view seg = text::trim(text.substr(pos, plus == std::string_view::npos ? text.npos : plus - pos));
        if (seg.empty()) {
            throw PatternError("malformed segment: empty alternative in '" + std::string(text) + "'");
        }
        PangoAlternative alt;
        if (seg.size() > 2 && seg[seg.size() - 2] == '.' && (seg.back() == 'x' || seg.back() == 'X')) {
            alt.include_descendants = true;
            seg.remove_suffix(2);
        }
        auto parsed = parse_lineage(seg);
        if (parsed.error) {
            throw PatternError("malformed segment '" + std::string(seg) + "'");
        }
        alt.root = std::move(parsed.canonical);
        p.alternatives.push_back(std::move(alt));
        if (plus == std::string_view::npos) {
            break;
        }
        pos = plus + 1;
    }
    return p;
}

/// Expects a canonical lineage (see parse_lineage).
inline bool matches(const PangoPattern& p, std::string_view lineage)
{
    for (const auto& alt : p.alternatives) {
        if (alt.include_descendants ? lineage_has_prefix(lineage, alt.root) : lineage == alt.root) {
            return true;
        }
    }
    return false;
}

enum class VariantCategory
{
    VOC,
    VOI,
};

constexpr std::string_view label_of(VariantCategory c) { return c == VariantCategory::VOC ? "VOC" : "VOI"; }

struct VariantDefinition
{
    std::string who_label;
    VariantCategory category = VariantCategory::VOC;
    std::vector<std::string> gisaid_clades;
    PangoPattern pango;
    std::vector<std::string> aliases;
};

/// Ordered variant list; classification takes the first matching definition.
class VariantCatalog
{
public:
    VariantCatalog() = default;

    explicit VariantCatalog(std::vector<VariantDefinition> variants)
        : variants_(std::move(variants))
    {
        std::set<std::string> seen;
        for (const auto& v : variants_) {
            if (!seen.insert(text::fold(v.who_label)).second) {
                throw DataError("duplicate variant label " + v.who_label);
            }
        }
    }

    /// The nine VOC/VOI definitions, Alpha through Mu.
    static const VariantCatalog& builtin()
    {
        static const VariantCatalog catalog = [] {
            auto def = [](std::string label, VariantCategory cat, std::vector<std::string> clades,
                          std::string_view pattern, std::vector<std::string> aliases = {}) {
                return VariantDefinition{std::move(label), cat, std::move(clades), parse_pattern(pattern),
                                         std::move(aliases)};
            };
            using C = VariantCategory;
            return VariantCatalog({
                def("Alpha", C::VOC, {"GRY"}, "B.1.1.7+Q.x"),
                def("Beta", C::VOC, {"GH/501Y.V2"}, "B.1.351+B.1.351.2+B.1.351.3"),
                def("Gamma", C::VOC, {"GR/501Y.V3"}, "P.1+P.1.x"),
                def("Delta", C::VOC, {"G/478K.V1"}, "B.1.617.2+AY.x"),
                def("Eta", C::VOI, {"G/484K.V3"}, "B.1.525"),
                def("Iota", C::VOI, {"HG/253G.V1"}, "B.1.526", {"Jota"}),
                def("Kappa", C::VOI, {"G/452R.V3"}, "B.1.617.1"),
                def("Lambda", C::VOI, {"GR/452Q.V1"}, "C.37"),
                // the tabulated Mu lineages are B.1.621 and B.1.621.1
                def("Mu", C::VOI, {"GH"}, "B.1.621+B.1.621.1"),
            });
        }();
        return catalog;
    }

    /// Delimited catalog with columns who_label, category, clades (';'-separated),
    /// pango_pattern. Tab or comma, sniffed from the header.
    static VariantCatalog load(std::istream& in)
    {
        CsvReader reader(in, ',');
        std::vector<std::string_view> fields;
        if (!reader.next(fields)) {
            throw DataError("catalog file is empty");
        }
        if (reader.raw_row().find('\t') != std::string_view::npos) {
            reader.resplit('\t', fields);
        }
        const std::array<std::string_view, 4> required = {"who_label", "category", "clades", "pango_pattern"};
        std::array<std::size_t, 4> index{};
        for (std::size_t k = 0; k < required.size(); ++k) {
            std::size_t found = fields.size();
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (text::iequals(text::trim(fields[i]), required[k])) {
                    found = i;
                }
            }
            if (found == fields.size()) {
                throw MissingRequiredColumn(std::string(required[k]));
            }
            index[k] = found;
        }
        std::vector<VariantDefinition> defs;
        while (reader.next(fields)) {
            if (fields.size() < 4) {
                throw DataError("catalog line " + std::to_string(reader.line()) + ": too few fields");
            }
            VariantDefinition d;
            d.who_label = std::string(text::trim(fields[index[0]]));
            const auto cat = text::trim(fields[index[1]]);
            if (text::iequals(cat, "VOC")) {
                d.category = VariantCategory::VOC;
            }
            else if (text::iequals(cat, "VOI")) {
                d.category = VariantCategory::VOI;
            }
            else {
                throw DataError("catalog line " + std::to_string(reader.line()) + ": unknown category '" +
                                std::string(cat) + "'");
            }
            std::string_view clades = fields[index[2]];
            std::size_t pos = 0;
            while (pos <= clades.size()) {
                auto semi = clades.find(';', pos);
                auto c = text::trim(clades.substr(pos, semi == std::string_view::npos ? clades.npos : semi - pos));
                if (!c.empty()) {
                    d.gisaid_clades.emplace_back(c);
                }
                if (semi == std::string_view::npos) {
                    break;
                }
                pos = semi + 1;
            }
            d.pango = parse_pattern(fields[index[3]]);
            defs.push_back(std::move(d));
        }
        return VariantCatalog(std::move(defs));
    }

    const std::vector<VariantDefinition>& variants() const noexcept { return variants_; }
    std::size_t size() const noexcept { return variants_.size(); }

    /// Catalog index of the first variant whose pattern matches.
    std::optional<std::size_t> classify(std::string_view canonical_lineage) const
    {
        for (std::size_t i = 0; i < variants_.size(); ++i) {
            if (matches(variants_[i].pango, canonical_lineage)) {
                return i;
            }
        }
        return std::nullopt;
    }

    /// Index of a label or one of its aliases, compared case- and accent-insensitively.
    std::optional<std::size_t> find(std::string_view label) const
    {
        const auto key = text::fold(label);
        for (std::size_t i = 0; i < variants_.size(); ++i) {
            if (text::fold(variants_[i].who_label) == key) {
                return i;
            }
            for (const auto& a : variants_[i].aliases) {
                if (text::fold(a) == key) {
                    return i;
                }
            }
        }
        return std::nullopt;
    }

private:
    std::vector<VariantDefinition> variants_;
};

inline constexpr std::string_view kUnclassified = "Unclassified";

/// WHO label of the sample's variant, or "Unclassified". Clade plays no part.
inline std::string classify_sample(const VariantCatalog& catalog, const SampleRecord& s)
{
    auto idx = catalog.classify(s.pango_lineage);
    return idx ? catalog.variants()[*idx].who_label : std::string(kUnclassified);
}

enum class StatusBucket : std::uint8_t
{
    Mild,
    Moderate,
    Severe,
    Unknown,
};

inline constexpr std::array<StatusBucket, 4> kAllStatusBuckets = {StatusBucket::Mild, StatusBucket::Moderate,
                                                                  StatusBucket::Severe, StatusBucket::Unknown};

constexpr std::string_view label_of(StatusBucket b)
{
    switch (b) {
    case StatusBucket::Mild:
        return "Mild";
    case StatusBucket::Moderate:
        return "Moderate";
    case StatusBucket::Severe:
        return "Severe";
    case StatusBucket::Unknown:
        return "Unknown";
    }
    return "";
}

/// Patient-status typology. Text is trimmed, case- and accent-folded, then
/// looked up; phrasings built only from symptomatic/asymptomatic/ambulatory
/// words (in either language, any order or joiner) are Moderate.
inline StatusBucket bucket_status(std::string_view status_text)
{
    static const std::map<std::string, StatusBucket, std::less<>> table = {
        {"released", StatusBucket::Mild},
        {"liberado", StatusBucket::Mild},
        {"live", StatusBucket::Mild},
        {"vivir", StatusBucket::Mild},
        {"vivo", StatusBucket::Mild},
        {"live outpatient care", StatusBucket::Mild},
        {"atencion ambulatoria en vivo", StatusBucket::Mild},
        {"moderate", StatusBucket::Moderate},
        {"moderar", StatusBucket::Moderate},
        {"moderado", StatusBucket::Moderate},
        {"hospitalized", StatusBucket::Severe},
        {"hospitalised", StatusBucket::Severe},
        {"hospitalizado", StatusBucket::Severe},
        {"deceased", StatusBucket::Severe},
        {"fallecido", StatusBucket::Severe},
        {"fatal", StatusBucket::Severe},
    };
    const std::string key = text::fold(status_text);
    if (auto it = table.find(key); it != table.end()) {
        return it->second;
    }
    static const std::set<std::string, std::less<>> moderate_words = {
        "ambulatory",  "ambulatorio", "ambulatoria", "outpatient",   "symptomatic",
        "asymptomatic", "sintomatico", "asintomatico", "sintomatica", "asintomatica"};
    static const std::set<std::string, std::less<>> joiners = {"y", "and", "e"};
    bool any = false;
    std::size_t pos = 0;
    while (pos < key.size()) {
        auto sp = key.find(' ', pos);
        auto word = std::string_view(key).substr(pos, sp == std::string::npos ? key.npos : sp - pos);
        if (moderate_words.contains(word)) {
            any = true;
        }
        else if (!joiners.contains(word)) {
            return StatusBucket::Unknown;
        }
        if (sp == std::string::npos) {
            break;
        }
        pos = sp + 1;
    }
    return any ? StatusBucket::Moderate : StatusBucket::Unknown;
}

struct VariantShare
{
    std::string who_label;
    VariantCategory category = VariantCategory::VOC;
    std::uint64_t count = 0;
    double percent = 0; // of classified samples
};

struct VariantShares
{
    std::vector<VariantShare> rows; // catalog order, non-zero counts only
    std::uint64_t classified = 0;
    std::uint64_t unclassified = 0;
};

using CladeCrosstab = std::map<std::pair<std::string, std::string>, std::uint64_t>; // (lineage, clade)
using StatusCrosstab = std::map<std::pair<std::string, std::string>, std::uint64_t>; // (status text, clade)

/// Per-variant tallies over a sample stream: counts, lineage x clade and
/// status x clade. Merge-able like the epidemiological accumulators.
class GenomicAccumulator
{
public:
    explicit GenomicAccumulator(const VariantCatalog& catalog)
        : catalog_(&catalog)
        , counts_(catalog.size(), 0)
        , clades_(catalog.size())
        , statuses_(catalog.size())
    {
    }

    void add(const SampleRecord& s)
    {
        auto idx = catalog_->classify(s.pango_lineage);
        if (!idx) {
            ++unclassified_;
            return;
        }
        ++counts_[*idx];
        ++clades_[*idx][{s.pango_lineage, s.gisaid_clade}];
        ++statuses_[*idx][{s.patient_status, s.gisaid_clade}];
    }

    void merge(const GenomicAccumulator& o)
    {
        unclassified_ += o.unclassified_;
        for (std::size_t i = 0; i < counts_.size(); ++i) {
            counts_[i] += o.counts_[i];
            for (const auto& [k, v] : o.clades_[i]) {
                clades_[i][k] += v;
            }
            for (const auto& [k, v] : o.statuses_[i]) {
                statuses_[i][k] += v;
            }
        }
    }

    VariantShares shares() const
    {
        VariantShares out;
        out.unclassified = unclassified_;
        for (auto c : counts_) {
            out.classified += c;
        }
        for (std::size_t i = 0; i < counts_.size(); ++i) {
            if (counts_[i] == 0) {
                continue;
            }
            const auto& v = catalog_->variants()[i];
            out.rows.push_back({v.who_label, v.category, counts_[i],
                                static_cast<double>(counts_[i]) / static_cast<double>(out.classified) * 100.0});
        }
        return out;
    }

    std::uint64_t count(std::string_view who_label) const
    {
        auto idx = catalog_->find(who_label);
        return idx ? counts_[*idx] : 0;
    }

    CladeCrosstab clade_crosstab(std::string_view who_label) const
    {
        auto idx = catalog_->find(who_label);
        return idx ? clades_[*idx] : CladeCrosstab{};
    }

    StatusCrosstab status_crosstab(std::string_view who_label) const
    {
        auto idx = catalog_->find(who_label);
        return idx ? statuses_[*idx] : StatusCrosstab{};
    }

    /// Status buckets over one variant's samples.
    std::array<std::uint64_t, 4> status_buckets(std::string_view who_label) const
    {
        std::array<std::uint64_t, 4> out{};
        for (const auto& [key, n] : status_crosstab(who_label)) {
            out[static_cast<std::size_t>(bucket_status(key.first))] += n;
        }
        return out;
    }

    const VariantCatalog& catalog() const noexcept { return *catalog_; }

private:
    const VariantCatalog* catalog_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t unclassified_ = 0;
    std::vector<CladeCrosstab> clades_;
    std::vector<StatusCrosstab> statuses_;
};

template <class Range>
VariantShares variant_shares(const Range& samples, const VariantCatalog& catalog)
{
    GenomicAccumulator acc(catalog);
    for (const auto& s : samples) {
        acc.add(s);
    }
    return acc.shares();
}

template <class Range>
CladeCrosstab clade_crosstab(const Range& samples, const VariantCatalog& catalog, std::string_view who_label)
{
    GenomicAccumulator acc(catalog);
    for (const auto& s : samples) {
        acc.add(s);
    }
    return acc.clade_crosstab(who_label);
}

/// One state's block of the selected-states summary.
struct StateBlock
{
    std::string state;
    std::uint64_t total = 0;
    std::map<std::string, std::uint64_t> clades;
    std::array<std::uint64_t, 3> sex{}; // indexed by Sex
    /// keyed by the trimmed, case-folded name; see display_vaccine()
    std::map<std::string, std::uint64_t> vaccines;
    std::array<std::array<std::uint64_t, 5>, 3> age_sex{}; // [Sex][AgeGroup]
    std::array<std::uint64_t, 4> status{};                 // indexed by StatusBucket

    void add(const SampleRecord& s)
    {
        ++total;
        ++clades[s.gisaid_clade];
        ++sex[static_cast<std::size_t>(s.sex)];
        if (s.vaccine) {
            auto key = text::to_lower(text::trim(*s.vaccine));
            if (!key.empty()) {
                ++vaccines[key];
            }
        }
        ++age_sex[static_cast<std::size_t>(s.sex)][static_cast<std::size_t>(age_group(s.age_years))];
        ++status[static_cast<std::size_t>(bucket_status(s.patient_status))];
    }

    void merge(const StateBlock& o)
    {
        total += o.total;
        for (const auto& [k, v] : o.clades) {
            clades[k] += v;
        }
        for (std::size_t i = 0; i < sex.size(); ++i) {
            sex[i] += o.sex[i];
        }
        for (const auto& [k, v] : o.vaccines) {
            vaccines[k] += v;
        }
        for (std::size_t i = 0; i < age_sex.size(); ++i) {
            for (std::size_t j = 0; j < age_sex[i].size(); ++j) {
                age_sex[i][j] += o.age_sex[i][j];
            }
        }
        for (std::size_t i = 0; i < status.size(); ++i) {
            status[i] += o.status[i];
        }
    }

    std::uint64_t vaccine_count(std::string_view name) const
    {
        auto it = vaccines.find(text::to_lower(text::trim(name)));
        return it == vaccines.end() ? 0 : it->second;
    }
};

/// Folded vaccine key rendered with a capital initial ("pfizer" -> "Pfizer").
inline std::string display_vaccine(std::string key)
{
    if (!key.empty()) {
        key[0] = text::ascii_upper(key[0]);
    }
    return key;
}

struct StateSummary
{
    std::string who_label;
    std::vector<StateBlock> states; // requested order
    StateBlock totals;
};

/// Selected-states summary for one variant. State names match divisions
/// case- and accent-insensitively.
class StateSummaryAccumulator
{
public:
    StateSummaryAccumulator(const VariantCatalog& catalog, std::string_view who_label,
                            const std::vector<std::string>& states)
        : catalog_(&catalog)
    {
        auto idx = catalog.find(who_label);
        if (!idx) {
            throw DataError("unknown variant label " + std::string(who_label));
        }
        variant_ = *idx;
        summary_.who_label = catalog.variants()[*idx].who_label;
        summary_.totals.state = "Total";
        for (const auto& s : states) {
            StateBlock block;
            block.state = s;
            summary_.states.push_back(std::move(block));
            keys_.push_back(text::fold(s));
        }
    }

    void add(const SampleRecord& s)
    {
        auto idx = catalog_->classify(s.pango_lineage);
        if (!idx || *idx != variant_) {
            return;
        }
        const auto key = text::fold(s.state);
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            if (keys_[i] == key) {
                summary_.states[i].add(s);
                summary_.totals.add(s);
                return;
            }
        }
    }

    void merge(const StateSummaryAccumulator& o)
    {
        for (std::size_t i = 0; i < summary_.states.size(); ++i) {
            summary_.states[i].merge(o.summary_.states[i]);
        }
        summary_.totals.merge(o.summary_.totals);
    }

    const StateSummary& summary() const noexcept { return summary_; }

private:
    const VariantCatalog* catalog_;
    std::size_t variant_ = 0;
    StateSummary summary_;
    std::vector<std::string> keys_;
};

template <class Range>
StateSummary state_summary(const Range& samples, const VariantCatalog& catalog, std::string_view who_label,
                           const std::vector<std::string>& states)
{
    StateSummaryAccumulator acc(catalog, who_label, states);
    for (const auto& s : samples) {
        acc.add(s);
    }
    return acc.summary();
}

} // namespace episurv
