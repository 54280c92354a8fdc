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

/// Deterministic table emitters. Every table id has a fixed column schema
/// (see docs/tables.md); rows come out in canonical order and percentages
/// always carry two decimals.

#include "episurv/epi_metrics.hpp"
#include "episurv/errors.hpp"
#include "episurv/genomics.hpp"
#include "episurv/schema.hpp"
#include "episurv/text.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace episurv
{

enum class TableId
{
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
    T11,
    T12,
    T13,
    G3shares,
    G4scatter,
    G5stack,
    ComorbidityProfile,
    Strata,
    StatusBuckets,
    Rank,
};

inline constexpr std::array<std::string_view, 20> kTableIdNames = {
    "T1",       "T2",        "T3",      "T4",                 "T5",     "T6",            "T7",
    "T8",       "T9",        "T10",     "T11",                "T12",    "T13",           "G3shares",
    "G4scatter", "G5stack", "ComorbidityProfile", "Strata", "StatusBuckets", "Rank"};

constexpr std::string_view label_of(TableId id) { return kTableIdNames[static_cast<std::size_t>(id)]; }

inline std::optional<TableId> parse_table_id(std::string_view s)
{
    for (std::size_t i = 0; i < kTableIdNames.size(); ++i) {
        if (text::iequals(s, kTableIdNames[i])) {
            return static_cast<TableId>(i);
        }
    }
    return std::nullopt;
}

enum class Format
{
    Tsv,
    Json,
    Markdown,
};

inline std::optional<Format> parse_format(std::string_view s)
{
    if (text::iequals(s, "tsv")) {
        return Format::Tsv;
    }
    if (text::iequals(s, "json")) {
        return Format::Json;
    }
    if (text::iequals(s, "markdown") || text::iequals(s, "md")) {
        return Format::Markdown;
    }
    return std::nullopt;
}

/// A rendered percentage; nullopt renders as NA (null in json).
struct Pct
{
    std::optional<double> value;
};

using Cell = std::variant<std::uint64_t, Pct, std::string>;

struct Table
{
    TableId id = TableId::T1;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> notes; // trailer comment lines

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != columns.size()) {
            throw ShapeMismatch(std::string(label_of(id)) + ": row has " + std::to_string(row.size()) +
                                " cells, schema has " + std::to_string(columns.size()));
        }
        rows.push_back(std::move(row));
    }
};

namespace detail
{

inline std::string cell_text(const Cell& c)
{
    if (auto* n = std::get_if<std::uint64_t>(&c)) {
        return std::to_string(*n);
    }
    if (auto* p = std::get_if<Pct>(&c)) {
        return p->value ? text::format_fixed2(*p->value) : std::string("NA");
    }
    return std::get<std::string>(c);
}

inline nlohmann::ordered_json cell_json(const Cell& c)
{
    if (auto* n = std::get_if<std::uint64_t>(&c)) {
        return *n;
    }
    if (auto* p = std::get_if<Pct>(&c)) {
        if (!p->value) {
            return nullptr;
        }
        // parse the two-decimal text back so json and tsv agree digit for digit
        return std::stod(text::format_fixed2(*p->value));
    }
    return std::get<std::string>(c);
}

inline std::string markdown_escape(std::string s)
{
    std::string out;
    for (char c : s) {
        if (c == '|') {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    return out;
}

} // namespace detail

inline std::string render_table(const Table& t, Format format)
{
    std::ostringstream out;
    switch (format) {
    case Format::Tsv: {
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            out << (i ? "\t" : "") << t.columns[i];
        }
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << (i ? "\t" : "") << detail::cell_text(row[i]);
            }
            out << '\n';
        }
        for (const auto& n : t.notes) {
            out << "# " << n << '\n';
        }
        break;
    }
    case Format::Json: {
        nlohmann::ordered_json doc;
        doc["table"] = std::string(label_of(t.id));
        doc["columns"] = t.columns;
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                obj[t.columns[i]] = detail::cell_json(row[i]);
            }
            rows.push_back(std::move(obj));
        }
        doc["rows"] = std::move(rows);
        doc["notes"] = t.notes;
        out << doc.dump(2) << '\n';
        break;
    }
    case Format::Markdown: {
        out << '|';
        for (const auto& c : t.columns) {
            out << ' ' << c << " |";
        }
        out << "\n|";
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            out << " --- |";
        }
        out << '\n';
        for (const auto& row : t.rows) {
            out << '|';
            for (const auto& c : row) {
                out << ' ' << detail::markdown_escape(detail::cell_text(c)) << " |";
            }
            out << '\n';
        }
        if (!t.notes.empty()) {
            out << '\n';
            for (const auto& n : t.notes) {
                out << "> " << n << "\n";
            }
        }
        break;
    }
    }
    return out.str();
}

/// Sex-split national tallies plus per-state tallies; feeds T1..T7.
struct EpiTables
{
    CaseCounts all;
    CaseCounts female;
    CaseCounts male;
    std::map<int, CaseCounts> by_state;

    void add(const PatientRecord& r)
    {
        all.add(r);
        if (r.sex == Sex::Female) {
            female.add(r);
        }
        else if (r.sex == Sex::Male) {
            male.add(r);
        }
        by_state[r.state_code].add(r);
    }

    void merge(const EpiTables& o)
    {
        all += o.all;
        female += o.female;
        male += o.male;
        for (const auto& [k, v] : o.by_state) {
            by_state[k] += v;
        }
    }

    friend bool operator==(const EpiTables&, const EpiTables&) = default;
};

/// EpiTables restricted to a cohort.
class EpiTablesAccumulator
{
public:
    explicit EpiTablesAccumulator(CohortFilter filter = {})
        : filter_(std::move(filter))
    {
    }

    void add(const PatientRecord& r)
    {
        if (filter_.accepts(r)) {
            tables_.add(r);
        }
    }

    void merge(const EpiTablesAccumulator& o) { tables_.merge(o.tables_); }

    const EpiTables& tables() const noexcept { return tables_; }

private:
    CohortFilter filter_;
    EpiTables tables_;
};

/// Everything the genomic tables draw on.
struct GenomicTables
{
    VariantShares shares;
    std::vector<std::pair<std::string, CladeCrosstab>> crosstabs; // catalog order
    std::string status_variant;
    StatusCrosstab status;
    StateSummary summary;
};

inline GenomicTables make_genomic_tables(const GenomicAccumulator& acc, std::string_view status_variant,
                                         const StateSummary& summary)
{
    GenomicTables g;
    g.shares = acc.shares();
    for (const auto& v : acc.catalog().variants()) {
        auto ct = acc.clade_crosstab(v.who_label);
        if (!ct.empty()) {
            g.crosstabs.emplace_back(v.who_label, std::move(ct));
        }
    }
    g.status_variant = std::string(status_variant);
    g.status = acc.status_crosstab(status_variant);
    g.summary = summary;
    return g;
}

using StrataReports = std::map<StratumKey, MetricsReport>;

using TableData = std::variant<EpiTables, StrataReports, episurv::ComorbidityProfile, VariantShares, GenomicTables>;

namespace detail
{

inline Cell pct(Percentage p) { return Pct{p}; }

inline std::string sex_label(Sex s) { return text::to_lower(label_of(s)); }

inline Table sex_table(TableId id, std::string first, const std::vector<std::string>& labels,
                       const std::vector<std::array<std::uint64_t, 3>>& cells)
{
    Table t{id, {std::move(first), "female", "male", "total"}, {}, {}};
    std::array<std::uint64_t, 3> sum{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        t.add_row({labels[i], cells[i][0], cells[i][1], cells[i][2]});
        for (std::size_t k = 0; k < 3; ++k) {
            sum[k] += cells[i][k];
        }
    }
    t.add_row({std::string("Total"), sum[0], sum[1], sum[2]});
    return t;
}

inline std::uint64_t class_count(const CaseCounts& c, CaseClassification cls)
{
    switch (cls) {
    case CaseClassification::ConfirmedByEpidemiologicalAssociation:
    case CaseClassification::ConfirmedByAdjudicationCommittee:
    case CaseClassification::ConfirmedSarsCov2:
        return c.positive_by_class[static_cast<std::size_t>(code_of(cls) - 1)];
    case CaseClassification::InvalidByLaboratory:
        return c.invalid;
    case CaseClassification::NotPerformedByLaboratory:
        return c.not_performed;
    case CaseClassification::Suspect:
        return c.suspect;
    case CaseClassification::NegativeSarsCov2:
        return c.negative;
    }
    return 0;
}

inline Table epi_table(TableId id, const EpiTables& e)
{
    const std::array<const CaseCounts*, 3> cols = {&e.female, &e.male, &e.all};
    auto tri = [&](auto get) {
        return std::array<std::uint64_t, 3>{get(*cols[0]), get(*cols[1]), get(*cols[2])};
    };
    std::vector<std::string> labels;
    std::vector<std::array<std::uint64_t, 3>> cells;
    switch (id) {
    case TableId::T1:
    case TableId::T2:
    case TableId::T6: {
        for (auto cls : kAllClassifications) {
            if (id != TableId::T1 && !is_positive(cls)) {
                continue;
            }
            labels.emplace_back(label_of(cls));
            if (id == TableId::T6) {
                const auto idx = static_cast<std::size_t>(code_of(cls) - 1);
                cells.push_back(tri([&](const CaseCounts& c) { return c.deaths_by_class[idx]; }));
            }
            else {
                cells.push_back(tri([&](const CaseCounts& c) { return class_count(c, cls); }));
            }
        }
        return sex_table(id, "classification", labels, cells);
    }
    case TableId::T3: {
        Table t{id, {"sex", "ambulatory", "hospitalized", "total"}, {}, {}};
        for (const auto* c : cols) {
            const std::string label = c == &e.all ? "Total" : (c == &e.female ? "female" : "male");
            t.add_row({label, c->ambulatory_pos, c->hospitalized_pos, c->positive});
        }
        return t;
    }
    case TableId::T5:
    case TableId::T7: {
        for (auto f : kAllFlags) {
            labels.emplace_back(label_of(f));
            const auto idx = index_of(f);
            if (id == TableId::T5) {
                cells.push_back(tri([&](const CaseCounts& c) { return c.intubation_flags_pos[idx]; }));
            }
            else {
                cells.push_back(tri([&](const CaseCounts& c) { return c.icu_flags_deaths_pos[idx]; }));
            }
        }
        return sex_table(id, id == TableId::T5 ? "intubation" : "icu", labels, cells);
    }
    case TableId::T4: {
        Table t{id, {"state_code", "state", "ambulatory", "hospitalized", "total", "hospital_share_pct"}, {}, {}};
        for (const auto& [code, c] : e.by_state) {
            if (c.positive == 0) {
                continue;
            }
            const std::string name =
                code >= 1 && code <= kStateCount ? std::string(state_name(code)) : std::string("Unknown");
            t.add_row({static_cast<std::uint64_t>(code), name, c.ambulatory_pos, c.hospitalized_pos, c.positive,
                       pct(percent_of(c.hospitalized_pos, e.all.hospitalized_pos))});
        }
        t.add_row({std::string(""), std::string("Total"), e.all.ambulatory_pos, e.all.hospitalized_pos,
                   e.all.positive, pct(percent_of(e.all.hospitalized_pos, e.all.hospitalized_pos))});
        return t;
    }
    default:
        break;
    }
    throw ShapeMismatch(std::string(label_of(id)) + " is not built from epidemiological tallies");
}

inline std::string state_label(const StratumKey& k)
{
    if (!k.state_code) {
        return "All";
    }
    return *k.state_code >= 1 && *k.state_code <= kStateCount ? std::string(state_name(*k.state_code))
                                                              : std::to_string(*k.state_code);
}

inline bool state_level(const StratumKey& k)
{
    return k.state_code && !k.municipality_code && !k.sex && !k.age_group;
}

inline Table strata_table(TableId id, const StrataReports& reports)
{
    switch (id) {
    case TableId::G4scatter: {
        Table t{id, {"state_code", "state", "fatality_pct", "positivity_pct"}, {}, {}};
        for (const auto& [k, rep] : reports) {
            if (state_level(k)) {
                t.add_row({static_cast<std::uint64_t>(*k.state_code), state_label(k), pct(rep.fatality_rate_pct),
                           pct(rep.positivity_pct)});
            }
        }
        return t;
    }
    case TableId::G5stack: {
        Table t{id, {"state_code", "state", "tgi1", "tgi2", "tgi3"}, {}, {}};
        std::string omitted;
        for (const auto& [k, rep] : reports) {
            if (!state_level(k)) {
                continue;
            }
            if (!rep.severity) {
                omitted += (omitted.empty() ? "" : ", ") + state_label(k);
                continue;
            }
            t.add_row({static_cast<std::uint64_t>(*k.state_code), state_label(k), pct(rep.severity->tgi1),
                       pct(rep.severity->tgi2), pct(rep.severity->tgi3)});
        }
        if (!omitted.empty()) {
            t.notes.push_back("omitted (no confirmed positives): " + omitted);
        }
        return t;
    }
    case TableId::Strata: {
        Table t{id,
                {"state_code", "state", "municipality_code", "sex", "age_group", "total", "positive",
                 "ambulatory_pos", "hospitalized_pos", "deaths_pos", "fatality_pct", "positivity_pct", "tgi1",
                 "tgi2", "tgi3"},
                {},
                {}};
        for (const auto& [k, rep] : reports) {
            const auto& c = rep.counts;
            auto opt_num = [](const std::optional<int>& v) -> Cell {
                return v ? Cell{std::to_string(*v)} : Cell{std::string("All")};
            };
            std::optional<SeverityRates> sev = rep.severity;
            t.add_row({opt_num(k.state_code), state_label(k), opt_num(k.municipality_code),
                       k.sex ? sex_label(*k.sex) : std::string("All"),
                       k.age_group ? std::string(label_of(*k.age_group)) : std::string("All"), c.total, c.positive,
                       c.ambulatory_pos, c.hospitalized_pos, c.deaths_pos, pct(rep.fatality_rate_pct),
                       pct(rep.positivity_pct), pct(sev ? Percentage(sev->tgi1) : std::nullopt),
                       pct(sev ? Percentage(sev->tgi2) : std::nullopt),
                       pct(sev ? Percentage(sev->tgi3) : std::nullopt)});
        }
        return t;
    }
    default:
        break;
    }
    throw ShapeMismatch(std::string(label_of(id)) + " is not built from stratified reports");
}

inline Table comorbidity_table(const episurv::ComorbidityProfile& p)
{
    Table t{TableId::ComorbidityProfile, {"comorbidity", "age_group", "count"}, {}, {}};
    for (const auto& [key, n] : p) {
        t.add_row({std::string(label_of(key.first)), std::string(label_of(key.second)), n});
    }
    return t;
}

inline Table shares_table(const VariantShares& s)
{
    Table t{TableId::G3shares, {"who_label", "category", "count", "percent"}, {}, {}};
    for (const auto& r : s.rows) {
        t.add_row({r.who_label, std::string(label_of(r.category)), r.count, pct(r.percent)});
    }
    t.notes.push_back("classified " + std::to_string(s.classified) + ", unclassified " +
                      std::to_string(s.unclassified));
    return t;
}

inline Table genomic_table(TableId id, const GenomicTables& g)
{
    const auto& blocks = g.summary.states;
    auto each_block = [&](auto fn) {
        for (const auto& b : blocks) {
            fn(b);
        }
        fn(g.summary.totals);
    };
    switch (id) {
    case TableId::G3shares:
        return shares_table(g.shares);
    case TableId::T8: {
        Table t{id, {"who_label", "lineage", "clade", "count"}, {}, {}};
        for (const auto& [label, ct] : g.crosstabs) {
            for (const auto& [key, n] : ct) {
                t.add_row({label, key.first, key.second, n});
            }
        }
        return t;
    }
    case TableId::T9: {
        Table t{id, {"patient_status", "status_bucket", "clade", "count"}, {}, {}};
        for (const auto& [key, n] : g.status) {
            t.add_row({key.first, std::string(label_of(bucket_status(key.first))), key.second, n});
        }
        t.notes.push_back("variant " + g.status_variant);
        return t;
    }
    case TableId::StatusBuckets: {
        Table t{id, {"status_bucket", "count", "percent"}, {}, {}};
        std::array<std::uint64_t, 4> buckets{};
        std::uint64_t total = 0;
        for (const auto& [key, n] : g.status) {
            buckets[static_cast<std::size_t>(bucket_status(key.first))] += n;
            total += n;
        }
        for (auto b : kAllStatusBuckets) {
            const auto n = buckets[static_cast<std::size_t>(b)];
            t.add_row({std::string(label_of(b)), n, pct(percent_of(n, total))});
        }
        t.notes.push_back("variant " + g.status_variant);
        return t;
    }
    case TableId::T10: {
        Table t{id, {"state", "clade", "count"}, {}, {}};
        each_block([&](const StateBlock& b) {
            for (const auto& [clade, n] : b.clades) {
                t.add_row({b.state, clade, n});
            }
            t.add_row({b.state, std::string("Total"), b.total});
        });
        return t;
    }
    case TableId::T11: {
        Table t{id, {"state", "female", "male", "total"}, {}, {}};
        each_block([&](const StateBlock& b) {
            t.add_row({b.state, b.sex[static_cast<std::size_t>(Sex::Female)],
                       b.sex[static_cast<std::size_t>(Sex::Male)], b.total});
        });
        return t;
    }
    case TableId::T12: {
        Table t{id, {"state", "vaccine", "count"}, {}, {}};
        each_block([&](const StateBlock& b) {
            for (const auto& [key, n] : b.vaccines) {
                t.add_row({b.state, display_vaccine(key), n});
            }
        });
        return t;
    }
    case TableId::T13: {
        Table t{id, {"state", "sex", "age_group", "count"}, {}, {}};
        each_block([&](const StateBlock& b) {
            for (auto s : kAllSexes) {
                for (auto a : kAllAgeGroups) {
                    const auto n = b.age_sex[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                    if (s == Sex::Unspecified || a == AgeGroup::Unknown) {
                        if (n == 0) {
                            continue;
                        }
                    }
                    t.add_row({b.state, sex_label(s), std::string(label_of(a)), n});
                }
            }
        });
        return t;
    }
    default:
        break;
    }
    throw ShapeMismatch(std::string(label_of(id)) + " is not built from genomic tallies");
}

} // namespace detail

/// Builds the table for `id`; throws ShapeMismatch when `data` is the wrong kind.
inline Table build_table(TableId id, const TableData& data)
{
    return std::visit(
        [&](const auto& d) -> Table {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, EpiTables>) {
                return detail::epi_table(id, d);
            }
            else if constexpr (std::is_same_v<D, StrataReports>) {
                return detail::strata_table(id, d);
            }
            else if constexpr (std::is_same_v<D, episurv::ComorbidityProfile>) {
                if (id != TableId::ComorbidityProfile) {
                    throw ShapeMismatch(std::string(label_of(id)) + " is not built from a comorbidity profile");
                }
                return detail::comorbidity_table(d);
            }
            else if constexpr (std::is_same_v<D, VariantShares>) {
                if (id != TableId::G3shares) {
                    throw ShapeMismatch(std::string(label_of(id)) + " is not built from variant shares");
                }
                return detail::shares_table(d);
            }
            else {
                return detail::genomic_table(id, d);
            }
        },
        data);
}

inline std::string render(TableId id, const TableData& data, Format format)
{
    return render_table(build_table(id, data), format);
}

/// States ordered by `metric` as produced by rank_states().
inline Table rank_table(const std::vector<std::pair<int, double>>& ranked, std::string_view metric)
{
    Table t{TableId::Rank, {"rank", "state_code", "state", std::string(metric)}, {}, {}};
    std::uint64_t i = 0;
    for (const auto& [code, v] : ranked) {
        const std::string name =
            code >= 1 && code <= kStateCount ? std::string(state_name(code)) : std::to_string(code);
        t.add_row({++i, static_cast<std::uint64_t>(code), name, Cell{Pct{v}}});
    }
    return t;
}

/// Per-state severity stack; states without positives are left out and
/// listed in a trailer line.
inline std::string render_severity_stack(const StrataReports& reports, Format format = Format::Tsv)
{
    return render(TableId::G5stack, reports, format);
}

} // namespace episurv
