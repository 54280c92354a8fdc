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

/// Validating single-pass readers for SVEERV case CSV and GISAID-style sample
/// metadata. Malformed rows are reported and counted, never fatal; a missing
/// required column is.

#include "episurv/csv.hpp"
#include "episurv/errors.hpp"
#include "episurv/lineage.hpp"
#include "episurv/schema.hpp"
#include "episurv/text.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

namespace episurv
{

enum class RowErrorReason
{
    FieldCount,
    NotAnInteger,
    UnknownCode,
    OutOfRange,
    BadDate,
    EmptyAccession,
    EmptyLineage,
    MalformedLineage,
};

constexpr std::string_view label_of(RowErrorReason r)
{
    switch (r) {
    case RowErrorReason::FieldCount:
        return "FieldCount";
    case RowErrorReason::NotAnInteger:
        return "NotAnInteger";
    case RowErrorReason::UnknownCode:
        return "UnknownCode";
    case RowErrorReason::OutOfRange:
        return "OutOfRange";
    case RowErrorReason::BadDate:
        return "BadDate";
    case RowErrorReason::EmptyAccession:
        return "EmptyAccession";
    case RowErrorReason::EmptyLineage:
        return "EmptyLineage";
    case RowErrorReason::MalformedLineage:
        return "MalformedLineage";
    }
    return "";
}

struct RowError
{
    std::uint64_t line = 0; // physical line where the row starts (1 = header)
    RowErrorReason reason = RowErrorReason::FieldCount;
    std::string detail;

    friend bool operator==(const RowError&, const RowError&) = default;
};

struct IngestStats
{
    std::uint64_t rows_read = 0;
    std::uint64_t rows_accepted = 0;
    std::uint64_t rows_rejected = 0;
    std::map<std::string, std::uint64_t> rejection_reasons;
    std::uint64_t bytes_read = 0;

    void accept() noexcept
    {
        ++rows_read;
        ++rows_accepted;
    }

    void reject(RowErrorReason reason)
    {
        ++rows_read;
        ++rows_rejected;
        ++rejection_reasons[std::string(label_of(reason))];
    }

    IngestStats& merge(const IngestStats& o)
    {
        rows_read += o.rows_read;
        rows_accepted += o.rows_accepted;
        rows_rejected += o.rows_rejected;
        bytes_read += o.bytes_read;
        for (const auto& [k, v] : o.rejection_reasons) {
            rejection_reasons[k] += v;
        }
        return *this;
    }

    friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

/// Deterministic plain-text summary: totals, then up to ten rejection reasons
/// by descending count (ties by name).
inline std::string validate_report(const IngestStats& stats)
{
    std::ostringstream out;
    out << "rows read: " << stats.rows_read << '\n';
    out << "rows accepted: " << stats.rows_accepted << '\n';
    out << "rows rejected: " << stats.rows_rejected << '\n';
    out << "bytes read: " << stats.bytes_read << '\n';
    std::vector<std::pair<std::string, std::uint64_t>> reasons(stats.rejection_reasons.begin(),
                                                               stats.rejection_reasons.end());
    std::stable_sort(reasons.begin(), reasons.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out << "rejection reasons:";
    if (reasons.empty()) {
        out << " none\n";
    }
    else {
        out << '\n';
        const std::size_t shown = std::min<std::size_t>(reasons.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) {
            out << "  " << reasons[i].first << ": " << reasons[i].second << '\n';
        }
    }
    return out.str();
}

struct Dialect
{
    char delimiter = ',';
    text::Encoding encoding = text::Encoding::Auto;
};

namespace detail
{

struct RowFailure
{
    RowErrorReason reason;
    std::string detail;
};

/// Maps required column names to positions; lookup is case-insensitive.
template <std::size_t N>
std::array<std::size_t, N> locate_columns(const std::vector<std::string_view>& header,
                                          const std::array<std::vector<std::string_view>, N>& names)
{
    std::array<std::size_t, N> index{};
    for (std::size_t k = 0; k < N; ++k) {
        std::optional<std::size_t> found;
        for (std::size_t i = 0; i < header.size() && !found; ++i) {
            const auto h = text::trim(header[i]);
            for (const auto& n : names[k]) {
                if (text::iequals(h, n)) {
                    found = i;
                    break;
                }
            }
        }
        if (!found) {
            throw MissingRequiredColumn(std::string(names[k].front()));
        }
        index[k] = *found;
    }
    return index;
}

inline std::int64_t require_int(std::string_view column, std::string_view v)
{
    auto n = text::parse_int<std::int64_t>(v);
    if (!n) {
        throw RowFailure{RowErrorReason::NotAnInteger, std::string(column) + "='" + std::string(v) + "'"};
    }
    return *n;
}

template <class F>
auto decode_code(std::string_view column, std::string_view v, F decode)
{
    const auto n = require_int(column, v);
    try {
        return decode(n);
    }
    catch (const UnknownCode&) {
        throw RowFailure{RowErrorReason::UnknownCode, std::string(column) + "=" + std::to_string(n)};
    }
}

} // namespace detail

/// Column positions of a parsed SVEERV header, shared by shard readers.
struct SveervColumns
{
    enum : std::size_t
    {
        State,
        Municipality,
        Sex,
        Age,
        Indigenous,
        PatientType,
        Icu,
        Intubated,
        DeathDate,
        Classification,
        OnsetDate,
        FirstComorbidity,
        Count = FirstComorbidity + kComorbidityCount,
    };

    std::array<std::size_t, Count> index{};
    std::size_t width = 0; // fields per row

    static SveervColumns from_header(const std::vector<std::string_view>& header)
    {
        std::array<std::vector<std::string_view>, Count> names = {{
            {"ENTIDAD_RES"},
            {"MUNICIPIO_RES"},
            {"SEXO"},
            {"EDAD"},
            {"HABLA_LENGUA_INDIG", "HABLA_LENGUA_INDI"},
            {"TIPO_PACIENTE"},
            {"UCI"},
            {"INTUBADO"},
            {"FECHA_DEF"},
            {"CLASIFICACION_FINAL"},
            {"FECHA_SINTOMAS"},
        }};
        for (std::size_t i = 0; i < kComorbidityCount; ++i) {
            names[FirstComorbidity + i] = {column_of(kAllComorbidities[i])};
        }
        SveervColumns c;
        c.index = detail::locate_columns(header, names);
        c.width = header.size();
        return c;
    }
};

inline const std::vector<std::string_view>& sveerv_required_columns()
{
    static const std::vector<std::string_view> cols = [] {
        std::vector<std::string_view> v = {"ENTIDAD_RES", "MUNICIPIO_RES", "SEXO",      "EDAD",
                                           "HABLA_LENGUA_INDIG", "TIPO_PACIENTE", "UCI", "INTUBADO",
                                           "FECHA_DEF",   "CLASIFICACION_FINAL", "FECHA_SINTOMAS"};
        for (auto c : kAllComorbidities) {
            v.push_back(column_of(c));
        }
        return v;
    }();
    return cols;
}

/// Decodes one SVEERV row. Throws detail::RowFailure.
inline PatientRecord decode_sveerv_row(const std::vector<std::string_view>& f, const SveervColumns& cols)
{
    using C = SveervColumns;
    if (f.size() != cols.width) {
        throw detail::RowFailure{RowErrorReason::FieldCount, "expected " + std::to_string(cols.width) + " fields, got " +
                                                                 std::to_string(f.size())};
    }
    auto field = [&](std::size_t c) { return text::trim(f[cols.index[c]]); };
    PatientRecord r;

    const auto state = detail::require_int("ENTIDAD_RES", field(C::State));
    if (state < 1 || state > 32) {
        throw detail::RowFailure{RowErrorReason::OutOfRange, "ENTIDAD_RES=" + std::to_string(state)};
    }
    r.state_code = static_cast<int>(state);

    const auto muni = detail::require_int("MUNICIPIO_RES", field(C::Municipality));
    if (muni < 0 || muni > 99999) {
        throw detail::RowFailure{RowErrorReason::OutOfRange, "MUNICIPIO_RES=" + std::to_string(muni)};
    }
    r.municipality_code = static_cast<int>(muni);

    r.sex = decode_sex(detail::require_int("SEXO", field(C::Sex)));

    if (auto age = field(C::Age); !age.empty()) {
        const auto years = detail::require_int("EDAD", age);
        if (years < 0 || years > kMaxAge) {
            throw detail::RowFailure{RowErrorReason::OutOfRange, "EDAD=" + std::to_string(years)};
        }
        r.age_years = static_cast<int>(years);
    }

    r.speaks_indigenous_language = detail::decode_code("HABLA_LENGUA_INDIG", field(C::Indigenous), decode_flag);
    r.treatment = detail::decode_code("TIPO_PACIENTE", field(C::PatientType), decode_treatment);
    r.icu = detail::decode_code("UCI", field(C::Icu), decode_flag);
    r.intubated = detail::decode_code("INTUBADO", field(C::Intubated), decode_flag);

    if (auto d = field(C::DeathDate); d != kAliveSentinel) {
        r.death_date = text::parse_iso_date(d);
        if (!r.death_date) {
            throw detail::RowFailure{RowErrorReason::BadDate, "FECHA_DEF='" + std::string(d) + "'"};
        }
    }

    r.classification =
        detail::decode_code("CLASIFICACION_FINAL", field(C::Classification), decode_classification);

    if (auto d = field(C::OnsetDate); !d.empty() && d != kAliveSentinel) {
        r.symptom_onset_date = text::parse_iso_date(d);
        if (!r.symptom_onset_date) {
            throw detail::RowFailure{RowErrorReason::BadDate, "FECHA_SINTOMAS='" + std::string(d) + "'"};
        }
    }

    for (std::size_t i = 0; i < kComorbidityCount; ++i) {
        r.comorbidities[i] =
            detail::decode_code(column_of(kAllComorbidities[i]), field(C::FirstComorbidity + i), decode_flag);
    }
    return r;
}

template <class Record>
using RowResult = std::variant<Record, RowError>;

/// Pull-based SVEERV reader.
///
/// Constructed on a full stream it consumes the header first (throwing
/// MissingRequiredColumn before any row is read). The shard constructor reads
/// a header-less byte range with columns taken from an earlier header parse.
class SveervReader
{
public:
    explicit SveervReader(std::istream& in, Dialect dialect = {})
        : reader_(in, dialect.delimiter)
    {
        std::vector<std::string_view> header;
        if (!reader_.next(header)) {
            throw MissingRequiredColumn(std::string(sveerv_required_columns().front()));
        }
        columns_ = SveervColumns::from_header(header);
        header_bytes_ = reader_.bytes_read();
    }

    SveervReader(std::istream& in, const SveervColumns& columns, Dialect dialect, std::uint64_t byte_limit)
        : reader_(in, dialect.delimiter, byte_limit)
        , columns_(columns)
    {
    }

    std::optional<RowResult<PatientRecord>> next()
    {
        if (!reader_.next(fields_)) {
            stats_.bytes_read = reader_.bytes_read();
            return std::nullopt;
        }
        stats_.bytes_read = reader_.bytes_read();
        try {
            auto r = decode_sveerv_row(fields_, columns_);
            stats_.accept();
            return RowResult<PatientRecord>{std::move(r)};
        }
        catch (detail::RowFailure& f) {
            stats_.reject(f.reason);
            return RowResult<PatientRecord>{RowError{reader_.line(), f.reason, std::move(f.detail)}};
        }
    }

    /// Drains the stream: on_record(PatientRecord&&) and on_error(RowError&&).
    template <class OnRecord, class OnError>
    const IngestStats& for_each(OnRecord&& on_record, OnError&& on_error)
    {
        while (auto row = next()) {
            if (auto* rec = std::get_if<PatientRecord>(&*row)) {
                on_record(std::move(*rec));
            }
            else {
                on_error(std::move(std::get<RowError>(*row)));
            }
        }
        return stats_;
    }

    const IngestStats& stats() const noexcept { return stats_; }
    const SveervColumns& columns() const noexcept { return columns_; }
    std::uint64_t header_bytes() const noexcept { return header_bytes_; }
    std::size_t peak_buffer_bytes() const noexcept { return reader_.peak_buffer_bytes(); }
    std::size_t longest_row() const noexcept { return reader_.longest_row(); }

private:
    CsvReader reader_;
    SveervColumns columns_;
    std::vector<std::string_view> fields_;
    IngestStats stats_;
    std::uint64_t header_bytes_ = 0;
};

template <class OnRecord, class OnError>
IngestStats ingest_sveerv(std::istream& in, Dialect dialect, OnRecord&& on_record, OnError&& on_error)
{
    SveervReader reader(in, dialect);
    return reader.for_each(on_record, on_error);
}

/// Collects every accepted record; desk-scale convenience for tests and fixtures.
inline std::vector<PatientRecord> read_all_sveerv(std::istream& in, IngestStats* stats = nullptr, Dialect dialect = {})
{
    std::vector<PatientRecord> out;
    auto s = ingest_sveerv(in, dialect, [&](PatientRecord&& r) { out.push_back(std::move(r)); }, [](RowError&&) {});
    if (stats) {
        *stats = s;
    }
    return out;
}

struct GisaidColumns
{
    enum : std::size_t
    {
        Accession,
        Date,
        Division,
        Lineage,
        Clade,
        Status,
        Age,
        Sex,
        Vaccine,
        Count,
    };

    std::array<std::size_t, Count> index{};
    std::size_t width = 0;

    static GisaidColumns from_header(const std::vector<std::string_view>& header)
    {
        const std::array<std::vector<std::string_view>, Count> names = {{
            {"accession", "accession id", "accession_id", "gisaid_epi_isl"},
            {"date", "collection date", "collection_date"},
            {"division"},
            {"pango_lineage", "pango lineage", "lineage"},
            {"clade", "gisaid_clade"},
            {"patient_status", "patient status"},
            {"age", "patient age", "patient_age"},
            {"sex", "gender"},
            {"vaccine", "vaccinated"},
        }};
        GisaidColumns c;
        c.index = detail::locate_columns(header, names);
        c.width = header.size();
        return c;
    }
};

inline Sex decode_sex_text(std::string_view s)
{
    const auto k = text::fold(s);
    if (k == "female" || k == "f" || k == "mujer" || k == "femenino" || k == "woman") {
        return Sex::Female;
    }
    if (k == "male" || k == "m" || k == "hombre" || k == "masculino" || k == "man") {
        return Sex::Male;
    }
    return Sex::Unspecified;
}

/// Decodes one metadata row. Throws detail::RowFailure.
inline SampleRecord decode_gisaid_row(const std::vector<std::string_view>& f, const GisaidColumns& cols,
                                      text::Encoding enc)
{
    using C = GisaidColumns;
    if (f.size() != cols.width) {
        throw detail::RowFailure{RowErrorReason::FieldCount, "expected " + std::to_string(cols.width) + " fields, got " +
                                                                 std::to_string(f.size())};
    }
    auto field = [&](std::size_t c) { return f[cols.index[c]]; };
    SampleRecord s;

    s.accession = text::to_utf8(text::trim(field(C::Accession)), enc);
    if (s.accession.empty()) {
        throw detail::RowFailure{RowErrorReason::EmptyAccession, "accession is empty"};
    }

    auto lineage = parse_lineage(field(C::Lineage));
    if (lineage.error) {
        if (*lineage.error == LineageError::Empty) {
            throw detail::RowFailure{RowErrorReason::EmptyLineage, "pango_lineage is empty"};
        }
        throw detail::RowFailure{RowErrorReason::MalformedLineage,
                                 "pango_lineage='" + std::string(text::trim(field(C::Lineage))) + "'"};
    }
    s.pango_lineage = std::move(lineage.canonical);

    // partial dates ("2021", "2021-07") are common in exports and mean Unknown
    if (auto d = text::trim(field(C::Date)); !d.empty()) {
        s.collection_date = text::parse_iso_date(d);
        const bool partial = (d.size() == 4 || d.size() == 7) && text::parse_int<int>(d.substr(0, 4));
        if (!s.collection_date && !partial && !text::iequals(d, "unknown")) {
            throw detail::RowFailure{RowErrorReason::BadDate, "date='" + std::string(d) + "'"};
        }
    }

    s.state = text::to_utf8(text::trim(field(C::Division)), enc);
    s.gisaid_clade = std::string(text::trim(field(C::Clade)));
    s.patient_status = text::to_utf8(field(C::Status), enc);

    if (auto a = text::trim(field(C::Age)); !a.empty()) {
        if (auto years = text::parse_int<std::int64_t>(a)) {
            if (*years < 0 || *years > kMaxAge) {
                throw detail::RowFailure{RowErrorReason::OutOfRange, "age=" + std::to_string(*years)};
            }
            s.age_years = static_cast<int>(*years);
        }
        else {
            const auto k = text::fold(a);
            if (k != "unknown" && k != "n a" && k != "na" && k != "desconocido") {
                throw detail::RowFailure{RowErrorReason::NotAnInteger, "age='" + std::string(a) + "'"};
            }
        }
    }

    s.sex = decode_sex_text(field(C::Sex));

    if (auto v = text::trim(field(C::Vaccine)); !v.empty()) {
        s.vaccine = text::to_utf8(v, enc);
    }
    return s;
}

/// Pull-based metadata reader. Tab versus comma is sniffed from the header.
class GisaidReader
{
public:
    explicit GisaidReader(std::istream& in, text::Encoding encoding = text::Encoding::Auto)
        : reader_(in, ',')
        , encoding_(encoding)
    {
        std::vector<std::string_view> header;
        if (!reader_.next(header)) {
            throw MissingRequiredColumn("accession");
        }
        if (reader_.raw_row().find('\t') != std::string_view::npos) {
            reader_.resplit('\t', header);
        }
        columns_ = GisaidColumns::from_header(header);
    }

    std::optional<RowResult<SampleRecord>> next()
    {
        if (!reader_.next(fields_)) {
            stats_.bytes_read = reader_.bytes_read();
            return std::nullopt;
        }
        stats_.bytes_read = reader_.bytes_read();
        try {
            auto s = decode_gisaid_row(fields_, columns_, encoding_);
            stats_.accept();
            return RowResult<SampleRecord>{std::move(s)};
        }
        catch (detail::RowFailure& f) {
            stats_.reject(f.reason);
            return RowResult<SampleRecord>{RowError{reader_.line(), f.reason, std::move(f.detail)}};
        }
    }

    template <class OnRecord, class OnError>
    const IngestStats& for_each(OnRecord&& on_record, OnError&& on_error)
    {
        while (auto row = next()) {
            if (auto* rec = std::get_if<SampleRecord>(&*row)) {
                on_record(std::move(*rec));
            }
            else {
                on_error(std::move(std::get<RowError>(*row)));
            }
        }
        return stats_;
    }

    const IngestStats& stats() const noexcept { return stats_; }
    char delimiter() const noexcept { return reader_.delimiter(); }

private:
    CsvReader reader_;
    text::Encoding encoding_;
    GisaidColumns columns_;
    std::vector<std::string_view> fields_;
    IngestStats stats_;
};

template <class OnRecord, class OnError>
IngestStats ingest_gisaid(std::istream& in, OnRecord&& on_record, OnError&& on_error,
                          text::Encoding encoding = text::Encoding::Auto)
{
    GisaidReader reader(in, encoding);
    return reader.for_each(on_record, on_error);
}

inline std::vector<SampleRecord> read_all_gisaid(std::istream& in, IngestStats* stats = nullptr)
{
    std::vector<SampleRecord> out;
    auto s = ingest_gisaid(in, [&](SampleRecord&& r) { out.push_back(std::move(r)); }, [](RowError&&) {});
    if (stats) {
        *stats = s;
    }
    return out;
}

/// Splits [data_begin, data_end) into at most `shards` byte ranges whose
/// boundaries fall just after a newline. Assumes no quoted field spans lines,
/// which holds for SVEERV exports.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>>
shard_ranges(std::istream& in, std::uint64_t data_begin, std::uint64_t data_end, unsigned shards)
{
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    if (shards == 0) {
        shards = 1;
    }
    std::uint64_t start = data_begin;
    const std::uint64_t span = data_end > data_begin ? data_end - data_begin : 0;
    for (unsigned k = 1; k < shards && start < data_end; ++k) {
        std::uint64_t target = data_begin + span * k / shards;
        if (target <= start) {
            continue;
        }
        in.clear();
        in.seekg(static_cast<std::streamoff>(target - 1));
        std::string skipped;
        std::getline(in, skipped);
        if (!in) {
            break;
        }
        const std::uint64_t boundary = target - 1 + skipped.size() + 1;
        if (boundary >= data_end) {
            break;
        }
        out.emplace_back(start, boundary);
        start = boundary;
    }
    if (start < data_end || out.empty()) {
        out.emplace_back(start, data_end);
    }
    in.clear();
    return out;
}

/// Ingests a SVEERV stream in `shards` independent readers (one thread each
/// when threaded) and merges their sinks in shard order. `Sink` needs
/// add(const PatientRecord&) and merge(const Sink&); `prototype` is copied
/// per shard. The header is parsed once, before any worker starts.
template <class Sink>
std::pair<Sink, IngestStats> ingest_sveerv_sharded(std::istream& whole, const Sink& prototype, unsigned shards,
                                                   Dialect dialect = {}, bool threaded = false,
                                                   std::function<std::unique_ptr<std::istream>()> reopen = {})
{
    whole.clear();
    whole.seekg(0, std::ios::end);
    const auto size = static_cast<std::uint64_t>(whole.tellg());
    whole.seekg(0);
    SveervReader head(whole, dialect);
    const auto columns = head.columns();
    const auto header_bytes = head.header_bytes();
    auto ranges = shard_ranges(whole, header_bytes, size, shards);

    std::vector<Sink> sinks(ranges.size(), prototype);
    std::vector<IngestStats> stats(ranges.size());
    auto work = [&](std::size_t i, std::istream& in) {
        in.clear();
        in.seekg(static_cast<std::streamoff>(ranges[i].first));
        SveervReader reader(in, columns, dialect, ranges[i].second - ranges[i].first);
        stats[i] = reader.for_each([&](PatientRecord&& r) { sinks[i].add(r); }, [](RowError&&) {});
    };
    if (threaded && reopen) {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            pool.emplace_back([&, i] {
                auto in = reopen();
                work(i, *in);
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    else {
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            work(i, whole);
        }
    }

    Sink out = prototype;
    IngestStats total;
    total.bytes_read = header_bytes;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        out.merge(sinks[i]);
        total.merge(stats[i]);
    }
    return {std::move(out), std::move(total)};
}

} // namespace episurv
