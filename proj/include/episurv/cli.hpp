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

/// The `episurv` command line. run() returns the process exit code:
/// 0 success, 1 usage error, 2 data error. Diagnostics go to `err`.

#include "episurv/epi_metrics.hpp"
#include "episurv/errors.hpp"
#include "episurv/fixtures.hpp"
#include "episurv/genomics.hpp"
#include "episurv/ingest.hpp"
#include "episurv/presets.hpp"
#include "episurv/report.hpp"
#include "episurv/text.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace episurv::cli
{

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    std::string command;
    std::string input;
    std::string out;
    std::string format = "tsv";
    std::vector<std::string> tables;
    unsigned threads = 1;
    char delimiter = ',';
    std::string encoding = "auto";

    // cohort
    bool indigenous_only = false;
    std::vector<std::string> states;
    std::vector<std::string> sexes;
    std::string onset_from;
    std::string onset_to;
    std::vector<std::string> group_by;
    std::string severity = "icu-and-intubation";
    std::string positivity = "aggregate";
    std::string subcohort = "hospitalized";
    std::string metric = "fatality";
    std::size_t top = 0;

    // genomic
    std::string catalog;
    std::string variant = "Delta";
    std::vector<std::string> summary_states = {"Puebla", "Hidalgo", "Veracruz", "Oaxaca"};
    std::string kind = "auto";

    // fixtures
    std::string preset;
    std::string spec;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> rows;
    bool list_presets = false;
};

namespace detail
{

inline int resolve_state(const std::string& s)
{
    if (auto n = text::parse_int<int>(s)) {
        if (*n >= 1 && *n <= kStateCount) {
            return *n;
        }
        throw UsageError("state code out of range: " + s);
    }
    const auto key = text::fold(s);
    for (int code = 1; code <= kStateCount; ++code) {
        if (text::fold(state_name(code)) == key) {
            return code;
        }
    }
    throw UsageError("unknown state: " + s);
}

inline Date resolve_date(const std::string& s, const char* flag)
{
    auto d = text::parse_iso_date(s);
    if (!d) {
        throw UsageError(std::string(flag) + " expects YYYY-MM-DD, got '" + s + "'");
    }
    return *d;
}

inline CohortFilter make_filter(const RunConfig& c)
{
    CohortFilter f;
    f.indigenous_only = c.indigenous_only;
    if (!c.states.empty()) {
        f.states.emplace();
        for (const auto& s : c.states) {
            f.states->insert(resolve_state(s));
        }
    }
    if (!c.sexes.empty()) {
        f.sexes.emplace();
        for (const auto& s : c.sexes) {
            f.sexes->insert(s == "female" ? Sex::Female : (s == "male" ? Sex::Male : Sex::Unspecified));
        }
    }
    if (!c.onset_from.empty() || !c.onset_to.empty()) {
        const Date lo = c.onset_from.empty() ? Date{std::chrono::year{1}, std::chrono::January, std::chrono::day{1}}
                                             : resolve_date(c.onset_from, "--onset-from");
        const Date hi = c.onset_to.empty() ? Date{std::chrono::year{9999}, std::chrono::December, std::chrono::day{31}}
                                           : resolve_date(c.onset_to, "--onset-to");
        if (hi < lo) {
            throw UsageError("--onset-from is after --onset-to");
        }
        f.onset_date_range = std::pair{lo, hi};
    }
    return f;
}

inline GroupBy make_group_by(const RunConfig& c)
{
    GroupBy g;
    for (const auto& d : c.group_by) {
        if (d == "state") {
            g.state = true;
        }
        else if (d == "municipality") {
            g.municipality = true;
        }
        else if (d == "sex") {
            g.sex = true;
        }
        else if (d == "age_group" || d == "age") {
            g.age_group = true;
        }
    }
    // municipality codes repeat across states, so they are always state-qualified
    if (g.municipality) {
        g.state = true;
    }
    return g;
}

inline SeverityCriterion make_severity(const std::string& s)
{
    if (s == "intubation") {
        return SeverityCriterion::IntubationOnly;
    }
    if (s == "icu") {
        return SeverityCriterion::IcuOnly;
    }
    if (s == "icu-or-intubation") {
        return SeverityCriterion::IcuOrIntubation;
    }
    return SeverityCriterion::IcuAndIntubation;
}

inline PositivityMode make_positivity(const std::string& s)
{
    return s == "strict" ? PositivityMode::StrictLabNegative : PositivityMode::PaperAggregate;
}

inline std::vector<TableId> make_tables(const std::vector<std::string>& names, const std::vector<TableId>& allowed,
                                        TableId fallback)
{
    std::vector<TableId> out;
    for (const auto& n : names) {
        auto id = parse_table_id(n);
        if (!id || std::find(allowed.begin(), allowed.end(), *id) == allowed.end()) {
            throw UsageError("table '" + n + "' is not available for this command");
        }
        out.push_back(*id);
    }
    if (out.empty()) {
        out.push_back(fallback);
    }
    return out;
}

inline text::Encoding make_encoding(const std::string& s)
{
    if (s == "utf8") {
        return text::Encoding::Utf8;
    }
    if (s == "latin1") {
        return text::Encoding::Latin1;
    }
    return text::Encoding::Auto;
}

inline std::unique_ptr<std::ifstream> open_input(const std::string& path)
{
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) {
        throw DataError("cannot open input '" + path + "'");
    }
    return in;
}

/// Joins several rendered tables; json output becomes an array.
inline std::string join_rendered(const std::vector<std::string>& docs, Format format)
{
    if (docs.size() == 1) {
        return docs.front();
    }
    std::string out;
    if (format == Format::Json) {
        out = "[\n";
        for (std::size_t i = 0; i < docs.size(); ++i) {
            std::string d = docs[i];
            while (!d.empty() && d.back() == '\n') {
                d.pop_back();
            }
            out += d;
            out += i + 1 < docs.size() ? ",\n" : "\n";
        }
        out += "]\n";
        return out;
    }
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i) {
            out.push_back('\n');
        }
        out += docs[i];
    }
    return out;
}

inline void print_row_error(std::ostream& err, const RowError& e)
{
    err << "line " << e.line << ": " << label_of(e.reason) << ": " << e.detail << '\n';
}

inline void print_line_count(std::ostream& err, const IngestStats& s)
{
    err << "rows: " << s.rows_read << " read, " << s.rows_accepted << " accepted, " << s.rows_rejected
        << " rejected\n";
}

/// All epi sinks fed by one pass over the input.
struct EpiSinks
{
    std::optional<EpiTablesAccumulator> tables;
    std::optional<StratifiedAccumulator> strata;
    std::optional<ComorbidityAccumulator> comorbidity;

    void add(const PatientRecord& r)
    {
        if (tables) {
            tables->add(r);
        }
        if (strata) {
            strata->add(r);
        }
        if (comorbidity) {
            comorbidity->add(r);
        }
    }

    void merge(const EpiSinks& o)
    {
        if (tables) {
            tables->merge(*o.tables);
        }
        if (strata) {
            strata->merge(*o.strata);
        }
        if (comorbidity) {
            comorbidity->merge(*o.comorbidity);
        }
    }
};

template <class Sink>
Sink ingest_epi(const RunConfig& c, const Sink& prototype, std::ostream& err)
{
    Dialect dialect{c.delimiter, text::Encoding::Auto};
    if (c.threads > 1) {
        auto in = open_input(c.input);
        const std::string path = c.input;
        auto [sink, stats] = ingest_sveerv_sharded(
            *in, prototype, c.threads, dialect, true,
            [path]() -> std::unique_ptr<std::istream> { return std::make_unique<std::ifstream>(path, std::ios::binary); });
        print_line_count(err, stats);
        return sink;
    }
    auto in = open_input(c.input);
    SveervReader reader(*in, dialect);
    Sink sink = prototype;
    std::size_t shown = 0;
    const auto& stats = reader.for_each([&](PatientRecord&& r) { sink.add(r); },
                                        [&](RowError&& e) {
                                            if (shown++ < 10) {
                                                print_row_error(err, e);
                                            }
                                        });
    print_line_count(err, stats);
    return sink;
}

class Output
{
public:
    Output(const std::string& path, std::ostream& fallback)
        : stream_(&fallback)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) {
                throw DataError("cannot open output '" + path + "'");
            }
            stream_ = file_.get();
        }
    }

    std::ostream& stream() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

inline void fatality_note(std::ostream& err, const CaseCounts& national)
{
    const auto rate = fatality_rate(national);
    err << "note: fatality_pct = deaths among confirmed positives / confirmed positives x 100";
    if (rate) {
        err << " = " << text::format_fixed2(*rate) << " for this cohort";
    }
    err << "; a 13.5% national headline figure does not follow from this formula and is not used\n";
}

inline int cmd_epi(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const auto format = *parse_format(c.format);
    const auto filter = make_filter(c);
    auto group_by = make_group_by(c);
    const auto crit = make_severity(c.severity);
    const auto mode = make_positivity(c.positivity);

    std::vector<TableId> tables;
    if (c.command == "epi-report") {
        tables = make_tables(c.tables,
                             {TableId::T1, TableId::T2, TableId::T3, TableId::T4, TableId::T5, TableId::T6, TableId::T7,
                              TableId::Strata, TableId::G4scatter, TableId::G5stack, TableId::ComorbidityProfile},
                             TableId::Strata);
    }
    else if (c.command == "scatter") {
        tables = {TableId::G4scatter};
    }
    else if (c.command == "severity") {
        tables = {TableId::G5stack};
    }
    else {
        tables = {TableId::Rank};
    }

    EpiSinks proto;
    proto.tables.emplace(filter); // always present: it carries the national fatality note
    for (auto t : tables) {
        if (t == TableId::Strata || t == TableId::G4scatter || t == TableId::G5stack || t == TableId::Rank) {
            if (t != TableId::Strata) {
                group_by.state = true;
            }
            proto.strata.emplace(filter, group_by);
        }
        if (t == TableId::ComorbidityProfile) {
            Subcohort sc = Subcohort::HospitalizedPositive;
            if (c.subcohort == "deaths") {
                sc = Subcohort::DeathsPositive;
            }
            else if (c.subcohort == "deaths-icu-intubated") {
                sc = Subcohort::DeathsIcuIntubated;
            }
            proto.comorbidity.emplace(filter, sc);
        }
    }

    const auto sinks = ingest_epi(c, proto, err);
    Output output(c.out, out);
    std::vector<std::string> docs;
    for (auto t : tables) {
        switch (t) {
        case TableId::Strata:
        case TableId::G4scatter:
        case TableId::G5stack:
            docs.push_back(render(t, sinks.strata->reports(crit, mode), format));
            break;
        case TableId::ComorbidityProfile:
            docs.push_back(render(t, sinks.comorbidity->profile(), format));
            break;
        case TableId::Rank: {
            RankMetric m = RankMetric::Fatality;
            if (c.metric == "positivity") {
                m = RankMetric::Positivity;
            }
            else if (c.metric == "tgi3") {
                m = RankMetric::Tgi3;
            }
            auto ranked = rank_states(sinks.strata->reports(crit, mode), m);
            if (c.top > 0 && ranked.size() > c.top) {
                ranked.resize(c.top);
            }
            docs.push_back(render_table(rank_table(ranked, c.metric + "_pct"), format));
            break;
        }
        default:
            docs.push_back(render(t, sinks.tables->tables(), format));
            break;
        }
    }
    output.stream() << join_rendered(docs, format);
    fatality_note(err, sinks.tables->tables().all);
    return 0;
}

inline VariantCatalog load_catalog(const std::string& path)
{
    if (path.empty()) {
        return VariantCatalog::builtin();
    }
    auto in = open_input(path);
    return VariantCatalog::load(*in);
}

inline int cmd_genomic(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const auto format = *parse_format(c.format);
    const auto tables = make_tables(c.tables,
                                    {TableId::G3shares, TableId::T8, TableId::T9, TableId::StatusBuckets,
                                     TableId::T10, TableId::T11, TableId::T12, TableId::T13},
                                    TableId::G3shares);
    const auto catalog = load_catalog(c.catalog);
    if (!catalog.find(c.variant)) {
        throw UsageError("variant '" + c.variant + "' is not in the catalog");
    }
    auto in = open_input(c.input);
    GisaidReader reader(*in, make_encoding(c.encoding));
    GenomicAccumulator acc(catalog);
    StateSummaryAccumulator summary(catalog, c.variant, c.summary_states);
    std::size_t shown = 0;
    const auto& stats = reader.for_each(
        [&](SampleRecord&& s) {
            acc.add(s);
            summary.add(s);
        },
        [&](RowError&& e) {
            if (shown++ < 10) {
                print_row_error(err, e);
            }
        });
    print_line_count(err, stats);
    const auto data = make_genomic_tables(acc, c.variant, summary.summary());
    Output output(c.out, out);
    std::vector<std::string> docs;
    for (auto t : tables) {
        docs.push_back(render(t, data, format));
    }
    output.stream() << join_rendered(docs, format);
    return 0;
}

inline std::string sniff_kind(const std::string& path)
{
    auto in = open_input(path);
    std::string first;
    std::getline(*in, first);
    return text::to_lower(first).find("clasificacion_final") != std::string::npos ? "sveerv" : "gisaid";
}

inline int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const std::string kind = c.kind == "auto" ? sniff_kind(c.input) : c.kind;
    auto in = open_input(c.input);
    std::size_t shown = 0;
    auto on_error = [&](RowError&& e) {
        if (shown++ < 20) {
            print_row_error(err, e);
        }
    };
    IngestStats stats;
    if (kind == "sveerv") {
        SveervReader reader(*in, Dialect{c.delimiter, text::Encoding::Auto});
        stats = reader.for_each([](PatientRecord&&) {}, on_error);
    }
    else {
        GisaidReader reader(*in, make_encoding(c.encoding));
        stats = reader.for_each([](SampleRecord&&) {}, on_error);
    }
    Output output(c.out, out);
    output.stream() << "kind: " << kind << '\n' << validate_report(stats);
    return 0;
}

inline int cmd_fixture(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    if (c.list_presets) {
        for (const auto& p : kPresets) {
            out << p.name << '\t' << (p.kind == PresetKind::Epi ? "epi" : "genomic") << '\n';
        }
        return 0;
    }
    if (c.rows) {
        Output output(c.out, out);
        write_random_sveerv(output.stream(), *c.rows, c.seed.value_or(1));
        err << "wrote " << *c.rows << " random rows\n";
        return 0;
    }
    std::string json;
    PresetKind kind = PresetKind::Epi;
    if (!c.preset.empty()) {
        auto p = find_preset(c.preset);
        if (!p) {
            throw UsageError("unknown preset '" + c.preset + "'");
        }
        json = std::string(p->json);
        kind = p->kind;
    }
    else if (!c.spec.empty()) {
        auto in = open_input(c.spec);
        std::ostringstream buf;
        buf << in->rdbuf();
        json = buf.str();
        // genomic specs are recognised by their keys
        kind = json.find("lineage_by_clade") != std::string::npos || json.find("status_by_clade") != std::string::npos ||
                       json.find("selected_states") != std::string::npos
                   ? PresetKind::Genomic
                   : PresetKind::Epi;
    }
    else {
        throw UsageError("fixture-gen needs --preset, --spec, --rows or --list-presets");
    }
    std::string bytes;
    if (kind == PresetKind::Epi) {
        auto spec = EpiMarginalSpec::parse(json);
        if (c.seed) {
            spec.seed = *c.seed;
        }
        bytes = generate_epi_fixture(spec);
    }
    else {
        auto spec = GenomicMarginalSpec::parse(json);
        if (c.seed) {
            spec.seed = *c.seed;
        }
        bytes = generate_genomic_fixture(spec);
    }
    Output output(c.out, out);
    output.stream() << bytes;
    return 0;
}

inline void add_input(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--input,-i", c.input, "input file")->required();
}

inline void add_output(CLI::App* sub, RunConfig& c, bool with_format = true)
{
    sub->add_option("--out,-o", c.out, "write output to this file instead of standard output");
    if (with_format) {
        sub->add_option("--format", c.format, "output format")
            ->check(CLI::IsMember({"tsv", "json", "markdown", "md"}))
            ->capture_default_str();
    }
}

inline void add_cohort(CLI::App* sub, RunConfig& c)
{
    sub->add_flag("--indigenous-only", c.indigenous_only, "keep indigenous-language speakers only");
    sub->add_option("--state", c.states, "state codes or names (repeat or comma-separate)")->delimiter(',');
    sub->add_option("--sex", c.sexes, "female, male or unspecified")
        ->delimiter(',')
        ->check(CLI::IsMember({"female", "male", "unspecified"}));
    sub->add_option("--onset-from", c.onset_from, "first symptom-onset date, YYYY-MM-DD");
    sub->add_option("--onset-to", c.onset_to, "last symptom-onset date, YYYY-MM-DD");
    sub->add_option("--severity", c.severity, "severe-case criterion")
        ->check(CLI::IsMember({"intubation", "icu", "icu-and-intubation", "icu-or-intubation"}))
        ->capture_default_str();
    sub->add_option("--positivity", c.positivity, "positivity denominator: aggregate (all registered) or strict")
        ->check(CLI::IsMember({"aggregate", "strict"}))
        ->capture_default_str();
    sub->add_option("--threads", c.threads, "ingestion shards, one thread each")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
    sub->add_option("--delimiter", c.delimiter, "field delimiter")->capture_default_str();
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    using namespace detail;
    CLI::App app{"episurv: surveillance open-data analytics"};
    app.name("episurv");
    app.require_subcommand(1, 1);
    RunConfig c;

    auto* validate = app.add_subcommand("validate", "check an input file and summarize rejected rows");
    add_input(validate, c);
    add_output(validate, c, false);
    validate->add_option("--kind", c.kind, "input kind")
        ->check(CLI::IsMember({"auto", "sveerv", "gisaid"}))
        ->capture_default_str();
    validate->add_option("--delimiter", c.delimiter, "SVEERV field delimiter")->capture_default_str();
    validate->add_option("--encoding", c.encoding, "metadata text encoding")
        ->check(CLI::IsMember({"auto", "utf8", "latin1"}));

    auto* epi = app.add_subcommand("epi-report", "case-level metrics and annex tables");
    add_input(epi, c);
    add_output(epi, c);
    add_cohort(epi, c);
    epi->add_option("--group-by", c.group_by, "strata dimensions")
        ->delimiter(',')
        ->check(CLI::IsMember({"state", "municipality", "sex", "age_group", "age"}));
    epi->add_option("--table", c.tables, "tables to emit: T1..T7, Strata, G4scatter, G5stack, ComorbidityProfile")
        ->delimiter(',');
    epi->add_option("--subcohort", c.subcohort, "ComorbidityProfile subcohort")
        ->check(CLI::IsMember({"hospitalized", "deaths", "deaths-icu-intubated"}))
        ->capture_default_str();

    auto* rank = app.add_subcommand("rank", "states ordered by a metric");
    add_input(rank, c);
    add_output(rank, c);
    add_cohort(rank, c);
    rank->add_option("--metric", c.metric, "ranking metric")
        ->check(CLI::IsMember({"fatality", "positivity", "tgi3"}))
        ->capture_default_str();
    rank->add_option("--top", c.top, "keep the first N states (0 = all)");

    auto* scatter = app.add_subcommand("scatter", "per-state fatality and positivity");
    add_input(scatter, c);
    add_output(scatter, c);
    add_cohort(scatter, c);

    auto* severity = app.add_subcommand("severity", "per-state severity shares");
    add_input(severity, c);
    add_output(severity, c);
    add_cohort(severity, c);

    auto* genomic = app.add_subcommand("genomic-report", "variant shares and cross-tabs from sample metadata");
    add_input(genomic, c);
    add_output(genomic, c);
    genomic->add_option("--catalog", c.catalog, "variant catalog file replacing the built-in one");
    genomic->add_option("--table", c.tables,
                        "tables to emit: G3shares, T8, T9, StatusBuckets, T10, T11, T12, T13")
        ->delimiter(',');
    genomic->add_option("--variant", c.variant, "variant for status and state tables")->capture_default_str();
    genomic->add_option("--states", c.summary_states, "divisions for the selected-states tables")->delimiter(',');
    genomic->add_option("--encoding", c.encoding, "metadata text encoding")
        ->check(CLI::IsMember({"auto", "utf8", "latin1"}))
        ->capture_default_str();

    auto* fixture = app.add_subcommand("fixture-gen", "write a synthetic fixture");
    auto* preset_opt = fixture->add_option("--preset", c.preset, "shipped preset (epi-national, genomic-delta, table1..table13)");
    auto* spec_opt = fixture->add_option("--spec", c.spec, "marginal spec json file");
    auto* rows_opt = fixture->add_option("--rows", c.rows, "random SVEERV file with this many rows");
    auto* list_opt = fixture->add_flag("--list-presets", c.list_presets, "list shipped presets");
    preset_opt->excludes(spec_opt)->excludes(rows_opt)->excludes(list_opt);
    spec_opt->excludes(rows_opt)->excludes(list_opt);
    rows_opt->excludes(list_opt);
    fixture->add_option("--seed", c.seed, "override the seed in the preset or spec file");
    fixture->add_option("--out,-o", c.out, "output file");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        c.command = app.get_subcommands().front()->get_name();
        if (c.command == "validate") {
            return cmd_validate(c, out, err);
        }
        if (c.command == "genomic-report") {
            return cmd_genomic(c, out, err);
        }
        if (c.command == "fixture-gen") {
            return cmd_fixture(c, out, err);
        }
        return cmd_epi(c, out, err);
    }
    catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace episurv::cli
