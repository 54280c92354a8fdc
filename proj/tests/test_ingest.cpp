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
#include "episurv/ingest.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <string>

namespace
{

using namespace episurv;

// Column order deliberately differs from the fixture writer's.
const std::vector<std::string> kColumns = {
    "CLASIFICACION_FINAL", "ENTIDAD_RES", "MUNICIPIO_RES", "SEXO",       "EDAD",           "HABLA_LENGUA_INDIG",
    "TIPO_PACIENTE",       "UCI",         "INTUBADO",      "FECHA_DEF",  "FECHA_SINTOMAS", "DIABETES",
    "EPOC",                "ASMA",        "INMUSUPR",      "HIPERTENSION", "CARDIOVASCULAR", "OBESIDAD",
    "RENAL_CRONICA",       "TABAQUISMO",  "NEUMONIA"};

std::string header()
{
    std::string h;
    for (const auto& c : kColumns) {
        h += (h.empty() ? "" : ",") + c;
    }
    return h + "\n";
}

std::string row(const std::map<std::string, std::string>& overrides = {})
{
    std::map<std::string, std::string> v = {
        {"CLASIFICACION_FINAL", "3"}, {"ENTIDAD_RES", "20"},     {"MUNICIPIO_RES", "67"},
        {"SEXO", "1"},               {"EDAD", "45"},            {"HABLA_LENGUA_INDIG", "1"},
        {"TIPO_PACIENTE", "2"},      {"UCI", "1"},              {"INTUBADO", "2"},
        {"FECHA_DEF", "9999-99-99"}, {"FECHA_SINTOMAS", "2021-03-14"}};
    for (const auto& c : kColumns) {
        v.emplace(c, "2");
    }
    for (const auto& [k, x] : overrides) {
        v[k] = x;
    }
    std::string out;
    for (const auto& c : kColumns) {
        out += (out.empty() ? "" : ",") + v[c];
    }
    return out + "\n";
}

std::vector<RowError> errors_of(const std::string& csv, IngestStats& stats)
{
    std::istringstream in(csv);
    std::vector<RowError> errors;
    stats = ingest_sveerv(in, Dialect{}, [](PatientRecord&&) {}, [&](RowError&& e) { errors.push_back(e); });
    return errors;
}

TEST(IngestSveerv, SingleValidRow)
{
    IngestStats stats;
    auto records = test::sveerv_from(header() + row({{"DIABETES", "1"}}), &stats);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(stats.rows_read, 1u);
    EXPECT_EQ(stats.rows_accepted, 1u);
    EXPECT_EQ(stats.rows_rejected, 0u);
    const auto& r = records[0];
    EXPECT_EQ(r.state_code, 20);
    EXPECT_EQ(r.municipality_code, 67);
    EXPECT_EQ(r.sex, Sex::Female);
    EXPECT_EQ(r.age_years, 45);
    EXPECT_EQ(r.speaks_indigenous_language, CodedFlag::Yes);
    EXPECT_EQ(r.treatment, TreatmentStrategy::Hospitalized);
    EXPECT_EQ(r.icu, CodedFlag::Yes);
    EXPECT_EQ(r.intubated, CodedFlag::No);
    EXPECT_FALSE(r.deceased());
    EXPECT_EQ(r.classification, CaseClassification::ConfirmedSarsCov2);
    EXPECT_EQ(r.comorbidity(Comorbidity::Diabetes), CodedFlag::Yes);
    EXPECT_EQ(r.comorbidity(Comorbidity::Smoking), CodedFlag::No);
    EXPECT_EQ(r.symptom_onset_date, test::ymd(2021, 3, 14));
}

TEST(IngestSveerv, UnknownClassificationIsRowError)
{
    IngestStats stats;
    auto errors = errors_of(header() + row({{"CLASIFICACION_FINAL", "9"}}), stats);
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_EQ(errors[0].reason, RowErrorReason::UnknownCode);
    EXPECT_EQ(errors[0].line, 2u);
    EXPECT_EQ(stats.rows_rejected, 1u);
    EXPECT_EQ(stats.rows_accepted, 0u);
    EXPECT_EQ(stats.rejection_reasons.at("UnknownCode"), 1u);
}

TEST(IngestSveerv, DeathDateSentinelAndDates)
{
    auto records = test::sveerv_from(header() + row({{"FECHA_DEF", "2021-05-02"}}) + row({{"FECHA_SINTOMAS", ""}}));
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].death_date, test::ymd(2021, 5, 2));
    EXPECT_FALSE(records[1].symptom_onset_date);
    EXPECT_FALSE(records[1].deceased());
}

TEST(IngestSveerv, RowErrorsByReason)
{
    const std::vector<std::pair<std::map<std::string, std::string>, RowErrorReason>> cases = {
        {{{"UCI", "3"}}, RowErrorReason::UnknownCode},
        {{{"TIPO_PACIENTE", "99"}}, RowErrorReason::UnknownCode},
        {{{"EDAD", "131"}}, RowErrorReason::OutOfRange},
        {{{"EDAD", "-1"}}, RowErrorReason::OutOfRange},
        {{{"ENTIDAD_RES", "33"}}, RowErrorReason::OutOfRange},
        {{{"ENTIDAD_RES", "x"}}, RowErrorReason::NotAnInteger},
        {{{"EDAD", "forty"}}, RowErrorReason::NotAnInteger},
        {{{"FECHA_DEF", "2021-13-01"}}, RowErrorReason::BadDate},
        {{{"FECHA_DEF", ""}}, RowErrorReason::BadDate},
        {{{"FECHA_SINTOMAS", "14/03/2021"}}, RowErrorReason::BadDate},
    };
    for (const auto& [over, reason] : cases) {
        IngestStats stats;
        auto errors = errors_of(header() + row(over), stats);
        ASSERT_EQ(errors.size(), 1u) << over.begin()->first;
        EXPECT_EQ(errors[0].reason, reason) << over.begin()->first << "=" << over.begin()->second;
        EXPECT_FALSE(errors[0].detail.empty());
    }
}

TEST(IngestSveerv, FieldCountMismatch)
{
    IngestStats stats;
    auto errors = errors_of(header() + "3,20,67\n" + row(), stats);
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_EQ(errors[0].reason, RowErrorReason::FieldCount);
    EXPECT_EQ(stats.rows_read, 2u);
    EXPECT_EQ(stats.rows_accepted, 1u);
}

TEST(IngestSveerv, UnresolvedSexAndAgeAreNotErrors)
{
    auto records = test::sveerv_from(header() + row({{"SEXO", "99"}, {"EDAD", ""}}));
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].sex, Sex::Unspecified);
    EXPECT_FALSE(records[0].age_years);
}

TEST(IngestSveerv, MissingRequiredColumnIsFatal)
{
    std::istringstream in("ENTIDAD_RES,SEXO\n1,1\n");
    try {
        SveervReader reader(in);
        FAIL() << "header accepted";
    }
    catch (const MissingRequiredColumn& e) {
        EXPECT_EQ(e.column(), "MUNICIPIO_RES");
    }
    std::istringstream empty("");
    EXPECT_THROW(SveervReader{empty}, MissingRequiredColumn);
}

TEST(IngestSveerv, HeaderLookupIsCaseInsensitiveAndSkipsUnknownColumns)
{
    std::string h = header();
    for (auto& ch : h) {
        ch = text::ascii_lower(ch);
    }
    std::string csv = "EXTRA," + h;
    csv += "ignored," + row();
    auto records = test::sveerv_from(csv);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].state_code, 20);
}

TEST(IngestSveerv, Latin1FreeTextDoesNotRejectRows)
{
    std::string csv = "MUNICIPIO_NOMBRE," + header();
    csv += "Santa Mar\xED" "a Jalapa del Marqu\xE9s," + row();
    csv += "\"San Juan Bautista Cuicatl\xE1n, Oax.\"," + row();
    IngestStats stats;
    auto records = test::sveerv_from(csv, &stats);
    EXPECT_EQ(records.size(), 2u);
    EXPECT_EQ(stats.rows_rejected, 0u);
}

TEST(IngestSveerv, ShortIndigenousColumnAliasAccepted)
{
    std::string h = header();
    h.replace(h.find("HABLA_LENGUA_INDIG"), 18, "HABLA_LENGUA_INDI");
    EXPECT_EQ(test::sveerv_from(h + row()).size(), 1u);
}

TEST(IngestSveerv, SemicolonDialect)
{
    std::string csv = header() + row();
    std::replace(csv.begin(), csv.end(), ',', ';');
    std::istringstream in(csv);
    IngestStats stats;
    auto records = read_all_sveerv(in, &stats, Dialect{';', text::Encoding::Auto});
    EXPECT_EQ(records.size(), 1u);
}

TEST(IngestSveerv, BytesReadCoversWholeInput)
{
    const std::string csv = header() + row() + row({{"UCI", "7"}});
    IngestStats stats;
    test::sveerv_from(csv, &stats);
    EXPECT_EQ(stats.bytes_read, csv.size());
}

TEST(IngestSveerv, DeterministicAcrossRuns)
{
    const auto csv = write_sveerv(random_patients(500, 11));
    IngestStats a;
    IngestStats b;
    auto ra = test::sveerv_from(csv, &a);
    auto rb = test::sveerv_from(csv, &b);
    EXPECT_EQ(ra, rb);
    EXPECT_EQ(a, b);
}

TEST(IngestSveerv, WriterRoundTrip)
{
    const auto records = random_patients(2000, 3);
    EXPECT_EQ(test::sveerv_from(write_sveerv(records)), records);
}

TEST(IngestSveerv, ShardedMatchesWhole)
{
    const auto csv = write_sveerv(random_patients(3000, 5)) + "garbage,row\n";
    CaseCounts whole;
    IngestStats whole_stats;
    for (const auto& r : test::sveerv_from(csv, &whole_stats)) {
        whole.add(r);
    }
    for (unsigned shards : {1u, 2u, 3u, 7u, 64u}) {
        std::istringstream in(csv);
        auto [counts, stats] = ingest_sveerv_sharded(in, CaseCounts{}, shards);
        EXPECT_EQ(counts, whole) << shards;
        EXPECT_EQ(stats, whole_stats) << shards;
    }
}

TEST(IngestSveerv, ThreadedShardsMatchWhole)
{
    test::TempFile file(".csv", write_sveerv(random_patients(4000, 9)));
    CaseCounts whole;
    for (const auto& r : test::sveerv_from(file.read())) {
        whole.add(r);
    }
    std::ifstream in(file.path(), std::ios::binary);
    auto reopen = [&] { return std::make_unique<std::ifstream>(file.path(), std::ios::binary); };
    auto [counts, stats] = ingest_sveerv_sharded(in, CaseCounts{}, 4, Dialect{}, true, reopen);
    EXPECT_EQ(counts, whole);
    EXPECT_EQ(stats.rows_accepted, 4000u);
}

TEST(ShardRanges, CoverTheDataExactlyOnRowBoundaries)
{
    const std::string data = "h\naaa\nbb\nc\ndddd\ne\n";
    std::istringstream in(data);
    auto ranges = shard_ranges(in, 2, data.size(), 3);
    ASSERT_FALSE(ranges.empty());
    EXPECT_EQ(ranges.front().first, 2u);
    EXPECT_EQ(ranges.back().second, data.size());
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        EXPECT_EQ(ranges[i].first, ranges[i - 1].second);
        EXPECT_EQ(data[ranges[i].first - 1], '\n');
    }
}

// --- metadata -----------------------------------------------------------------

const std::string kMetaHeader = "accession\tdate\tdivision\tpango_lineage\tclade\tpatient_status\tage\tsex\tvaccine\n";

TEST(IngestGisaid, AcceptsTabulatedDeltaLineage)
{
    IngestStats stats;
    auto samples = test::gisaid_from(
        kMetaHeader + "EPI_ISL_1\t2021-07-01\tVeracruz\tAY.20\tGK\tHospitalizado\t44\tMale\tPfizer\n", &stats);
    ASSERT_EQ(samples.size(), 1u);
    EXPECT_EQ(stats.rows_accepted, 1u);
    const auto& s = samples[0];
    EXPECT_EQ(s.pango_lineage, "AY.20");
    EXPECT_EQ(s.gisaid_clade, "GK");
    EXPECT_EQ(s.state, "Veracruz");
    EXPECT_EQ(s.patient_status, "Hospitalizado");
    EXPECT_EQ(s.age_years, 44);
    EXPECT_EQ(s.sex, Sex::Male);
    EXPECT_EQ(s.vaccine, "Pfizer");
    EXPECT_EQ(s.collection_date, test::ymd(2021, 7, 1));
}

TEST(IngestGisaid, EmptyLineageIsRowError)
{
    IngestStats stats;
    std::istringstream in(kMetaHeader + "EPI_ISL_2\t2021-07-01\tOaxaca\t\tGK\tLiberado\t30\tFemale\t\n");
    std::vector<RowError> errors;
    stats = ingest_gisaid(in, [](SampleRecord&&) {}, [&](RowError&& e) { errors.push_back(e); });
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_EQ(errors[0].reason, RowErrorReason::EmptyLineage);
    EXPECT_EQ(stats.rejection_reasons.at("EmptyLineage"), 1u);
}

TEST(IngestGisaid, OtherRowErrors)
{
    const std::vector<std::pair<std::string, RowErrorReason>> cases = {
        {"\t2021-07-01\tOaxaca\tAY.3\tGK\tx\t30\tF\t\n", RowErrorReason::EmptyAccession},
        {"E\t2021-07-01\tOaxaca\tAY..3\tGK\tx\t30\tF\t\n", RowErrorReason::MalformedLineage},
        {"E\t2021-07-01\tOaxaca\t1.2\tGK\tx\t30\tF\t\n", RowErrorReason::MalformedLineage},
        {"E\t07/01/2021\tOaxaca\tAY.3\tGK\tx\t30\tF\t\n", RowErrorReason::BadDate},
        {"E\t2021-07-01\tOaxaca\tAY.3\tGK\tx\tmany\tF\t\n", RowErrorReason::NotAnInteger},
        {"E\t2021-07-01\tOaxaca\tAY.3\tGK\tx\t200\tF\t\n", RowErrorReason::OutOfRange},
        {"E\t2021-07-01\tOaxaca\tAY.3\n", RowErrorReason::FieldCount},
    };
    for (const auto& [line, reason] : cases) {
        std::istringstream in(kMetaHeader + line);
        GisaidReader reader(in);
        auto row = reader.next();
        ASSERT_TRUE(row);
        auto* err = std::get_if<RowError>(&*row);
        ASSERT_NE(err, nullptr) << line;
        EXPECT_EQ(err->reason, reason) << line;
    }
}

TEST(IngestGisaid, CommaDelimitedWithAliasedColumns)
{
    const std::string csv = "Accession ID,Collection date,division,Lineage,GISAID_clade,Patient status,"
                            "Patient age,Gender,Vaccinated,Host\n"
                            "EPI_ISL_3,2021-07,Puebla,b.1.617.2,G,Ambulatorio,unknown,mujer,,Human\n";
    auto samples = test::gisaid_from(csv);
    ASSERT_EQ(samples.size(), 1u);
    EXPECT_EQ(samples[0].pango_lineage, "B.1.617.2");
    EXPECT_FALSE(samples[0].collection_date);
    EXPECT_FALSE(samples[0].age_years);
    EXPECT_EQ(samples[0].sex, Sex::Female);
    EXPECT_FALSE(samples[0].vaccine);
}

TEST(IngestGisaid, StatusKeptVerbatimAndLatin1Decoded)
{
    auto samples =
        test::gisaid_from(kMetaHeader + "E\t2021-07-01\tYucat\xE1n\tAY.3\tGK\t Asintom\xE1tico - Ambulatorio \t30\tF\t\n");
    ASSERT_EQ(samples.size(), 1u);
    EXPECT_EQ(samples[0].state, "Yucat\xC3\xA1n");
    EXPECT_EQ(samples[0].patient_status, " Asintom\xC3\xA1tico - Ambulatorio ");
}

TEST(IngestGisaid, MissingColumn)
{
    std::istringstream in("accession\tdate\n");
    EXPECT_THROW(GisaidReader{in}, MissingRequiredColumn);
}

TEST(IngestGisaid, WriterRoundTrip)
{
    const auto& samples = test::genomic_preset_records();
    IngestStats stats;
    auto back = test::gisaid_from(write_gisaid_tsv(samples), &stats);
    EXPECT_EQ(stats.rows_accepted, samples.size());
    EXPECT_EQ(back, samples);
}

// --- report -----------------------------------------------------------------------

TEST(ValidateReport, ListsAcceptedCount)
{
    IngestStats s;
    s.accept();
    s.accept();
    const auto text = validate_report(s);
    EXPECT_NE(text.find("accepted: 2"), std::string::npos);
    EXPECT_NE(text.find("rejection reasons: none"), std::string::npos);
}

TEST(ValidateReport, ListsRejectionReasons)
{
    IngestStats s;
    s.reject(RowErrorReason::UnknownCode);
    const auto text = validate_report(s);
    EXPECT_NE(text.find("rejected: 1"), std::string::npos);
    EXPECT_NE(text.find("UnknownCode: 1"), std::string::npos);
}

TEST(ValidateReport, EmptyStatsShowZeros)
{
    const auto text = validate_report(IngestStats{});
    EXPECT_NE(text.find("rows read: 0"), std::string::npos);
    EXPECT_NE(text.find("rows accepted: 0"), std::string::npos);
    EXPECT_NE(text.find("rows rejected: 0"), std::string::npos);
}

TEST(ValidateReport, ReasonsOrderedByCountThenName)
{
    IngestStats s;
    s.reject(RowErrorReason::BadDate);
    s.reject(RowErrorReason::UnknownCode);
    s.reject(RowErrorReason::UnknownCode);
    s.reject(RowErrorReason::FieldCount);
    const auto text = validate_report(s);
    const auto u = text.find("UnknownCode");
    const auto b = text.find("BadDate");
    const auto f = text.find("FieldCount");
    EXPECT_LT(u, b);
    EXPECT_LT(b, f);
    EXPECT_EQ(validate_report(s), text);
}

TEST(IngestStats, MergeSumsAndKeepsInvariant)
{
    IngestStats a;
    a.accept();
    a.reject(RowErrorReason::BadDate);
    IngestStats b;
    b.reject(RowErrorReason::BadDate);
    b.bytes_read = 10;
    a.merge(b);
    EXPECT_EQ(a.rows_read, 3u);
    EXPECT_EQ(a.rows_read, a.rows_accepted + a.rows_rejected);
    EXPECT_EQ(a.rejection_reasons.at("BadDate"), 2u);
    EXPECT_EQ(a.bytes_read, 10u);
}

} // namespace
