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
#include "episurv/schema.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace
{

using namespace episurv;

TEST(Classification, DecodesTableCodes)
{
    EXPECT_EQ(decode_classification(3), CaseClassification::ConfirmedSarsCov2);
    EXPECT_EQ(decode_classification(7), CaseClassification::NegativeSarsCov2);
    EXPECT_EQ(decode_classification(4), CaseClassification::InvalidByLaboratory);
}

TEST(Classification, RejectsCodesOutsideDomain)
{
    for (std::int64_t bad : {0, 8, -1, 97}) {
        try {
            decode_classification(bad);
            FAIL() << "accepted " << bad;
        }
        catch (const UnknownCode& e) {
            EXPECT_EQ(e.code(), bad);
            EXPECT_EQ(e.domain(), "classification");
        }
    }
}

TEST(Classification, BijectiveOverSevenCodes)
{
    std::set<std::string_view> labels;
    for (int code = 1; code <= 7; ++code) {
        const auto c = decode_classification(code);
        EXPECT_EQ(code_of(c), code);
        labels.insert(label_of(c));
    }
    EXPECT_EQ(labels.size(), 7u);
    EXPECT_EQ(kAllClassifications.size(), 7u);
}

TEST(Classification, PositiveSubsetIsTheThreeConfirmedClasses)
{
    EXPECT_TRUE(is_positive(CaseClassification::ConfirmedByAdjudicationCommittee));
    EXPECT_TRUE(is_positive(CaseClassification::ConfirmedByEpidemiologicalAssociation));
    EXPECT_TRUE(is_positive(CaseClassification::ConfirmedSarsCov2));
    EXPECT_FALSE(is_positive(CaseClassification::Suspect));
    EXPECT_FALSE(is_positive(CaseClassification::NegativeSarsCov2));
    EXPECT_FALSE(is_positive(CaseClassification::InvalidByLaboratory));
    EXPECT_FALSE(is_positive(CaseClassification::NotPerformedByLaboratory));
    int positives = 0;
    for (auto c : kAllClassifications) {
        positives += is_positive(c);
    }
    EXPECT_EQ(positives, 3);
}

TEST(Flag, DecodesDocumentedCodes)
{
    EXPECT_EQ(decode_flag(1), CodedFlag::Yes);
    EXPECT_EQ(decode_flag(2), CodedFlag::No);
    EXPECT_EQ(decode_flag(97), CodedFlag::NotApplicable);
    EXPECT_EQ(decode_flag(98), CodedFlag::Ignored);
    EXPECT_EQ(decode_flag(99), CodedFlag::Unspecified);
}

TEST(Flag, EveryOtherIntegerIsAnError)
{
    for (std::int64_t code = -5; code <= 200; ++code) {
        const bool valid = code == 1 || code == 2 || code == 97 || code == 98 || code == 99;
        if (valid) {
            EXPECT_EQ(code_of(decode_flag(code)), code);
        }
        else {
            EXPECT_THROW(decode_flag(code), UnknownCode) << code;
        }
    }
}

TEST(Flag, DenseIndexMatchesListOrder)
{
    for (std::size_t i = 0; i < kAllFlags.size(); ++i) {
        EXPECT_EQ(index_of(kAllFlags[i]), i);
    }
}

TEST(Treatment, DecodesPatientType)
{
    EXPECT_EQ(decode_treatment(1), TreatmentStrategy::Ambulatory);
    EXPECT_EQ(decode_treatment(2), TreatmentStrategy::Hospitalized);
    EXPECT_THROW(decode_treatment(3), UnknownCode);
    EXPECT_THROW(decode_treatment(99), UnknownCode);
}

TEST(Sex, UnresolvedCodesAreUnspecified)
{
    EXPECT_EQ(decode_sex(1), Sex::Female);
    EXPECT_EQ(decode_sex(2), Sex::Male);
    EXPECT_EQ(decode_sex(99), Sex::Unspecified);
    EXPECT_EQ(decode_sex(3), Sex::Unspecified);
    for (auto s : kAllSexes) {
        EXPECT_EQ(decode_sex(code_of(s)), s);
    }
}

TEST(States, CatalogLookup)
{
    EXPECT_EQ(state_name(31), "Yucat\xC3\xA1n");
    EXPECT_EQ(state_name(20), "Oaxaca");
    EXPECT_EQ(state_name(30), "Veracruz");
    EXPECT_THROW(state_name(0), UnknownCode);
    EXPECT_THROW(state_name(33), UnknownCode);
}

TEST(Comorbidities, ColumnsAreDistinct)
{
    std::set<std::string_view> cols;
    std::set<std::string_view> labels;
    for (auto c : kAllComorbidities) {
        cols.insert(column_of(c));
        labels.insert(label_of(c));
    }
    EXPECT_EQ(cols.size(), kComorbidityCount);
    EXPECT_EQ(labels.size(), kComorbidityCount);
    EXPECT_EQ(column_of(Comorbidity::Copd), "EPOC");
    EXPECT_EQ(column_of(Comorbidity::Pneumonia), "NEUMONIA");
}

TEST(SuspectType, AssociationWithoutValidSample)
{
    auto r = test::plain_positive();
    r.classification = CaseClassification::Suspect;
    EXPECT_EQ(suspect_type(r, LabSample::Invalid, true), SuspectType::Type1ConfirmedByAssociation);
}

TEST(SuspectType, DeathWithoutSampleOrAssociation)
{
    auto r = test::plain_positive();
    r.classification = CaseClassification::Suspect;
    r.death_date = test::ymd(2021, 1, 10);
    EXPECT_EQ(suspect_type(r, LabSample::NotTaken, false), SuspectType::Type2ConfirmedByRuling);
}

TEST(SuspectType, ValidPositiveSample)
{
    auto r = test::plain_positive();
    EXPECT_EQ(suspect_type(r, LabSample::Taken, false), SuspectType::Type3ConfirmedByLab);
    EXPECT_EQ(suspect_type(r, LabSample::Taken, true), SuspectType::Type3ConfirmedByLab);
}

TEST(SuspectType, NoneWhenNoScenarioHolds)
{
    auto r = test::plain_positive();
    r.classification = CaseClassification::Suspect;
    EXPECT_FALSE(suspect_type(r, LabSample::NotTaken, false));
    EXPECT_FALSE(suspect_type(r, LabSample::Taken, false));
}

TEST(SuspectType, AssociationTakesPrecedenceOverDeath)
{
    auto r = test::plain_positive();
    r.classification = CaseClassification::ConfirmedByEpidemiologicalAssociation;
    r.death_date = test::ymd(2021, 1, 10);
    EXPECT_EQ(suspect_type(r, LabSample::NotTaken, true), SuspectType::Type1ConfirmedByAssociation);
}

TEST(SuspectType, RejectsNegativeClasses)
{
    auto r = test::plain_positive();
    r.classification = CaseClassification::NegativeSarsCov2;
    EXPECT_THROW(suspect_type(r, LabSample::Taken, false), std::invalid_argument);
}

} // namespace
