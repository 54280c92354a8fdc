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

/// SVEERV data dictionary: coded-value domains, the sentinel conventions and
/// the decoded record every other module consumes.

#include "episurv/errors.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace episurv
{

using Date = std::chrono::year_month_day;

/// Literal used in the death-date column for patients not recorded as deceased.
inline constexpr std::string_view kAliveSentinel = "9999-99-99";

enum class CaseClassification : std::uint8_t
{
    ConfirmedByEpidemiologicalAssociation = 1,
    ConfirmedByAdjudicationCommittee      = 2,
    ConfirmedSarsCov2                     = 3,
    InvalidByLaboratory                   = 4,
    NotPerformedByLaboratory              = 5,
    Suspect                               = 6,
    NegativeSarsCov2                      = 7,
};

inline constexpr std::array<CaseClassification, 7> kAllClassifications = {
    CaseClassification::ConfirmedByEpidemiologicalAssociation,
    CaseClassification::ConfirmedByAdjudicationCommittee,
    CaseClassification::ConfirmedSarsCov2,
    CaseClassification::InvalidByLaboratory,
    CaseClassification::NotPerformedByLaboratory,
    CaseClassification::Suspect,
    CaseClassification::NegativeSarsCov2,
};

inline CaseClassification decode_classification(std::int64_t code)
{
    if (code < 1 || code > 7) {
        throw UnknownCode("classification", code);
    }
    return static_cast<CaseClassification>(code);
}

constexpr int code_of(CaseClassification c) { return static_cast<int>(c); }

constexpr bool is_positive(CaseClassification c)
{
    return c == CaseClassification::ConfirmedByEpidemiologicalAssociation ||
           c == CaseClassification::ConfirmedByAdjudicationCommittee || c == CaseClassification::ConfirmedSarsCov2;
}

constexpr std::string_view label_of(CaseClassification c)
{
    switch (c) {
    case CaseClassification::ConfirmedByEpidemiologicalAssociation:
        return "ConfirmedByEpidemiologicalAssociation";
    case CaseClassification::ConfirmedByAdjudicationCommittee:
        return "ConfirmedByAdjudicationCommittee";
    case CaseClassification::ConfirmedSarsCov2:
        return "ConfirmedSarsCov2";
    case CaseClassification::InvalidByLaboratory:
        return "InvalidByLaboratory";
    case CaseClassification::NotPerformedByLaboratory:
        return "NotPerformedByLaboratory";
    case CaseClassification::Suspect:
        return "Suspect";
    case CaseClassification::NegativeSarsCov2:
        return "NegativeSarsCov2";
    }
    return "";
}

enum class CodedFlag : std::uint8_t
{
    Yes           = 1,
    No            = 2,
    NotApplicable = 97,
    Ignored       = 98,
    Unspecified   = 99,
};

inline constexpr std::array<CodedFlag, 5> kAllFlags = {CodedFlag::Yes, CodedFlag::No, CodedFlag::NotApplicable,
                                                       CodedFlag::Ignored, CodedFlag::Unspecified};

inline CodedFlag decode_flag(std::int64_t code)
{
    switch (code) {
    case 1:
    case 2:
    case 97:
    case 98:
    case 99:
        return static_cast<CodedFlag>(code);
    default:
        throw UnknownCode("flag", code);
    }
}

constexpr int code_of(CodedFlag f) { return static_cast<int>(f); }

/// Dense position of a flag in kAllFlags, for array-indexed tallies.
constexpr std::size_t index_of(CodedFlag f)
{
    switch (f) {
    case CodedFlag::Yes:
        return 0;
    case CodedFlag::No:
        return 1;
    case CodedFlag::NotApplicable:
        return 2;
    case CodedFlag::Ignored:
        return 3;
    case CodedFlag::Unspecified:
        return 4;
    }
    return 4;
}

constexpr std::string_view label_of(CodedFlag f)
{
    switch (f) {
    case CodedFlag::Yes:
        return "Yes";
    case CodedFlag::No:
        return "No";
    case CodedFlag::NotApplicable:
        return "NotApplicable";
    case CodedFlag::Ignored:
        return "Ignored";
    case CodedFlag::Unspecified:
        return "Unspecified";
    }
    return "";
}

enum class TreatmentStrategy : std::uint8_t
{
    Ambulatory   = 1,
    Hospitalized = 2,
};

inline TreatmentStrategy decode_treatment(std::int64_t code)
{
    if (code != 1 && code != 2) {
        throw UnknownCode("patient type", code);
    }
    return static_cast<TreatmentStrategy>(code);
}

constexpr int code_of(TreatmentStrategy t) { return static_cast<int>(t); }

enum class Sex : std::uint8_t
{
    Female,
    Male,
    Unspecified,
};

inline constexpr std::array<Sex, 3> kAllSexes = {Sex::Female, Sex::Male, Sex::Unspecified};

/// SVEERV codes 1 (mujer) and 2 (hombre); every other integer is Unspecified.
constexpr Sex decode_sex(std::int64_t code)
{
    if (code == 1) {
        return Sex::Female;
    }
    if (code == 2) {
        return Sex::Male;
    }
    return Sex::Unspecified;
}

constexpr int code_of(Sex s)
{
    switch (s) {
    case Sex::Female:
        return 1;
    case Sex::Male:
        return 2;
    case Sex::Unspecified:
        return 99;
    }
    return 99;
}

constexpr std::string_view label_of(Sex s)
{
    switch (s) {
    case Sex::Female:
        return "Female";
    case Sex::Male:
        return "Male";
    case Sex::Unspecified:
        return "Unspecified";
    }
    return "";
}

inline constexpr int kMaxAge = 130;

enum class Comorbidity : std::uint8_t
{
    Diabetes,
    Copd,
    Asthma,
    Immunosuppression,
    Hypertension,
    Cardiovascular,
    Obesity,
    ChronicRenal,
    Smoking,
    Pneumonia,
};

inline constexpr std::size_t kComorbidityCount = 10;

inline constexpr std::array<Comorbidity, kComorbidityCount> kAllComorbidities = {
    Comorbidity::Diabetes,     Comorbidity::Copd,           Comorbidity::Asthma,  Comorbidity::Immunosuppression,
    Comorbidity::Hypertension, Comorbidity::Cardiovascular, Comorbidity::Obesity, Comorbidity::ChronicRenal,
    Comorbidity::Smoking,      Comorbidity::Pneumonia,
};

/// SVEERV column carrying each comorbidity flag.
constexpr std::string_view column_of(Comorbidity c)
{
    constexpr std::array<std::string_view, kComorbidityCount> names = {
        "DIABETES", "EPOC",     "ASMA",         "INMUSUPR",   "HIPERTENSION",
        "CARDIOVASCULAR", "OBESIDAD", "RENAL_CRONICA", "TABAQUISMO", "NEUMONIA"};
    return names[static_cast<std::size_t>(c)];
}

constexpr std::string_view label_of(Comorbidity c)
{
    constexpr std::array<std::string_view, kComorbidityCount> names = {
        "diabetes",       "copd",    "asthma",        "immunosuppression", "hypertension",
        "cardiovascular", "obesity", "chronic_renal", "smoking",           "pneumonia"};
    return names[static_cast<std::size_t>(c)];
}

inline constexpr int kStateCount = 32;

/// INEGI state catalog, indexed by code - 1.
inline constexpr std::array<std::string_view, kStateCount> kStateNames = {
    "Aguascalientes", "Baja California", "Baja California Sur", "Campeche",        "Coahuila",
    "Colima",         "Chiapas",         "Chihuahua",           "Ciudad de México", "Durango",
    "Guanajuato",     "Guerrero",        "Hidalgo",             "Jalisco",         "México",
    "Michoacán",      "Morelos",         "Nayarit",             "Nuevo León",      "Oaxaca",
    "Puebla",         "Querétaro",       "Quintana Roo",        "San Luis Potosí", "Sinaloa",
    "Sonora",         "Tabasco",         "Tamaulipas",          "Tlaxcala",        "Veracruz",
    "Yucatán",        "Zacatecas"};

inline std::string_view state_name(int code)
{
    if (code < 1 || code > kStateCount) {
        throw UnknownCode("state", code);
    }
    return kStateNames[static_cast<std::size_t>(code - 1)];
}

struct PatientRecord
{
    int state_code = 0;        // residence state, 1..32
    int municipality_code = 0; // unique only within its state
    Sex sex = Sex::Unspecified;
    std::optional<int> age_years; // nullopt = Unknown
    CodedFlag speaks_indigenous_language = CodedFlag::Unspecified;
    TreatmentStrategy treatment = TreatmentStrategy::Ambulatory;
    CodedFlag icu = CodedFlag::NotApplicable;
    CodedFlag intubated = CodedFlag::NotApplicable;
    std::optional<Date> death_date; // nullopt = Alive
    CaseClassification classification = CaseClassification::Suspect;
    std::array<CodedFlag, kComorbidityCount> comorbidities{};
    std::optional<Date> symptom_onset_date;

    bool deceased() const noexcept { return death_date.has_value(); }
    bool positive() const noexcept { return is_positive(classification); }
    CodedFlag comorbidity(Comorbidity c) const noexcept { return comorbidities[static_cast<std::size_t>(c)]; }

    friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

enum class LabSample
{
    Taken,   ///< valid laboratory or antigen sample
    Invalid, ///< sample taken but invalid
    NotTaken,
};

enum class SuspectType
{
    Type1ConfirmedByAssociation,
    Type2ConfirmedByRuling,
    Type3ConfirmedByLab,
};

/// Confirmation path of a suspect or confirmed case.
///
/// A valid sample on a confirmed case is Type3 regardless of association.
/// Without a valid sample, an epidemiological association gives Type1; a
/// death without association gives Type2. When both association and death
/// hold, Type1 is reported.
inline std::optional<SuspectType> suspect_type(const PatientRecord& r, LabSample sample, bool epi_association)
{
    if (r.classification != CaseClassification::Suspect && !r.positive()) {
        throw std::invalid_argument("suspect_type requires a suspect or confirmed case");
    }
    if (sample == LabSample::Taken) {
        if (r.positive()) {
            return SuspectType::Type3ConfirmedByLab;
        }
        return std::nullopt;
    }
    if (epi_association) {
        return SuspectType::Type1ConfirmedByAssociation;
    }
    if (r.deceased()) {
        return SuspectType::Type2ConfirmedByRuling;
    }
    return std::nullopt;
}

} // namespace episurv
