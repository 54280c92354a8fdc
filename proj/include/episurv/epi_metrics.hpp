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

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

namespace episurv
{

enum class AgeGroup : std::uint8_t
{
    Y0_20,
    Y21_40,
    Y41_59,
    Y60plus,
    Unknown,
};

inline constexpr std::array<AgeGroup, 5> kAllAgeGroups = {AgeGroup::Y0_20, AgeGroup::Y21_40, AgeGroup::Y41_59,
                                                          AgeGroup::Y60plus, AgeGroup::Unknown};

/// Bins [0,20], [21,40], [41,59], [60,inf). Age 60 belongs to the open upper bin.
constexpr AgeGroup age_group(std::optional<int> age)
{
    if (!age || *age < 0) {
        return AgeGroup::Unknown;
    }
    if (*age <= 20) {
        return AgeGroup::Y0_20;
    }
    if (*age <= 40) {
        return AgeGroup::Y21_40;
    }
    if (*age <= 59) {
        return AgeGroup::Y41_59;
    }
    return AgeGroup::Y60plus;
}

constexpr std::string_view label_of(AgeGroup g)
{
    switch (g) {
    case AgeGroup::Y0_20:
        return "y0_20";
    case AgeGroup::Y21_40:
        return "y21_40";
    case AgeGroup::Y41_59:
        return "y41_59";
    case AgeGroup::Y60plus:
        return "y60plus";
    case AgeGroup::Unknown:
        return "unknown";
    }
    return "";
}

struct CohortFilter
{
    bool indigenous_only = false;
    std::optional<std::set<int>> states;
    std::optional<std::set<int>> municipalities;
    std::optional<std::set<Sex>> sexes;
    std::optional<std::pair<Date, Date>> onset_date_range; // inclusive

    bool accepts(const PatientRecord& r) const
    {
        if (indigenous_only && r.speaks_indigenous_language != CodedFlag::Yes) {
            return false;
        }
        if (states && !states->contains(r.state_code)) {
            return false;
        }
        if (municipalities && !municipalities->contains(r.municipality_code)) {
            return false;
        }
        if (sexes && !sexes->contains(r.sex)) {
            return false;
        }
        if (onset_date_range) {
            if (!r.symptom_onset_date) {
                return false;
            }
            if (*r.symptom_onset_date < onset_date_range->first || *r.symptom_onset_date > onset_date_range->second) {
                return false;
            }
        }
        return true;
    }
};

/// Which dimensions a stratified report splits on.
struct GroupBy
{
    bool state = false;
    bool municipality = false;
    bool sex = false;
    bool age_group = false;

    bool any() const noexcept { return state || municipality || sex || age_group; }
};

/// nullopt at a position means "All". The all-nullopt key is the national stratum.
struct StratumKey
{
    std::optional<int> state_code;
    std::optional<int> municipality_code;
    std::optional<Sex> sex;
    std::optional<AgeGroup> age_group;

    static StratumKey all() { return {}; }
    bool is_all() const noexcept { return !state_code && !municipality_code && !sex && !age_group; }

    static StratumKey of(const PatientRecord& r, const GroupBy& g)
    {
        StratumKey k;
        if (g.state) {
            k.state_code = r.state_code;
        }
        if (g.municipality) {
            k.municipality_code = r.municipality_code;
        }
        if (g.sex) {
            k.sex = r.sex;
        }
        if (g.age_group) {
            k.age_group = episurv::age_group(r.age_years);
        }
        return k;
    }

    friend auto operator<=>(const StratumKey&, const StratumKey&) = default;
};

/// Mergeable per-stratum tallies. Every field is a plain count, so merge is a
/// field-wise sum and the zero-initialised value is its identity.
struct CaseCounts
{
    using Count = std::uint64_t;

    Count total = 0;
    Count positive = 0;
    Count negative = 0;      // class 7
    Count invalid = 0;       // class 4
    Count not_performed = 0; // class 5
    Count suspect = 0;       // class 6

    Count ambulatory_pos = 0;
    Count hospitalized_pos = 0;
    // ICU and intubation are tallied among hospitalized positives only
    Count icu_pos = 0;
    Count intubated_pos = 0;
    Count icu_and_intubated_pos = 0;
    Count deaths_pos = 0;
    Count deaths_icu_intubated_pos = 0;

    // breakdowns behind the sex-stratified annex tables
    std::array<Count, 3> positive_by_class{}; // classes 1..3
    std::array<Count, 3> deaths_by_class{};
    std::array<Count, 5> intubation_flags_pos{}; // indexed by index_of(CodedFlag)
    std::array<Count, 5> icu_flags_pos{};
    std::array<Count, 5> icu_flags_deaths_pos{};

    void add(const PatientRecord& r)
    {
        ++total;
        switch (r.classification) {
        case CaseClassification::ConfirmedByEpidemiologicalAssociation:
        case CaseClassification::ConfirmedByAdjudicationCommittee:
        case CaseClassification::ConfirmedSarsCov2:
            add_positive(r);
            break;
        case CaseClassification::InvalidByLaboratory:
            ++invalid;
            break;
        case CaseClassification::NotPerformedByLaboratory:
            ++not_performed;
            break;
        case CaseClassification::Suspect:
            ++suspect;
            break;
        case CaseClassification::NegativeSarsCov2:
            ++negative;
            break;
        }
    }

    void merge(const CaseCounts& o) { *this += o; }

    CaseCounts& operator+=(const CaseCounts& o)
    {
        total += o.total;
        positive += o.positive;
        negative += o.negative;
        invalid += o.invalid;
        not_performed += o.not_performed;
        suspect += o.suspect;
        ambulatory_pos += o.ambulatory_pos;
        hospitalized_pos += o.hospitalized_pos;
        icu_pos += o.icu_pos;
        intubated_pos += o.intubated_pos;
        icu_and_intubated_pos += o.icu_and_intubated_pos;
        deaths_pos += o.deaths_pos;
        deaths_icu_intubated_pos += o.deaths_icu_intubated_pos;
        add_arrays(positive_by_class, o.positive_by_class);
        add_arrays(deaths_by_class, o.deaths_by_class);
        add_arrays(intubation_flags_pos, o.intubation_flags_pos);
        add_arrays(icu_flags_pos, o.icu_flags_pos);
        add_arrays(icu_flags_deaths_pos, o.icu_flags_deaths_pos);
        return *this;
    }

    friend CaseCounts operator+(CaseCounts a, const CaseCounts& b) { return a += b; }
    friend bool operator==(const CaseCounts&, const CaseCounts&) = default;

private:
    void add_positive(const PatientRecord& r)
    {
        ++positive;
        const auto cls = static_cast<std::size_t>(code_of(r.classification) - 1);
        ++positive_by_class[cls];
        ++intubation_flags_pos[index_of(r.intubated)];
        ++icu_flags_pos[index_of(r.icu)];
        const bool icu = r.icu == CodedFlag::Yes;
        const bool intubated = r.intubated == CodedFlag::Yes;
        if (r.treatment == TreatmentStrategy::Ambulatory) {
            ++ambulatory_pos;
        }
        else {
            ++hospitalized_pos;
            icu_pos += icu;
            intubated_pos += intubated;
            icu_and_intubated_pos += icu && intubated;
        }
        if (r.deceased()) {
            ++deaths_pos;
            ++deaths_by_class[cls];
            ++icu_flags_deaths_pos[index_of(r.icu)];
            deaths_icu_intubated_pos += r.treatment == TreatmentStrategy::Hospitalized && icu && intubated;
        }
    }

    template <std::size_t N>
    static void add_arrays(std::array<Count, N>& a, const std::array<Count, N>& b)
    {
        for (std::size_t i = 0; i < N; ++i) {
            a[i] += b[i];
        }
    }
};

inline CaseCounts accumulate(CaseCounts acc, const PatientRecord& r)
{
    acc.add(r);
    return acc;
}

inline CaseCounts merge(const CaseCounts& a, const CaseCounts& b) { return a + b; }

/// A percentage, or nullopt when its denominator is zero.
using Percentage = std::optional<double>;

inline Percentage percent_of(std::uint64_t num, std::uint64_t den)
{
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den) * 100.0;
}

/// Deaths among positives over positives, x100.
inline Percentage fatality_rate(const CaseCounts& c) { return percent_of(c.deaths_pos, c.positive); }

enum class PositivityMode
{
    /// positives over every registered case (negative aggregate = classes 4..7)
    PaperAggregate,
    /// positives over positives plus laboratory negatives (class 7 only)
    StrictLabNegative,
};

inline Percentage positivity_index(const CaseCounts& c, PositivityMode mode = PositivityMode::PaperAggregate)
{
    if (mode == PositivityMode::StrictLabNegative) {
        return percent_of(c.positive, c.positive + c.negative);
    }
    return percent_of(c.positive, c.total);
}

enum class SeverityCriterion
{
    IntubationOnly,
    IcuOnly,
    IcuAndIntubation,
    IcuOrIntubation,
};

/// Hospitalized positives counted as severe under the criterion.
inline std::uint64_t severe_count(const CaseCounts& c, SeverityCriterion crit)
{
    switch (crit) {
    case SeverityCriterion::IntubationOnly:
        return c.intubated_pos;
    case SeverityCriterion::IcuOnly:
        return c.icu_pos;
    case SeverityCriterion::IcuAndIntubation:
        return c.icu_and_intubated_pos;
    case SeverityCriterion::IcuOrIntubation:
        return c.icu_pos + c.intubated_pos - c.icu_and_intubated_pos;
    }
    return 0;
}

struct SeverityRates
{
    double tgi1 = 0; // mild: ambulatory
    double tgi2 = 0; // moderate: hospitalized, not severe
    double tgi3 = 0; // severe
};

inline SeverityRates severity_rates(const CaseCounts& c, SeverityCriterion crit = SeverityCriterion::IcuAndIntubation)
{
    if (c.positive == 0) {
        throw UndefinedForEmptyCohort();
    }
    const double p = static_cast<double>(c.positive);
    const auto severe = severe_count(c, crit);
    SeverityRates r;
    r.tgi1 = static_cast<double>(c.ambulatory_pos) / p * 100.0;
    r.tgi2 = static_cast<double>(c.hospitalized_pos - severe) / p * 100.0;
    r.tgi3 = static_cast<double>(severe) / p * 100.0;
    return r;
}

struct MetricsReport
{
    Percentage fatality_rate_pct;
    Percentage positivity_pct;
    std::optional<SeverityRates> severity; // nullopt when positive == 0
    CaseCounts counts;
};

inline MetricsReport make_report(const CaseCounts& c, SeverityCriterion crit = SeverityCriterion::IcuAndIntubation,
                                 PositivityMode mode = PositivityMode::PaperAggregate)
{
    MetricsReport r;
    r.counts = c;
    r.fatality_rate_pct = fatality_rate(c);
    r.positivity_pct = positivity_index(c, mode);
    if (c.positive > 0) {
        r.severity = severity_rates(c, crit);
    }
    return r;
}

/// Single-pass stratified accumulation. Owned by one thread; combine shards
/// with merge().
class StratifiedAccumulator
{
public:
    explicit StratifiedAccumulator(CohortFilter filter = {}, GroupBy group_by = {})
        : filter_(std::move(filter))
        , group_by_(group_by)
    {
        strata_[StratumKey::all()];
    }

    void add(const PatientRecord& r)
    {
        if (!filter_.accepts(r)) {
            return;
        }
        strata_[StratumKey::all()].add(r);
        if (group_by_.any()) {
            strata_[StratumKey::of(r, group_by_)].add(r);
        }
    }

    void merge(const StratifiedAccumulator& other)
    {
        for (const auto& [key, counts] : other.strata_) {
            strata_[key] += counts;
        }
    }

    const std::map<StratumKey, CaseCounts>& strata() const noexcept { return strata_; }
    const CaseCounts& national() const { return strata_.at(StratumKey::all()); }
    const GroupBy& group_by() const noexcept { return group_by_; }

    std::map<StratumKey, MetricsReport> reports(SeverityCriterion crit = SeverityCriterion::IcuAndIntubation,
                                                PositivityMode mode = PositivityMode::PaperAggregate) const
    {
        std::map<StratumKey, MetricsReport> out;
        for (const auto& [key, counts] : strata_) {
            out.emplace(key, make_report(counts, crit, mode));
        }
        return out;
    }

private:
    CohortFilter filter_;
    GroupBy group_by_;
    std::map<StratumKey, CaseCounts> strata_;
};

template <class Range>
std::map<StratumKey, MetricsReport> stratified_report(const Range& records, const CohortFilter& filter,
                                                      const GroupBy& group_by,
                                                      SeverityCriterion crit = SeverityCriterion::IcuAndIntubation,
                                                      PositivityMode mode = PositivityMode::PaperAggregate)
{
    StratifiedAccumulator acc(filter, group_by);
    for (const auto& r : records) {
        acc.add(r);
    }
    return acc.reports(crit, mode);
}

enum class Subcohort
{
    HospitalizedPositive,
    DeathsPositive,
    DeathsIcuIntubated,
};

using ComorbidityProfile = std::map<std::pair<Comorbidity, AgeGroup>, std::uint64_t>;

inline bool in_subcohort(const PatientRecord& r, Subcohort s)
{
    if (!r.positive()) {
        return false;
    }
    switch (s) {
    case Subcohort::HospitalizedPositive:
        return r.treatment == TreatmentStrategy::Hospitalized;
    case Subcohort::DeathsPositive:
        return r.deceased();
    case Subcohort::DeathsIcuIntubated:
        return r.deceased() && r.treatment == TreatmentStrategy::Hospitalized && r.icu == CodedFlag::Yes &&
               r.intubated == CodedFlag::Yes;
    }
    return false;
}

/// Comorbidity flags (= Yes) cross-tabbed with age group over a subcohort.
/// Only non-zero cells are stored.
class ComorbidityAccumulator
{
public:
    ComorbidityAccumulator(CohortFilter filter, Subcohort subcohort)
        : filter_(std::move(filter))
        , subcohort_(subcohort)
    {
    }

    void add(const PatientRecord& r)
    {
        if (!filter_.accepts(r) || !in_subcohort(r, subcohort_)) {
            return;
        }
        ++members_;
        const AgeGroup g = age_group(r.age_years);
        for (auto c : kAllComorbidities) {
            if (r.comorbidity(c) == CodedFlag::Yes) {
                ++cells_[{c, g}];
            }
        }
    }

    void merge(const ComorbidityAccumulator& other)
    {
        members_ += other.members_;
        for (const auto& [k, v] : other.cells_) {
            cells_[k] += v;
        }
    }

    const ComorbidityProfile& profile() const noexcept { return cells_; }
    std::uint64_t members() const noexcept { return members_; }

private:
    CohortFilter filter_;
    Subcohort subcohort_;
    ComorbidityProfile cells_;
    std::uint64_t members_ = 0;
};

template <class Range>
ComorbidityProfile comorbidity_profile(const Range& records, const CohortFilter& filter, Subcohort subcohort)
{
    ComorbidityAccumulator acc(filter, subcohort);
    for (const auto& r : records) {
        acc.add(r);
    }
    return acc.profile();
}

enum class RankMetric
{
    Fatality,
    Positivity,
    Tgi3,
};

/// States ordered by metric, descending; ties go to the lower state code.
/// Only state-level strata (other dimensions All) with a defined value take part.
inline std::vector<std::pair<int, double>> rank_states(const std::map<StratumKey, MetricsReport>& reports,
                                                       RankMetric metric)
{
    std::vector<std::pair<int, double>> out;
    for (const auto& [key, rep] : reports) {
        if (!key.state_code || key.municipality_code || key.sex || key.age_group) {
            continue;
        }
        std::optional<double> v;
        switch (metric) {
        case RankMetric::Fatality:
            v = rep.fatality_rate_pct;
            break;
        case RankMetric::Positivity:
            v = rep.positivity_pct;
            break;
        case RankMetric::Tgi3:
            if (rep.severity) {
                v = rep.severity->tgi3;
            }
            break;
        }
        if (v) {
            out.emplace_back(*key.state_code, *v);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    return out;
}

} // namespace episurv
