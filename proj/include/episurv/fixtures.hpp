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

/// Synthetic record-level fixtures whose aggregates equal configured marginal
/// tables, a random record source for property tests, and a brute-force
/// oracle aggregator.

#include "episurv/epi_metrics.hpp"
#include "episurv/errors.hpp"
#include "episurv/genomics.hpp"
#include "episurv/lineage.hpp"
#include "episurv/schema.hpp"
#include "episurv/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace episurv
{

/// Seeded generator with portable bounded draws and shuffles; the standard
/// distributions are implementation-defined, which would make fixture bytes
/// differ between standard libraries.
class Rng
{
public:
    explicit Rng(std::uint64_t seed)
        : engine_(seed)
    {
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        constexpr auto max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform in [lo, hi].
    int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1)); }

    bool per_mille(unsigned k) { return below(1000) < k; }

    template <class T>
    const T& pick(const std::vector<T>& v)
    {
        return v[below(v.size())];
    }

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

inline constexpr Date kWindowStart{std::chrono::year{2020}, std::chrono::month{4}, std::chrono::day{1}};
inline constexpr Date kWindowEnd{std::chrono::year{2021}, std::chrono::month{9}, std::chrono::day{30}};

inline Date random_date(Rng& rng, Date from = kWindowStart, Date to = kWindowEnd)
{
    const auto a = std::chrono::sys_days(from);
    const auto b = std::chrono::sys_days(to);
    return Date(a + std::chrono::days(rng.below(static_cast<std::uint64_t>((b - a).count()) + 1)));
}

// --- SVEERV output ----------------------------------------------------------

inline constexpr std::string_view kSveervHeader =
    "ID_REGISTRO,SEXO,ENTIDAD_RES,MUNICIPIO_RES,TIPO_PACIENTE,FECHA_SINTOMAS,FECHA_DEF,INTUBADO,NEUMONIA,EDAD,"
    "HABLA_LENGUA_INDIG,DIABETES,EPOC,ASMA,INMUSUPR,HIPERTENSION,CARDIOVASCULAR,OBESIDAD,RENAL_CRONICA,"
    "TABAQUISMO,CLASIFICACION_FINAL,UCI";

inline void append_sveerv_row(std::string& out, const PatientRecord& r, std::uint64_t id)
{
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "z%07llx", static_cast<unsigned long long>(id));
    auto num = [&](long long v) {
        out += std::to_string(v);
        out.push_back(',');
    };
    auto flag = [&](CodedFlag f) { num(code_of(f)); };
    out += idbuf;
    out.push_back(',');
    num(code_of(r.sex));
    num(r.state_code);
    num(r.municipality_code);
    num(code_of(r.treatment));
    if (r.symptom_onset_date) {
        out += text::format_date(*r.symptom_onset_date);
    }
    out.push_back(',');
    out += r.death_date ? text::format_date(*r.death_date) : std::string(kAliveSentinel);
    out.push_back(',');
    flag(r.intubated);
    flag(r.comorbidity(Comorbidity::Pneumonia));
    if (r.age_years) {
        out += std::to_string(*r.age_years);
    }
    out.push_back(',');
    flag(r.speaks_indigenous_language);
    for (auto c : {Comorbidity::Diabetes, Comorbidity::Copd, Comorbidity::Asthma, Comorbidity::Immunosuppression,
                   Comorbidity::Hypertension, Comorbidity::Cardiovascular, Comorbidity::Obesity,
                   Comorbidity::ChronicRenal, Comorbidity::Smoking}) {
        flag(r.comorbidity(c));
    }
    num(code_of(r.classification));
    out += std::to_string(code_of(r.icu));
    out.push_back('\n');
}

inline std::string write_sveerv(const std::vector<PatientRecord>& records)
{
    std::string out(kSveervHeader);
    out.push_back('\n');
    for (std::size_t i = 0; i < records.size(); ++i) {
        append_sveerv_row(out, records[i], i + 1);
    }
    return out;
}

// --- random records -----------------------------------------------------------

namespace detail
{

inline CodedFlag random_flag(Rng& rng)
{
    const auto x = rng.below(100);
    if (x < 45) {
        return CodedFlag::Yes;
    }
    if (x < 85) {
        return CodedFlag::No;
    }
    if (x < 93) {
        return CodedFlag::NotApplicable;
    }
    return x < 97 ? CodedFlag::Ignored : CodedFlag::Unspecified;
}

inline void fill_comorbidities(PatientRecord& r, Rng& rng, unsigned base, unsigned pneumonia, unsigned smoking)
{
    for (auto c : kAllComorbidities) {
        unsigned k = base;
        if (c == Comorbidity::Pneumonia) {
            k = pneumonia;
        }
        else if (c == Comorbidity::Smoking) {
            k = smoking;
        }
        CodedFlag f = rng.per_mille(k) ? CodedFlag::Yes : CodedFlag::No;
        if (rng.per_mille(4)) {
            f = CodedFlag::Ignored;
        }
        r.comorbidities[static_cast<std::size_t>(c)] = f;
    }
}

inline Date days_after(Date d, int days) { return Date(std::chrono::sys_days(d) + std::chrono::days(days)); }

} // namespace detail

/// Arbitrary well-formed record covering every code, including the rare ones.
inline PatientRecord random_patient(Rng& rng)
{
    PatientRecord r;
    r.state_code = rng.between(1, kStateCount);
    r.municipality_code = rng.between(1, 25);
    const auto s = rng.below(100);
    r.sex = s < 48 ? Sex::Female : (s < 96 ? Sex::Male : Sex::Unspecified);
    if (!rng.per_mille(30)) {
        r.age_years = rng.between(0, 110);
    }
    r.speaks_indigenous_language = rng.per_mille(700) ? CodedFlag::Yes : detail::random_flag(rng);
    r.classification = kAllClassifications[rng.below(kAllClassifications.size())];
    r.treatment = rng.per_mille(600) ? TreatmentStrategy::Ambulatory : TreatmentStrategy::Hospitalized;
    r.icu = detail::random_flag(rng);
    r.intubated = detail::random_flag(rng);
    r.symptom_onset_date = random_date(rng);
    if (rng.per_mille(20)) {
        r.symptom_onset_date.reset();
    }
    if (rng.per_mille(150)) {
        r.death_date = detail::days_after(r.symptom_onset_date.value_or(kWindowStart), rng.between(0, 40));
    }
    for (auto& c : r.comorbidities) {
        c = detail::random_flag(rng);
    }
    return r;
}

inline std::vector<PatientRecord> random_patients(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<PatientRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(random_patient(rng));
    }
    return out;
}

/// Streams `rows` random records; memory use does not depend on `rows`.
inline void write_random_sveerv(std::ostream& out, std::uint64_t rows, std::uint64_t seed)
{
    Rng rng(seed);
    std::string buf(kSveervHeader);
    buf.push_back('\n');
    for (std::uint64_t i = 0; i < rows; ++i) {
        append_sveerv_row(buf, random_patient(rng), i + 1);
        if (buf.size() > (1u << 16)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

// --- epidemiological marginal spec ------------------------------------------

using SexCounts = std::array<std::uint64_t, 3>; // indexed by Sex

struct StateTreatment
{
    int state_code = 0;
    std::uint64_t ambulatory = 0;
    std::uint64_t hospitalized = 0;
};

/// Marginal constraints for an SVEERV fixture. Positive-only marginals
/// (treatment, intubation, deaths, states) count confirmed positives and
/// need class_by_sex.
struct EpiMarginalSpec
{
    std::uint64_t seed = 0;
    std::map<int, SexCounts> class_by_sex;
    std::map<int, std::uint64_t> class_totals;
    std::optional<SexCounts> sex_totals;
    std::optional<std::uint64_t> positive;
    std::optional<std::array<SexCounts, 2>> treatment_by_sex; // ambulatory, hospitalized
    std::optional<std::array<SexCounts, 5>> intubation_by_sex; // by index_of(CodedFlag)
    std::optional<std::map<int, SexCounts>> deaths_by_class_sex;
    std::optional<std::array<SexCounts, 5>> icu_deaths_by_sex;
    std::vector<StateTreatment> state_treatment;

    static EpiMarginalSpec from_json(const nlohmann::json& j);
    static EpiMarginalSpec parse(std::string_view json_text);
};

namespace detail
{

template <class Json>
std::uint64_t count_of(const Json& j, const std::string& where)
{
    if (!j.is_number_integer() || j.template get<std::int64_t>() < 0) {
        throw DataError(where + ": expected a non-negative integer");
    }
    return j.template get<std::uint64_t>();
}

inline std::optional<std::size_t> sex_slot(const std::string& key)
{
    const auto k = text::fold(key);
    if (k == "female" || k == "f" || k == "mujeres") {
        return 0;
    }
    if (k == "male" || k == "m" || k == "hombres") {
        return 1;
    }
    if (k == "unspecified") {
        return 2;
    }
    return std::nullopt;
}

template <class Json>
SexCounts sex_counts(const Json& j, const std::string& where)
{
    SexCounts out{};
    if (j.is_array()) {
        if (j.size() < 2 || j.size() > 3) {
            throw DataError(where + ": expected [female, male] or [female, male, unspecified]");
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            out[i] = count_of(j[i], where);
        }
        return out;
    }
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            auto slot = sex_slot(k);
            if (!slot) {
                throw DataError(where + ": unknown sex key '" + k + "'");
            }
            out[*slot] = count_of(v, where);
        }
        return out;
    }
    throw DataError(where + ": expected sex counts");
}

inline std::size_t flag_slot(const std::string& key, const std::string& where)
{
    const auto k = text::fold(key);
    if (k == "yes" || k == "si") {
        return index_of(CodedFlag::Yes);
    }
    if (k == "no") {
        return index_of(CodedFlag::No);
    }
    if (k == "not applicable" || k == "no aplica") {
        return index_of(CodedFlag::NotApplicable);
    }
    if (k == "ignored" || k == "se ignora") {
        return index_of(CodedFlag::Ignored);
    }
    if (k == "unspecified") {
        return index_of(CodedFlag::Unspecified);
    }
    throw DataError(where + ": unknown flag key '" + key + "'");
}

inline std::array<SexCounts, 5> flag_counts(const nlohmann::json& j, const std::string& where)
{
    std::array<SexCounts, 5> out{};
    for (const auto& [k, v] : j.items()) {
        out[flag_slot(k, where)] = sex_counts(v, where + "." + k);
    }
    return out;
}

inline int class_key(const std::string& k, const std::string& where)
{
    auto n = text::parse_int<int>(k);
    if (!n || *n < 1 || *n > 7) {
        throw DataError(where + ": classification key must be 1..7, got '" + k + "'");
    }
    return *n;
}

inline std::map<int, SexCounts> class_sex_map(const nlohmann::json& j, const std::string& where)
{
    std::map<int, SexCounts> out;
    for (const auto& [k, v] : j.items()) {
        out[class_key(k, where)] = sex_counts(v, where + "." + k);
    }
    return out;
}

inline std::string fmt_sex(std::size_t s) { return std::string(label_of(kAllSexes[s])); }

} // namespace detail

inline EpiMarginalSpec EpiMarginalSpec::from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw DataError("epi spec: expected a json object");
    }
    EpiMarginalSpec s;
    for (const auto& [key, v] : j.items()) {
        if (key == "seed") {
            s.seed = detail::count_of(v, key);
        }
        else if (key == "class_by_sex") {
            s.class_by_sex = detail::class_sex_map(v, key);
        }
        else if (key == "class_totals") {
            for (const auto& [k, n] : v.items()) {
                s.class_totals[detail::class_key(k, key)] = detail::count_of(n, key + "." + k);
            }
        }
        else if (key == "sex_totals") {
            s.sex_totals = detail::sex_counts(v, key);
        }
        else if (key == "positive") {
            s.positive = detail::count_of(v, key);
        }
        else if (key == "treatment_by_sex") {
            std::array<SexCounts, 2> t{};
            for (const auto& [k, n] : v.items()) {
                const auto f = text::fold(k);
                if (f == "ambulatory" || f == "ambulatorio") {
                    t[0] = detail::sex_counts(n, key + "." + k);
                }
                else if (f == "hospitalized" || f == "hospitalario") {
                    t[1] = detail::sex_counts(n, key + "." + k);
                }
                else {
                    throw DataError(key + ": unknown treatment '" + k + "'");
                }
            }
            s.treatment_by_sex = t;
        }
        else if (key == "intubation_by_sex") {
            s.intubation_by_sex = detail::flag_counts(v, key);
        }
        else if (key == "deaths_by_class_sex") {
            s.deaths_by_class_sex = detail::class_sex_map(v, key);
        }
        else if (key == "icu_deaths_by_sex") {
            s.icu_deaths_by_sex = detail::flag_counts(v, key);
        }
        else if (key == "state_treatment") {
            for (const auto& row : v) {
                StateTreatment st;
                st.state_code = static_cast<int>(detail::count_of(row.at("state_code"), key + ".state_code"));
                if (st.state_code < 1 || st.state_code > kStateCount) {
                    throw DataError(key + ": state_code out of range");
                }
                st.ambulatory = detail::count_of(row.at("ambulatory"), key + ".ambulatory");
                st.hospitalized = detail::count_of(row.at("hospitalized"), key + ".hospitalized");
                s.state_treatment.push_back(st);
            }
        }
        else if (!key.empty() && key.front() == '_') {
            continue; // annotations such as _source
        }
        else {
            throw DataError("epi spec: unknown key '" + key + "'");
        }
    }
    return s;
}

inline EpiMarginalSpec EpiMarginalSpec::parse(std::string_view json_text)
{
    try {
        return from_json(nlohmann::json::parse(json_text));
    }
    catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("epi spec: ") + e.what());
    }
}

namespace detail
{

struct PositiveSlot
{
    TreatmentStrategy treatment = TreatmentStrategy::Ambulatory;
    CodedFlag intubated = CodedFlag::NotApplicable;
    CodedFlag icu = CodedFlag::NotApplicable;
    bool dead = false;
    int cls = 3;
};

[[noreturn]] inline void inconsistent(const std::string& what) { throw InconsistentMarginals(what); }

inline void check_equal(std::uint64_t a, std::uint64_t b, const std::string& what_a, const std::string& what_b)
{
    if (a != b) {
        inconsistent(what_a + " sum to " + std::to_string(a) + " but " + what_b + " sum to " + std::to_string(b));
    }
}

inline PatientRecord base_record(Rng& rng, Sex sex)
{
    PatientRecord r;
    r.sex = sex;
    r.speaks_indigenous_language = CodedFlag::Yes;
    r.municipality_code = rng.between(1, 120);
    r.state_code = rng.between(1, kStateCount);
    r.symptom_onset_date = random_date(rng);
    return r;
}

inline void finish_record(PatientRecord& r, Rng& rng, bool dead)
{
    const bool severe = r.icu == CodedFlag::Yes && r.intubated == CodedFlag::Yes;
    if (dead && severe) {
        r.age_years = rng.between(41, 95);
        fill_comorbidities(r, rng, 250, 850, 400);
    }
    else if (r.treatment == TreatmentStrategy::Hospitalized) {
        r.age_years = rng.between(18, 92);
        fill_comorbidities(r, rng, 160, 550, 120);
    }
    else {
        r.age_years = rng.between(0, 90);
        fill_comorbidities(r, rng, 70, 40, 70);
    }
    if (dead) {
        r.death_date = days_after(*r.symptom_onset_date, rng.between(3, 30));
    }
}

/// Positive slots for one sex, honoring every positive-only marginal given.
inline std::vector<PositiveSlot> positive_slots(const EpiMarginalSpec& spec, std::size_t s, Rng& rng)
{
    const auto who = fmt_sex(s);
    std::array<std::uint64_t, 4> cls{}; // 1..3
    std::uint64_t positives = 0;
    for (int c = 1; c <= 3; ++c) {
        auto it = spec.class_by_sex.find(c);
        cls[c] = it == spec.class_by_sex.end() ? 0 : it->second[s];
        positives += cls[c];
    }

    std::uint64_t amb = 0;
    std::uint64_t hosp = 0;
    if (spec.treatment_by_sex) {
        amb = (*spec.treatment_by_sex)[0][s];
        hosp = (*spec.treatment_by_sex)[1][s];
        check_equal(amb + hosp, positives, who + " treatment counts", who + " positive classifications");
    }
    else {
        for (std::uint64_t i = 0; i < positives; ++i) {
            (rng.per_mille(700) ? amb : hosp) += 1;
        }
    }

    std::array<std::uint64_t, 5> intub{};
    const auto yes = index_of(CodedFlag::Yes);
    const auto no = index_of(CodedFlag::No);
    const auto na = index_of(CodedFlag::NotApplicable);
    const auto ign = index_of(CodedFlag::Ignored);
    const auto uns = index_of(CodedFlag::Unspecified);
    if (spec.intubation_by_sex) {
        for (std::size_t f = 0; f < 5; ++f) {
            intub[f] = (*spec.intubation_by_sex)[f][s];
        }
        check_equal(intub[na], amb, who + " intubation NotApplicable counts", who + " ambulatory counts");
        check_equal(intub[yes] + intub[no] + intub[ign] + intub[uns], hosp, who + " intubation Yes/No/Ignored counts",
                    who + " hospitalized counts");
    }
    else {
        intub[na] = amb;
        for (std::uint64_t i = 0; i < hosp; ++i) {
            const auto x = rng.below(100);
            intub[x < 12 ? yes : (x < 99 ? no : ign)] += 1;
        }
    }

    std::vector<PositiveSlot> slots;
    slots.reserve(positives);
    auto push = [&](std::uint64_t n, TreatmentStrategy t, CodedFlag intubated, CodedFlag icu) {
        for (std::uint64_t i = 0; i < n; ++i) {
            slots.push_back({t, intubated, icu, false, 3});
        }
    };
    // groups in order: ambulatory, intubated, then hospitalized not intubated
    push(intub[na], TreatmentStrategy::Ambulatory, CodedFlag::NotApplicable, CodedFlag::NotApplicable);
    push(intub[yes], TreatmentStrategy::Hospitalized, CodedFlag::Yes, CodedFlag::Yes);
    push(intub[no], TreatmentStrategy::Hospitalized, CodedFlag::No, CodedFlag::No);
    push(intub[ign], TreatmentStrategy::Hospitalized, CodedFlag::Ignored, CodedFlag::No);
    push(intub[uns], TreatmentStrategy::Hospitalized, CodedFlag::Unspecified, CodedFlag::No);
    const std::size_t intubated_begin = intub[na];
    const std::size_t rest_begin = intubated_begin + intub[yes];

    std::uint64_t class_deaths = 0;
    if (spec.deaths_by_class_sex) {
        for (const auto& [c, n] : *spec.deaths_by_class_sex) {
            if (c > 3 && n[s] > 0) {
                inconsistent("deaths_by_class_sex lists non-positive class " + std::to_string(c));
            }
            class_deaths += n[s];
        }
    }

    if (spec.icu_deaths_by_sex) {
        const auto& d = *spec.icu_deaths_by_sex;
        if (d[yes][s] > intub[yes]) {
            inconsistent(who + " deaths with ICU Yes (" + std::to_string(d[yes][s]) + ") exceed intubated positives (" +
                         std::to_string(intub[yes]) + ")");
        }
        if (d[na][s] > amb) {
            inconsistent(who + " deaths with ICU NotApplicable (" + std::to_string(d[na][s]) +
                         ") exceed ambulatory positives (" + std::to_string(amb) + ")");
        }
        const auto rest = slots.size() - rest_begin;
        if (d[no][s] + d[ign][s] + d[uns][s] > rest) {
            inconsistent(who + " deaths with ICU No/Ignored (" + std::to_string(d[no][s] + d[ign][s] + d[uns][s]) +
                         ") exceed non-intubated hospitalized positives (" + std::to_string(rest) + ")");
        }
        if (spec.deaths_by_class_sex) {
            check_equal(d[yes][s] + d[no][s] + d[na][s] + d[ign][s] + d[uns][s], class_deaths,
                        who + " deaths by ICU", who + " deaths by classification");
        }
        for (std::size_t i = 0; i < d[na][s]; ++i) {
            slots[i].dead = true;
        }
        for (std::size_t i = 0; i < d[yes][s]; ++i) {
            slots[intubated_begin + i].dead = true;
        }
        std::size_t i = rest_begin;
        for (auto [flag, n] : {std::pair{CodedFlag::No, d[no][s]}, std::pair{CodedFlag::Ignored, d[ign][s]},
                               std::pair{CodedFlag::Unspecified, d[uns][s]}}) {
            for (std::uint64_t k = 0; k < n; ++k, ++i) {
                slots[i].dead = true;
                slots[i].icu = flag;
            }
        }
    }
    else if (spec.deaths_by_class_sex) {
        if (class_deaths > slots.size()) {
            inconsistent(who + " deaths (" + std::to_string(class_deaths) + ") exceed positives (" +
                         std::to_string(slots.size()) + ")");
        }
        std::vector<std::size_t> order(slots.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        rng.shuffle(order);
        for (std::uint64_t k = 0; k < class_deaths; ++k) {
            slots[order[k]].dead = true;
        }
    }
    else {
        for (auto& slot : slots) {
            slot.dead = rng.per_mille(slot.treatment == TreatmentStrategy::Hospitalized ? 400 : 20);
        }
    }

    // classes: dead slots draw from the death breakdown, the rest from what remains
    std::vector<int> dead_pool;
    std::vector<int> alive_pool;
    for (int c = 1; c <= 3; ++c) {
        std::uint64_t dead = 0;
        if (spec.deaths_by_class_sex) {
            auto it = spec.deaths_by_class_sex->find(c);
            dead = it == spec.deaths_by_class_sex->end() ? 0 : it->second[s];
            if (dead > cls[c]) {
                inconsistent(who + " deaths in class " + std::to_string(c) + " (" + std::to_string(dead) +
                             ") exceed positives in that class (" + std::to_string(cls[c]) + ")");
            }
        }
        dead_pool.insert(dead_pool.end(), dead, c);
        alive_pool.insert(alive_pool.end(), cls[c] - dead, c);
    }
    if (!spec.deaths_by_class_sex) {
        // no death breakdown: every class is open to every slot
        alive_pool.insert(alive_pool.end(), dead_pool.begin(), dead_pool.end());
        dead_pool.clear();
        rng.shuffle(alive_pool);
        for (std::size_t i = 0; i < slots.size(); ++i) {
            slots[i].cls = alive_pool[i];
        }
        return slots;
    }
    rng.shuffle(dead_pool);
    rng.shuffle(alive_pool);
    std::size_t di = 0;
    std::size_t ai = 0;
    for (auto& slot : slots) {
        slot.cls = slot.dead ? dead_pool[di++] : alive_pool[ai++];
    }
    return slots;
}

} // namespace detail

/// Records satisfying every marginal in `spec`, in shuffled order.
inline std::vector<PatientRecord> generate_epi_records(const EpiMarginalSpec& spec)
{
    using detail::check_equal;
    using detail::inconsistent;
    Rng rng(spec.seed);
    std::vector<PatientRecord> out;

    const bool joint_needed = spec.treatment_by_sex || spec.intubation_by_sex || spec.deaths_by_class_sex ||
                              spec.icu_deaths_by_sex || !spec.state_treatment.empty();
    if (joint_needed && spec.class_by_sex.empty()) {
        inconsistent("positive-only marginals need class_by_sex");
    }

    if (!spec.class_by_sex.empty()) {
        SexCounts sex_sum{};
        std::uint64_t positive_sum = 0;
        for (const auto& [c, n] : spec.class_by_sex) {
            const std::uint64_t row = n[0] + n[1] + n[2];
            if (auto it = spec.class_totals.find(c); it != spec.class_totals.end()) {
                check_equal(row, it->second, "class " + std::to_string(c) + " sex counts",
                            "its classification total");
            }
            for (std::size_t s = 0; s < 3; ++s) {
                sex_sum[s] += n[s];
            }
            if (c <= 3) {
                positive_sum += row;
            }
        }
        for (const auto& [c, n] : spec.class_totals) {
            if (!spec.class_by_sex.contains(c) && n > 0) {
                inconsistent("class " + std::to_string(c) + " total " + std::to_string(n) +
                             " has no class_by_sex entry");
            }
        }
        if (spec.sex_totals) {
            for (std::size_t s = 0; s < 3; ++s) {
                check_equal((*spec.sex_totals)[s], sex_sum[s], detail::fmt_sex(s) + " sex totals",
                            detail::fmt_sex(s) + " classification counts");
            }
        }
        if (spec.positive) {
            check_equal(*spec.positive, positive_sum, "positive total", "positive classifications");
        }

        std::array<std::vector<detail::PositiveSlot>, 3> slots;
        for (std::size_t s = 0; s < 3; ++s) {
            slots[s] = detail::positive_slots(spec, s, rng);
        }

        // states per treatment from shuffled pools
        std::vector<int> amb_states;
        std::vector<int> hosp_states;
        if (!spec.state_treatment.empty()) {
            std::uint64_t amb = 0;
            std::uint64_t hosp = 0;
            for (const auto& s : slots) {
                for (const auto& slot : s) {
                    (slot.treatment == TreatmentStrategy::Ambulatory ? amb : hosp) += 1;
                }
            }
            for (const auto& st : spec.state_treatment) {
                amb_states.insert(amb_states.end(), st.ambulatory, st.state_code);
                hosp_states.insert(hosp_states.end(), st.hospitalized, st.state_code);
            }
            check_equal(amb_states.size(), amb, "state ambulatory counts", "ambulatory positives");
            check_equal(hosp_states.size(), hosp, "state hospitalized counts", "hospitalized positives");
            rng.shuffle(amb_states);
            rng.shuffle(hosp_states);
        }
        std::size_t ai = 0;
        std::size_t hi = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            for (const auto& slot : slots[s]) {
                auto r = detail::base_record(rng, kAllSexes[s]);
                r.classification = decode_classification(slot.cls);
                r.treatment = slot.treatment;
                r.intubated = slot.intubated;
                r.icu = slot.icu;
                if (!spec.state_treatment.empty()) {
                    r.state_code = slot.treatment == TreatmentStrategy::Ambulatory ? amb_states[ai++] : hosp_states[hi++];
                }
                detail::finish_record(r, rng, slot.dead);
                out.push_back(std::move(r));
            }
        }

        // non-positive classes carry no treatment constraints
        for (const auto& [c, n] : spec.class_by_sex) {
            if (c <= 3) {
                continue;
            }
            for (std::size_t s = 0; s < 3; ++s) {
                for (std::uint64_t i = 0; i < n[s]; ++i) {
                    auto r = detail::base_record(rng, kAllSexes[s]);
                    r.classification = decode_classification(c);
                    if (rng.per_mille(900)) {
                        r.treatment = TreatmentStrategy::Ambulatory;
                    }
                    else {
                        r.treatment = TreatmentStrategy::Hospitalized;
                        r.icu = rng.per_mille(80) ? CodedFlag::Yes : CodedFlag::No;
                        r.intubated = rng.per_mille(60) ? CodedFlag::Yes : CodedFlag::No;
                    }
                    detail::finish_record(r, rng, rng.per_mille(r.treatment == TreatmentStrategy::Hospitalized ? 150 : 3));
                    out.push_back(std::move(r));
                }
            }
        }
    }
    else {
        std::map<int, std::uint64_t> totals = spec.class_totals;
        if (spec.positive) {
            std::uint64_t pos = 0;
            for (const auto& [c, n] : totals) {
                pos += c <= 3 ? n : 0;
            }
            if (totals.empty() || pos == 0) {
                totals[3] += *spec.positive;
            }
            else {
                check_equal(*spec.positive, pos, "positive total", "positive classifications");
            }
        }
        std::uint64_t n_rows = 0;
        for (const auto& [c, n] : totals) {
            n_rows += n;
        }
        std::vector<Sex> sexes;
        if (spec.sex_totals) {
            const auto& st = *spec.sex_totals;
            check_equal(st[0] + st[1] + st[2], n_rows, "sex totals", "classification totals");
            for (std::size_t s = 0; s < 3; ++s) {
                sexes.insert(sexes.end(), st[s], kAllSexes[s]);
            }
            rng.shuffle(sexes);
        }
        std::size_t k = 0;
        for (const auto& [c, n] : totals) {
            for (std::uint64_t i = 0; i < n; ++i, ++k) {
                const Sex sex = sexes.empty() ? (rng.per_mille(500) ? Sex::Female : Sex::Male) : sexes[k];
                auto r = detail::base_record(rng, sex);
                r.classification = decode_classification(c);
                if (rng.per_mille(300)) {
                    r.treatment = TreatmentStrategy::Hospitalized;
                    r.intubated = rng.per_mille(150) ? CodedFlag::Yes : CodedFlag::No;
                    r.icu = r.intubated;
                }
                detail::finish_record(r, rng, rng.per_mille(r.treatment == TreatmentStrategy::Hospitalized ? 300 : 10));
                out.push_back(std::move(r));
            }
        }
    }

    rng.shuffle(out);
    return out;
}

/// SVEERV CSV bytes for `spec`; identical for identical spec and seed.
inline std::string generate_epi_fixture(const EpiMarginalSpec& spec) { return write_sveerv(generate_epi_records(spec)); }

// --- genomic marginal spec ----------------------------------------------------

struct SelectedStateSpec
{
    std::string name;
    std::vector<std::pair<std::string, std::uint64_t>> clades;
    std::optional<SexCounts> sex;
    /// [Sex][AgeGroup]; the fourth bin is 60 and over
    std::optional<std::array<std::array<std::uint64_t, 5>, 3>> age_sex;
    std::vector<std::pair<std::string, std::uint64_t>> vaccines;
};

struct GenomicMarginalSpec
{
    std::uint64_t seed = 0;
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> lineage_clade; // lineage, clade, count
    std::string status_variant;
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> status_clade; // status, clade, count
    std::string selected_variant; // defaults to status_variant
    std::vector<SelectedStateSpec> selected_states;
    std::vector<std::string> other_divisions;
    std::vector<std::string> status_pool;

    static GenomicMarginalSpec from_json(const nlohmann::ordered_json& j);
    static GenomicMarginalSpec parse(std::string_view json_text);
};

namespace detail
{

inline std::vector<std::tuple<std::string, std::string, std::uint64_t>> nested_counts(const nlohmann::ordered_json& j,
                                                                                      const std::string& where)
{
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> out;
    for (const auto& [outer, inner] : j.items()) {
        for (const auto& [clade, n] : inner.items()) {
            if (!n.is_number_integer() || n.get<std::int64_t>() < 0) {
                throw DataError(where + "." + outer + "." + clade + ": expected a non-negative integer");
            }
            out.emplace_back(outer, clade, n.get<std::uint64_t>());
        }
    }
    return out;
}

inline std::vector<std::pair<std::string, std::uint64_t>> flat_counts(const nlohmann::ordered_json& j,
                                                                      const std::string& where)
{
    std::vector<std::pair<std::string, std::uint64_t>> out;
    for (const auto& [k, n] : j.items()) {
        if (!n.is_number_integer() || n.get<std::int64_t>() < 0) {
            throw DataError(where + "." + k + ": expected a non-negative integer");
        }
        out.emplace_back(k, n.get<std::uint64_t>());
    }
    return out;
}

} // namespace detail

inline GenomicMarginalSpec GenomicMarginalSpec::from_json(const nlohmann::ordered_json& j)
{
    if (!j.is_object()) {
        throw DataError("genomic spec: expected a json object");
    }
    GenomicMarginalSpec s;
    for (const auto& [key, v] : j.items()) {
        if (key == "seed") {
            s.seed = detail::count_of(v, key);
        }
        else if (key == "lineage_by_clade") {
            s.lineage_clade = detail::nested_counts(v, key);
        }
        else if (key == "status_variant") {
            s.status_variant = v.get<std::string>();
        }
        else if (key == "status_by_clade") {
            s.status_clade = detail::nested_counts(v, key);
        }
        else if (key == "selected_variant") {
            s.selected_variant = v.get<std::string>();
        }
        else if (key == "other_divisions") {
            s.other_divisions = v.get<std::vector<std::string>>();
        }
        else if (key == "status_pool") {
            s.status_pool = v.get<std::vector<std::string>>();
        }
        else if (key == "selected_states") {
            for (const auto& st : v) {
                SelectedStateSpec ss;
                ss.name = st.at("name").get<std::string>();
                const std::string where = "selected_states." + ss.name;
                if (st.contains("clades")) {
                    ss.clades = detail::flat_counts(st["clades"], where + ".clades");
                }
                if (st.contains("sex")) {
                    ss.sex = detail::sex_counts(st["sex"], where + ".sex");
                }
                if (st.contains("age_sex")) {
                    std::array<std::array<std::uint64_t, 5>, 3> grid{};
                    for (const auto& [sk, bins] : st["age_sex"].items()) {
                        auto sx = detail::sex_slot(sk);
                        if (!sx) {
                            throw DataError(where + ".age_sex: unknown sex key '" + sk + "'");
                        }
                        if (!bins.is_array() || bins.size() < 4 || bins.size() > 5) {
                            throw DataError(where + ".age_sex." + sk + ": expected 4 or 5 age bins");
                        }
                        for (std::size_t b = 0; b < bins.size(); ++b) {
                            grid[*sx][b] = detail::count_of(bins[b], where + ".age_sex");
                        }
                    }
                    ss.age_sex = grid;
                }
                if (st.contains("vaccines")) {
                    ss.vaccines = detail::flat_counts(st["vaccines"], where + ".vaccines");
                }
                s.selected_states.push_back(std::move(ss));
            }
        }
        else if (!key.empty() && key.front() == '_') {
            continue;
        }
        else {
            throw DataError("genomic spec: unknown key '" + key + "'");
        }
    }
    if (s.selected_variant.empty()) {
        s.selected_variant = s.status_variant;
    }
    return s;
}

inline GenomicMarginalSpec GenomicMarginalSpec::parse(std::string_view json_text)
{
    try {
        return from_json(nlohmann::ordered_json::parse(json_text));
    }
    catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("genomic spec: ") + e.what());
    }
}

inline constexpr std::string_view kGisaidHeader =
    "accession\tdate\tdivision\tpango_lineage\tclade\tpatient_status\tage\tsex\tvaccine";

inline std::string write_gisaid_tsv(const std::vector<SampleRecord>& samples)
{
    std::string out(kGisaidHeader);
    out.push_back('\n');
    for (const auto& s : samples) {
        out += s.accession;
        out.push_back('\t');
        if (s.collection_date) {
            out += text::format_date(*s.collection_date);
        }
        out.push_back('\t');
        out += s.state;
        out.push_back('\t');
        out += s.pango_lineage;
        out.push_back('\t');
        out += s.gisaid_clade;
        out.push_back('\t');
        out += s.patient_status;
        out.push_back('\t');
        out += s.age_years ? std::to_string(*s.age_years) : std::string("unknown");
        out.push_back('\t');
        out += s.sex == Sex::Female ? "Female" : (s.sex == Sex::Male ? "Male" : "unknown");
        out.push_back('\t');
        out += s.vaccine.value_or("");
        out.push_back('\n');
    }
    return out;
}

namespace detail
{

inline int age_in_group(Rng& rng, std::size_t bin)
{
    switch (bin) {
    case 0:
        return rng.between(0, 20);
    case 1:
        return rng.between(21, 40);
    case 2:
        return rng.between(41, 59);
    default:
        return rng.between(60, 92);
    }
}

} // namespace detail

/// Samples satisfying every marginal in `spec`, shuffled, with accessions
/// numbered in output order.
inline std::vector<SampleRecord> generate_genomic_records(const GenomicMarginalSpec& spec,
                                                          const VariantCatalog& catalog = VariantCatalog::builtin())
{
    using detail::check_equal;
    using detail::inconsistent;
    Rng rng(spec.seed);
    std::vector<SampleRecord> slots;
    for (const auto& [lineage, clade, n] : spec.lineage_clade) {
        auto parsed = parse_lineage(lineage);
        if (parsed.error) {
            throw DataError("lineage_by_clade: malformed lineage '" + lineage + "'");
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            SampleRecord s;
            s.pango_lineage = parsed.canonical;
            s.gisaid_clade = clade;
            slots.push_back(std::move(s));
        }
    }

    std::vector<bool> status_set(slots.size(), false);
    if (!spec.status_clade.empty()) {
        auto v = catalog.find(spec.status_variant);
        if (!v) {
            throw DataError("status_variant '" + spec.status_variant + "' is not in the catalog");
        }
        std::map<std::string, std::vector<std::size_t>> by_clade;
        if (spec.lineage_clade.empty()) {
            // status table alone: synthesize samples on the variant's first root
            const auto& root = catalog.variants()[*v].pango.alternatives.front().root;
            for (const auto& [status, clade, n] : spec.status_clade) {
                for (std::uint64_t i = 0; i < n; ++i) {
                    SampleRecord s;
                    s.pango_lineage = root;
                    s.gisaid_clade = clade;
                    slots.push_back(std::move(s));
                }
            }
            status_set.assign(slots.size(), false);
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (catalog.classify(slots[i].pango_lineage) == v) {
                by_clade[slots[i].gisaid_clade].push_back(i);
            }
        }
        std::map<std::string, std::vector<std::string>> pools;
        for (const auto& [status, clade, n] : spec.status_clade) {
            pools[clade].insert(pools[clade].end(), n, status);
        }
        for (const auto& [clade, idx] : by_clade) {
            check_equal(pools[clade].size(), idx.size(), "status counts for clade " + clade,
                        spec.status_variant + " samples of that clade");
        }
        for (auto& [clade, pool] : pools) {
            check_equal(pool.size(), by_clade[clade].size(), "status counts for clade " + clade,
                        spec.status_variant + " samples of that clade");
            rng.shuffle(pool);
            const auto& idx = by_clade[clade];
            for (std::size_t k = 0; k < idx.size(); ++k) {
                slots[idx[k]].patient_status = pool[k];
                status_set[idx[k]] = true;
            }
        }
    }

    std::vector<bool> placed(slots.size(), false);
    std::vector<std::string> selected_keys;
    if (!spec.selected_states.empty()) {
        auto v = catalog.find(spec.selected_variant);
        if (!v) {
            throw DataError("selected_variant '" + spec.selected_variant + "' is not in the catalog");
        }
        std::map<std::string, std::vector<std::size_t>> pools;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (catalog.classify(slots[i].pango_lineage) == v) {
                pools[slots[i].gisaid_clade].push_back(i);
            }
        }
        for (auto& [clade, p] : pools) {
            rng.shuffle(p);
        }
        for (const auto& st : spec.selected_states) {
            selected_keys.push_back(text::fold(st.name));
            std::vector<std::size_t> mine;
            for (const auto& [clade, n] : st.clades) {
                auto& pool = pools[clade];
                if (pool.size() < n) {
                    inconsistent(st.name + " needs " + std::to_string(n) + " " + spec.selected_variant +
                                 " samples of clade " + clade + " but only " + std::to_string(pool.size()) +
                                 " remain");
                }
                mine.insert(mine.end(), pool.end() - static_cast<std::ptrdiff_t>(n), pool.end());
                pool.resize(pool.size() - n);
            }
            const std::uint64_t total = mine.size();
            if (st.sex) {
                check_equal((*st.sex)[0] + (*st.sex)[1] + (*st.sex)[2], total, st.name + " sex counts",
                            st.name + " clade counts");
            }
            std::vector<std::pair<Sex, int>> attrs; // sex, age bin (-1 = any)
            if (st.age_sex) {
                const auto& g = *st.age_sex;
                for (std::size_t s = 0; s < 3; ++s) {
                    std::uint64_t row = 0;
                    for (std::size_t b = 0; b < 5; ++b) {
                        attrs.insert(attrs.end(), g[s][b], {kAllSexes[s], static_cast<int>(b)});
                        row += g[s][b];
                    }
                    if (st.sex) {
                        check_equal(row, (*st.sex)[s], st.name + " " + detail::fmt_sex(s) + " age counts",
                                    st.name + " " + detail::fmt_sex(s) + " sex count");
                    }
                }
                check_equal(attrs.size(), total, st.name + " age-by-sex counts", st.name + " clade counts");
            }
            else if (st.sex) {
                for (std::size_t s = 0; s < 3; ++s) {
                    attrs.insert(attrs.end(), (*st.sex)[s], {kAllSexes[s], -1});
                }
            }
            rng.shuffle(attrs);
            std::vector<std::optional<std::string>> vaccines;
            for (const auto& [name, n] : st.vaccines) {
                vaccines.insert(vaccines.end(), n, name);
            }
            if (vaccines.size() > total) {
                inconsistent(st.name + " vaccine counts sum to " + std::to_string(vaccines.size()) +
                             " but the state has " + std::to_string(total) + " samples");
            }
            vaccines.resize(total);
            rng.shuffle(vaccines);
            for (std::size_t k = 0; k < mine.size(); ++k) {
                auto& s = slots[mine[k]];
                s.state = st.name;
                if (!attrs.empty()) {
                    s.sex = attrs[k].first;
                    const int bin = attrs[k].second;
                    if (bin == 4) {
                        s.age_years.reset();
                    }
                    else {
                        s.age_years = detail::age_in_group(rng, bin < 0 ? rng.below(4) : static_cast<std::size_t>(bin));
                    }
                }
                else {
                    s.sex = rng.per_mille(500) ? Sex::Female : Sex::Male;
                    s.age_years = detail::age_in_group(rng, rng.below(4));
                }
                s.vaccine = vaccines[k];
                placed[mine[k]] = true;
            }
        }
    }

    std::vector<std::string> divisions = spec.other_divisions;
    if (divisions.empty()) {
        for (auto name : kStateNames) {
            const auto key = text::fold(name);
            if (std::find(selected_keys.begin(), selected_keys.end(), key) == selected_keys.end()) {
                divisions.emplace_back(name);
            }
        }
    }
    std::vector<std::string> statuses = spec.status_pool;
    if (statuses.empty()) {
        statuses = {"Hospitalizado", "Liberado", "Ambulatorio", "Fallecido", "unknown"};
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto& s = slots[i];
        s.collection_date = random_date(rng);
        if (!placed[i]) {
            s.state = rng.pick(divisions);
            s.sex = rng.per_mille(500) ? Sex::Female : Sex::Male;
            if (rng.per_mille(970)) {
                s.age_years = rng.between(0, 90);
            }
        }
        if (!status_set[i]) {
            s.patient_status = rng.pick(statuses);
        }
    }

    rng.shuffle(slots);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        slots[i].accession = "EPI_ISL_" + std::to_string(1000000 + i);
    }
    return slots;
}

/// Metadata TSV bytes for `spec`; an empty spec yields the header only.
inline std::string generate_genomic_fixture(const GenomicMarginalSpec& spec,
                                            const VariantCatalog& catalog = VariantCatalog::builtin())
{
    return write_gisaid_tsv(generate_genomic_records(spec, catalog));
}

// --- brute-force oracle -------------------------------------------------------

struct OracleResult
{
    CaseCounts counts;
    Percentage fatality_pct;
    Percentage positivity_pct;
    Percentage strict_positivity_pct;
    std::optional<SeverityRates> severity; // IcuAndIntubation
};

/// Recounts each field with its own pass over the whole list. Shares no code
/// with CaseCounts::add, so it can referee the streaming path.
template <class Range>
OracleResult oracle_aggregate(const Range& records)
{
    auto count = [&](auto pred) -> std::uint64_t {
        return static_cast<std::uint64_t>(std::count_if(std::begin(records), std::end(records), pred));
    };
    auto pos = [](const PatientRecord& r) { return code_of(r.classification) <= 3; };
    auto hosp = [&](const PatientRecord& r) { return pos(r) && code_of(r.treatment) == 2; };
    auto yes = [](CodedFlag f) { return code_of(f) == 1; };

    OracleResult o;
    CaseCounts& c = o.counts;
    c.total = count([](const PatientRecord&) { return true; });
    c.positive = count(pos);
    c.invalid = count([](const PatientRecord& r) { return code_of(r.classification) == 4; });
    c.not_performed = count([](const PatientRecord& r) { return code_of(r.classification) == 5; });
    c.suspect = count([](const PatientRecord& r) { return code_of(r.classification) == 6; });
    c.negative = count([](const PatientRecord& r) { return code_of(r.classification) == 7; });
    c.ambulatory_pos = count([&](const PatientRecord& r) { return pos(r) && code_of(r.treatment) == 1; });
    c.hospitalized_pos = count(hosp);
    c.icu_pos = count([&](const PatientRecord& r) { return hosp(r) && yes(r.icu); });
    c.intubated_pos = count([&](const PatientRecord& r) { return hosp(r) && yes(r.intubated); });
    c.icu_and_intubated_pos = count([&](const PatientRecord& r) { return hosp(r) && yes(r.icu) && yes(r.intubated); });
    c.deaths_pos = count([&](const PatientRecord& r) { return pos(r) && r.death_date.has_value(); });
    c.deaths_icu_intubated_pos = count(
        [&](const PatientRecord& r) { return hosp(r) && r.death_date.has_value() && yes(r.icu) && yes(r.intubated); });
    for (int k = 1; k <= 3; ++k) {
        c.positive_by_class[static_cast<std::size_t>(k - 1)] =
            count([&](const PatientRecord& r) { return code_of(r.classification) == k; });
        c.deaths_by_class[static_cast<std::size_t>(k - 1)] =
            count([&](const PatientRecord& r) { return code_of(r.classification) == k && r.death_date.has_value(); });
    }
    for (auto f : kAllFlags) {
        const auto i = index_of(f);
        c.intubation_flags_pos[i] = count([&](const PatientRecord& r) { return pos(r) && r.intubated == f; });
        c.icu_flags_pos[i] = count([&](const PatientRecord& r) { return pos(r) && r.icu == f; });
        c.icu_flags_deaths_pos[i] =
            count([&](const PatientRecord& r) { return pos(r) && r.death_date.has_value() && r.icu == f; });
    }

    auto ratio = [](std::uint64_t a, std::uint64_t b) -> Percentage {
        if (b == 0) {
            return std::nullopt;
        }
        return 100.0 * static_cast<double>(a) / static_cast<double>(b);
    };
    o.fatality_pct = ratio(c.deaths_pos, c.positive);
    o.positivity_pct = ratio(c.positive, c.total);
    o.strict_positivity_pct = ratio(c.positive, c.positive + c.negative);
    if (c.positive > 0) {
        const double p = static_cast<double>(c.positive);
        o.severity = SeverityRates{100.0 * static_cast<double>(c.ambulatory_pos) / p,
                                   100.0 * static_cast<double>(c.hospitalized_pos - c.icu_and_intubated_pos) / p,
                                   100.0 * static_cast<double>(c.icu_and_intubated_pos) / p};
    }
    return o;
}

/// Naive stratified recount: collect the distinct keys, then one full pass
/// per key.
template <class Range>
std::map<StratumKey, CaseCounts> oracle_stratified(const Range& records, const CohortFilter& filter,
                                                   const GroupBy& group_by)
{
    std::vector<PatientRecord> kept;
    for (const auto& r : records) {
        if (filter.accepts(r)) {
            kept.push_back(r);
        }
    }
    std::set<StratumKey> keys{StratumKey::all()};
    for (const auto& r : kept) {
        keys.insert(StratumKey::of(r, group_by));
    }
    std::map<StratumKey, CaseCounts> out;
    for (const auto& k : keys) {
        std::vector<PatientRecord> members;
        for (const auto& r : kept) {
            if (k.is_all() || StratumKey::of(r, group_by) == k) {
                members.push_back(r);
            }
        }
        out[k] = oracle_aggregate(members).counts;
    }
    return out;
}

} // namespace episurv
