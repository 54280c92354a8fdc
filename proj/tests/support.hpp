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
#pragma once

// Helpers shared by the test executables.

#include "episurv/fixtures.hpp"
#include "episurv/ingest.hpp"
#include "episurv/presets.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace episurv::test
{

/// A file under the system temp directory, removed on destruction.
class TempFile
{
public:
    explicit TempFile(std::string_view suffix = ".tmp")
    {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("episurv_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + std::string(suffix));
    }

    TempFile(std::string_view suffix, std::string_view contents)
        : TempFile(suffix)
    {
        write(contents);
    }

    ~TempFile()
    {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }

    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;

    void write(std::string_view contents) const
    {
        std::ofstream out(path_, std::ios::binary);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    }

    std::string read() const
    {
        std::ifstream in(path_, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    const std::filesystem::path& path() const noexcept { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline const EpiMarginalSpec& epi_preset()
{
    static const auto spec = EpiMarginalSpec::parse(preset_data::kEpiNational);
    return spec;
}

inline const GenomicMarginalSpec& genomic_preset()
{
    static const auto spec = GenomicMarginalSpec::parse(preset_data::kGenomicDelta);
    return spec;
}

/// Preset records, generated once per process.
inline const std::vector<PatientRecord>& epi_preset_records()
{
    static const auto records = generate_epi_records(epi_preset());
    return records;
}

inline const std::vector<SampleRecord>& genomic_preset_records()
{
    static const auto records = generate_genomic_records(genomic_preset());
    return records;
}

inline std::vector<PatientRecord> sveerv_from(const std::string& csv, IngestStats* stats = nullptr)
{
    std::istringstream in(csv);
    return read_all_sveerv(in, stats);
}

inline std::vector<SampleRecord> gisaid_from(const std::string& tsv, IngestStats* stats = nullptr)
{
    std::istringstream in(tsv);
    return read_all_gisaid(in, stats);
}

/// A confirmed, ambulatory, alive record with every flag set to No.
inline PatientRecord plain_positive(int state = 1, Sex sex = Sex::Female, int age = 30)
{
    PatientRecord r;
    r.state_code = state;
    r.municipality_code = 1;
    r.sex = sex;
    r.age_years = age;
    r.speaks_indigenous_language = CodedFlag::Yes;
    r.treatment = TreatmentStrategy::Ambulatory;
    r.icu = CodedFlag::NotApplicable;
    r.intubated = CodedFlag::NotApplicable;
    r.classification = CaseClassification::ConfirmedSarsCov2;
    r.comorbidities.fill(CodedFlag::No);
    return r;
}

inline Date ymd(int y, unsigned m, unsigned d)
{
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

} // namespace episurv::test
