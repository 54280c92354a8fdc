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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace episurv
{

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Problems with input data (bad codes, missing columns, inconsistent marginals).
/// The CLI maps these to exit code 2.
class DataError : public Error
{
public:
    using Error::Error;
};

/// A coded value outside its documented domain.
class UnknownCode : public DataError
{
public:
    UnknownCode(std::string domain, std::int64_t code)
        : DataError("unknown " + domain + " code " + std::to_string(code))
        , domain_(std::move(domain))
        , code_(code)
    {
    }

    const std::string& domain() const noexcept { return domain_; }
    std::int64_t code() const noexcept { return code_; }

private:
    std::string domain_;
    std::int64_t code_;
};

class MissingRequiredColumn : public DataError
{
public:
    explicit MissingRequiredColumn(std::string column)
        : DataError("missing required column " + column)
        , column_(std::move(column))
    {
    }

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class InconsistentMarginals : public DataError
{
public:
    using DataError::DataError;
};

/// Rate requested for a cohort with no positive cases.
class UndefinedForEmptyCohort : public Error
{
public:
    UndefinedForEmptyCohort()
        : Error("severity rates are undefined for a cohort with no positive cases")
    {
    }
};

class PatternError : public DataError
{
public:
    using DataError::DataError;
};

/// Table data does not match the schema of the requested table id.
class ShapeMismatch : public Error
{
public:
    using Error::Error;
};

} // namespace episurv
