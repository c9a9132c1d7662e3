// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace lossdecay {

/// A configuration value violates its documented constraint. Carries the
/// dotted key of the offending field (e.g. "optimizer.eta").
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& what)
        : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Structured text could not be parsed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A gradient, loss or parameter became NaN/Inf during training.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lossdecay
