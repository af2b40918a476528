// Copyright (c) 2026 moeplan contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace moeplan {

/// Invalid value or constraint violation in otherwise well-formed input.
/// CLI maps this to exit code 2.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A curve fit could not be completed (singular system, no convergence).
/// CLI maps this to exit code 3.
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed files, unparsable numbers, unknown flags. CLI exit code 4.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace moeplan
