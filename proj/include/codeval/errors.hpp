// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace codeval {

/// Bad flags, bad config files, missing API keys. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed manifests, run logs, or judge outputs.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exhausted retries or a permanent HTTP failure.
struct TransportError : std::runtime_error {
    TransportError(const std::string& what, int status = 0)
        : std::runtime_error(what), http_status(status) {}
    int http_status;  // 0 when no HTTP response was received
};

/// Violated operation precondition (bad run state, missing record, ...).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace codeval
