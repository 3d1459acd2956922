#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace oobvimp {

// Bad flags, bad analysis spec, violated preconditions. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or invalid input data (CSV cells, schema mismatches). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Singular information matrix: the weighted design is rank deficient.
// Carries the offending column indices when they could be identified.
class DegenerateFitError : public std::runtime_error {
public:
    explicit DegenerateFitError(const std::string& msg, std::vector<int> columns = {})
        : std::runtime_error(msg), columns_(std::move(columns)) {}
    const std::vector<int>& columns() const { return columns_; }

private:
    std::vector<int> columns_;
};

// Survival fit requested but no weighted rows carry an event.
class NoEventsError : public std::runtime_error {
public:
    explicit NoEventsError(const std::string& msg) : std::runtime_error(msg) {}
};

// Prediction error is undefined on the given outcome set
// (e.g. concordance with zero permissible pairs, constant response).
class UndefinedErrorValue : public std::runtime_error {
public:
    explicit UndefinedErrorValue(const std::string& msg) : std::runtime_error(msg) {}
};

// Every bootstrap replicate was unusable; no averages exist. CLI exit code 3.
class DegenerateAnalysisError : public std::runtime_error {
public:
    explicit DegenerateAnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

// A per-replicate task failed; identifies the lowest failing replicate index.
class ReplicateError : public std::runtime_error {
public:
    ReplicateError(int index, const std::string& msg)
        : std::runtime_error("replicate " + std::to_string(index) + ": " + msg), index_(index) {}
    int index() const { return index_; }

private:
    int index_;
};

}  // namespace oobvimp
