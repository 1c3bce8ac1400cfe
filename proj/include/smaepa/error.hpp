#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smaepa {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class UndefinedCorrelation : public Error {
public:
    using Error::Error;
};

class MissingActivityType : public Error {
public:
    using Error::Error;
};

class LeakageError : public Error {
public:
    using Error::Error;
};

// A malformed data row; fatal only in strict ingestion.
class RowError : public Error {
public:
    RowError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line), message_(message) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

class DuplicateRowError : public Error {
public:
    explicit DuplicateRowError(std::string key)
        : Error("duplicate row for key (" + key + ")"), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class TrainingDiverged : public Error {
public:
    explicit TrainingDiverged(std::size_t epoch)
        : Error("training diverged: non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

} // namespace smaepa
