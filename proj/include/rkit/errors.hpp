#pragma once

#include <stdexcept>
#include <string>

namespace rkit {

enum class ErrorKind { usage, config, domain, range, build_failure, integrity, unavailable };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

// Arithmetic on a value outside an operation's domain, e.g. inverting zero.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

struct RangeError : Error {
    explicit RangeError(const std::string& what) : Error(ErrorKind::range, what) {}
};

struct BuildFailure : Error {
    BuildFailure(const std::string& what, unsigned attempts)
        : Error(ErrorKind::build_failure, what), attempts_(attempts) {}
    unsigned attempts() const noexcept { return attempts_; }

private:
    unsigned attempts_;
};

struct IntegrityError : Error {
    explicit IntegrityError(const std::string& what) : Error(ErrorKind::integrity, what) {}
};

// Requested data was not retained by the structure (e.g. oracle recomputation).
struct UnavailableError : Error {
    explicit UnavailableError(const std::string& what) : Error(ErrorKind::unavailable, what) {}
};

}  // namespace rkit
