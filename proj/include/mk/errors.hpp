#pragma once

#include <stdexcept>
#include <string>

namespace mk {

// Error taxonomy shared by the library and the CLI. The numeric values are
// the process exit codes emitted by the command-line tool.
enum class ErrorKind {
    config = 2,   // bad flags, bad config file, invalid parameter values
    data = 3,     // malformed input, violated preconditions on data
    numeric = 4,  // solver failure, non-finite intermediate results
    io = 5,       // missing files, unwritable outputs
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::data, msg); }
[[noreturn]] inline void throw_numeric(const std::string& msg) { throw Error(ErrorKind::numeric, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::io, msg); }

}  // namespace mk
