#pragma once

#include <stdexcept>
#include <string>

namespace prunekit {

// Error categories; values line up with the CLI exit codes and the
// pk_status codes of the C API.
enum class ErrorCode {
    runtime = 1,
    config = 2,
    data = 3,
    version = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline Error runtime_error(const std::string& msg) { return Error(ErrorCode::runtime, msg); }
inline Error config_error(const std::string& msg) { return Error(ErrorCode::config, msg); }
inline Error data_error(const std::string& msg) { return Error(ErrorCode::data, msg); }
inline Error version_error(const std::string& msg) { return Error(ErrorCode::version, msg); }

}  // namespace prunekit
