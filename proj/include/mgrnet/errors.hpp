#pragma once

#include <stdexcept>
#include <string>

namespace mgrnet {

// Error taxonomy shared by the whole pipeline. The CLI maps kinds onto
// process exit codes: usage/structural/config -> 1, data -> 2, numeric -> 3.
enum class ErrorKind {
    Structural,  // shape or wiring mismatch between tensors/layers
    Config,      // invalid configuration value (even kernel, bad pool target, ...)
    Usage,       // API misuse (off-tape backward, bad target id, ...)
    Data,        // bad input data (corrupt container, empty class, ...)
    Numeric,     // numeric failure (non-finite loss, degenerate covariance, ...)
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), kind_(kind), module_(std::move(module)) {}

    ErrorKind kind() const { return kind_; }
    const std::string& module() const { return module_; }

    int exit_code() const {
        switch (kind_) {
            case ErrorKind::Data: return 2;
            case ErrorKind::Numeric: return 3;
            default: return 1;
        }
    }

  private:
    ErrorKind kind_;
    std::string module_;
};

[[noreturn]] inline void throw_structural(const std::string& module, const std::string& msg) {
    throw Error(ErrorKind::Structural, module, msg);
}
[[noreturn]] inline void throw_config(const std::string& module, const std::string& msg) {
    throw Error(ErrorKind::Config, module, msg);
}
[[noreturn]] inline void throw_usage(const std::string& module, const std::string& msg) {
    throw Error(ErrorKind::Usage, module, msg);
}
[[noreturn]] inline void throw_data(const std::string& module, const std::string& msg) {
    throw Error(ErrorKind::Data, module, msg);
}
[[noreturn]] inline void throw_numeric(const std::string& module, const std::string& msg) {
    throw Error(ErrorKind::Numeric, module, msg);
}

}  // namespace mgrnet
