#pragma once

#include <stdexcept>
#include <string>

namespace herglotz {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : Error { using Error::Error; };
struct SingularHessian : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct ShootingDivergence : Error { using Error::Error; };
struct NoAdmissiblePath : Error { using Error::Error; };
struct UnsupportedModel : Error { using Error::Error; };

struct ConfigError : Error {
    ConfigError(const std::string& msg, int line_no = 0, std::string key_name = "")
        : Error(msg), line(line_no), key(std::move(key_name)) {}
    int line;
    std::string key;
};

}  // namespace herglotz
