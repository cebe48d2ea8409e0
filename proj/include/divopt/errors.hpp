#pragma once

#include <stdexcept>
#include <string>

namespace divopt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error { using Error::Error; };
struct DegenerateDenominator : Error { using Error::Error; };
struct NoBracket : Error { using Error::Error; };
struct NumericOverflow : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace divopt
