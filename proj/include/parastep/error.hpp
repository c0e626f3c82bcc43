#pragma once

#include <stdexcept>
#include <string>

namespace parastep {

// All recoverable failures in the library surface as this type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace parastep
