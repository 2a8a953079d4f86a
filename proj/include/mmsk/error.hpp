#pragma once

#include <stdexcept>
#include <string>

namespace mmsk {

// Raised for contract violations and unsatisfiable requests. The message is a
// short machine-friendly phrase (e.g. "degenerate column").
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mmsk
