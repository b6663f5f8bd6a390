#pragma once

#include <stdexcept>
#include <string>

namespace tpanon {

// Every recoverable failure in the library (bad input files, violated
// preconditions) is reported with this type. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tpanon
