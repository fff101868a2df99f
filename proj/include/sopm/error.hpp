#pragma once

#include <stdexcept>
#include <string>

namespace sopm {

// Every failure surfaced by the library is an Error; the message names the
// offending input (file, frame, proposal) where one exists.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sopm
