#pragma once

#include <stdexcept>
#include <string>

namespace poolseq {

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Work would exceed an enumeration or memory ceiling.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndeterminateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw ContractViolation(what);
}

}  // namespace poolseq
