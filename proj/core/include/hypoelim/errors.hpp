#pragma once

#include <stdexcept>
#include <string>

namespace hypoelim {

// Caller passed arguments that break an operation's preconditions
// (index out of range, dimension mismatch, empty set, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A distribution parameter outside its family's domain.
class ParameterDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An observation outside the family's support.
class SupportError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Instance file or sweep config that does not match the expected schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every action leaves the alive hypotheses in a single cluster.
class NoSeparatingAction : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A stage drew more than its allowed number of samples without a winner.
class StageOverrun : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hypoelim
