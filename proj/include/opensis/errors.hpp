#pragma once

#include <stdexcept>
#include <string>

namespace opensis {

// Removing the last remaining agent would empty the network.
class cannot_empty_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// The numerical flow left the admissible box by more than the tolerated amount.
class integration_fault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A closed-form bound was requested for parameters where it does not exist.
class unstable_configuration : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Trajectories handed to the estimator were not sampled on the expected grid.
class grid_mismatch_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Bad config file: carries the offending key.
class config_error : public std::runtime_error {
public:
    config_error(std::string key, const std::string& message)
        : std::runtime_error(message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace opensis
