#pragma once

#include <stdexcept>
#include <string>

namespace nopo {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Closed form evaluated outside its region of validity (e.g. mu >= 1).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller handed in data that lacks something the operation needs.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct FaultBudgetExceeded : std::runtime_error {
  FaultBudgetExceeded(std::size_t faulted, std::size_t total)
      : std::runtime_error("faulted trajectories " + std::to_string(faulted) + " of " +
                           std::to_string(total) + " exceed the 1% budget"),
        n_faulted(faulted),
        n_total(total) {}
  std::size_t n_faulted;
  std::size_t n_total;
};

}  // namespace nopo
