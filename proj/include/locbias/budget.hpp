#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace locbias {

// Testing budget: a count of executed actions (deterministic) or wall-clock
// seconds.
struct Budget {
  enum class Kind { actions, seconds };

  Kind kind = Kind::actions;
  double amount = 10000;

  static Budget actions(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("action budget must be positive");
    return {Kind::actions, static_cast<double>(n)};
  }
  static Budget seconds(double s) {
    if (!(s > 0)) throw std::invalid_argument("time budget must be positive");
    return {Kind::seconds, s};
  }

  bool is_actions() const { return kind == Kind::actions; }
  std::uint64_t action_limit() const { return static_cast<std::uint64_t>(amount); }
  std::string describe() const {
    return is_actions() ? std::to_string(action_limit()) + " actions"
                        : std::to_string(amount) + " s";
  }
};

}  // namespace locbias
