#pragma once

#include <CLI11.hpp>

// Each registration adds one subcommand to the application and wires its
// callback. Callbacks throw eqa::Error subtypes; main maps them to exit
// codes (1 for validation problems, 2 for runtime failures).

namespace eqa::cli {

void register_train(CLI::App& app);
void register_eval(CLI::App& app);
void register_attack(CLI::App& app);
void register_augment(CLI::App& app);
void register_gradcheck(CLI::App& app);
void register_report(CLI::App& app);

// Thrown by command callbacks for argument-level problems that CLI11
// cannot catch itself (conflicting flags, same path for input and output).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Refuses to write any output over an input path.
void require_distinct_paths(const std::string& input, const std::string& output);

}  // namespace eqa::cli
