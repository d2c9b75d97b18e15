#include <exception>
#include <iostream>

#include "commands.hpp"
#include "eqakit/errors.hpp"

namespace {

// Exit codes: 0 success, 1 validation error, 2 runtime error.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eqakit - extractive question answering robustness toolkit"};
  app.require_subcommand(1);
  app.set_config("--config")->description("key=value config file; flags take precedence");

  eqa::cli::register_train(app);
  eqa::cli::register_eval(app);
  eqa::cli::register_attack(app);
  eqa::cli::register_augment(app);
  eqa::cli::register_gradcheck(app);
  eqa::cli::register_report(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const eqa::cli::UsageError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUsage;
  } catch (const eqa::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUsage;
  } catch (const eqa::WeightRatioViolation& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUsage;
  } catch (const eqa::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kRuntime;
  }
  return kOk;
}
