#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eqcsp/cli.hpp"

namespace {

int emit(const eqcsp::cli::json& record) {
  std::cout << record.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equation and disequality solving over abelian groups and the universal semilattice"};
  app.require_subcommand(1);
  app.set_version_flag("--version", eqcsp::cli::version);

  std::string structure, instance, group, lhs, rhs, params;
  std::optional<std::string> assume, records;
  std::optional<std::uint64_t> budget;
  std::uint64_t n = 2, seed = 1;
  std::size_t truncation = 8, samples = 10000, count = 100;

  auto* solve = app.add_subcommand("solve", "decide satisfiability of an instance file");
  solve->add_option("--structure", structure, "group descriptor such as '2^2:1 + 2^1:w', or U")->required();
  solve->add_option("--instance", instance, "instance file")->required();
  solve->add_option("--budget", budget, "search step limit");

  auto* classify = app.add_subcommand("classify", "classify a group descriptor");
  classify->add_option("--group", group, "group descriptor")->required();

  CLI::App* checks[2];
  const char* check_names[2] = {"identity", "entail"};
  for (int i = 0; i < 2; ++i) {
    checks[i] = app.add_subcommand(check_names[i], i == 0 ? "check an identity lhs = rhs"
                                                          : "check whether assumptions imply lhs = rhs");
    checks[i]->add_option("--structure", structure, "group descriptor or U")->required();
    checks[i]->add_option("--lhs", lhs, "left-hand term")->required();
    checks[i]->add_option("--rhs", rhs, "right-hand term")->required();
    checks[i]->add_option("--assume", assume, "instance file whose equations are assumed");
    checks[i]->add_option("--budget", budget, "search step limit");
  }

  auto* verify = app.add_subcommand("verify-ps", "sample-check the pseudo-Siggers polymorphism");
  verify->add_option("--n", n, "modulus n of Z_n^(w) + Z_2n")->check(CLI::PositiveNumber);
  verify->add_option("--truncation", truncation, "highest input level");
  verify->add_option("--samples", samples, "samples per check");
  verify->add_option("--seed", seed, "random seed");

  auto* fuzz = app.add_subcommand("fuzz", "differential run of the solver against brute force");
  fuzz->add_option("--structure", structure, "group descriptor or U")->required();
  fuzz->add_option("--count", count, "number of instances");
  fuzz->add_option("--seed", seed, "first seed");
  fuzz->add_option("--params", params, "maximum sizes, e.g. vars=5,eqs=6,neqs=4,depth=2");
  fuzz->add_option("--records", records, "write one JSON line per instance here");
  fuzz->add_option("--budget", budget, "search step limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "eqcsp: " << e.what() << '\n';
    emit(eqcsp::cli::error_record("", e.what()));
    return 2;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*solve) return emit(eqcsp::cli::cmd_solve(structure, instance, budget));
    if (*classify) return emit(eqcsp::cli::cmd_classify(group));
    for (int i = 0; i < 2; ++i)
      if (*checks[i]) return emit(eqcsp::cli::cmd_check(check_names[i], structure, lhs, rhs, assume, budget));
    if (*verify) return emit(eqcsp::cli::cmd_verify_ps(n, truncation, samples, seed));
    if (*fuzz) return emit(eqcsp::cli::cmd_fuzz(structure, count, seed, params, records, budget));
  } catch (const eqcsp::InputError& e) {
    std::cerr << "eqcsp: " << e.what() << '\n';
    emit(eqcsp::cli::error_record(command, e.what()));
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "eqcsp: internal error: " << e.what() << '\n';
    emit(eqcsp::cli::error_record(command, e.what()));
    return 3;
  }
  return 3;
}
