#include "logsymp/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Lie algebroid symplectic toolkit: runs the tasks of a model file"};
  std::string model_path, task = "all", format = "text", builtin, emit;
  std::uint64_t seed = logsymp::RunOptions{}.seed;
  double tol = logsymp::RunOptions{}.tol;
  bool list = false;
  app.add_option("--model", model_path, "Model file to run");
  app.add_option("--builtin", builtin, "Run a built-in model instead of a file");
  app.add_option("--emit", emit, "Print a built-in model and exit");
  app.add_flag("--list", list, "List built-in models and exit");
  app.add_option("--task", task, "Task id or 'all'");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "machine"}));
  app.add_option("--seed", seed, "Seed for randomized checks");
  app.add_option("--tol", tol, "Integrator tolerance")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list) {
      for (const auto& n : logsymp::builtin_names()) std::cout << n << "\n";
      return 0;
    }
    if (!emit.empty()) {
      std::cout << logsymp::emit_builtin(emit);
      return 0;
    }
    if (model_path.empty() == builtin.empty()) {
      std::cerr << "error: give exactly one of --model or --builtin\n";
      return 2;
    }
    std::string text;
    if (!builtin.empty()) {
      text = logsymp::emit_builtin(builtin);
    } else {
      std::ifstream in(model_path);
      if (!in) {
        std::cerr << "error: cannot read " << model_path << "\n";
        return 2;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    logsymp::ModelFile m = logsymp::parse_model(text);
    auto reports = logsymp::run_model(m, {task, seed, tol});
    std::cout << (format == "machine" ? logsymp::format_machine(reports) : logsymp::format_text(reports));
    return logsymp::exit_status(reports);
  } catch (const logsymp::ModelError& e) {
    std::cerr << (model_path.empty() ? builtin : model_path) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
