#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ellopt/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sparse optimal control of semilinear elliptic PDEs by a "
               "semismooth Newton method"};

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("config", config_path, "key = value configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("overrides", overrides,
                 "inline key=value pairs applied after the file");

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  std::ostringstream text;
  text << in.rdbuf();
  for (const auto& kv : overrides) text << "\n" << kv << "\n";

  try {
    const ellopt::RunConfig config = ellopt::parse_config(text.str());
    return ellopt::run(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
