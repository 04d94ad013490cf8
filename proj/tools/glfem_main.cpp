// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <map>
#include <string>
#include <CLI11.hpp>
#include "glfem/cli.hpp"

int main(int argc, char **argv)
{
  CLI::App app{"Ginzburg-Landau finite element minimizers, eigenvalue certificates and "
               "convergence studies"};
  app.set_version_flag("--version", "glfem 0.1.0");
  std::string command, config_file;
  app.add_option("command", command, "minimize, eigs, converge, bestapprox or lod");
  app.add_option("-c,--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);

  std::map<std::string, std::string> flags;
  for (const std::string &key : glfem::cli::known_keys())
  {
    if (key != "command")
    {
      app.add_option("--" + key, flags[key], "overrides " + key + " from the config file");
    }
  }
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    // --help and --version report success; every other parse error is a usage error.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try
  {
    glfem::cli::KeyValues values;
    if (!config_file.empty())
    {
      values = glfem::cli::read_config_file(config_file);
    }
    for (const auto &[key, value] : flags)
    {
      if (app.count("--" + key) > 0)
      {
        values[key] = value;
      }
    }
    if (!command.empty())
    {
      values["command"] = command;
    }
    const glfem::cli::RunConfig config = glfem::cli::parse_config(values);
    return glfem::cli::run(config, std::clog);
  }
  catch (const std::exception &e)
  {
    std::cerr << "glfem: error: " << e.what() << '\n';
    return 1;
  }
}
