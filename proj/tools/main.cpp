// Command-line front end. Argument handling and config loading happen here;
// all of the numerics sit behind the shared library's C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "zipfrac/zipfrac.h"

namespace {

using nlohmann::json;

int run(const std::string& subcommand, const std::string& config_path,
        const std::string& out_dir, const json& overrides, bool quiet) {
  json config = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config '" << config_path << "'\n";
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      config = json::parse(buf.str());
    } catch (const json::exception& e) {
      std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
      return 2;
    }
  }
  for (const auto& [key, value] : overrides.items()) config[key] = value;

  char* summary = nullptr;
  const int code =
      zf_run(subcommand.c_str(), config.dump().c_str(), out_dir.c_str(),
             &summary);
  if (summary) {
    if (!quiet) {
      if (subcommand == "verify") {
        // compact table; the full JSON lands in the output directory
        try {
          const json doc = json::parse(summary);
          for (const auto& suite : doc.at("suites"))
            std::cout << (suite.at("pass").get<bool>() ? "[PASS] " : "[FAIL] ")
                      << suite.at("suite").get<std::string>() << "\n";
          std::cout << (doc.at("pass").get<bool>() ? "all suites passed"
                                                   : "some suites FAILED")
                    << "\n";
        } catch (const json::exception&) {
          std::cout << summary;
        }
      } else {
        std::cout << summary;
      }
    }
    zf_string_free(summary);
  } else if (code != 0) {
    std::cerr << "error: " << zf_last_error() << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zipfrac: zipper fractal surfaces on Cartesian grids"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
  json overrides = json::object();

  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_flag("--quiet", quiet, "suppress the summary on stdout");
  app.add_option_function<int>(
      "--seed", [&](int v) { overrides["seed"] = v; }, "RNG seed override");
  app.add_option_function<int>(
      "--level", [&](int v) { overrides["level"] = v; },
      "refinement level override");

  std::string property, strategy, suite, cmd_name;
  for (const char* name :
       {"build", "interp", "bernstein", "convergence", "shape", "dim",
        "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();  // global flags may follow the subcommand
    sub->callback([&, name] { cmd_name = name; });
    if (std::string(name) == "shape") {
      sub->add_option_function<std::string>(
          "--property",
          [&](const std::string& v) { overrides["property"] = v; },
          "positivity | dominance | monotone");
      sub->add_option_function<std::string>(
          "--strategy",
          [&](const std::string& v) { overrides["strategy"] = v; },
          "max-constant | node-blend");
      sub->add_option_function<int>(
          "--axis", [&](int v) { overrides["axis"] = v; },
          "axis for the monotone property (1-based)");
    }
    if (std::string(name) == "verify") {
      sub->add_option_function<std::string>(
          "--suite", [&](const std::string& v) { overrides["suite"] = v; },
          "all | join | interpolation | residual | boundary | bernstein | "
          "lipschitz");
    }
  }

  CLI11_PARSE(app, argc, argv);
  return run(cmd_name, config_path, out_dir, overrides, quiet);
}
