// Batch entry point: reads one JSON config, runs the selected workflow and
// emits a deterministic report to stdout or --output.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "secantlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"secantlab: theta-function secancy and hierarchy workflows"};
  std::string config_path;
  std::string output_path;
  int threads = 0;
  bool verbose = false;
  app.add_option("config", config_path, "path to the JSON run config")
      ->required();
  app.add_option("--output", output_path, "report path (default stdout)");
  app.add_option("--threads", threads, "cap worker parallelism");
  app.add_flag("--verbose", verbose, "add timing and diagnostics");
  CLI11_PARSE(app, argc, argv);

  if (threads > 0) secantlab::set_thread_cap(threads);

  std::string text;
  {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read config file " << config_path << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }

  secantlab::RunConfig config;
  try {
    config = secantlab::parse_config(text);
  } catch (const secantlab::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    secantlab::RunReport report = secantlab::dispatch(config, verbose);
    std::string serialized = secantlab::serialize_report(report);
    std::string out_path = output_path;
    if (out_path.empty() && config.extra.contains("output_path"))
      out_path = config.extra["output_path"].get<std::string>();
    if (out_path.empty()) {
      std::cout << serialized;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 3;
      }
      out << serialized;
    }
    if (verbose) std::cerr << "status: " << report.status << "\n";
    return 0;
  } catch (const secantlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == secantlab::ErrorCode::ParseError ||
                   e.code() == secantlab::ErrorCode::ValidationError
               ? 2
               : 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
