#ifndef SECANTLAB_RUNNER_HPP
#define SECANTLAB_RUNNER_HPP

#include <Eigen/Dense>
#include <json.hpp>
#include <string>

#include "secantlab/theta.hpp"

namespace secantlab {

inline constexpr const char* kArtifactVersion = "0.1.0";

// One batch run: a command plus its validated inputs.  Command-specific
// parameters stay in `extra` and are validated by the workflow.
struct RunConfig {
  std::string command;
  int genus = 0;
  Eigen::MatrixXcd omega;
  SiegelMatrix siegel;
  nlohmann::json extra;
};

// Parses and validates a JSON config.  Structural problems raise ParseError
// naming the field; semantic problems (negative tolerance, bad period
// matrix) raise ValidationError.
RunConfig parse_config(const std::string& text);

struct RunReport {
  std::string status;  // success | partial | failed
  nlohmann::ordered_json doc;
};

// Runs the selected workflow.  Reports are byte-reproducible for identical
// configs; timing is attached only when verbose is set.
RunReport dispatch(const RunConfig& config, bool verbose = false);

// Deterministic writer: fixed key order (insertion order of the ordered
// document) and floats rendered with 17 significant digits.
std::string serialize_report(const RunReport& report);

}  // namespace secantlab

#endif
