#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twoplayer/validation.hpp"

namespace twoplayer {

enum ExitCode : int { exit_pass = 0, exit_assumption = 1, exit_numerical = 2, exit_input = 3 };

struct RunReport {
    std::string command;
    std::string plant;  // digest: dimensions and partition
    std::vector<Check> checks;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::string> notes;
    int exit_code = exit_pass;
    double wall_time = 0;

    bool all_pass() const;
    nlohmann::json to_json() const;
    // Human-readable table; wall time is the last line.
    void print(std::ostream& out) const;
};

std::string plant_digest(const TwoPlayerPlant& p);

struct CliOptions {
    std::string command;
    std::string plant_file;
    std::string out_file;
    Realization realization = Realization::primary;
    bool oracle = false;
    bool json = false;
    double tol = -1;  // < 0: command default
    std::uint64_t seed = 1;
};

RunReport cmd_check(const TwoPlayerPlant& p, const CliOptions& opt);
RunReport cmd_synthesize(const TwoPlayerPlant& p, const CliOptions& opt);
RunReport cmd_analyze(const TwoPlayerPlant& p, const CliOptions& opt);
RunReport cmd_verify(const TwoPlayerPlant& p, const CliOptions& opt);

// Full command-line entry point: parses arguments, runs the command, prints the report
// and maps errors to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twoplayer
