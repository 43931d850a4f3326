#pragma once

#include "frolicher/deformation.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace frol::cli {

struct SessionConfig {
    std::string command;  // validate | pages | deform | check
    std::string manifold;
    std::optional<std::string> beltrami;
    std::optional<std::pair<int, int>> r;  // inclusive page range
    std::vector<std::pair<int, int>> bidegrees;
    int order = 10;
    std::optional<Point> at;
    int samples = 3;
    std::string format = "table";
    unsigned seed = 1;
    std::string out;  // empty: stdout
    std::string theorem;
};

// "2" or "1..4".
std::pair<int, int> parse_range(const std::string& text);
// "p,q" or "p,q;p,q;…".
std::vector<std::pair<int, int>> parse_bidegrees(const std::string& text);
// "t1=1/7,t2=0"; each value is a Gaussian rational.
Point parse_point(const std::string& text);

struct Outcome {
    int exit_code = 0;
    nlohmann::json report;
    std::string table;
};

Outcome cmd_validate(const SessionConfig& cfg);
Outcome cmd_pages(const SessionConfig& cfg);
Outcome cmd_deform(const SessionConfig& cfg);
Outcome cmd_check(const SessionConfig& cfg);

// Dispatches on cfg.command. Schema and I/O errors give 2, mathematical
// failures 1; the message goes to `err`.
int execute(const SessionConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line: argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frol::cli
