#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kyle/params.hpp"

namespace kyle::cli {

enum ExitCode { kOk = 0, kCheckFailure = 1, kUsage = 2 };

// Full entry point; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepRow {
    double value, v, lambda, p0, mm_profit_target;
};
std::vector<SweepRow> sweep(const std::string& param_name, const std::vector<double>& values,
                            const ModelParams& base);

std::string format_double(double x);

}  // namespace kyle::cli
