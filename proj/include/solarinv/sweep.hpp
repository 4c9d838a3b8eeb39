#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "solarinv/boundary.hpp"
#include "solarinv/model.hpp"

namespace solarinv {

struct SweepSpec {
    std::string param;
    std::vector<double> values;
    ModelParams base = table_preset();
    /// Boundary ODE steps per solve.
    int n_steps = 2000;
};

enum class ShiftVerdict { Increasing, Decreasing, Crossing };

std::string to_string(ShiftVerdict v);

struct SweepResult {
    std::string param;
    /// Ascending; boundaries[i] belongs to values[i].
    std::vector<double> values;
    std::vector<FreeBoundary> boundaries;
    /// Points of [0, min y_bar] on which neighbouring boundaries are compared.
    std::vector<double> common_y;
    /// Per neighbouring pair: min and max of F_{i+1}(y) - F_i(y) over common_y.
    std::vector<double> min_shift, max_shift;
    ShiftVerdict verdict;
};

/// One boundary solve per value. Values are sorted and deduplicated first; each
/// must pass validation. A failing solve is rethrown with the offending value
/// in the message and the original error kind.
SweepResult run_sweep_serial(const SweepSpec& spec, int n_common = 201);
SweepResult run_sweep(const SweepSpec& spec, int n_common = 201);

/// Long format `param_value,y,F`, one row per boundary node, 12 significant digits.
void write_sweep_csv(std::ostream& out, const SweepResult& r);

}  // namespace solarinv
