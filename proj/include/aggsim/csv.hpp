#pragma once
#include <string>
#include <vector>

#include "aggsim/model.hpp"
#include "aggsim/record.hpp"

namespace aggsim::csv {

//==============================================================================
// Bit-stable tabular output: every float is written as the shortest decimal
// that round-trips to the same double (std::to_chars), '.' separator, LF line
// endings. Identical data therefore produces byte-identical files.
//==============================================================================

// Shortest round-trip decimal representation ("1", "0.05", "2.789568").
std::string format(double v);

// Profile file: header "x,rho,S", one row per cell.
void write_profile(const std::string& path, const ScalarField& rho,
                   const ScalarField& S);

// Window series: header "t,t_lambda,max_dev,drho" (t is the engine's raw
// clock: ballistic time for MC, diffusion time for the PDE solvers).
void write_deviation(const std::string& path, const RunRecord& rec);

// Generic table: header row then data rows; each cell pre-formatted.
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

} // namespace aggsim::csv
