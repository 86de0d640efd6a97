#include "aggsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "aggsim/errors.hpp"

namespace aggsim::csv {

std::string format(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: LF endings everywhere
    if (!out) throw ValidationError("cannot open output file: " + path);
    return out;
}

} // namespace

void write_profile(const std::string& path, const ScalarField& rho,
                   const ScalarField& S) {
    if (!(rho.grid == S.grid))
        throw ValidationError("write_profile: rho and S grids differ");
    std::ofstream out = open_out(path);
    out << "x,rho,S\n";
    for (int i = 0; i < rho.grid.I; ++i)
        out << format(rho.grid.center(i)) << ',' << format(rho[i]) << ','
            << format(S[i]) << '\n';
}

void write_deviation(const std::string& path, const RunRecord& rec) {
    std::ofstream out = open_out(path);
    out << "t,t_lambda,max_dev,drho\n";
    for (std::size_t j = 0; j < rec.deviation.size(); ++j)
        out << format(rec.window_t[j]) << ',' << format(rec.deviation.t_lambda[j])
            << ',' << format(rec.deviation.max_dev[j]) << ','
            << format(rec.window_drho[j]) << '\n';
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << header[c] << (c + 1 == header.size() ? '\n' : ',');
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            out << row[c] << (c + 1 == row.size() ? '\n' : ',');
}

} // namespace aggsim::csv
