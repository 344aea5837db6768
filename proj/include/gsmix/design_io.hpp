#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsmix/design.hpp"
#include "gsmix/estimation.hpp"

namespace gsmix {

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(int line_, int column_, const std::string& msg)
        : std::runtime_error(msg), line(line_), column(column_) {}
};

// On-disk design description. Exactly one of `alternatives` (solver input)
// or `boundaries` (explicit design) must be present; alpha and power are
// required alongside alternatives.
struct DesignFile {
    int k = 0;
    double alpha = 0.0;
    double power = 0.0;
    std::vector<double> alternatives;
    std::vector<double> alpha0;  // per-stage conditional levels; empty = equal split
    std::optional<Design> boundaries;
};

DesignFile read_design_file(const std::string& path);
void write_design_file(const std::string& path, const DesignFile& f);

// Solver view of the file; requires alternatives.
DesignSpec spec_of(const DesignFile& f);

// Design the analysis commands operate on: the stored boundaries when
// present, otherwise the solved design.
Design design_of(const DesignFile& f, EngineGrid g = {});

// 17 significant digits, enough to round-trip a double exactly.
std::string format_sig(double x);

void write_oc_header(std::ostream& os);
void write_oc_rows(std::ostream& os, const Design& d, const OcRow& row);

}  // namespace gsmix
