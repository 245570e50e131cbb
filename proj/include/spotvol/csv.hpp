#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spotvol/types.hpp"

namespace spotvol::csv {

// Numbers are written with 17 significant digits so a read round-trips.
std::string format_double(double value);

// Row-major dump with a header row `x1,...,xc`.
void write_matrix(std::ostream& out, const Matrix& m);

// Parses a numeric CSV. A first line that does not parse as numbers is
// treated as a header and returned through `header` when non-null.
Matrix read_matrix(std::istream& in, std::vector<std::string>* header = nullptr);

std::vector<std::string> split(const std::string& line, char sep = ',');

}  // namespace spotvol::csv
