#include "spotvol/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "spotvol/errors.hpp"

namespace spotvol::csv {

std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    out.push_back(cell);
    return out;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << (j ? "," : "") << 'x' << (j + 1);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << format_double(m(i, j));
        }
        out << '\n';
    }
}

namespace {

bool parse_row(const std::vector<std::string>& cells, std::vector<double>& row) {
    row.clear();
    for (const auto& cell : cells) {
        std::size_t b = cell.find_first_not_of(" \t");
        std::size_t e = cell.find_last_not_of(" \t");
        if (b == std::string::npos) return false;
        double v = 0.0;
        auto res = std::from_chars(cell.data() + b, cell.data() + e + 1, v);
        if (res.ec != std::errc() || res.ptr != cell.data() + e + 1) return false;
        row.push_back(v);
    }
    return true;
}

}  // namespace

Matrix read_matrix(std::istream& in, std::vector<std::string>* header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::vector<double> row;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (!parse_row(cells, row)) {
            if (first) {
                if (header) *header = cells;
                first = false;
                continue;
            }
            throw ConfigError("csv: non-numeric cell on line " + std::to_string(line_no));
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ConfigError("csv: ragged row on line " + std::to_string(line_no));
        }
        rows.push_back(row);
    }
    if (rows.empty()) throw ConfigError("csv: no numeric rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

}  // namespace spotvol::csv
