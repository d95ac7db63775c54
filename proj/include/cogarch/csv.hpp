#pragma once

// Minimal CSV emission: header row, dot decimal, UTF-8, LF newlines.
// Numbers are written with up to 17 significant digits, enough to
// round-trip IEEE doubles, so equal inputs produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogarch {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary), n_cols_(columns.size()) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != n_cols_)
            throw std::invalid_argument("csv row width does not match the header");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << format_double(values[i]);
        }
        out_ << '\n';
    }

    void close() {
        out_.flush();
        if (!out_) throw std::runtime_error("csv write failed");
        out_.close();
    }

  private:
    std::ofstream out_;
    std::size_t n_cols_;
};

} // namespace cogarch
