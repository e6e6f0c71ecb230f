#pragma once

// Small CSV writing helpers. Floats print with %.17g so that re-running an
// experiment reproduces byte-identical files wherever the values are
// deterministic.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace zo {

inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : os_(path) {
        if (!os_) {
            throw std::runtime_error("cannot open for writing: " + path);
        }
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) os_ << ',';
            os_ << header[i];
        }
        os_ << '\n';
    }

    CsvWriter& field(const std::string& v) {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& field(double v) { return field(csv_double(v)); }
    CsvWriter& field(std::size_t v) { return field(std::to_string(v)); }
    CsvWriter& field(bool v) { return field(std::string(v ? "1" : "0")); }
    // empty cell for undefined values
    CsvWriter& field(std::nullopt_t) {
        sep();
        return *this;
    }
    CsvWriter& field(const std::optional<double>& v) {
        return v.has_value() ? field(*v) : field(std::nullopt);
    }

    void end_row() {
        os_ << '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) os_ << ',';
        first_ = false;
    }

    std::ofstream os_;
    bool first_ = true;
};

} // namespace zo
