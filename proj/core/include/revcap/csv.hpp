#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace revcap {

/// Full-precision (17 significant digits) formatting so CSV output is
/// byte-stable for downstream regression.
std::string format_full(double x);

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void comment(const std::string& line);
    void comment(const std::string& key, const std::string& value);
    void comment(const std::string& key, double value);
    void header(const std::vector<std::string>& cols);
    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& values);

private:
    std::ofstream out_;
};

struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

/// Re-parses the documented schema: '#' comment lines, one header row, then
/// comma-separated values.
CsvData read_csv(const std::string& path);

}  // namespace revcap
