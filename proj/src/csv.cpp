#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "frostnet/data.hpp"

namespace frostnet {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view field, double& value) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    return ec == std::errc() && ptr == field.data() + field.size() && !field.empty();
}

std::runtime_error row_error(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& what) {
    return std::runtime_error(path.string() + ": row " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t width = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        double first = 0.0;
        if (labels.empty() && width == 0 && !parse_double(fields.front(), first)) {
            width = fields.size();  // header row
            continue;
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw row_error(path, line_no, "expected " + std::to_string(width) + " columns, got " +
                                               std::to_string(fields.size()));
        if (width < 2) throw row_error(path, line_no, "need at least one feature and a label");
        for (std::size_t j = 0; j + 1 < fields.size(); ++j) {
            double v = 0.0;
            if (!parse_double(fields[j], v) || !std::isfinite(v))
                throw row_error(path, line_no, "column " + std::to_string(j) + " is not a finite number");
            values.push_back(v);
        }
        double label = 0.0;
        if (!parse_double(fields.back(), label) || (label != 0.0 && label != 1.0))
            throw row_error(path, line_no, "label '" + std::string(trim(fields.back())) + "' is not 0 or 1");
        labels.push_back(static_cast<int>(label));
    }
    if (labels.empty()) throw std::runtime_error(path.string() + ": no data rows");
    Dataset ds{NumericArray({labels.size(), width - 1}, std::move(values)), std::move(labels)};
    return ds;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const std::size_t d = dataset.dim();
    std::string row;
    for (std::size_t j = 0; j < d; ++j) row += "band_" + std::to_string(j) + ",";
    row += "label\n";
    out << row;

    char buf[64];
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        row.clear();
        for (std::size_t j = 0; j < d; ++j) {
            const auto res = std::to_chars(buf, buf + sizeof buf, dataset.features.at(i, j));
            row.append(buf, res.ptr);
            row += ',';
        }
        row += dataset.labels[i] == 1 ? "1\n" : "0\n";
        out << row;
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace frostnet
