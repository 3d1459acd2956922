#include "oobvimp/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "oobvimp/errors.hpp"

namespace oobvimp {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? comma : comma - start);
        // tolerate surrounding spaces and a trailing \r from CRLF files
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ' || field.back() == '\t'))
            field.pop_back();
        std::size_t lead = 0;
        while (lead < field.size() && (field[lead] == ' ' || field[lead] == '\t')) ++lead;
        fields.push_back(field.substr(lead));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, value, std::chars_format::general);
    if (res.ec != std::errc{} || res.ptr != last)
        throw DataError("unparseable cell '" + cell + "' at row " + std::to_string(row) +
                        ", column '" + col + "'");
    if (!std::isfinite(value))
        throw DataError("non-finite value at row " + std::to_string(row) + ", column '" + col + "'");
    return value;
}

void format_value(std::string& out, double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

}  // namespace

Dataset::Dataset(std::vector<ColumnSpec> schema, std::vector<std::vector<double>> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
    if (schema_.size() != columns_.size())
        throw DataError("schema has " + std::to_string(schema_.size()) + " columns but " +
                        std::to_string(columns_.size()) + " value vectors were given");
    if (schema_.empty()) throw DataError("dataset needs at least one column");

    std::unordered_set<std::string> seen;
    for (const auto& spec : schema_)
        if (!seen.insert(spec.name).second)
            throw DataError("duplicate column name '" + spec.name + "'");

    n_rows_ = columns_.front().size();
    if (n_rows_ < 2) throw DataError("dataset needs at least 2 rows");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        const auto& col = columns_[c];
        const auto& spec = schema_[c];
        if (col.size() != n_rows_)
            throw DataError("column '" + spec.name + "' has " + std::to_string(col.size()) +
                            " rows, expected " + std::to_string(n_rows_));
        for (std::size_t r = 0; r < col.size(); ++r) {
            const double v = col[r];
            if (!std::isfinite(v))
                throw DataError("non-finite value at row " + std::to_string(r + 1) +
                                ", column '" + spec.name + "'");
            if (spec.kind == ColumnKind::binary && v != 0.0 && v != 1.0)
                throw DataError("binary column out of range: '" + spec.name + "' has value " +
                                std::to_string(v) + " at row " + std::to_string(r + 1));
            if (spec.role == ColumnRole::time && v <= 0.0)
                throw DataError("time column '" + spec.name + "' has non-positive value at row " +
                                std::to_string(r + 1));
        }
    }
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
    for (std::size_t i = 0; i < schema_.size(); ++i)
        if (schema_[i].name == name) return i;
    return std::nullopt;
}

const std::vector<double>& Dataset::column(std::string_view name) const {
    const auto idx = find(name);
    if (!idx) throw DataError("unknown column '" + std::string(name) + "'");
    return columns_[*idx];
}

Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
    const auto header = split_line(line);

    // schema column -> file column
    std::vector<std::size_t> where(schema.size());
    for (std::size_t s = 0; s < schema.size(); ++s) {
        bool found = false;
        for (std::size_t h = 0; h < header.size(); ++h) {
            if (header[h] == schema[s].name) {
                where[s] = h;
                found = true;
                break;
            }
        }
        if (!found) throw DataError("missing column '" + schema[s].name + "' in '" + path + "'");
    }

    std::vector<std::vector<double>> columns(schema.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        ++row;
        const auto fields = split_line(line);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        for (std::size_t s = 0; s < schema.size(); ++s)
            columns[s].push_back(parse_cell(fields[where[s]], row, schema[s].name));
    }
    return Dataset(schema, std::move(columns));
}

std::string csv_string(const Dataset& dataset) {
    std::string out;
    const auto& schema = dataset.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (c) out.push_back(',');
        out += schema[c].name;
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (c) out.push_back(',');
            format_value(out, dataset.column(c)[r]);
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << csv_string(dataset);
}

std::vector<std::string> csv_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
    return split_line(line);
}

}  // namespace oobvimp
