#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oobvimp {

enum class ColumnKind { numeric, binary };
enum class ColumnRole { covariate, response, time, event, ignore };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    ColumnRole role = ColumnRole::covariate;
};

// Immutable table of numeric columns; the single source of row/column truth.
// Values are validated on construction (finite, binary in {0,1}, time > 0)
// and never reordered.
class Dataset {
public:
    Dataset(std::vector<ColumnSpec> schema, std::vector<std::vector<double>> columns);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return schema_.size(); }
    const std::vector<ColumnSpec>& schema() const { return schema_; }

    std::optional<std::size_t> find(std::string_view name) const;
    const std::vector<double>& column(std::string_view name) const;  // throws DataError
    const std::vector<double>& column(std::size_t index) const { return columns_[index]; }
    const ColumnSpec& spec(std::size_t index) const { return schema_[index]; }

private:
    std::vector<ColumnSpec> schema_;
    std::vector<std::vector<double>> columns_;
    std::size_t n_rows_ = 0;
};

// Reads a comma-separated file with one header row. Columns are matched to
// the schema by name; file columns not named in the schema are ignored.
Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema);

// Writes in the same format. Serialization keeps 17 significant digits so a
// write/load round trip reproduces every value bit-exactly.
void write_csv(const Dataset& dataset, const std::string& path);
std::string csv_string(const Dataset& dataset);

// Header names of a CSV file, used to default covariate lists.
std::vector<std::string> csv_header(const std::string& path);

}  // namespace oobvimp
