#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace causeway::data {

enum class ValueKind { continuous, ordinal };
enum class Provenance { logged, constructed };

struct Column {
    std::string name;
    ValueKind kind = ValueKind::continuous;
    Provenance provenance = Provenance::logged;
    std::vector<double> values;
};

/// Column-major numeric table. Rows may optionally carry a sequence id (one
/// id per rollout) when the table holds per-step records; rolling factor
/// templates then operate within each sequence in row order.
///
/// Datasets are values: every transformation returns a new table.
class Dataset {
public:
    Dataset() = default;

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return columns_.size(); }
    bool has(const std::string& name) const { return index_.contains(name); }
    const Column& column(const std::string& name) const;
    std::span<const double> values(const std::string& name) const { return column(name).values; }
    const std::vector<Column>& columns() const { return columns_; }
    std::vector<std::string> names() const;

    /// Appends a column. Throws ValidationError on duplicate name, length
    /// mismatch, or non-finite values.
    void add_column(Column column);
    Dataset with_column(Column column) const;
    /// Replaces an existing column's values/kind (same length).
    Dataset with_replaced(Column column) const;
    Dataset select_rows(std::span<const std::size_t> rows) const;
    Dataset select_columns(const std::vector<std::string>& names) const;

    const std::vector<std::int64_t>& sequence_ids() const { return sequence_; }
    bool has_sequences() const { return !sequence_.empty(); }
    void set_sequence_ids(std::vector<std::int64_t> ids);

    /// Per-factor count of rows whose denominator was guarded to zero.
    const std::map<std::string, std::size_t>& guarded_rows() const { return guarded_; }
    void note_guarded(const std::string& factor, std::size_t count) { guarded_[factor] = count; }

    /// Row-major copy of the named columns.
    std::vector<std::vector<double>> row_major(const std::vector<std::string>& names) const;

private:
    std::vector<Column> columns_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::int64_t> sequence_;
    std::map<std::string, std::size_t> guarded_;
    std::size_t rows_ = 0;
};

/// Builds a dataset from equally long named columns (all continuous, logged).
Dataset make_dataset(const std::vector<std::pair<std::string, std::vector<double>>>& columns);

struct CsvOptions {
    /// Columns whose values are ordinal codes rather than continuous.
    std::vector<std::string> ordinal_columns;
    /// Column holding sequence ids; removed from the data columns when set.
    std::string sequence_column;
};

/// Header row gives column names; fields are `.`-decimal numbers.
Dataset read_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});
std::string to_csv(const Dataset& ds);
void write_csv(const Dataset& ds, const std::string& path);

/// Ordinal codes at empirical quantile edges (linear-interpolated percentiles,
/// duplicate edges collapsed). Codes lie in [0, effective_bins - 1] and are a
/// monotone function of the raw value. Throws ValidationError if the column is
/// already ordinal or bins < 2; a constant column maps to code 0 with a
/// warning.
Dataset discretize(const Dataset& ds, const std::string& column, int bins = 5);
/// Discretizes every continuous column.
Dataset discretize_all(const Dataset& ds, int bins = 5);

/// Bin edges used by discretize (exposed for reuse by effect estimation).
std::vector<double> quantile_edges(std::span<const double> values, int bins);
int code_for(double value, std::span<const double> edges);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

}  // namespace causeway::data
