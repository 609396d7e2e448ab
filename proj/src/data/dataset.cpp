#include "causeway/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "causeway/common.hpp"

namespace causeway::data {

const Column& Dataset::column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown column '" + name + "'");
    return columns_[it->second];
}

std::vector<std::string> Dataset::names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

void Dataset::add_column(Column column) {
    if (column.name.empty()) throw ValidationError("column name must be nonempty");
    if (has(column.name)) throw ValidationError("duplicate column '" + column.name + "'");
    if (!columns_.empty() && column.values.size() != rows_)
        throw ValidationError("column '" + column.name + "' has " + std::to_string(column.values.size()) +
                              " rows, expected " + std::to_string(rows_));
    for (std::size_t i = 0; i < column.values.size(); ++i)
        if (!std::isfinite(column.values[i]))
            throw ValidationError("column '" + column.name + "' row " + std::to_string(i) + " is not finite");
    if (columns_.empty()) {
        rows_ = column.values.size();
        if (!sequence_.empty() && sequence_.size() != rows_)
            throw ValidationError("sequence ids do not match row count");
    }
    index_.emplace(column.name, columns_.size());
    columns_.push_back(std::move(column));
}

Dataset Dataset::with_column(Column column) const {
    Dataset out = *this;
    out.add_column(std::move(column));
    return out;
}

Dataset Dataset::with_replaced(Column column) const {
    auto it = index_.find(column.name);
    if (it == index_.end()) throw ValidationError("unknown column '" + column.name + "'");
    if (column.values.size() != rows_) throw ValidationError("replacement column length mismatch");
    Dataset out = *this;
    out.columns_[it->second] = std::move(column);
    return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    Dataset out;
    for (const auto& c : columns_) {
        Column copy{c.name, c.kind, c.provenance, {}};
        copy.values.reserve(rows.size());
        for (auto r : rows) copy.values.push_back(c.values.at(r));
        out.add_column(std::move(copy));
    }
    if (columns_.empty()) out.rows_ = rows.size();
    if (!sequence_.empty()) {
        std::vector<std::int64_t> ids;
        ids.reserve(rows.size());
        for (auto r : rows) ids.push_back(sequence_.at(r));
        out.sequence_ = std::move(ids);
    }
    out.guarded_ = guarded_;
    return out;
}

Dataset Dataset::select_columns(const std::vector<std::string>& names) const {
    Dataset out;
    for (const auto& n : names) out.add_column(column(n));
    out.sequence_ = sequence_;
    return out;
}

void Dataset::set_sequence_ids(std::vector<std::int64_t> ids) {
    if (!columns_.empty() && ids.size() != rows_) throw ValidationError("sequence ids do not match row count");
    sequence_ = std::move(ids);
}

std::vector<std::vector<double>> Dataset::row_major(const std::vector<std::string>& names) const {
    std::vector<std::span<const double>> cols;
    for (const auto& n : names) cols.push_back(values(n));
    std::vector<std::vector<double>> out(rows_, std::vector<double>(names.size()));
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out[r][c] = cols[c][r];
    return out;
}

Dataset make_dataset(const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
    Dataset ds;
    for (const auto& [name, values] : columns) ds.add_column(Column{name, ValueKind::continuous, Provenance::logged, values});
    return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv: missing header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM
    std::vector<std::string> header;
    for (auto& h : split_csv_line(line)) header.push_back(trim(h));
    std::vector<std::vector<double>> data(header.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string f = trim(fields[c]);
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != f.size())
                throw ValidationError("csv line " + std::to_string(line_no) + " column '" + header[c] +
                                      "': not a number: '" + f + "'");
            data[c].push_back(v);
        }
    }
    const std::set<std::string> ordinal(options.ordinal_columns.begin(), options.ordinal_columns.end());
    Dataset ds;
    std::vector<std::int64_t> sequence;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!options.sequence_column.empty() && header[c] == options.sequence_column) {
            for (double v : data[c]) sequence.push_back(static_cast<std::int64_t>(v));
            continue;
        }
        ds.add_column(Column{header[c], ordinal.contains(header[c]) ? ValueKind::ordinal : ValueKind::continuous,
                             Provenance::logged, std::move(data[c])});
    }
    if (!options.sequence_column.empty()) {
        if (std::find(header.begin(), header.end(), options.sequence_column) == header.end())
            throw ValidationError("csv: sequence column '" + options.sequence_column + "' not found");
        ds.set_sequence_ids(std::move(sequence));
    }
    return ds;
}

Dataset read_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), options);
}

std::string to_csv(const Dataset& ds) {
    std::ostringstream os;
    os.precision(17);
    const auto names = ds.names();
    for (std::size_t c = 0; c < names.size(); ++c) os << (c ? "," : "") << names[c];
    os << '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < names.size(); ++c) os << (c ? "," : "") << ds.columns()[c].values[r];
        os << '\n';
    }
    return os.str();
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << to_csv(ds);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> quantile_edges(std::span<const double> values, int bins) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    const double n1 = static_cast<double>(sorted.size() - 1);
    for (int i = 0; i <= bins; ++i) {
        const double pos = n1 * static_cast<double>(i) / bins;
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        const double edge = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
        // Collapse edges closer than 1e-8 to the previous one.
        if (edges.empty() || edge - edges.back() > 1e-8) edges.push_back(edge);
    }
    return edges;
}

int code_for(double value, std::span<const double> edges) {
    if (edges.size() <= 2) return 0;
    // Right-side search over interior edges.
    const auto interior = edges.subspan(1, edges.size() - 2);
    const auto it = std::upper_bound(interior.begin(), interior.end(), value);
    return static_cast<int>(it - interior.begin());
}

Dataset discretize(const Dataset& ds, const std::string& column, int bins) {
    const auto& col = ds.column(column);
    if (col.kind == ValueKind::ordinal) throw ValidationError("column '" + column + "' is already ordinal");
    if (bins < 2) throw ValidationError("discretize: bins must be >= 2");
    Column out{col.name, ValueKind::ordinal, col.provenance, std::vector<double>(col.values.size(), 0.0)};
    if (col.values.empty()) return ds.with_replaced(std::move(out));
    const auto edges = quantile_edges(col.values, bins);
    if (edges.size() < 2) {
        log::warn("discretize: column '" + column + "' is constant; all codes set to 0");
        return ds.with_replaced(std::move(out));
    }
    for (std::size_t i = 0; i < col.values.size(); ++i) out.values[i] = code_for(col.values[i], edges);
    return ds.with_replaced(std::move(out));
}

Dataset discretize_all(const Dataset& ds, int bins) {
    Dataset out = ds;
    for (const auto& c : ds.columns())
        if (c.kind == ValueKind::continuous) out = discretize(out, c.name, bins);
    return out;
}

}  // namespace causeway::data
