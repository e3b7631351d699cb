#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "speechtone/data_value.hpp"
#include "speechtone/diagnostic.hpp"
#include "speechtone/spec_model.hpp"

namespace speechtone {

enum class ColumnType { number, text, boolean };

struct Column {
  std::string name;
  ColumnType type = ColumnType::text;
  friend bool operator==(const Column&, const Column&) = default;
};

using Row = std::vector<DataValue>;

/// Tabular data. Every row holds one value per column; row order is the
/// source order and defines "dataset order" for nominal sequencing.
struct Dataset {
  std::vector<Column> columns;
  std::vector<Row> rows;

  std::optional<std::size_t> column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == name) return i;
    return std::nullopt;
  }
  bool has_column(std::string_view name) const { return column_index(name).has_value(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Column name that carries the aggregate declared on `channel`.
inline std::string aggregate_column_name(ChannelName channel) {
  return "__agg_" + std::string(channel_key(channel));
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace detail {

/// Raw cell before whole-column type inference.
struct RawCell {
  enum class Kind { missing, json_number, json_bool, string } kind = Kind::missing;
  double number = 0.0;
  bool flag = false;
  std::string text;
};

struct RawTable {
  std::vector<std::string> names;
  std::vector<std::vector<RawCell>> rows;
};

inline std::string raw_as_text(const RawCell& c) {
  switch (c.kind) {
    case RawCell::Kind::json_number: return format_speech_number(c.number);
    case RawCell::Kind::json_bool: return c.flag ? "true" : "false";
    case RawCell::Kind::string: return c.text;
    case RawCell::Kind::missing: return {};
  }
  return {};
}

/// Whole-column inference: a column whose non-null cells all read as numbers
/// is Number; all JSON booleans is Boolean; anything else is Text. Empty
/// strings are Null.
inline Result<Dataset> infer_columns(RawTable raw, const std::string& path) {
  Dataset ds;
  const std::size_t ncols = raw.names.size();
  if (ncols == 0) return make_error("E_NO_COLUMNS", path, "data has no columns");
  if (raw.rows.empty()) return make_error("E_EMPTY_DATASET", path, "data has no rows");

  ds.rows.assign(raw.rows.size(), Row(ncols));
  for (std::size_t c = 0; c < ncols; ++c) {
    bool all_number = true, all_bool = true, any_value = false, any_non_finite = false;
    std::vector<std::optional<double>> parsed(raw.rows.size());
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
      const RawCell& cell = raw.rows[r][c];
      if (cell.kind == RawCell::Kind::missing ||
          (cell.kind == RawCell::Kind::string && cell.text.empty()))
        continue;
      any_value = true;
      if (cell.kind != RawCell::Kind::json_bool) all_bool = false;
      double v = 0.0;
      if (cell.kind == RawCell::Kind::json_number) {
        v = cell.number;
      } else if (cell.kind != RawCell::Kind::string || !parse_number(cell.text, v)) {
        all_number = false;
        continue;
      }
      if (!std::isfinite(v)) any_non_finite = true;
      parsed[r] = v;
    }
    ColumnType type = ColumnType::text;
    if (any_value && all_bool)
      type = ColumnType::boolean;
    else if (any_value && all_number)
      type = ColumnType::number;
    if (type == ColumnType::number && any_non_finite)
      return make_error("E_NON_FINITE", path,
                        "column '" + raw.names[c] + "' contains NaN or infinite values");
    ds.columns.push_back({raw.names[c], type});

    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
      const RawCell& cell = raw.rows[r][c];
      DataValue& out = ds.rows[r][c];
      if (cell.kind == RawCell::Kind::missing ||
          (cell.kind == RawCell::Kind::string && cell.text.empty()))
        continue;
      switch (type) {
        case ColumnType::number: out = DataValue::number(*parsed[r]); break;
        case ColumnType::boolean: out = DataValue::boolean(cell.flag); break;
        case ColumnType::text: out = DataValue::text(raw_as_text(cell)); break;
      }
    }
  }
  return ds;
}

inline std::optional<RawCell> raw_from_json(const nlohmann::ordered_json& v) {
  RawCell cell;
  if (v.is_null()) return cell;
  if (v.is_boolean()) {
    cell.kind = RawCell::Kind::json_bool;
    cell.flag = v.get<bool>();
  } else if (v.is_number()) {
    cell.kind = RawCell::Kind::json_number;
    cell.number = v.get<double>();
  } else if (v.is_string()) {
    cell.kind = RawCell::Kind::string;
    cell.text = v.get<std::string>();
  } else {
    return std::nullopt;
  }
  return cell;
}

/// Column order is first appearance of each key; keys missing from a record
/// read as null.
inline Result<Dataset> table_from_records(
    const std::vector<std::vector<std::pair<std::string, RawCell>>>& records, const std::string& path) {
  RawTable raw;
  std::map<std::string, std::size_t> index;
  for (const auto& rec : records)
    for (const auto& [k, cell] : rec)
      if (index.emplace(k, raw.names.size()).second) raw.names.push_back(k);
  for (const auto& rec : records) {
    std::vector<RawCell> row(raw.names.size());
    for (const auto& [k, cell] : rec) row[index[k]] = cell;
    raw.rows.push_back(std::move(row));
  }
  return infer_columns(std::move(raw), path);
}

}  // namespace detail

/// Parses a JSON array of flat objects.
inline Result<Dataset> load_dataset_json(std::string_view text, const std::string& path = "data") {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    return make_error("E_DATA_PARSE", path, std::string("malformed JSON data: ") + e.what());
  }
  if (!doc.is_array()) return make_error("E_DATA_PARSE", path, "JSON data must be an array of objects");
  if (doc.empty()) return make_error("E_EMPTY_DATASET", path, "data has no rows");
  std::vector<std::vector<std::pair<std::string, detail::RawCell>>> records;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_object())
      return make_error("E_DATA_PARSE", path, "record " + std::to_string(i) + " is not an object");
    std::vector<std::pair<std::string, detail::RawCell>> rec;
    for (const auto& [k, v] : doc[i].items()) {
      auto cell = detail::raw_from_json(v);
      if (!cell)
        return make_error("E_DATA_PARSE", path,
                          "record " + std::to_string(i) + " field '" + k + "' is not a scalar");
      rec.emplace_back(k, std::move(*cell));
    }
    records.push_back(std::move(rec));
  }
  return detail::table_from_records(records, path);
}

/// Parses RFC-4180 CSV; the first record is the header.
inline Result<Dataset> load_dataset_csv(std::string_view text, const std::string& path = "data") {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false, line_has_content = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (line_has_content || !record.empty()) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    line_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started) return make_error("E_DATA_PARSE", path, "stray quote inside unquoted CSV field");
        in_quotes = true;
        field_started = line_has_content = true;
        break;
      case ',':
        end_field();
        line_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += ch;
        field_started = line_has_content = true;
        break;
    }
  }
  if (in_quotes) return make_error("E_DATA_PARSE", path, "unterminated quoted CSV field");
  end_record();

  if (records.empty()) return make_error("E_NO_COLUMNS", path, "CSV data has no header");
  detail::RawTable raw;
  raw.names = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != raw.names.size())
      return make_error("E_RAGGED_ROWS", path,
                        "CSV record " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                            " fields, header has " + std::to_string(raw.names.size()));
    std::vector<detail::RawCell> row;
    for (auto& f : records[r]) {
      detail::RawCell cell;
      cell.kind = detail::RawCell::Kind::string;
      cell.text = std::move(f);
      row.push_back(std::move(cell));
    }
    raw.rows.push_back(std::move(row));
  }
  return detail::infer_columns(std::move(raw), path);
}

/// Records embedded in the spec's `data.values`.
inline Result<Dataset> load_dataset_inline(const InlineData& data, const std::string& path = "data.values") {
  if (data.records.empty()) return make_error("E_EMPTY_DATASET", path, "data has no rows");
  std::vector<std::vector<std::pair<std::string, detail::RawCell>>> records;
  for (const auto& rec : data.records) {
    std::vector<std::pair<std::string, detail::RawCell>> out;
    for (const auto& [k, v] : rec) {
      detail::RawCell cell;
      if (v.is_number()) {
        cell.kind = detail::RawCell::Kind::json_number;
        cell.number = v.as_number();
      } else if (v.is_boolean()) {
        cell.kind = detail::RawCell::Kind::json_bool;
        cell.flag = v.as_boolean();
      } else if (v.is_text()) {
        cell.kind = detail::RawCell::Kind::string;
        cell.text = v.as_text();
      }
      out.emplace_back(k, std::move(cell));
    }
    records.push_back(std::move(out));
  }
  return detail::table_from_records(records, path);
}

/// Reads a CSV or JSON file. Format comes from `format`, else the extension
/// (`.csv` is CSV, anything else JSON).
inline Result<Dataset> load_dataset_file(const std::filesystem::path& file,
                                         std::optional<DataFormat> format = std::nullopt,
                                         const std::string& path = "data") {
  std::ifstream in(file, std::ios::binary);
  if (!in) return make_error("E_DATA_UNREADABLE", path, "cannot read data file '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return make_error("E_DATA_UNREADABLE", path, "error reading '" + file.string() + "'");
  DataFormat fmt = format.value_or(file.extension() == ".csv" ? DataFormat::csv : DataFormat::json);
  return fmt == DataFormat::csv ? load_dataset_csv(buf.str(), path) : load_dataset_json(buf.str(), path);
}

/// Loads a spec data source; relative file URLs resolve against `base_dir`.
inline Result<Dataset> load_dataset(const DataSourceRef& source,
                                    const std::filesystem::path& base_dir = {}) {
  if (const auto* inl = std::get_if<InlineData>(&source)) return load_dataset_inline(*inl);
  const auto& file = std::get<FileData>(source);
  std::filesystem::path p(file.url);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return load_dataset_file(p, file.format, "data.url");
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

namespace detail {

/// -1, 0, 1; both values are non-null and of the same kind.
inline int compare_values(const DataValue& a, const DataValue& b) {
  if (a.is_number()) return a.as_number() < b.as_number() ? -1 : (a.as_number() > b.as_number() ? 1 : 0);
  if (a.is_text()) {
    int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  return static_cast<int>(a.as_boolean()) - static_cast<int>(b.as_boolean());
}

inline bool literal_matches_column(const DataValue& literal, ColumnType type) {
  switch (type) {
    case ColumnType::number: return literal.is_number();
    case ColumnType::text: return literal.is_text();
    case ColumnType::boolean: return literal.is_boolean();
  }
  return false;
}

}  // namespace detail

/// Rows satisfying `field <op> literal`, in original order. Null cells never
/// match.
inline Result<Dataset> apply_filter(const Dataset& ds, const Filter& f,
                                    const std::string& path = "transform") {
  auto col = ds.column_index(f.field);
  if (!col) return make_error("E_FIELD_UNKNOWN", path, "filter field '" + f.field + "' is not a column");
  if (!detail::literal_matches_column(f.literal, ds.columns[*col].type))
    return make_error("E_TYPE_MISMATCH", path,
                      "filter literal type does not match column '" + f.field + "'");
  Dataset out;
  out.columns = ds.columns;
  for (const Row& row : ds.rows) {
    const DataValue& v = row[*col];
    if (v.is_null()) continue;
    int c = detail::compare_values(v, f.literal);
    bool keep = false;
    switch (f.op) {
      case CompareOp::eq: keep = c == 0; break;
      case CompareOp::neq: keep = c != 0; break;
      case CompareOp::lt: keep = c < 0; break;
      case CompareOp::lte: keep = c <= 0; break;
      case CompareOp::gt: keep = c > 0; break;
      case CompareOp::gte: keep = c >= 0; break;
    }
    if (keep) out.rows.push_back(row);
  }
  return out;
}

/// Applies the spec's transforms in order.
inline Result<Dataset> apply_transforms(Dataset ds, const std::vector<TransformDef>& transforms) {
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    auto r = apply_filter(ds, std::get<Filter>(transforms[i]), path_join(path_index("transform", i), "filter"));
    if (!r) return r;
    ds = std::move(r).value();
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// True when the text channel's value names a column, i.e. the cell is read
/// instead of the literal.
inline bool text_matches_field(const ChannelDef& text, const Dataset& ds) {
  return text.value && text.value->is_text() && ds.has_column(text.value->as_text());
}

inline bool has_aggregates(const SpecDocument& spec) {
  for (const auto& [name, def] : spec.encoding)
    if (def.aggregate) return true;
  return false;
}

/// Group-by keys: fields referenced by non-aggregated channels (time, field
/// matches of the text channel, field-bound prosody channels), deduplicated,
/// in channel order.
inline std::vector<std::string> grouping_fields(const SpecDocument& spec, const Dataset& ds) {
  std::vector<std::string> out;
  auto add = [&](const std::string& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  for (const auto& [name, def] : spec.encoding) {
    if (is_reserved(name) || def.aggregate) continue;
    if (name == ChannelName::text) {
      if (text_matches_field(def, ds)) add(def.value->as_text());
    } else if (def.field) {
      add(*def.field);
    }
  }
  return out;
}

/// Groups by the non-aggregated fields and appends one `__agg_<channel>`
/// column per aggregated channel. Groups appear in first-appearance order.
inline Result<Dataset> apply_aggregation(const Dataset& ds, const SpecDocument& spec) {
  struct AggSpec {
    ChannelName channel;
    AggregateOp op;
    std::optional<std::size_t> column;
  };
  std::vector<AggSpec> aggs;
  for (const auto& [name, def] : spec.encoding) {
    if (is_reserved(name) || !def.aggregate) continue;
    AggSpec a{name, *def.aggregate, std::nullopt};
    if (def.field) {
      a.column = ds.column_index(*def.field);
      if (!a.column)
        return make_error("E_FIELD_UNKNOWN", channel_path(name, "field"),
                          "field '" + *def.field + "' is not a column");
    }
    if (a.op != AggregateOp::count) {
      if (!a.column)
        return make_error("E_CHANNEL_BINDING", channel_path(name),
                          "aggregate '" + std::string(to_string(a.op)) + "' needs a field");
      if (ds.columns[*a.column].type != ColumnType::number)
        return make_error("E_AGGREGATE_NON_NUMERIC", channel_path(name, "aggregate"),
                          "aggregate '" + std::string(to_string(a.op)) + "' over non-numeric column '" +
                              *def.field + "'");
    }
    aggs.push_back(a);
  }

  std::vector<std::size_t> keys;
  for (const auto& f : grouping_fields(spec, ds)) {
    auto idx = ds.column_index(f);
    if (!idx) {
      for (const auto& [name, def] : spec.encoding)
        if (def.field == f)
          return make_error("E_FIELD_UNKNOWN", channel_path(name, "field"), "field '" + f + "' is not a column");
      return make_error("E_FIELD_UNKNOWN", "encoding", "field '" + f + "' is not a column");
    }
    keys.push_back(*idx);
  }

  struct Acc {
    std::size_t count = 0;
    std::size_t numeric = 0;
    double sum = 0.0, min = 0.0, max = 0.0;
  };
  std::vector<Row> key_rows;
  std::vector<std::vector<Acc>> accs;
  std::map<std::vector<DataValue::Storage>, std::size_t> group_of;

  for (const Row& row : ds.rows) {
    std::vector<DataValue::Storage> key;
    key.reserve(keys.size());
    for (std::size_t k : keys) key.push_back(row[k].storage());
    auto [it, inserted] = group_of.emplace(std::move(key), key_rows.size());
    if (inserted) {
      Row kr;
      for (std::size_t k : keys) kr.push_back(row[k]);
      key_rows.push_back(std::move(kr));
      accs.emplace_back(aggs.size());
    }
    auto& group = accs[it->second];
    for (std::size_t a = 0; a < aggs.size(); ++a) {
      Acc& acc = group[a];
      ++acc.count;
      if (!aggs[a].column) continue;
      const DataValue& v = row[*aggs[a].column];
      if (!v.is_number()) continue;
      const double x = v.as_number();
      if (acc.numeric == 0) {
        acc.min = acc.max = x;
      } else {
        acc.min = std::min(acc.min, x);
        acc.max = std::max(acc.max, x);
      }
      acc.sum += x;
      ++acc.numeric;
    }
  }
  // A whole-table aggregate over no rows still yields one row.
  if (keys.empty() && key_rows.empty()) {
    key_rows.emplace_back();
    accs.emplace_back(aggs.size());
  }

  Dataset out;
  for (std::size_t k : keys) out.columns.push_back(ds.columns[k]);
  for (const auto& a : aggs) out.columns.push_back({aggregate_column_name(a.channel), ColumnType::number});
  for (std::size_t g = 0; g < key_rows.size(); ++g) {
    Row row = std::move(key_rows[g]);
    for (std::size_t a = 0; a < aggs.size(); ++a) {
      const Acc& acc = accs[g][a];
      if (aggs[a].op == AggregateOp::count) {
        row.push_back(DataValue::number(static_cast<double>(acc.count)));
        continue;
      }
      if (acc.numeric == 0) {
        row.push_back(DataValue::null());
        continue;
      }
      double v = 0.0;
      switch (aggs[a].op) {
        case AggregateOp::sum: v = acc.sum; break;
        case AggregateOp::mean: v = acc.sum / static_cast<double>(acc.numeric); break;
        case AggregateOp::min: v = acc.min; break;
        case AggregateOp::max: v = acc.max; break;
        case AggregateOp::count: break;
      }
      row.push_back(DataValue::number(v));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace speechtone
