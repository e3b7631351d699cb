#pragma once

// Sonification spec documents: data model, JSON parsing and validation.
//
// A document mirrors the Erie-style layout extended with the speech tone:
//
//   {
//     "data": {"url": "cars.json"},
//     "tone": {"continued": false, "type": "speechtone"},
//     "transform": [{"filter": {"field": "Year", "op": "eq", "value": 1982}}],
//     "encoding": {
//       "time": {"field": "Origin", "type": "nominal"},
//       "SpeechToneText": {"value": "Origin"},
//       "SpeechTonePitch": {"aggregate": "count", "scale": {"range": [0.75, 2.0]}}
//     }
//   }

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "speechtone/data_value.hpp"
#include "speechtone/diagnostic.hpp"

namespace speechtone {

// ---------------------------------------------------------------------------
// Channel vocabulary
// ---------------------------------------------------------------------------

enum class ChannelName { time, pitch, speed, voice, text, loudness, duration };

inline constexpr std::array<ChannelName, 7> kAllChannels = {
    ChannelName::time,  ChannelName::pitch,    ChannelName::speed,   ChannelName::voice,
    ChannelName::text,  ChannelName::loudness, ChannelName::duration};

/// Channels that map data onto a numeric speech attribute.
inline constexpr std::array<ChannelName, 3> kProsodyChannels = {
    ChannelName::pitch, ChannelName::speed, ChannelName::voice};

inline std::string_view channel_key(ChannelName c) {
  switch (c) {
    case ChannelName::time: return "time";
    case ChannelName::pitch: return "SpeechTonePitch";
    case ChannelName::speed: return "SpeechToneSpeed";
    case ChannelName::voice: return "SpeechToneVoice";
    case ChannelName::text: return "SpeechToneText";
    case ChannelName::loudness: return "SpeechToneLoudness";
    case ChannelName::duration: return "SpeechToneDuration";
  }
  return "";
}

/// Case-sensitive lookup of an encoding key.
inline std::optional<ChannelName> channel_from_key(std::string_view key) {
  for (ChannelName c : kAllChannels)
    if (channel_key(c) == key) return c;
  return std::nullopt;
}

/// Named by the grammar but not implemented; rejected by validation.
inline bool is_reserved(ChannelName c) {
  return c == ChannelName::loudness || c == ChannelName::duration;
}

enum class DataType { nominal, ordinal, quantitative, temporal };
enum class AggregateOp { count, sum, mean, min, max };
enum class CompareOp { eq, neq, lt, lte, gt, gte };

inline std::string_view to_string(DataType t) {
  switch (t) {
    case DataType::nominal: return "nominal";
    case DataType::ordinal: return "ordinal";
    case DataType::quantitative: return "quantitative";
    case DataType::temporal: return "temporal";
  }
  return "";
}

inline std::string_view to_string(AggregateOp a) {
  switch (a) {
    case AggregateOp::count: return "count";
    case AggregateOp::sum: return "sum";
    case AggregateOp::mean: return "mean";
    case AggregateOp::min: return "min";
    case AggregateOp::max: return "max";
  }
  return "";
}

inline std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::eq: return "eq";
    case CompareOp::neq: return "neq";
    case CompareOp::lt: return "lt";
    case CompareOp::lte: return "lte";
    case CompareOp::gt: return "gt";
    case CompareOp::gte: return "gte";
  }
  return "";
}

inline bool is_categorical(DataType t) {
  return t == DataType::nominal || t == DataType::ordinal;
}

// ---------------------------------------------------------------------------
// Document types
// ---------------------------------------------------------------------------

struct ScaleDef {
  std::optional<std::vector<DataValue>> domain;
  std::vector<double> range;

  friend bool operator==(const ScaleDef&, const ScaleDef&) = default;
};

struct ChannelDef {
  std::optional<std::string> field;
  std::optional<DataValue> value;
  std::optional<DataType> data_type;
  std::optional<AggregateOp> aggregate;
  std::optional<ScaleDef> scale;

  friend bool operator==(const ChannelDef&, const ChannelDef&) = default;
};

enum class ToneType { speechtone };

struct ToneDef {
  ToneType tone_type = ToneType::speechtone;
  bool continued = false;

  friend bool operator==(const ToneDef&, const ToneDef&) = default;
};

struct Filter {
  std::string field;
  CompareOp op = CompareOp::eq;
  DataValue literal;

  friend bool operator==(const Filter&, const Filter&) = default;
};

/// Aggregation is declared per channel, so filtering is the only transform.
using TransformDef = std::variant<Filter>;

enum class DataFormat { json, csv };

using Record = std::vector<std::pair<std::string, DataValue>>;

struct InlineData {
  std::vector<Record> records;
  friend bool operator==(const InlineData&, const InlineData&) = default;
};

struct FileData {
  std::string url;
  std::optional<DataFormat> format;
  friend bool operator==(const FileData&, const FileData&) = default;
};

using DataSourceRef = std::variant<InlineData, FileData>;

struct SpecDocument {
  std::optional<DataSourceRef> data_source;
  ToneDef tone;
  std::vector<TransformDef> transforms;
  std::map<ChannelName, ChannelDef> encoding;
  bool prelude_enabled = false;

  const ChannelDef* channel(ChannelName c) const {
    auto it = encoding.find(c);
    return it == encoding.end() ? nullptr : &it->second;
  }
  bool has(ChannelName c) const { return encoding.count(c) != 0; }

  friend bool operator==(const SpecDocument&, const SpecDocument&) = default;
};

// ---------------------------------------------------------------------------
// Channel hard limits
// ---------------------------------------------------------------------------

struct ChannelLimits {
  ChannelName channel = ChannelName::pitch;
  double hard_min = 0.0;
  double hard_max = 0.0;
  double default_value = 0.0;

  double clamp(double v) const { return v < hard_min ? hard_min : (v > hard_max ? hard_max : v); }
  bool contains(double v) const { return v >= hard_min && v <= hard_max; }
  friend bool operator==(const ChannelLimits&, const ChannelLimits&) = default;
};

/// Pitch [0, 2] default 1; rate [0.1, 10] default 1; voice IDs >= 0 default 0.
inline ChannelLimits limits_for(ChannelName c) {
  switch (c) {
    case ChannelName::pitch: return {c, 0.0, 2.0, 1.0};
    case ChannelName::speed: return {c, 0.1, 10.0, 1.0};
    case ChannelName::voice: return {c, 0.0, HUGE_VAL, 0.0};
    default: return {c, -HUGE_VAL, HUGE_VAL, 0.0};
  }
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

inline std::string path_join(std::string_view base, std::string_view key) {
  if (base.empty() || base == "$") return std::string(key);
  std::string out(base);
  out += '.';
  out += key;
  return out;
}

inline std::string path_index(std::string_view base, std::size_t i) {
  std::string out(base.empty() ? "$" : base);
  out += '[' + std::to_string(i) + ']';
  return out;
}

inline std::string channel_path(ChannelName c, std::string_view sub = {}) {
  std::string p = path_join("encoding", channel_key(c));
  return sub.empty() ? p : path_join(p, sub);
}

namespace detail {

/// Longest prefix of `path` that names an existing location in `doc`.
inline std::string existing_prefix(const nlohmann::ordered_json& doc, const std::string& path) {
  if (path.empty() || path == "$") return "$";
  const nlohmann::ordered_json* node = &doc;
  std::string resolved = "$";
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '[') {
      auto close = path.find(']', pos);
      if (close == std::string::npos || !node->is_array()) break;
      std::size_t idx = std::stoul(path.substr(pos + 1, close - pos - 1));
      if (idx >= node->size()) break;
      node = &(*node)[idx];
      resolved += path.substr(pos, close - pos + 1);
      pos = close + 1;
      if (pos < path.size() && path[pos] == '.') ++pos;
      continue;
    }
    auto end = path.find_first_of(".[", pos);
    std::string key = path.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (!node->is_object() || !node->contains(key)) break;
    node = &(*node)[key];
    resolved = path_join(resolved, key);
    pos = end == std::string::npos ? path.size() : end;
    if (pos < path.size() && path[pos] == '.') ++pos;
  }
  return resolved;
}

inline std::optional<DataType> parse_data_type(std::string_view s) {
  for (DataType t : {DataType::nominal, DataType::ordinal, DataType::quantitative, DataType::temporal})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

inline std::optional<AggregateOp> parse_aggregate(std::string_view s) {
  for (AggregateOp a : {AggregateOp::count, AggregateOp::sum, AggregateOp::mean, AggregateOp::min,
                        AggregateOp::max})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

inline std::optional<CompareOp> parse_compare(std::string_view s) {
  for (CompareOp op : {CompareOp::eq, CompareOp::neq, CompareOp::lt, CompareOp::lte, CompareOp::gt,
                       CompareOp::gte})
    if (to_string(op) == s) return op;
  return std::nullopt;
}

/// Scalar JSON -> DataValue; nullopt for arrays/objects and non-finite numbers.
inline std::optional<DataValue> scalar_value(const nlohmann::ordered_json& j) {
  if (j.is_null()) return DataValue::null();
  if (j.is_boolean()) return DataValue::boolean(j.get<bool>());
  if (j.is_number()) {
    double d = j.get<double>();
    if (!std::isfinite(d)) return std::nullopt;
    return DataValue::number(d);
  }
  if (j.is_string()) return DataValue::text(j.get<std::string>());
  return std::nullopt;
}

inline nlohmann::json value_to_json(const DataValue& v) {
  if (v.is_number()) return v.as_number();
  if (v.is_text()) return v.as_text();
  if (v.is_boolean()) return v.as_boolean();
  return nullptr;
}

class SpecParser {
 public:
  explicit SpecParser(Diagnostics& out) : diags_(out) {}

  SpecDocument parse_root(const nlohmann::ordered_json& root) {
    SpecDocument doc;
    bool saw_tone = false;
    for (const auto& [key, node] : root.items()) {
      if (key == "data") {
        doc.data_source = parse_data(node, "data");
      } else if (key == "tone") {
        saw_tone = true;
        doc.tone = parse_tone(node, "tone");
      } else if (key == "transform") {
        doc.transforms = parse_transforms(node, "transform");
      } else if (key == "encoding") {
        doc.encoding = parse_encoding(node, "encoding");
      } else if (key == "prelude") {
        if (node.is_boolean())
          doc.prelude_enabled = node.get<bool>();
        else
          schema_error("prelude", "expected a boolean");
      } else {
        diags_.push_back(make_warning("W_UNKNOWN_KEY", key, "unknown top-level key '" + key + "'"));
      }
    }
    if (!saw_tone) diags_.push_back(make_error("E_TONE_MISSING", "$", "missing 'tone' declaration"));
    return doc;
  }

 private:
  void schema_error(std::string path, std::string message) {
    diags_.push_back(make_error("E_SCHEMA", std::move(path), std::move(message)));
  }

  void unknown_key(const std::string& path, const std::string& key) {
    diags_.push_back(make_warning("W_UNKNOWN_KEY", path_join(path, key), "unknown key '" + key + "'"));
  }

  std::optional<DataSourceRef> parse_data(const nlohmann::ordered_json& node, const std::string& path) {
    if (!node.is_object()) {
      schema_error(path, "expected an object with 'values' or 'url'");
      return std::nullopt;
    }
    std::optional<DataSourceRef> out;
    std::optional<DataFormat> format;
    for (const auto& [key, child] : node.items()) {
      std::string child_path = path_join(path, key);
      if (key == "values") {
        out = parse_inline(child, child_path);
      } else if (key == "url") {
        if (child.is_string())
          out = FileData{child.get<std::string>(), std::nullopt};
        else
          schema_error(child_path, "expected a string");
      } else if (key == "format") {
        format = parse_format(child, child_path);
      } else if (key != "name") {
        unknown_key(path, key);
      }
    }
    if (!out) {
      schema_error(path, "data source needs 'values' or 'url'");
      return std::nullopt;
    }
    if (auto* file = std::get_if<FileData>(&*out)) file->format = format;
    return out;
  }

  std::optional<DataFormat> parse_format(const nlohmann::ordered_json& node, const std::string& path) {
    if (!node.is_object() || !node.contains("type") || !node["type"].is_string()) {
      schema_error(path, "expected {\"type\": \"csv\" | \"json\"}");
      return std::nullopt;
    }
    auto t = node["type"].get<std::string>();
    if (t == "csv") return DataFormat::csv;
    if (t == "json") return DataFormat::json;
    schema_error(path_join(path, "type"), "unsupported data format '" + t + "'");
    return std::nullopt;
  }

  std::optional<DataSourceRef> parse_inline(const nlohmann::ordered_json& node, const std::string& path) {
    if (!node.is_array()) {
      schema_error(path, "expected an array of objects");
      return std::nullopt;
    }
    InlineData data;
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto& rec = node[i];
      std::string rec_path = path_index(path, i);
      if (!rec.is_object()) {
        schema_error(rec_path, "expected a flat object");
        return std::nullopt;
      }
      Record r;
      for (const auto& [k, v] : rec.items()) {
        auto dv = scalar_value(v);
        if (!dv) {
          if (v.is_number())
            diags_.push_back(make_error("E_NON_FINITE", path_join(rec_path, k), "non-finite number"));
          else
            schema_error(path_join(rec_path, k), "expected a scalar value");
          return std::nullopt;
        }
        r.emplace_back(k, std::move(*dv));
      }
      data.records.push_back(std::move(r));
    }
    return data;
  }

  ToneDef parse_tone(const nlohmann::ordered_json& node, const std::string& path) {
    ToneDef tone;
    if (!node.is_object()) {
      schema_error(path, "expected an object");
      return tone;
    }
    bool saw_type = false;
    for (const auto& [key, child] : node.items()) {
      std::string child_path = path_join(path, key);
      if (key == "type") {
        saw_type = true;
        if (!child.is_string() || child.get<std::string>() != "speechtone")
          diags_.push_back(make_error("E_TONE_TYPE", child_path, "tone type must be \"speechtone\""));
      } else if (key == "continued") {
        if (!child.is_boolean()) {
          schema_error(child_path, "expected a boolean");
        } else if (child.get<bool>()) {
          tone.continued = true;
          diags_.push_back(make_error("E_TONE_CONTINUED", child_path,
                                      "speech tones are discrete; 'continued' must be false"));
        }
      } else {
        unknown_key(path, key);
      }
    }
    if (!saw_type) diags_.push_back(make_error("E_TONE_TYPE", path, "tone declares no 'type'"));
    return tone;
  }

  std::vector<TransformDef> parse_transforms(const nlohmann::ordered_json& node,
                                             const std::string& path) {
    std::vector<TransformDef> out;
    if (!node.is_array()) {
      schema_error(path, "expected an array");
      return out;
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto& t = node[i];
      std::string t_path = path_index(path, i);
      if (!t.is_object() || t.size() != 1) {
        schema_error(t_path, "expected an object with a single transform key");
        continue;
      }
      const auto& [kind, body] = *t.items().begin();
      if (kind != "filter") {
        diags_.push_back(make_error("E_TRANSFORM_UNKNOWN", path_join(t_path, kind),
                                    "unsupported transform '" + kind + "'"));
        continue;
      }
      if (auto f = parse_filter(body, path_join(t_path, "filter"))) out.emplace_back(std::move(*f));
    }
    return out;
  }

  std::optional<Filter> parse_filter(const nlohmann::ordered_json& node, const std::string& path) {
    if (!node.is_object()) {
      schema_error(path, "expected {\"field\", \"op\", \"value\"}");
      return std::nullopt;
    }
    Filter f;
    bool ok = true, saw_field = false, saw_value = false;
    for (const auto& [key, child] : node.items()) {
      std::string child_path = path_join(path, key);
      if (key == "field") {
        saw_field = child.is_string();
        if (saw_field) {
          f.field = child.get<std::string>();
        } else {
          schema_error(child_path, "expected a string");
          ok = false;
        }
      } else if (key == "op") {
        auto op = child.is_string() ? parse_compare(child.get<std::string>()) : std::nullopt;
        if (op) {
          f.op = *op;
        } else {
          schema_error(child_path, "expected one of eq, neq, lt, lte, gt, gte");
          ok = false;
        }
      } else if (key == "value") {
        auto v = scalar_value(child);
        saw_value = v && !v->is_null();
        if (saw_value) {
          f.literal = *v;
        } else {
          schema_error(child_path, "expected a number, string or boolean");
          ok = false;
        }
      } else {
        unknown_key(path, key);
      }
    }
    if (ok && (!saw_field || !saw_value)) {
      schema_error(path, "filter needs 'field' and 'value'");
      ok = false;
    }
    return ok ? std::optional<Filter>(std::move(f)) : std::nullopt;
  }

  std::map<ChannelName, ChannelDef> parse_encoding(const nlohmann::ordered_json& node,
                                                   const std::string& path) {
    std::map<ChannelName, ChannelDef> out;
    if (!node.is_object()) {
      schema_error(path, "expected an object");
      return out;
    }
    for (const auto& [key, child] : node.items()) {
      std::string child_path = path_join(path, key);
      auto name = channel_from_key(key);
      if (!name) {
        diags_.push_back(make_error("E_CHANNEL_UNKNOWN", child_path, "unknown channel '" + key + "'"));
        continue;
      }
      out[*name] = parse_channel(*name, child, child_path);
    }
    return out;
  }

  ChannelDef parse_channel(ChannelName name, const nlohmann::ordered_json& node,
                           const std::string& path) {
    ChannelDef def;
    if (!node.is_object()) {
      schema_error(path, "expected an object");
      return def;
    }
    for (const auto& [key, child] : node.items()) {
      std::string child_path = path_join(path, key);
      if (key == "field") {
        if (child.is_string())
          def.field = child.get<std::string>();
        else
          schema_error(child_path, "expected a string");
      } else if (key == "value") {
        auto v = scalar_value(child);
        if (v && (v->is_text() || v->is_number()))
          def.value = *v;
        else
          schema_error(child_path, "expected a string or number");
      } else if (key == "type") {
        auto t = child.is_string() ? parse_data_type(child.get<std::string>()) : std::nullopt;
        if (t)
          def.data_type = t;
        else
          schema_error(child_path, "expected nominal, ordinal, quantitative or temporal");
      } else if (key == "aggregate") {
        auto a = child.is_string() ? parse_aggregate(child.get<std::string>()) : std::nullopt;
        if (a)
          def.aggregate = a;
        else
          schema_error(child_path, "expected count, sum, mean, min or max");
      } else if (key == "scale") {
        def.scale = parse_scale(child, child_path);
      } else {
        unknown_key(path, key);
      }
    }
    if (!is_reserved(name)) check_binding(name, def, path);
    return def;
  }

  std::optional<ScaleDef> parse_scale(const nlohmann::ordered_json& node, const std::string& path) {
    if (!node.is_object()) {
      schema_error(path, "expected an object");
      return std::nullopt;
    }
    ScaleDef scale;
    bool saw_range = false;
    for (const auto& [key, child] : node.items()) {
      std::string child_path = path_join(path, key);
      if (key == "range") {
        saw_range = true;
        if (!child.is_array()) {
          schema_error(child_path, "expected an array of numbers");
          continue;
        }
        for (std::size_t i = 0; i < child.size(); ++i) {
          auto v = scalar_value(child[i]);
          if (v && v->is_number())
            scale.range.push_back(v->as_number());
          else
            schema_error(path_index(child_path, i), "expected a finite number");
        }
      } else if (key == "domain") {
        if (!child.is_array()) {
          schema_error(child_path, "expected an array");
          continue;
        }
        std::vector<DataValue> domain;
        for (std::size_t i = 0; i < child.size(); ++i) {
          auto v = scalar_value(child[i]);
          if (v)
            domain.push_back(std::move(*v));
          else
            schema_error(path_index(child_path, i), "expected a scalar value");
        }
        scale.domain = std::move(domain);
      } else {
        unknown_key(path, key);
      }
    }
    if (!saw_range || scale.range.empty())
      diags_.push_back(make_error("E_SCALE_RANGE", saw_range ? path_join(path, "range") : path,
                                  "scale range must be a non-empty list of numbers"));
    return scale;
  }

  void check_binding(ChannelName name, const ChannelDef& def, const std::string& path) {
    auto binding_error = [&](std::string message) {
      diags_.push_back(make_error("E_CHANNEL_BINDING", path, std::move(message)));
    };
    switch (name) {
      case ChannelName::text:
        if (def.field)
          diags_.push_back(make_error("E_TEXT_FIELD_BINDING", path_join(path, "field"),
                                      "SpeechToneText takes a 'value' (a column name or literal text)"));
        if (def.aggregate) binding_error("SpeechToneText cannot aggregate");
        if (!def.value) {
          if (!def.field) binding_error("SpeechToneText needs a 'value'");
        } else if (!def.value->is_text() || def.value->as_text().empty()) {
          diags_.push_back(
              make_error("E_CHANNEL_BINDING", path_join(path, "value"), "text value must be a non-empty string"));
        }
        break;
      case ChannelName::time:
        if (!def.field) binding_error("time channel must be bound to a field");
        if (def.value || def.aggregate) binding_error("time channel takes a 'field' only");
        break;
      default:
        if (def.value && (def.field || def.aggregate))
          binding_error("channel binds a literal 'value' together with a field or aggregate");
        else if (!def.value && !def.field && !def.aggregate)
          binding_error("channel needs a 'field', 'value' or 'aggregate'");
        if (def.value && !def.value->is_number())
          diags_.push_back(make_error("E_SCHEMA", path_join(path, "value"), "expected a number"));
        if (def.aggregate && *def.aggregate != AggregateOp::count && !def.field)
          binding_error(std::string("aggregate '") + std::string(to_string(*def.aggregate)) +
                        "' needs a numeric 'field'");
        break;
    }
  }

  Diagnostics& diags_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// All findings for a parsed document; an empty list (or warnings only)
/// means the document can be compiled.
inline Diagnostics validate_spec(const SpecDocument& spec) {
  Diagnostics out;

  if (!spec.has(ChannelName::time))
    out.push_back(make_error("E_MISSING_TIME_CHANNEL", "encoding", "encoding has no 'time' channel"));

  for (ChannelName c : kProsodyChannels) {
    const ChannelDef* def = spec.channel(c);
    if (!def) continue;
    const ChannelLimits lim = limits_for(c);
    auto out_of_limit = [&](double v) { return !lim.contains(v); };
    if (def->scale) {
      const auto& range = def->scale->range;
      bool clamped = std::any_of(range.begin(), range.end(), out_of_limit);
      if (clamped)
        out.push_back(make_warning("W_RANGE_CLAMPED", channel_path(c, "scale.range"),
                                   "range exceeds the channel's hard limits and will be clamped"));
      if (c == ChannelName::voice &&
          std::any_of(range.begin(), range.end(), [](double v) { return v != std::round(v); }))
        out.push_back(make_warning("W_VOICE_ROUNDED", channel_path(c, "scale.range"),
                                   "voice IDs are integers; values will be rounded"));
    }
    if (def->value && def->value->is_number() && out_of_limit(def->value->as_number()))
      out.push_back(make_warning("W_RANGE_CLAMPED", channel_path(c, "value"),
                                 "value exceeds the channel's hard limits and will be clamped"));
  }

  if (spec.has(ChannelName::duration) && spec.has(ChannelName::speed))
    out.push_back(make_error("E_DURATION_SPEED_CONFLICT", channel_path(ChannelName::duration),
                             "duration and speed cannot be mapped at the same time"));
  for (ChannelName c : kAllChannels)
    if (is_reserved(c) && spec.has(c))
      out.push_back(make_error("E_CHANNEL_UNIMPLEMENTED", channel_path(c),
                               "channel '" + std::string(channel_key(c)) + "' is not implemented"));

  for (ChannelName c : kProsodyChannels) {
    const ChannelDef* def = spec.channel(c);
    if (!def || !def->scale) continue;
    const ScaleDef& scale = *def->scale;
    bool categorical = def->data_type && is_categorical(*def->data_type);
    bool quantitative = def->data_type && !categorical;
    if (categorical && scale.domain && scale.domain->size() > scale.range.size())
      out.push_back(make_error("E_RANGE_TOO_SHORT", channel_path(c, "scale.range"),
                               "ordinal scale has " + std::to_string(scale.range.size()) +
                                   " range values for " + std::to_string(scale.domain->size()) +
                                   " domain values"));
    if (quantitative && !scale.range.empty() && scale.range.size() != 2)
      out.push_back(make_error("E_SCALE_RANGE", channel_path(c, "scale.range"),
                               "quantitative scale range needs exactly 2 entries"));
    if (quantitative && scale.domain) {
      const auto& d = *scale.domain;
      bool numeric_pair = d.size() == 2 && d[0].is_number() && d[1].is_number();
      if (!numeric_pair || d[0].as_number() > d[1].as_number())
        out.push_back(make_error("E_SCALE_DOMAIN", channel_path(c, "scale.domain"),
                                 "quantitative domain must be [min, max] with min <= max"));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct ParseResult {
  /// Present whenever the input is a JSON object, even if diagnostics
  /// contain errors.
  std::optional<SpecDocument> document;
  Diagnostics diagnostics;

  bool ok() const { return document.has_value() && !has_errors(diagnostics); }
};

/// Parses spec text and runs validate_spec on the result. Never throws.
inline ParseResult parse_spec(std::string_view raw) {
  ParseResult result;
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    result.diagnostics.push_back(make_error(
        "E_PARSE", "$", "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what()));
    return result;
  }
  if (!root.is_object()) {
    result.diagnostics.push_back(make_error("E_SCHEMA", "$", "spec must be a JSON object"));
    return result;
  }
  detail::SpecParser parser(result.diagnostics);
  result.document = parser.parse_root(root);
  append(result.diagnostics, validate_spec(*result.document));
  for (auto& d : result.diagnostics) d.path = detail::existing_prefix(root, d.path);
  return result;
}

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------

/// Sorted-key JSON rendering of a parsed document; stable across runs.
inline nlohmann::json to_json(const SpecDocument& spec) {
  using nlohmann::json;
  json out = json::object();
  if (spec.data_source) {
    json data = json::object();
    if (const auto* inl = std::get_if<InlineData>(&*spec.data_source)) {
      json values = json::array();
      for (const auto& rec : inl->records) {
        json row = json::array();
        for (const auto& [k, v] : rec) row.push_back(json::array({k, detail::value_to_json(v)}));
        values.push_back(std::move(row));
      }
      data["values"] = std::move(values);
    } else {
      const auto& file = std::get<FileData>(*spec.data_source);
      data["url"] = file.url;
      if (file.format) data["format"] = *file.format == DataFormat::csv ? "csv" : "json";
    }
    out["data"] = std::move(data);
  }
  out["tone"] = {{"type", "speechtone"}, {"continued", spec.tone.continued}};
  json transforms = json::array();
  for (const auto& t : spec.transforms) {
    const auto& f = std::get<Filter>(t);
    transforms.push_back({{"filter",
                           {{"field", f.field},
                            {"op", std::string(to_string(f.op))},
                            {"value", detail::value_to_json(f.literal)}}}});
  }
  out["transform"] = std::move(transforms);
  json encoding = json::object();
  for (const auto& [name, def] : spec.encoding) {
    json ch = json::object();
    if (def.field) ch["field"] = *def.field;
    if (def.value) ch["value"] = detail::value_to_json(*def.value);
    if (def.data_type) ch["type"] = std::string(to_string(*def.data_type));
    if (def.aggregate) ch["aggregate"] = std::string(to_string(*def.aggregate));
    if (def.scale) {
      json scale = {{"range", def.scale->range}};
      if (def.scale->domain) {
        json domain = json::array();
        for (const auto& v : *def.scale->domain) domain.push_back(detail::value_to_json(v));
        scale["domain"] = std::move(domain);
      }
      ch["scale"] = std::move(scale);
    }
    encoding[std::string(channel_key(name))] = std::move(ch);
  }
  out["encoding"] = std::move(encoding);
  out["prelude"] = spec.prelude_enabled;
  return out;
}

/// FNV-1a 64-bit digest of the canonical document, as 16 hex digits.
inline std::string spec_hash(const SpecDocument& spec) {
  const std::string canonical =
      to_json(spec).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace speechtone
