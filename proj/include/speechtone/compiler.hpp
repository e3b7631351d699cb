#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "speechtone/data_value.hpp"
#include "speechtone/dataset.hpp"
#include "speechtone/diagnostic.hpp"
#include "speechtone/scales.hpp"
#include "speechtone/spec_model.hpp"

namespace speechtone {

inline constexpr std::string_view kGeneratorVersion = "speechtone 0.1.0";

struct Utterance {
  std::string text;
  double pitch = 1.0;
  double rate = 1.0;
  std::int64_t voice_id = 0;
  std::size_t index = 0;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct ScheduleMetadata {
  std::string spec_hash;
  std::size_t row_count = 0;
  std::string generator = std::string(kGeneratorVersion);

  friend bool operator==(const ScheduleMetadata&, const ScheduleMetadata&) = default;
};

/// Compiled output. `body` is in time-channel order with indices 0..n-1;
/// `prelude` is indexed separately.
struct SpeechSchedule {
  std::vector<Utterance> prelude;
  std::vector<Utterance> body;
  ScheduleMetadata metadata;

  friend bool operator==(const SpeechSchedule&, const SpeechSchedule&) = default;
};

using ScaleSet = std::map<ChannelName, ResolvedScale>;

/// True when the time channel sorts numerically rather than following
/// dataset order.
inline bool time_is_numeric(const ChannelDef& time, ColumnType column) {
  if (time.data_type) return !is_categorical(*time.data_type);
  return column == ColumnType::number;
}

/// Row indices in playback order. Numeric time fields sort ascending
/// (stable); nominal ones keep dataset order. Rows whose time value is null
/// are dropped with W_NULL_TIME.
inline Result<std::vector<std::size_t>> order_rows(const Dataset& ds, const ChannelDef& time) {
  const std::string path = channel_path(ChannelName::time, "field");
  if (!time.field) return make_error("E_CHANNEL_BINDING", channel_path(ChannelName::time), "time channel has no field");
  auto col = ds.column_index(*time.field);
  if (!col) return make_error("E_FIELD_UNKNOWN", path, "time field '" + *time.field + "' is not a column");
  const bool numeric = time_is_numeric(time, ds.columns[*col].type);
  if (numeric && ds.columns[*col].type != ColumnType::number)
    return make_error("E_TYPE_MISMATCH", path,
                      "quantitative time field '" + *time.field + "' is not numeric");

  std::vector<std::size_t> order;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    if (ds.rows[i][*col].is_null())
      ++dropped;
    else
      order.push_back(i);
  }
  if (numeric)
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ds.rows[a][*col].as_number() < ds.rows[b][*col].as_number();
    });
  Diagnostics warnings;
  if (dropped > 0)
    warnings.push_back(make_warning("W_NULL_TIME", path,
                                    std::to_string(dropped) + " row(s) with a null time value dropped"));
  return {std::move(order), std::move(warnings)};
}

/// Text spoken for one row. A `value` naming a column (case-sensitive) reads
/// that row's cell; any other value is spoken verbatim. A null cell yields no
/// text and a W_NULL_TEXT warning.
inline Result<std::string> resolve_text(const ChannelDef& text, const Row& row,
                                        const std::vector<Column>& columns) {
  const std::string path = channel_path(ChannelName::text, "value");
  if (!text.value || !text.value->is_text())
    return make_error("E_CHANNEL_BINDING", channel_path(ChannelName::text), "text channel needs a string value");
  const std::string& value = text.value->as_text();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name != value) continue;
    std::string spoken = to_speech_text(row[i]);
    if (spoken.empty()) return make_warning("W_NULL_TEXT", path, "null '" + value + "' value; utterance skipped");
    return spoken;
  }
  if (value.empty()) return make_warning("W_NULL_TEXT", path, "empty text; utterance skipped");
  return value;
}

namespace detail {

inline std::string_view attribute_label(ChannelName c) {
  switch (c) {
    case ChannelName::pitch: return "Pitch";
    case ChannelName::speed: return "Rate";
    case ChannelName::voice: return "Voice";
    default: return channel_key(c);
  }
}

inline std::string aggregate_phrase(AggregateOp op, const std::optional<std::string>& field) {
  const std::string f = field.value_or("records");
  switch (op) {
    case AggregateOp::count: return "count of records";
    case AggregateOp::sum: return "sum of " + f;
    case AggregateOp::mean: return "mean of " + f;
    case AggregateOp::min: return "minimum of " + f;
    case AggregateOp::max: return "maximum of " + f;
  }
  return {};
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

/// Spoken legend, one utterance per data-bound prosody channel, at channel
/// defaults:
///   "Pitch represents count of records per Origin, from 0.75 for 73 to 2 for 254."
///   "Voice represents Origin: Japan, Europe, USA."
/// `ds` is the post-transform, pre-aggregation dataset (used to resolve
/// text-channel field matches when describing groups).
inline std::vector<Utterance> generate_prelude(const SpecDocument& spec, const ScaleSet& scales,
                                               const Dataset& ds) {
  std::vector<Utterance> out;
  const auto groups = grouping_fields(spec, ds);
  for (ChannelName c : kProsodyChannels) {
    const ChannelDef* def = spec.channel(c);
    if (!def || (!def->field && !def->aggregate)) continue;
    auto it = scales.find(c);
    if (it == scales.end()) continue;

    std::string sentence = std::string(detail::attribute_label(c)) + " represents ";
    if (def->aggregate) {
      sentence += detail::aggregate_phrase(*def->aggregate, def->field);
      if (!groups.empty()) sentence += " per " + detail::join(groups, " and ");
    } else {
      sentence += *def->field;
    }
    if (const auto* lin = std::get_if<LinearScale>(&it->second)) {
      sentence += ", from " + format_speech_number(lin->range_min) + " for " +
                  format_speech_number(lin->domain_min) + " to " + format_speech_number(lin->range_max) +
                  " for " + format_speech_number(lin->domain_max);
    } else if (const auto* ord = std::get_if<OrdinalScale>(&it->second)) {
      std::vector<std::string> names;
      for (const auto& v : ord->categories) names.push_back(to_speech_text(v));
      sentence += ": " + detail::join(names, ", ");
    }
    sentence += '.';
    Utterance u;
    u.text = std::move(sentence);
    u.index = out.size();
    out.push_back(std::move(u));
  }
  return out;
}

/// Runs the whole pipeline: transforms, aggregation, ordering, scale
/// resolution and per-row utterance construction, plus the prelude when the
/// spec enables it. Pure; identical inputs give identical schedules.
inline Result<SpeechSchedule> compile(const SpecDocument& spec, const Dataset& input) {
  Diagnostics warnings = validate_spec(spec);
  if (has_errors(warnings)) return warnings;

  auto fail = [&](Diagnostics errs) {
    append(warnings, errs);
    return Result<SpeechSchedule>(std::move(warnings));
  };

  auto transformed = apply_transforms(input, spec.transforms);
  if (!transformed) return fail(transformed.take_diagnostics());
  const Dataset& filtered = transformed.value();

  Dataset data = filtered;
  if (has_aggregates(spec)) {
    auto agg = apply_aggregation(filtered, spec);
    if (!agg) return fail(agg.take_diagnostics());
    data = std::move(agg).value();
  }

  const ChannelDef& time = *spec.channel(ChannelName::time);
  auto ordered = order_rows(data, time);
  if (!ordered) return fail(ordered.take_diagnostics());
  append(warnings, ordered.diagnostics());
  const std::vector<std::size_t>& order = ordered.value();

  // Rows that will be spoken, in dataset order; domains are inferred here.
  Dataset spoken;
  spoken.columns = data.columns;
  {
    std::vector<std::size_t> kept = order;
    std::sort(kept.begin(), kept.end());
    for (std::size_t i : kept) spoken.rows.push_back(data.rows[i]);
  }

  auto bound_column = [&](ChannelName c, const ChannelDef& def) -> std::optional<std::string> {
    if (def.aggregate) return aggregate_column_name(c);
    return def.field;
  };

  ScaleSet scales;
  std::map<ChannelName, std::size_t> columns;
  for (ChannelName c : kProsodyChannels) {
    const ChannelDef* def = spec.channel(c);
    if (!def) {
      scales.emplace(c, ConstantScale{limits_for(c).default_value, limits_for(c)});
      continue;
    }
    auto column = bound_column(c, *def);
    std::optional<Domain> domain;
    if (column) {
      auto idx = data.column_index(*column);
      if (!idx)
        return fail({make_error("E_FIELD_UNKNOWN", channel_path(c, "field"),
                                "field '" + *column + "' is not a column")});
      columns[c] = *idx;
      if (def->scale) {
        auto d = infer_domain(spoken, *def, *column, channel_path(c));
        if (!d) return fail(d.take_diagnostics());
        domain = std::move(d).value();
      }
    }
    auto scale = resolve_scale(c, *def, domain);
    if (!scale) return fail(scale.take_diagnostics());
    scales.emplace(c, std::move(scale).value());
  }

  const ChannelDef* text = spec.channel(ChannelName::text);
  const std::size_t time_col = *data.column_index(*time.field);

  SpeechSchedule schedule;
  std::size_t null_text = 0;
  std::map<ChannelName, std::size_t> null_values;
  for (std::size_t r : order) {
    const Row& row = data.rows[r];
    Utterance u;
    if (text) {
      auto t = resolve_text(*text, row, data.columns);
      if (!t) {
        if (has_errors(t.diagnostics())) return fail(t.take_diagnostics());
        ++null_text;
        continue;
      }
      u.text = std::move(t).value();
    } else {
      u.text = to_speech_text(row[time_col]);
    }

    for (ChannelName c : kProsodyChannels) {
      const ResolvedScale& scale = scales.at(c);
      double v = limits_for(c).default_value;
      if (auto col = columns.find(c); col != columns.end()) {
        const DataValue& cell = row[col->second];
        if (cell.is_null()) {
          ++null_values[c];
        } else {
          auto mapped = apply_scale(scale, cell);
          if (!mapped) {
            auto errs = mapped.take_diagnostics();
            for (auto& e : errs) e.path = channel_path(c);
            return fail(std::move(errs));
          }
          v = mapped.value();
        }
      } else {
        v = apply_scale(scale, DataValue::null()).value();
      }
      switch (c) {
        case ChannelName::pitch: u.pitch = v; break;
        case ChannelName::speed: u.rate = v; break;
        default: u.voice_id = static_cast<std::int64_t>(v); break;
      }
    }
    if (!limits_for(ChannelName::pitch).contains(u.pitch) || !limits_for(ChannelName::speed).contains(u.rate) ||
        u.voice_id < 0)
      return fail({make_error("E_LIMIT_VIOLATION", "encoding", "utterance outside channel hard limits")});
    u.index = schedule.body.size();
    schedule.body.push_back(std::move(u));
  }

  if (null_text > 0)
    warnings.push_back(make_warning("W_NULL_TEXT", channel_path(ChannelName::text, "value"),
                                    std::to_string(null_text) + " utterance(s) skipped for null text"));
  for (const auto& [c, n] : null_values)
    warnings.push_back(make_warning("W_NULL_VALUE", channel_path(c),
                                    std::to_string(n) + " null value(s) spoken at the channel default"));

  if (spec.prelude_enabled) schedule.prelude = generate_prelude(spec, scales, filtered);
  schedule.metadata.spec_hash = spec_hash(spec);
  schedule.metadata.row_count = input.rows.size();
  return {std::move(schedule), std::move(warnings)};
}

}  // namespace speechtone
