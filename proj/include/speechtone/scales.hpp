#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "speechtone/data_value.hpp"
#include "speechtone/dataset.hpp"
#include "speechtone/diagnostic.hpp"
#include "speechtone/spec_model.hpp"

namespace speechtone {

struct NumericDomain {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const NumericDomain&, const NumericDomain&) = default;
};

struct CategoricalDomain {
  std::vector<DataValue> categories;
  friend bool operator==(const CategoricalDomain&, const CategoricalDomain&) = default;
};

using Domain = std::variant<NumericDomain, CategoricalDomain>;

struct LinearScale {
  double domain_min = 0.0;
  double domain_max = 0.0;
  double range_min = 0.0;  // image of domain_min
  double range_max = 0.0;  // image of domain_max
  ChannelLimits limits;
  friend bool operator==(const LinearScale&, const LinearScale&) = default;
};

struct OrdinalScale {
  std::vector<DataValue> categories;
  std::vector<double> range_values;
  ChannelLimits limits;
  friend bool operator==(const OrdinalScale&, const OrdinalScale&) = default;
};

/// Every value maps to `value`; used for unscaled or literal channels.
struct ConstantScale {
  double value = 0.0;
  ChannelLimits limits;
  friend bool operator==(const ConstantScale&, const ConstantScale&) = default;
};

using ResolvedScale = std::variant<LinearScale, OrdinalScale, ConstantScale>;

/// Whether `def` bound to a column of type `column` is read as categories.
/// An explicit type wins; aggregates are numeric; otherwise Number columns
/// are quantitative.
inline bool uses_categories(const ChannelDef& def, ColumnType column) {
  if (def.data_type) return is_categorical(*def.data_type);
  if (def.aggregate) return false;
  return column != ColumnType::number;
}

/// Domain of `column` for the channel. Quantitative: [min, max] of the
/// non-null values, or the explicit two-value domain. Categorical: distinct
/// non-null values in first-appearance order, or the explicit domain.
inline Result<Domain> infer_domain(const Dataset& ds, const ChannelDef& def, std::string_view column,
                                   const std::string& path = "encoding") {
  auto idx = ds.column_index(column);
  if (!idx) return make_error("E_FIELD_UNKNOWN", path, "field '" + std::string(column) + "' is not a column");
  const ColumnType type = ds.columns[*idx].type;
  const bool categorical = uses_categories(def, type);
  const auto* explicit_domain = def.scale && def.scale->domain ? &*def.scale->domain : nullptr;

  if (categorical) {
    if (explicit_domain) {
      CategoricalDomain d;
      for (const auto& v : *explicit_domain)
        if (std::find(d.categories.begin(), d.categories.end(), v) == d.categories.end())
          d.categories.push_back(v);
      if (d.categories.empty()) return make_error("E_DOMAIN_EMPTY", path, "explicit domain is empty");
      return Domain{std::move(d)};
    }
    CategoricalDomain d;
    for (const Row& row : ds.rows) {
      const DataValue& v = row[*idx];
      if (v.is_null()) continue;
      if (std::find(d.categories.begin(), d.categories.end(), v) == d.categories.end())
        d.categories.push_back(v);
    }
    if (d.categories.empty())
      return make_error("E_DOMAIN_EMPTY", path, "column '" + std::string(column) + "' has no values");
    return Domain{std::move(d)};
  }

  const bool all_null =
      std::all_of(ds.rows.begin(), ds.rows.end(), [&](const Row& row) { return row[*idx].is_null(); });
  if (all_null && !explicit_domain)
    return make_error("E_DOMAIN_EMPTY", path, "column '" + std::string(column) + "' has no values");
  if (type != ColumnType::number)
    return make_error("E_DOMAIN_NOT_NUMERIC", path,
                      "quantitative scale over non-numeric column '" + std::string(column) + "'");
  if (explicit_domain) {
    const auto& d = *explicit_domain;
    if (d.size() != 2 || !d[0].is_number() || !d[1].is_number() || d[0].as_number() > d[1].as_number())
      return make_error("E_SCALE_DOMAIN", path, "quantitative domain must be [min, max] with min <= max");
    return Domain{NumericDomain{d[0].as_number(), d[1].as_number()}};
  }
  bool any = false;
  NumericDomain d;
  for (const Row& row : ds.rows) {
    const DataValue& v = row[*idx];
    if (!v.is_number()) continue;
    if (!any) {
      d.min = d.max = v.as_number();
      any = true;
    } else {
      d.min = std::min(d.min, v.as_number());
      d.max = std::max(d.max, v.as_number());
    }
  }
  if (!any) return make_error("E_DOMAIN_EMPTY", path, "column '" + std::string(column) + "' has no values");
  return Domain{d};
}

namespace detail {

inline double finish_value(double v, const ChannelLimits& lim) {
  double out = lim.clamp(v);
  if (lim.channel == ChannelName::voice) out = lim.clamp(std::round(out));
  return out;
}

}  // namespace detail

/// Concrete mapping for a prosody channel. Declared range values are
/// clamped into the channel's hard limits. A channel with no scale block
/// maps everything to the channel default; a literal `value` maps
/// everything to that value.
inline Result<ResolvedScale> resolve_scale(ChannelName channel, const ChannelDef& def,
                                           const std::optional<Domain>& domain) {
  const ChannelLimits lim = limits_for(channel);
  const std::string path = channel_path(channel, "scale");
  if (def.value && def.value->is_number())
    return ResolvedScale{ConstantScale{detail::finish_value(def.value->as_number(), lim), lim}};
  if (!def.scale) return ResolvedScale{ConstantScale{lim.default_value, lim}};
  if (!domain) return make_error("E_DOMAIN_EMPTY", path, "scaled channel has no domain");

  const auto& range = def.scale->range;
  if (range.empty()) return make_error("E_SCALE_RANGE", path_join(path, "range"), "scale range is empty");

  if (const auto* cats = std::get_if<CategoricalDomain>(&*domain)) {
    if (range.size() < cats->categories.size())
      return make_error("E_RANGE_TOO_SHORT", path_join(path, "range"),
                        "ordinal scale has " + std::to_string(range.size()) + " range values for " +
                            std::to_string(cats->categories.size()) + " categories");
    OrdinalScale s{cats->categories, {}, lim};
    for (double r : range) s.range_values.push_back(lim.clamp(r));
    return ResolvedScale{std::move(s)};
  }
  const auto& num = std::get<NumericDomain>(*domain);
  if (range.size() != 2)
    return make_error("E_SCALE_RANGE", path_join(path, "range"),
                      "quantitative scale range needs exactly 2 entries");
  return ResolvedScale{LinearScale{num.min, num.max, lim.clamp(range[0]), lim.clamp(range[1]), lim}};
}

/// Maps one datum through the scale; the result always lies inside the
/// channel's hard limits, and voice results are whole numbers.
inline Result<double> apply_scale(const ResolvedScale& scale, const DataValue& v) {
  if (const auto* lin = std::get_if<LinearScale>(&scale)) {
    if (!v.is_number()) return make_error("E_TYPE_MISMATCH", "encoding", "linear scale needs a number");
    double out;
    if (lin->domain_min == lin->domain_max) {
      out = (lin->range_min + lin->range_max) / 2.0;
    } else {
      const double t = (v.as_number() - lin->domain_min) / (lin->domain_max - lin->domain_min);
      out = lin->range_min + t * (lin->range_max - lin->range_min);
    }
    return detail::finish_value(out, lin->limits);
  }
  if (const auto* ord = std::get_if<OrdinalScale>(&scale)) {
    for (std::size_t i = 0; i < ord->categories.size(); ++i)
      if (ord->categories[i] == v) return detail::finish_value(ord->range_values[i], ord->limits);
    return make_error("E_DOMAIN_MISS", "encoding",
                      "value '" + to_speech_text(v) + "' is not in the scale's domain");
  }
  const auto& c = std::get<ConstantScale>(scale);
  return detail::finish_value(c.value, c.limits);
}

inline const ChannelLimits& scale_limits(const ResolvedScale& s) {
  return std::visit([](const auto& x) -> const ChannelLimits& { return x.limits; }, s);
}

}  // namespace speechtone
