#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"

#include "speechtone/compiler.hpp"
#include "speechtone/diagnostic.hpp"

namespace speechtone {

inline constexpr int kScheduleVersion = 1;

// ---------------------------------------------------------------------------
// Schedule JSON
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json utterances_to_json(const std::vector<Utterance>& us) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& u : us)
    arr.push_back({{"index", u.index}, {"text", u.text}, {"pitch", u.pitch}, {"rate", u.rate}, {"voiceId", u.voice_id}});
  return arr;
}

inline bool utterances_from_json(const nlohmann::json& arr, std::vector<Utterance>& out) {
  if (!arr.is_array()) return false;
  for (const auto& e : arr) {
    if (!e.is_object()) return false;
    auto idx = e.find("index");
    auto text = e.find("text");
    auto pitch = e.find("pitch");
    auto rate = e.find("rate");
    auto voice = e.find("voiceId");
    if (idx == e.end() || !idx->is_number_unsigned() || text == e.end() || !text->is_string() ||
        pitch == e.end() || !pitch->is_number() || rate == e.end() || !rate->is_number() ||
        voice == e.end() || !voice->is_number_integer())
      return false;
    Utterance u;
    u.index = idx->get<std::size_t>();
    u.text = text->get<std::string>();
    u.pitch = pitch->get<double>();
    u.rate = rate->get<double>();
    u.voice_id = voice->get<std::int64_t>();
    out.push_back(std::move(u));
  }
  return true;
}

}  // namespace detail

/// Canonical schedule document: sorted keys, two-space indent, LF endings,
/// shortest round-trip numbers, trailing newline. Byte-stable.
inline std::string emit_schedule_json(const SpeechSchedule& s) {
  nlohmann::json doc = {
      {"version", kScheduleVersion},
      {"metadata",
       {{"specHash", s.metadata.spec_hash},
        {"rowCount", s.metadata.row_count},
        {"generator", s.metadata.generator}}},
      {"prelude", detail::utterances_to_json(s.prelude)},
      {"body", detail::utterances_to_json(s.body)},
  };
  return doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

/// Reads a version-1 schedule document back.
inline Result<SpeechSchedule> parse_schedule_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    return make_error("E_SCHEDULE_PARSE", "$", std::string("malformed schedule: ") + e.what());
  }
  if (!doc.is_object()) return make_error("E_SCHEDULE_PARSE", "$", "schedule must be a JSON object");
  auto version = doc.find("version");
  if (version == doc.end() || !version->is_number_integer() || version->get<int>() != kScheduleVersion)
    return make_error("E_SCHEDULE_VERSION", "version", "unsupported schedule version");
  SpeechSchedule s;
  auto meta = doc.find("metadata");
  if (meta == doc.end() || !meta->is_object())
    return make_error("E_SCHEDULE_PARSE", "metadata", "missing metadata");
  try {
    s.metadata.spec_hash = meta->at("specHash").get<std::string>();
    s.metadata.row_count = meta->at("rowCount").get<std::size_t>();
    s.metadata.generator = meta->at("generator").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    return make_error("E_SCHEDULE_PARSE", "metadata", e.what());
  }
  if (!doc.contains("prelude") || !detail::utterances_from_json(doc["prelude"], s.prelude))
    return make_error("E_SCHEDULE_PARSE", "prelude", "malformed prelude");
  if (!doc.contains("body") || !detail::utterances_from_json(doc["body"], s.body))
    return make_error("E_SCHEDULE_PARSE", "body", "malformed body");
  return s;
}

// ---------------------------------------------------------------------------
// Voice map
// ---------------------------------------------------------------------------

inline constexpr std::string_view kBuiltinVoice = "default";

/// Engine voice names per numeric voice ID. Voice IDs are platform
/// dependent, so the map is supplied per target engine.
struct VoiceMap {
  std::map<std::int64_t, std::string> entries;
  std::string default_name{kBuiltinVoice};

  /// Name for `id`, or nullptr when unmapped.
  const std::string* find(std::int64_t id) const {
    auto it = entries.find(id);
    return it == entries.end() ? nullptr : &it->second;
  }
};

/// Parses `{"65": "ja-JP-Wavenet-A", "0": "en-US", "default": "en-US"}`.
inline Result<VoiceMap> load_voice_map(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    return make_error("E_VOICE_MAP", "$", std::string("malformed voice map: ") + e.what());
  }
  if (!doc.is_object()) return make_error("E_VOICE_MAP", "$", "voice map must be a JSON object");
  VoiceMap vm;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string() || value.get<std::string>().empty())
      return make_error("E_VOICE_MAP", key, "voice name must be a non-empty string");
    if (key == "default") {
      vm.default_name = value.get<std::string>();
      continue;
    }
    double id = 0.0;
    if (!parse_number(key, id) || id < 0 || id != std::floor(id) || id > 9.0e15)
      return make_error("E_VOICE_MAP", key, "voice map keys are non-negative integers or \"default\"");
    vm.entries[static_cast<std::int64_t>(id)] = value.get<std::string>();
  }
  return vm;
}

// ---------------------------------------------------------------------------
// SSML
// ---------------------------------------------------------------------------

struct SsmlOptions {
  unsigned break_ms = 300;
};

struct SsmlOutput {
  std::string text;
  Diagnostics warnings;
};

namespace detail {

/// XML-escaped text; control characters XML 1.0 cannot carry become spaces.
inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20 && ch != '\t' && ch != '\n' && ch != '\r')
          out += ' ';
        else
          out += ch;
    }
  }
  return out;
}

/// Drops bytes that do not form valid UTF-8 so the document stays parseable.
inline std::string valid_utf8(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) ok = (static_cast<unsigned char>(s[i + k]) >> 6) == 0x2;
    if (ok) out.append(s.substr(i, len));
    i += ok ? len : 1;
  }
  return out;
}

inline std::string percent(double v, bool signed_form) {
  double rounded = std::round(v * 10.0) / 10.0;
  if (rounded == 0.0) rounded = 0.0;  // no "-0.0"
  char buf[64];
  std::snprintf(buf, sizeof buf, signed_form ? "%+.1f%%" : "%.1f%%", rounded);
  return buf;
}

}  // namespace detail

/// Pitch multiplier p as the signed relative change (p - 1) * 100 %.
inline std::string ssml_pitch(double pitch) { return detail::percent((pitch - 1.0) * 100.0, true); }

/// Rate multiplier r as r * 100 %.
inline std::string ssml_rate(double rate) { return detail::percent(rate * 100.0, false); }

/// SSML 1.0 document: prelude then body, one voice/prosody element per
/// utterance, separated by breaks. Unmapped voice IDs fall back to the map's
/// default voice with a W_VOICE_UNMAPPED warning.
inline SsmlOutput emit_ssml(const SpeechSchedule& s, const VoiceMap& vm, const SsmlOptions& opts = {}) {
  SsmlOutput out;
  std::set<std::int64_t> unmapped;
  std::string& x = out.text;
  x += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  x += "<speak version=\"1.0\" xmlns=\"http://www.w3.org/2001/10/synthesis\" xml:lang=\"en-US\">\n";
  bool first = true;
  auto emit = [&](const Utterance& u) {
    if (!first && opts.break_ms > 0) x += "  <break time=\"" + std::to_string(opts.break_ms) + "ms\"/>\n";
    first = false;
    const std::string* name = vm.find(u.voice_id);
    if (!name) {
      unmapped.insert(u.voice_id);
      name = &vm.default_name;
    }
    x += "  <voice name=\"" + detail::xml_escape(detail::valid_utf8(*name)) + "\"><prosody pitch=\"" +
         ssml_pitch(u.pitch) + "\" rate=\"" + ssml_rate(u.rate) + "\">" +
         detail::xml_escape(detail::valid_utf8(u.text)) + "</prosody></voice>\n";
  };
  for (const auto& u : s.prelude) emit(u);
  for (const auto& u : s.body) emit(u);
  x += "</speak>\n";
  for (std::int64_t id : unmapped)
    out.warnings.push_back(make_warning("W_VOICE_UNMAPPED", "$",
                                        "voice ID " + std::to_string(id) + " is not mapped; using '" +
                                            vm.default_name + "'"));
  return out;
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

/// `#<index> "<text>" pitch=<p> rate=<r> voice=<id>` per utterance; prelude
/// lines carry a `P` prefix.
inline std::string emit_trace(const SpeechSchedule& s) {
  std::string out;
  auto line = [&](const char* prefix, const Utterance& u) {
    char nums[128];
    std::snprintf(nums, sizeof nums, "pitch=%.3f rate=%.3f voice=%lld", u.pitch, u.rate,
                  static_cast<long long>(u.voice_id));
    out += prefix;
    out += "#" + std::to_string(u.index) + " \"" + u.text + "\" " + nums + "\n";
  };
  for (const auto& u : s.prelude) line("P", u);
  for (const auto& u : s.body) line("", u);
  return out;
}

}  // namespace speechtone
