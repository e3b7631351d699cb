#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "test_support.hpp"

namespace speechtone {
namespace {

using testing::cars;
using testing::cars_snippet;
using testing::demo_spec;
using testing::has_code;

Utterance utt(std::size_t index, std::string text, double pitch, double rate, std::int64_t voice) {
  Utterance u;
  u.index = index;
  u.text = std::move(text);
  u.pitch = pitch;
  u.rate = rate;
  u.voice_id = voice;
  return u;
}

SpeechSchedule small_schedule() {
  SpeechSchedule s;
  s.metadata.spec_hash = "0123456789abcdef";
  s.metadata.row_count = 2;
  s.body = {utt(0, "Japan", 2.0, 1.0, 65), utt(1, "USA", 0.75, 4.0, 0)};
  return s;
}

bool well_formed(const std::string& xml) {
  std::istringstream in(xml);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
  return tree.count("speak") == 1;
}

VoiceMap chromium_voices() {
  auto r = load_voice_map(testing::read_text(testing::demos_dir() / "voices_chromium.json"));
  EXPECT_TRUE(r.ok());
  return r.ok() ? r.value() : VoiceMap{};
}

TEST(ScheduleJson, Golden) {
  const std::string expected = R"({
  "body": [
    {
      "index": 0,
      "pitch": 2.0,
      "rate": 1.0,
      "text": "Japan",
      "voiceId": 65
    },
    {
      "index": 1,
      "pitch": 0.75,
      "rate": 4.0,
      "text": "USA",
      "voiceId": 0
    }
  ],
  "metadata": {
    "generator": "speechtone 0.1.0",
    "rowCount": 2,
    "specHash": "0123456789abcdef"
  },
  "prelude": [],
  "version": 1
}
)";
  EXPECT_EQ(emit_schedule_json(small_schedule()), expected);
}

TEST(ScheduleJson, EmptyBody) {
  SpeechSchedule s;
  const std::string out = emit_schedule_json(s);
  EXPECT_NE(out.find("\"body\": []"), std::string::npos);
  auto back = parse_schedule_json(out);
  ASSERT_TRUE(back.ok());
  EXPECT_TRUE(back.value().body.empty());
}

TEST(ScheduleJson, DegenerateSnippet) {
  auto r = compile(demo_spec("demo1_origin_pitch.json"), cars_snippet());
  ASSERT_TRUE(r.ok());
  const std::string out = emit_schedule_json(r.value());
  EXPECT_NE(out.find("\"pitch\": 1.375"), std::string::npos);
}

TEST(ScheduleJson, Demo3VoiceIds) {
  auto r = compile(demo_spec("demo3_mpg_voice.json"), cars());
  ASSERT_TRUE(r.ok());
  auto doc = nlohmann::json::parse(emit_schedule_json(r.value()));
  ASSERT_EQ(doc["body"].size(), 60u);
  std::set<std::int64_t> ids;
  for (const auto& u : doc["body"]) ids.insert(u["voiceId"].get<std::int64_t>());
  EXPECT_EQ(ids, (std::set<std::int64_t>{0, 34, 65}));
}

TEST(ScheduleJson, RoundTripDemos) {
  for (const char* name : {"demo1_origin_pitch.json", "demo2_year_rate.json", "demo3_mpg_voice.json"}) {
    auto doc = demo_spec(name);
    doc.prelude_enabled = true;
    auto r = compile(doc, cars());
    ASSERT_TRUE(r.ok()) << name;
    auto back = parse_schedule_json(emit_schedule_json(r.value()));
    ASSERT_TRUE(back.ok()) << name;
    EXPECT_EQ(back.value(), r.value()) << name;
  }
}

TEST(ScheduleJson, RoundTripRandom) {
  testing::CaseGenerator gen(99);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    auto c = gen.next();
    auto r = compile(c.spec, c.data);
    if (!r.ok()) continue;
    const std::string text = emit_schedule_json(r.value());
    auto back = parse_schedule_json(text);
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(back.value(), r.value());
    EXPECT_EQ(emit_schedule_json(back.value()), text);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(ScheduleJson, ParseErrors) {
  EXPECT_TRUE(has_code(parse_schedule_json("{").diagnostics(), "E_SCHEDULE_PARSE"));
  EXPECT_TRUE(has_code(parse_schedule_json("[]").diagnostics(), "E_SCHEDULE_PARSE"));
  EXPECT_TRUE(has_code(parse_schedule_json(R"({"version": 2})").diagnostics(), "E_SCHEDULE_VERSION"));
  EXPECT_TRUE(has_code(parse_schedule_json(R"({"version": 1})").diagnostics(), "E_SCHEDULE_PARSE"));
  std::string bad = emit_schedule_json(small_schedule());
  bad.replace(bad.find("\"voiceId\": 65"), 13, "\"voiceId\": \"x\"");
  EXPECT_TRUE(has_code(parse_schedule_json(bad).diagnostics(), "E_SCHEDULE_PARSE"));
}

TEST(Ssml, Percentages) {
  EXPECT_EQ(ssml_pitch(2.0), "+100.0%");
  EXPECT_EQ(ssml_pitch(0.75), "-25.0%");
  EXPECT_EQ(ssml_pitch(1.0), "+0.0%");
  EXPECT_EQ(ssml_pitch(0.0), "-100.0%");
  EXPECT_EQ(ssml_pitch(1.375), "+37.5%");
  EXPECT_EQ(ssml_pitch(0.99999), "+0.0%");
  EXPECT_EQ(ssml_rate(1.0), "100.0%");
  EXPECT_EQ(ssml_rate(4.0), "400.0%");
  EXPECT_EQ(ssml_rate(0.1), "10.0%");
  EXPECT_EQ(ssml_rate(10.0), "1000.0%");
}

TEST(Ssml, ExampleElement) {
  VoiceMap vm;
  vm.entries[65] = "ja-voice";
  SpeechSchedule s;
  s.body = {utt(0, "Japan", 2.0, 1.0, 65)};
  auto out = emit_ssml(s, vm);
  EXPECT_NE(out.text.find(R"(<voice name="ja-voice"><prosody pitch="+100.0%" rate="100.0%">Japan</prosody></voice>)"),
            std::string::npos);
  EXPECT_TRUE(out.warnings.empty());
  EXPECT_TRUE(well_formed(out.text));
}

TEST(Ssml, DocumentShape) {
  VoiceMap vm;
  vm.entries[65] = "ja";
  vm.entries[0] = "us";
  auto out = emit_ssml(small_schedule(), vm);
  const std::string expected =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<speak version=\"1.0\" xmlns=\"http://www.w3.org/2001/10/synthesis\" xml:lang=\"en-US\">\n"
      "  <voice name=\"ja\"><prosody pitch=\"+100.0%\" rate=\"100.0%\">Japan</prosody></voice>\n"
      "  <break time=\"300ms\"/>\n"
      "  <voice name=\"us\"><prosody pitch=\"-25.0%\" rate=\"400.0%\">USA</prosody></voice>\n"
      "</speak>\n";
  EXPECT_EQ(out.text, expected);

  auto no_breaks = emit_ssml(small_schedule(), vm, SsmlOptions{0});
  EXPECT_EQ(no_breaks.text.find("<break"), std::string::npos);
  auto long_breaks = emit_ssml(small_schedule(), vm, SsmlOptions{750});
  EXPECT_NE(long_breaks.text.find("<break time=\"750ms\"/>"), std::string::npos);
}

TEST(Ssml, PreludeComesFirst) {
  auto doc = demo_spec("demo1_origin_pitch.json");
  doc.prelude_enabled = true;
  auto r = compile(doc, cars());
  ASSERT_TRUE(r.ok());
  auto out = emit_ssml(r.value(), VoiceMap{});
  const auto prelude = out.text.find("Pitch represents");
  const auto usa = out.text.find(">USA<");
  ASSERT_NE(prelude, std::string::npos);
  ASSERT_NE(usa, std::string::npos);
  EXPECT_LT(prelude, usa);
}

TEST(Ssml, EscapesText) {
  SpeechSchedule s;
  s.body = {utt(0, "a < b & \"c\" > 'd'", 1.0, 1.0, 0), utt(1, std::string("bad\xff\xfe utf8\x01"), 1, 1, 0)};
  VoiceMap vm;
  vm.entries[0] = "x&y";
  auto out = emit_ssml(s, vm);
  EXPECT_NE(out.text.find("a &lt; b &amp; &quot;c&quot; &gt; &apos;d&apos;"), std::string::npos);
  EXPECT_NE(out.text.find("name=\"x&amp;y\""), std::string::npos);
  EXPECT_NE(out.text.find("bad utf8 "), std::string::npos);
  EXPECT_TRUE(well_formed(out.text));
}

TEST(Ssml, UnmappedVoiceWarns) {
  VoiceMap vm;
  vm.default_name = "fallback";
  auto out = emit_ssml(small_schedule(), vm);
  EXPECT_EQ(out.warnings.size(), 2u);
  EXPECT_TRUE(has_code(out.warnings, "W_VOICE_UNMAPPED"));
  EXPECT_NE(out.text.find("<voice name=\"fallback\">"), std::string::npos);
}

TEST(Ssml, Demo3WithChromiumVoices) {
  auto r = compile(demo_spec("demo3_mpg_voice.json"), cars());
  ASSERT_TRUE(r.ok());
  auto out = emit_ssml(r.value(), chromium_voices());
  EXPECT_TRUE(out.warnings.empty());
  EXPECT_TRUE(well_formed(out.text));
  std::set<std::string> names;
  std::regex voice_re("<voice name=\"([^\"]+)\">");
  for (std::sregex_iterator it(out.text.begin(), out.text.end(), voice_re), end; it != end; ++it)
    names.insert((*it)[1]);
  EXPECT_EQ(names, (std::set<std::string>{"ja-JP-voice", "en-GB-female", "en-US-male"}));
}

// Every random schedule yields parseable SSML whose percentages stay inside
// the channel limits: pitch in [-100%, +100%], rate in [10%, 1000%].
TEST(Ssml, RandomSchedulesWellFormed) {
  testing::CaseGenerator gen(4242);
  std::regex pitch_re("pitch=\"([-+][0-9.]+)%\"");
  std::regex rate_re("rate=\"([0-9.]+)%\"");
  for (int i = 0; i < 150; ++i) {
    auto c = gen.next();
    auto r = compile(c.spec, c.data);
    if (!r.ok()) continue;
    auto out = emit_ssml(r.value(), VoiceMap{});
    ASSERT_TRUE(well_formed(out.text));
    for (std::sregex_iterator it(out.text.begin(), out.text.end(), pitch_re), end; it != end; ++it) {
      double p = std::stod((*it)[1]);
      EXPECT_GE(p, -100.0);
      EXPECT_LE(p, 100.0);
    }
    for (std::sregex_iterator it(out.text.begin(), out.text.end(), rate_re), end; it != end; ++it) {
      double v = std::stod((*it)[1]);
      EXPECT_GE(v, 10.0);
      EXPECT_LE(v, 1000.0);
    }
  }
}

TEST(VoiceMapParse, Valid) {
  auto vm = chromium_voices();
  ASSERT_NE(vm.find(65), nullptr);
  EXPECT_EQ(*vm.find(65), "ja-JP-voice");
  EXPECT_EQ(*vm.find(0), "en-US-male");
  EXPECT_EQ(vm.find(1), nullptr);
  EXPECT_EQ(vm.default_name, "en-US-male");
}

TEST(VoiceMapParse, Errors) {
  for (const char* bad : {"{", "[]", R"({"x": "a"})", R"({"-1": "a"})", R"({"1.5": "a"})", R"({"1": 3})",
                          R"({"1": ""})"})
    EXPECT_TRUE(has_code(load_voice_map(bad).diagnostics(), "E_VOICE_MAP")) << bad;
}

TEST(Trace, Lines) {
  SpeechSchedule s;
  s.body = {utt(0, "USA", 1.0, 1.0, 0)};
  s.prelude = {utt(0, "Pitch represents x.", 1.0, 1.0, 0)};
  EXPECT_EQ(emit_trace(s),
            "P#0 \"Pitch represents x.\" pitch=1.000 rate=1.000 voice=0\n"
            "#0 \"USA\" pitch=1.000 rate=1.000 voice=0\n");
}

TEST(Trace, Demo2LineCount) {
  auto r = compile(demo_spec("demo2_year_rate.json"), cars());
  ASSERT_TRUE(r.ok());
  const std::string trace = emit_trace(r.value());
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 12);
  EXPECT_NE(trace.find("#11 \"1982\" pitch=1.000 rate=4.000 voice=0"), std::string::npos);
}

}  // namespace
}  // namespace speechtone
