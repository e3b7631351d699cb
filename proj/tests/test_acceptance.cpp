// Acceptance suite: one test per criterion; the runner prints one
// PASS/FAIL line for each after the normal gtest output.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "test_support.hpp"

namespace speechtone {
namespace {

using nlohmann::json;
using testing::cars;
using testing::cars_snippet;
using testing::demo_spec;
using testing::demos_dir;
using testing::has_code;
using testing::read_text;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json raw_cars() { return json::parse(read_text(demos_dir() / "data" / "cars.json")); }

// Frozen output of tests/oracles/cars_oracle.py.
std::string oracle_text() { return read_text(std::filesystem::path(SPEECHTONE_ORACLE_DIR) / "cars_oracle_expected.txt"); }

struct OracleCar {
  std::string name;
  double mpg;
  std::int64_t voice;
};

std::vector<OracleCar> frozen_demo3_order() {
  std::istringstream in(oracle_text());
  std::vector<OracleCar> out;
  std::string line;
  bool inside = false;
  std::regex row_re(R"re(^\s+'(.*)' ([0-9.]+) (\d+)$)re");
  while (std::getline(in, line)) {
    if (line == "demo3_order") {
      inside = true;
      continue;
    }
    std::smatch m;
    if (inside && std::regex_match(line, m, row_re))
      out.push_back({m[1], std::stod(m[2]), std::stoll(m[3])});
    else if (inside)
      break;
  }
  return out;
}

bool well_formed_xml(const std::string& xml) {
  std::istringstream in(xml);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
  return tree.count("speak") == 1;
}

std::vector<std::string> fixture_names() {
  return {"demo1_origin_pitch.json", "demo2_year_rate.json", "demo3_mpg_voice.json"};
}

TEST(Acceptance, Demo1Reproduction) {
  // brute-force tally straight from the raw records
  std::vector<std::string> first_seen;
  std::map<std::string, int> counts;
  for (const auto& rec : raw_cars()) {
    const std::string o = rec["Origin"].get<std::string>();
    if (!counts.count(o)) first_seen.push_back(o);
    ++counts[o];
  }
  int lo = 1 << 30, hi = 0;
  for (const auto& [_, n] : counts) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }

  const auto spec = demo_spec("demo1_origin_pitch.json");
  const Dataset data = cars();
  const auto t0 = Clock::now();
  auto r = compile(spec, data);
  const double elapsed = seconds_since(t0);
  ASSERT_TRUE(r.ok());
  EXPECT_LT(elapsed, 1.0);

  const auto& body = r.value().body;
  ASSERT_EQ(body.size(), first_seen.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    EXPECT_EQ(body[i].text, first_seen[i]);
    const int n = counts[first_seen[i]];
    const double expected = 0.75 + (n - lo) * (2.0 - 0.75) / (hi - lo);
    EXPECT_NEAR(body[i].pitch, expected, 1e-9) << body[i].text;
    if (n == hi) {
      EXPECT_NEAR(body[i].pitch, 2.0, 1e-9);
    }
    if (n == lo) {
      EXPECT_NEAR(body[i].pitch, 0.75, 1e-9);
    }
  }
  // frozen reference values
  EXPECT_EQ(first_seen, (std::vector<std::string>{"USA", "Europe", "Japan"}));
  EXPECT_NEAR(body[2].pitch, 0.7914364640883977, 1e-9);
}

TEST(Acceptance, Demo2Reproduction) {
  std::map<long long, int> counts;
  for (const auto& rec : raw_cars()) ++counts[rec["Year"].get<long long>()];

  auto r = compile(demo_spec("demo2_year_rate.json"), cars());
  ASSERT_TRUE(r.ok());
  const auto& body = r.value().body;
  ASSERT_EQ(body.size(), counts.size());
  ASSERT_EQ(body.size(), 12u);

  int lo = 1 << 30, hi = 0;
  for (const auto& [_, n] : counts) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  auto it = counts.begin();
  for (const auto& u : body) {
    EXPECT_EQ(u.text, std::to_string(it->first));
    if (it->second == hi) {
      EXPECT_NEAR(u.rate, 4.0, 1e-9);
    }
    if (it->second == lo) {
      EXPECT_NEAR(u.rate, 1.2, 1e-9);
    }
    ++it;
  }
  // rate order equals count order
  for (std::size_t a = 0; a < body.size(); ++a)
    for (std::size_t b = 0; b < body.size(); ++b) {
      const int ca = counts[std::stoll(body[a].text)], cb = counts[std::stoll(body[b].text)];
      if (ca < cb) {
        EXPECT_LT(body[a].rate, body[b].rate);
      }
      if (ca == cb) {
        EXPECT_NEAR(body[a].rate, body[b].rate, 1e-12);
      }
    }
}

TEST(Acceptance, Demo3Reproduction) {
  const std::map<std::string, std::int64_t> voice_of = {{"Japan", 65}, {"Europe", 34}, {"USA", 0}};
  std::vector<OracleCar> brute;
  for (const auto& rec : raw_cars()) {
    if (rec["Year"].get<long long>() != 1982 || rec["Miles_per_Gallon"].is_null()) continue;
    brute.push_back({rec["Name"].get<std::string>(), rec["Miles_per_Gallon"].get<double>(),
                     voice_of.at(rec["Origin"].get<std::string>())});
  }
  std::stable_sort(brute.begin(), brute.end(), [](const OracleCar& a, const OracleCar& b) { return a.mpg < b.mpg; });

  const auto frozen = frozen_demo3_order();
  ASSERT_EQ(frozen.size(), brute.size());
  for (std::size_t i = 0; i < brute.size(); ++i) {
    EXPECT_EQ(frozen[i].name, brute[i].name);
    EXPECT_EQ(frozen[i].voice, brute[i].voice);
  }

  auto r = compile(demo_spec("demo3_mpg_voice.json"), cars());
  ASSERT_TRUE(r.ok());
  const auto& body = r.value().body;
  ASSERT_EQ(body.size(), brute.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    EXPECT_EQ(body[i].text, brute[i].name) << i;
    EXPECT_EQ(body[i].voice_id, brute[i].voice) << body[i].text;
    EXPECT_TRUE(body[i].voice_id == 65 || body[i].voice_id == 34 || body[i].voice_id == 0);
  }
}

TEST(Acceptance, DegenerateSnippetFixture) {
  auto r = compile(demo_spec("demo1_origin_pitch.json"), cars_snippet());
  ASSERT_TRUE(r.ok());
  const auto& body = r.value().body;
  ASSERT_EQ(body.size(), 3u);
  for (const auto& u : body) EXPECT_EQ(u.pitch, 1.375) << u.text;
}

TEST(Acceptance, HardLimitFuzz) {
  testing::CaseGenerator gen(1000);
  const auto t0 = Clock::now();
  int compiled = 0;
  for (int i = 0; i < 1000; ++i) {
    auto c = gen.next();
    auto r = compile(c.spec, c.data);
    if (!r.ok()) {
      EXPECT_TRUE(has_errors(r.diagnostics()));
      continue;
    }
    ++compiled;
    for (const auto* us : {&r.value().prelude, &r.value().body})
      for (const auto& u : *us) {
        ASSERT_GE(u.pitch, 0.0);
        ASSERT_LE(u.pitch, 2.0);
        ASSERT_GE(u.rate, 0.1);
        ASSERT_LE(u.rate, 10.0);
        ASSERT_GE(u.voice_id, 0);
      }
  }
  EXPECT_LT(seconds_since(t0), 30.0);
  EXPECT_GT(compiled, 500);
}

TEST(Acceptance, Determinism) {
  const Dataset data = cars();
  for (const auto& name : fixture_names()) {
    auto spec = demo_spec(name);
    for (bool prelude : {false, true}) {
      spec.prelude_enabled = prelude;
      auto a = compile(spec, data);
      auto b = compile(spec, cars());
      ASSERT_TRUE(a.ok() && b.ok()) << name;
      EXPECT_EQ(emit_schedule_json(a.value()), emit_schedule_json(b.value())) << name;
    }
  }
  auto a = compile(demo_spec("demo1_origin_pitch.json"), cars_snippet());
  auto b = compile(demo_spec("demo1_origin_pitch.json"), cars_snippet());
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(emit_schedule_json(a.value()), emit_schedule_json(b.value()));
}

TEST(Acceptance, ValidationCorpus) {
  auto conflict = parse_spec(read_text(demos_dir() / "invalid_duration_speed.json"));
  EXPECT_FALSE(conflict.ok());
  EXPECT_TRUE(has_code(conflict.diagnostics, "E_DURATION_SPEED_CONFLICT"));

  auto clamped = parse_spec(testing::spec_with_encoding(
      R"({"time": {"field": "Name", "type": "nominal"},
          "SpeechTonePitch": {"field": "Horsepower", "type": "quantitative", "scale": {"range": [0.5, 3.0]}}})"));
  EXPECT_TRUE(clamped.ok());
  EXPECT_TRUE(has_code(clamped.diagnostics, "W_RANGE_CLAMPED"));

  auto too_short = parse_spec(testing::spec_with_encoding(
      R"({"time": {"field": "Name", "type": "nominal"},
          "SpeechToneVoice": {"field": "Origin", "type": "nominal",
                              "scale": {"domain": ["Japan", "Europe", "USA"], "range": [1, 2]}}})"));
  EXPECT_FALSE(too_short.ok());
  EXPECT_TRUE(has_code(too_short.diagnostics, "E_RANGE_TOO_SHORT"));

  auto no_time = parse_spec(testing::spec_with_encoding(R"({"SpeechToneText": {"value": "Name"}})"));
  EXPECT_FALSE(no_time.ok());
  EXPECT_TRUE(has_code(no_time.diagnostics, "E_MISSING_TIME_CHANNEL"));
}

TEST(Acceptance, SsmlWellFormedness) {
  const auto vm = load_voice_map(read_text(demos_dir() / "voices_chromium.json"));
  ASSERT_TRUE(vm.ok());
  const std::regex pitch_re("pitch=\"([-+][0-9.]+)%\"");
  const std::regex rate_re("rate=\"([0-9.]+)%\"");
  auto check = [&](const SpeechSchedule& s) {
    const std::string xml = emit_ssml(s, vm.value()).text;
    EXPECT_TRUE(well_formed_xml(xml));
    for (std::sregex_iterator it(xml.begin(), xml.end(), pitch_re), end; it != end; ++it) {
      const double p = std::stod((*it)[1]);
      EXPECT_GE(p, -100.0);
      EXPECT_LE(p, 100.0);
    }
    for (std::sregex_iterator it(xml.begin(), xml.end(), rate_re), end; it != end; ++it) {
      const double v = std::stod((*it)[1]);
      EXPECT_GE(v, 10.0);
      EXPECT_LE(v, 1000.0);
    }
  };
  for (const auto& name : fixture_names()) {
    auto spec = demo_spec(name);
    spec.prelude_enabled = true;
    auto r = compile(spec, cars());
    ASSERT_TRUE(r.ok()) << name;
    check(r.value());
  }
  auto snippet = compile(demo_spec("demo1_origin_pitch.json"), cars_snippet());
  ASSERT_TRUE(snippet.ok());
  check(snippet.value());
}

TEST(Acceptance, AggregationOracle) {
  testing::CaseGenerator gen(31337);
  for (int trial = 0; trial < 100; ++trial) {
    Dataset ds = gen.dataset(50);
    const std::string key = "t0";
    const std::size_t k = *ds.column_index(key);

    std::vector<std::optional<std::string>> order;
    std::map<std::optional<std::string>, double> tally;
    for (const auto& row : ds.rows) {
      std::optional<std::string> g;
      if (!row[k].is_null()) g = row[k].as_text();
      if (!tally.count(g)) order.push_back(g);
      tally[g] += 1;
    }

    SpecDocument spec;
    ChannelDef time;
    time.field = key;
    time.data_type = DataType::nominal;
    spec.encoding[ChannelName::time] = time;
    ChannelDef pitch;
    pitch.aggregate = AggregateOp::count;
    pitch.data_type = DataType::quantitative;
    pitch.scale = ScaleDef{std::nullopt, {0.5, 1.5}};
    spec.encoding[ChannelName::pitch] = pitch;

    auto agg = apply_aggregation(ds, spec);
    ASSERT_TRUE(agg.ok());
    const Dataset& out = agg.value();
    const std::size_t kc = *out.column_index(key);
    const std::size_t cc = *out.column_index(aggregate_column_name(ChannelName::pitch));
    ASSERT_EQ(out.rows.size(), order.size()) << "trial " << trial;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
      std::optional<std::string> g;
      if (!out.rows[i][kc].is_null()) g = out.rows[i][kc].as_text();
      EXPECT_EQ(g, order[i]);
      EXPECT_EQ(out.rows[i][cc].as_number(), tally[order[i]]);
    }
  }
}

const std::map<std::string, std::string>& criterion_labels() {
  static const std::map<std::string, std::string> labels = {
      {"Demo1Reproduction", "Demo 1: pitch per origin matches brute-force counts"},
      {"Demo2Reproduction", "Demo 2: rate per year matches brute-force counts"},
      {"Demo3Reproduction", "Demo 3: 1982 names by MPG with mapped voices"},
      {"DegenerateSnippetFixture", "Snippet fixture: degenerate domain gives pitch 1.375"},
      {"HardLimitFuzz", "Fuzz: 1000 random cases stay within hard limits"},
      {"Determinism", "Determinism: byte-identical schedule JSON"},
      {"ValidationCorpus", "Validation corpus diagnostics"},
      {"SsmlWellFormedness", "SSML well-formed with bounded percentages"},
      {"AggregationOracle", "Aggregation counts equal brute-force tallies"},
  };
  return labels;
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const auto& labels = criterion_labels();
    auto it = labels.find(info.name());
    const std::string label = it == labels.end() ? info.name() : it->second;
    const bool passed = info.result()->Passed();
    lines_.push_back(std::string(passed ? "PASS" : "FAIL") + "  " + label + " (" +
                     std::to_string(info.result()->elapsed_time()) + " ms)");
  }
  void OnTestProgramEnd(const ::testing::UnitTest& unit) override {
    std::printf("\nAcceptance criteria\n");
    for (const auto& l : lines_) std::printf("%s\n", l.c_str());
    std::printf("%d/%d criteria passed\n", unit.successful_test_count(), unit.test_to_run_count());
    std::fflush(stdout);
  }

 private:
  std::vector<std::string> lines_;
};

}  // namespace
}  // namespace speechtone

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new speechtone::CriterionPrinter);
  return RUN_ALL_TESTS();
}
