#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "tse/datasets.hpp"
#include "tse/error.hpp"

namespace {

TEST(Scws, ParsesCanonicalRowWithHeader) {
  std::istringstream in(
      "id\tword1\tpos1\tword2\tpos2\tcontext1\tcontext2\tscore\n"
      "1\tbank\tn\triver\tn\tthe <b>bank</b> of the river\twe crossed the <b> river </b> today\t7.35\n");
  const auto d = tse::read_scws(in);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].id, "1");
  EXPECT_EQ(d[0].word1, "bank");
  EXPECT_EQ(d[0].context1, (std::vector<std::string>{"the", "bank", "of", "the", "river"}));
  EXPECT_EQ(d[0].target1, 1u);
  EXPECT_EQ(d[0].target2, 3u);
  EXPECT_DOUBLE_EQ(d[0].human_score, 7.35);
}

TEST(Scws, IgnoresPerRaterColumns) {
  std::istringstream in("9\ta\tn\tb\tv\tx <b>a</b>\t<b>b</b> y\t4.0\t3\t5\t4\n");
  const auto d = tse::read_scws(in);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].human_score, 4.0);
  EXPECT_EQ(d[0].target2, 0u);
}

TEST(Scws, ErrorsCarryLineNumbers) {
  std::istringstream missing_marker("1\ta\tn\tb\tn\tx <b>a</b>\tno marker\t4\n2\ta\tn\tb\tn\tx\ty\t4\n");
  try {
    tse::read_scws(missing_marker);
    FAIL();
  } catch (const tse::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
  }
  std::istringstream bad_score("1\ta\tn\tb\tn\t<b>a</b>\t<b>b</b>\t4\n2\ta\tn\tb\tn\t<b>a</b>\t<b>b</b>\tfour\n");
  try {
    tse::read_scws(bad_score);
    FAIL();
  } catch (const tse::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream short_row("1\ta\tb\n");
  EXPECT_THROW(tse::read_scws(short_row), tse::FormatError);
}

TEST(Scws, RoundTrip) {
  std::istringstream in("1\tbank\tn\triver\tn\tthe <b>bank</b> of\t<b>river</b> flows\t7.5\n");
  const auto d = tse::read_scws(in);
  std::ostringstream out;
  tse::write_scws(out, d);
  std::istringstream again(out.str());
  const auto d2 = tse::read_scws(again);
  ASSERT_EQ(d2.size(), 1u);
  EXPECT_EQ(d2[0].context1, d[0].context1);
  EXPECT_EQ(d2[0].target1, d[0].target1);
  EXPECT_EQ(d2[0].context2, d[0].context2);
  EXPECT_DOUBLE_EQ(d2[0].human_score, 7.5);
}

TEST(Lexsub, ParsesAndRoundTrips) {
  const std::string text = "bright.a.1\tbright\tadj.\t1\tthe bright student\tsmart:3;intelligent:1\n";
  std::istringstream in(text);
  const auto d = tse::read_lexsub(in);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].pos, "adj.");
  EXPECT_EQ(d[0].target_index, 1u);
  EXPECT_EQ(d[0].gold, (std::vector<std::pair<std::string, int>>{{"smart", 3}, {"intelligent", 1}}));
  std::ostringstream out;
  tse::write_lexsub(out, d);
  EXPECT_EQ(out.str(), text);
}

TEST(Lexsub, Rejections) {
  const auto fails = [](const std::string& s) {
    std::istringstream in(s);
    EXPECT_THROW(tse::read_lexsub(in), tse::FormatError) << s;
  };
  fails("1\tx\tn\t5\ta x b\ty:1\n");    // index out of range
  fails("1\tx\tn\t1\ta x b\ty:0\n");    // weight below 1
  fails("1\tx\tn\t1\ta x b\ty:1.5\n");  // fractional weight
  fails("1\tx\tn\t1\ta x b\ty\n");      // no weight
  fails("1\tx\tn\t1\ta x b\t\n");       // empty gold
  fails("1\tx\tn\t1\ta x b\n");         // missing column
}

TEST(NormalizePos, MapsCommonTags) {
  EXPECT_EQ(tse::normalize_pos("n"), "n.");
  EXPECT_EQ(tse::normalize_pos("Noun"), "n.");
  EXPECT_EQ(tse::normalize_pos("v."), "v.");
  EXPECT_EQ(tse::normalize_pos("a"), "adj.");
  EXPECT_EQ(tse::normalize_pos("j"), "adj.");
  EXPECT_EQ(tse::normalize_pos("r"), "adv.");
  EXPECT_EQ(tse::normalize_pos("adv"), "adv.");
  EXPECT_EQ(tse::normalize_pos("prep"), "prep");
}

TEST(SemevalConversion, ConvertsAndDropsMultiwords) {
  std::istringstream xml(R"(<corpus lang="english">
<lexelt item="bright.a">
<instance id="1">
<context>The <head>bright</head> student &amp; teacher.</context>
</instance>
<instance id="2">
<context>A <head>bright</head> light.</context>
</instance>
</lexelt>
<lexelt item="run.v">
<instance id="3">
<context>They <head>ran</head> home</context>
</instance>
</lexelt>
</corpus>
)");
  std::istringstream gold(
      "bright.a 1 :: smart 3;intelligent 1;clever clogs 1;\n"
      "bright.a 2 :: well lit 2;\n"
      "run.v 3 :: sprint 2;dash 1;\n");
  const auto c = tse::convert_semeval_lexsub(xml, gold);
  EXPECT_EQ(c.dropped_multiword, 2u);
  EXPECT_EQ(c.dropped_instances, 1u);
  ASSERT_EQ(c.instances.size(), 2u);
  const auto& a = c.instances[0];
  EXPECT_EQ(a.id, "1");
  EXPECT_EQ(a.target, "bright");
  EXPECT_EQ(a.pos, "adj.");
  EXPECT_EQ(a.context, (std::vector<std::string>{"The", "bright", "student", "&", "teacher."}));
  EXPECT_EQ(a.target_index, 1u);
  EXPECT_EQ(a.gold, (std::vector<std::pair<std::string, int>>{{"smart", 3}, {"intelligent", 1}}));
  const auto& b = c.instances[1];
  EXPECT_EQ(b.target, "run");
  EXPECT_EQ(b.pos, "v.");
  EXPECT_EQ(b.context[b.target_index], "ran");
}

}  // namespace
