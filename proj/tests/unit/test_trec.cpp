#include <gtest/gtest.h>

#include <filesystem>

#include "sledge/error.hpp"
#include "sledge/file_io.hpp"
#include "sledge/trec.hpp"

using namespace sledge;

TEST(TopicIds, NumericAwareOrder) {
  TopicIdLess less;
  EXPECT_TRUE(less("2", "10"));
  EXPECT_FALSE(less("10", "2"));
  EXPECT_TRUE(less("a", "b"));
  EXPECT_FALSE(less("7", "7"));
}

TEST(Topics, ParseFixture) {
  auto topics = read_topics(SLEDGE_FIXTURES "/topics.xml");
  ASSERT_EQ(topics.size(), 4u);
  EXPECT_EQ(topics[0].id, "1");
  EXPECT_EQ(topics[3].id, "10");
  EXPECT_EQ(topics[0].query, "coronavirus origin");
  EXPECT_EQ(topics[0].field(TopicField::question), "what is the origin of the coronavirus?");
  EXPECT_EQ(parse_topic_field("narrative"), TopicField::narrative);
  EXPECT_THROW(parse_topic_field("title"), ArgumentError);
}

TEST(Topics, Errors) {
  EXPECT_THROW(parse_topics("<topics><topic>"), FormatError);
  EXPECT_THROW(parse_topics("<other/>"), FormatError);
  EXPECT_THROW(parse_topics("<topics><topic><query>x</query></topic></topics>"), FormatError);
  EXPECT_THROW(parse_topics(R"(<topics><topic number="1"/><topic number="1"/></topics>)"), FormatError);
}

TEST(Qrels, ParseLine) {
  auto q = parse_qrels("1 0 doc7 2\n");
  EXPECT_EQ(q.grade("1", "doc7"), 2);
  EXPECT_EQ(q.grade("1", "doc8"), std::nullopt);
  EXPECT_EQ(q.size(), 1u);
}

TEST(Qrels, DuplicateKeepsLastWithWarning) {
  std::vector<std::string> warnings;
  auto q = parse_qrels("1 0 d 1\n1 0 d 2\n", &warnings);
  EXPECT_EQ(q.grade("1", "d"), 2);
  EXPECT_EQ(q.size(), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line 2"), std::string::npos);
}

TEST(Qrels, MalformedLinesNameTheLine) {
  for (const char* bad : {"1 0 d\n", "1 0 d x\n", "1 0 d 3\n", "1 0 d -1\n"}) {
    try {
      parse_qrels(std::string("1 0 ok 1\n") + bad);
      ADD_FAILURE() << bad;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(Qrels, RestrictToTopics) {
  auto q = read_qrels(SLEDGE_FIXTURES "/qrels.txt");
  std::vector<std::string> keep{"2", "10"};
  auto r = q.restricted_to(keep);
  EXPECT_EQ(r.topic_ids(), keep);
  EXPECT_EQ(r.grade("2", "c001"), 2);
  EXPECT_EQ(r.topic("1"), nullptr);
}

TEST(Runs, FormatRenumbersRanks) {
  std::map<std::string, std::vector<Candidate>, TopicIdLess> results;
  results["10"] = {{"b", 1.5, 7}};
  results["2"] = {{"a", 2.0, 3}, {"c", 1.0, 9}};
  auto text = format_run(make_run("tag", results));
  EXPECT_EQ(text, "2 Q0 a 1 2.000000 tag\n2 Q0 c 2 1.000000 tag\n10 Q0 b 1 1.500000 tag\n");
}

TEST(Runs, RoundTripIsByteIdentical) {
  const std::string text = read_file(SLEDGE_FIXTURES "/eval/run_b.txt");
  auto run = parse_run(text);
  EXPECT_EQ(run.tag, "ties");
  auto path = std::filesystem::temp_directory_path() / ("sledge_run_" + std::to_string(::getpid()));
  write_run(run, path);
  EXPECT_EQ(read_file(path), format_run(run));
  EXPECT_EQ(read_run(path), run);
  std::filesystem::remove(path);

  auto a = read_file(SLEDGE_FIXTURES "/eval/run_a.txt");
  EXPECT_EQ(format_run(parse_run(a)), a);
}

TEST(Runs, Errors) {
  EXPECT_THROW(parse_run("1 Q0 d 1 0.5\n"), FormatError);
  EXPECT_THROW(parse_run("1 Q0 d 1 abc t\n"), FormatError);
  EXPECT_THROW(parse_run("1 Q0 d 1 0.5 t\n1 Q0 d 2 0.4 t\n"), FormatError);
  EXPECT_TRUE(parse_run("").topics.empty());
}
