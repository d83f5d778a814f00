#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "wigner/random.hpp"
#include "wigner/serialize.hpp"

namespace wigner {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Serialize, KernelRecordShape) {
  Kernel k(2);
  k.add({1, 0}, cx(0.5, -1.0));
  k.add({0, 3}, 2.0);
  const json j = json::parse(serialize(k));
  EXPECT_EQ(j["order"], 2);
  ASSERT_EQ(j["entries"].size(), 2u);
  EXPECT_EQ(j["entries"][0]["idx"], json({0, 3}));
  EXPECT_EQ(j["entries"][1]["idx"], json({1, 0}));
  EXPECT_EQ(j["entries"][1]["im"], -1.0);
}

TEST(Serialize, ChaosRoundTripIsBitExact) {
  RandomSource rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = rng.chaos(0, 5, 4);
    const auto back = deserialize_chaos(serialize(f));
    EXPECT_EQ(back, f);
    EXPECT_EQ(serialize(back), serialize(f));
  }
}

TEST(Serialize, GradientRoundTripIsBitExact) {
  RandomSource rng(2);
  for (std::size_t p = 1; p <= 3; ++p) {
    const Gradient g = gradient(rng.chaos(p, 4, 3), p);
    const Gradient back = deserialize_gradient(serialize(g));
    EXPECT_EQ(back.order(), p);
    EXPECT_EQ(max_abs_diff(back, g), 0.0);
    EXPECT_EQ(serialize(back), serialize(g));
  }
}

TEST(Serialize, RejectsMalformedInput) {
  EXPECT_THROW(deserialize_kernel(R"({"order":2,"entries":[{"idx":[0],"re":1,"im":0}]})"), ParseError);
  EXPECT_THROW(deserialize_kernel(R"({"order":1,"entries":[{"idx":[0],"re":"x","im":0}]})"), ParseError);
  EXPECT_THROW(deserialize_kernel(R"({"order":1})"), ParseError);
  EXPECT_THROW(deserialize_kernel(R"({"order":1,"entries":[{"idx":[-1],"re":1,"im":0}]})"), ParseError);
  EXPECT_THROW(deserialize_chaos(R"([{"order":1,"entries":[]},{"order":1,"entries":[]}])"), ParseError);
  EXPECT_THROW(deserialize_chaos("[{"), ParseError);
  EXPECT_THROW(deserialize_gradient(R"([{"tuple":[0],"blocks":[{"degrees":[1],"kernel":{"order":1,"entries":[]}}]}])"),
               ParseError);
}

TEST(Serialize, ErrorsCarryLocation) {
  try {
    deserialize_chaos(R"([{"order":0,"entries":[]},{"order":2,"entries":[{"idx":[0,1,2],"re":1,"im":0}]}])");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("/1/entries/0/idx"), std::string::npos) << e.what();
  }
  try {
    deserialize_chaos("[1, 2,");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
  }
}

TEST(Serialize, SampleFixture) {
  const std::string text = read_file(std::string(WIGNER_TEST_DATA_DIR) + "/sample_chaos.json");
  ASSERT_FALSE(text.empty());
  const auto f = deserialize_chaos(text);
  EXPECT_EQ(trace(f), cx(0.75, -0.5));
  EXPECT_DOUBLE_EQ(norm2_squared(f), 6.4375);
  EXPECT_TRUE(is_self_adjoint(f - ChaosExpansion::constant(trace(f))));
  EXPECT_EQ(serialize(f) + "\n", text);
}

}  // namespace
}  // namespace wigner
