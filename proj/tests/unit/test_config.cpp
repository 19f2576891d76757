#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vardrop/config.hpp"
#include "vardrop/error.hpp"

#include <sstream>

using namespace vardrop;

namespace {

RawConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_text(const RawConfig& raw) {
  try {
    validate_config(raw);
  } catch (const Error& e) {
    CHECK(error_category(e.kind()) == std::string("validation"));
    return e.what();
  }
  FAIL("expected a validation error");
  return {};
}

}  // namespace

TEST_CASE("empty config gives defaults") {
  const auto c = validate_config(parse(""));
  CHECK(c.T == 96);
  CHECK(c.B == 32);
  CHECK(c.epsilon == 25);
  CHECK(c.k == 3);
  CHECK(c.gs == 10);
  CHECK(c.lr == 1e-2);
  CHECK(c.vardrop_on);
  CHECK_FALSE(c.normalize_windows);
  CHECK(c.data.empty());
}

TEST_CASE("key=value parsing with comments and blank lines") {
  const auto raw = parse("# comment\n\n  k = 4   # inline\nvardrop_on=false\nlr=0.05\nepsilon = 30\n");
  const auto c = validate_config(raw);
  CHECK(c.k == 4);
  CHECK_FALSE(c.vardrop_on);
  CHECK(c.lr == 0.05);
  CHECK(c.epsilon == 30);
}

TEST_CASE("lines without '=' are parse errors") {
  try {
    parse("k 3\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(error_category(e.kind()) == std::string("parse"));
  }
}

TEST_CASE("range errors name the key and interval") {
  auto msg = error_text({{"epsilon", "60"}});
  CHECK(msg.find("epsilon") != std::string::npos);
  CHECK(msg.find("[1, 48]") != std::string::npos);

  msg = error_text({{"k", "0"}});
  CHECK(msg.find("'k'") != std::string::npos);

  msg = error_text({{"k", "26"}});
  CHECK(msg.find("[1, 25]") != std::string::npos);

  CHECK(error_text({{"gs", "0"}}).find("gs") != std::string::npos);
  CHECK(error_text({{"B", "0"}}).find("B") != std::string::npos);
  CHECK(error_text({{"T", "64"}, {"epsilon", "33"}}).find("[1, 32]") != std::string::npos);
}

TEST_CASE("unknown and malformed keys") {
  CHECK(error_text({{"epsilonn", "25"}}).find("epsilonn") != std::string::npos);
  CHECK(error_text({{"k", "three"}}).find("'k'") != std::string::npos);
  CHECK(error_text({{"vardrop_on", "maybe"}}).find("vardrop_on") != std::string::npos);
  CHECK(error_text({{"lr", "nan"}}).find("lr") != std::string::npos);
}

TEST_CASE("split fractions must sum to one") {
  try {
    validate_config({{"train_frac", "0.5"}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Split);
  }
}

TEST_CASE("seed fallback") {
  CHECK(validate_config({}, 17).seed == 17);
  CHECK(validate_config({{"seed", "5"}}, 17).seed == 5);
}

TEST_CASE("echo is stable and complete") {
  const auto c = validate_config({{"k", "4"}, {"lr", "0.1"}});
  const auto a = config_echo(c);
  CHECK(a == config_echo(validate_config({{"lr", "0.1"}, {"k", "4"}})));
  for (const auto& key : config_keys()) CHECK(a.find(key + "=") != std::string::npos);
  CHECK(a.find("\nk=4\n") != std::string::npos);
  CHECK(a.find("\nlr=0.1\n") != std::string::npos);

  // Echo parses back to the same config.
  std::istringstream in(a);
  CHECK(config_echo(validate_config(parse_config(in))) == a);
}

TEST_CASE("derived views") {
  RunConfig c;
  c.T = 48;
  c.d = 16;
  c.k = 2;
  c.epsilon = 12;
  CHECK(c.model_shape() == ModelShape{48, 16, 16, 96});
  CHECK(c.train_config().k == 2);
  const auto s = c.synth_spec();
  CHECK(s.period == 48);
  CHECK(s.max_bin == 12);
}

TEST_CASE("error categories") {
  CHECK(error_category(ErrorKind::Parse) == std::string("parse"));
  CHECK(error_category(ErrorKind::Parameter) == std::string("validation"));
  CHECK(error_category(ErrorKind::Split) == std::string("validation"));
  CHECK(error_category(ErrorKind::Numeric) == std::string("numeric"));
  CHECK(error_category(ErrorKind::Io) == std::string("io"));
}
