#include "kexlab/errors.hpp"
#include "kexlab/random.hpp"
#include "kexlab/transcript_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kexlab;
using namespace kexlab::io;

namespace {

Rational random_rational(Rng& rng) {
  const auto n = static_cast<long long>(uniform_index(rng, 2000001)) - 1000000;
  const auto d = static_cast<long long>(uniform_index(rng, 100000)) + 1;
  return Rational(n, d);
}

TranscriptFile random_file(Rng& rng) {
  TranscriptFile f;
  f.config_hash = std::to_string(uniform_index(rng, 1u << 30));
  const auto kind = uniform_index(rng, 3);
  f.mode = kind == 0 ? Mode::Circuit : kind == 1 ? Mode::ExpanderPlain : Mode::ExpanderModular;
  if (f.mode == Mode::ExpanderModular) f.modulus = BigInt(2 + uniform_index(rng, 1000));
  std::uint64_t t = uniform_index(rng, 5);
  const auto rounds = uniform_index(rng, 6);
  for (std::uint64_t k = 0; k < rounds; ++k) {
    if (f.mode == Mode::Circuit) {
      for (auto ph : {protocol::Phase::Baseline, protocol::Phase::AlicePerturb, protocol::Phase::BobPerturb}) {
        f.analog.append({k, ph, {circuit::Voltage(random_rational(rng)), circuit::Current(random_rational(rng))}, t});
        t += 1 + uniform_index(rng, 3);
      }
    } else {
      for (auto who : {protocol::Role::Alice, protocol::Role::Bob}) {
        ExpanderRecord r{{who, k, f.modulus, {}}, t};
        for (std::uint64_t j = 0, n = uniform_index(rng, 4); j < n; ++j)
          r.message.x_list.emplace_back(uniform_index(rng, f.modulus ? 1000 : std::uint64_t{1} << 62));
        if (!f.modulus && uniform_index(rng, 4) == 0) r.message.x_list.emplace_back("98765432109876543210987654321");
        f.expander.push_back(std::move(r));
        t += 1 + uniform_index(rng, 3);
      }
    }
  }
  return f;
}

std::size_t failing_record(const std::string& text) {
  try {
    parse_transcript(text);
  } catch (const FormatError& e) {
    return e.record_index();
  }
  FAIL("expected a FormatError");
  return 0;
}

const std::string kHeader =
    R"({"record":"header","format":"kexlab-transcript","version":1,"config_hash":"h","mode":"circuit","modulus":null,"records":2})"
    "\n";
const std::string kS0 = R"({"record":"sample","round":0,"phase":"BASELINE","u_c":"23/7","i_c":"1/1750","t":0})"
                        "\n";
const std::string kS1 = R"({"record":"sample","round":0,"phase":"ALICE_PERTURB","u_c":"27/7","i_c":"1/1400","t":1})"
                        "\n";

}  // namespace

TEST_CASE("known text parses") {
  const auto f = parse_transcript(kHeader + kS0 + kS1);
  CHECK(f.config_hash == "h");
  REQUIRE(f.analog.size() == 2);
  CHECK(f.analog.entries()[0].observation.u_c.value() == Rational(23, 7));
  CHECK(f.analog.entries()[1].phase == protocol::Phase::AlicePerturb);
  CHECK(to_text(f) == kHeader + kS0 + kS1);
}

TEST_CASE("property: write then read is the identity, and writing is stable") {
  Rng rng(1000);
  for (int n = 0; n < 1000; ++n) {
    const auto f = random_file(rng);
    const auto text = to_text(f);
    const auto back = parse_transcript(text);
    CHECK(back == f);
    CHECK(to_text(back) == text);
  }
}

TEST_CASE("errors carry the offending record index") {
  CHECK(failing_record("") == 0);
  CHECK(failing_record(kS0) == 0);
  CHECK(failing_record(kHeader + kS0 + "{not json}\n") == 2);
  CHECK(failing_record(kHeader + kS0 + R"({"record":"sample","round":0,"phase":"NOPE","u_c":"1/1","i_c":"1/1","t":1})"
                                        "\n") == 2);
  // Non-canonical numbers are refused.
  CHECK(failing_record(kHeader + R"({"record":"sample","round":0,"phase":"BASELINE","u_c":"46/14","i_c":"1/1","t":0})"
                                 "\n" + kS1) == 1);
  CHECK(failing_record(kHeader + R"({"record":"sample","round":0,"phase":"BASELINE","u_c":"3","i_c":"1/1","t":0})"
                                 "\n" + kS1) == 1);
  // Timeline and phase order.
  CHECK(failing_record(kHeader + kS1 + kS0) == 2);
  CHECK(failing_record(kHeader + kS0 + kS0) == 2);
  CHECK(failing_record(kHeader + kS0 + R"({"record":"mystery","t":5})"
                                        "\n") == 2);
  // Header checks.
  auto bad_version = kHeader;
  bad_version.replace(bad_version.find("\"version\":1"), 11, "\"version\":2");
  CHECK(failing_record(bad_version + kS0 + kS1) == 0);
}

TEST_CASE("truncation is detected") {
  // Cut mid-line.
  const auto whole = kHeader + kS0 + kS1;
  for (std::size_t cut = 1; cut < whole.size(); ++cut) {
    if (whole[cut - 1] == '\n') continue;
    CHECK_THROWS_AS(parse_transcript(whole.substr(0, cut)), FormatError);
  }
  // Cut at a line boundary: the header count catches it.
  CHECK(failing_record(kHeader + kS0) == 2);
  // Too many records is as wrong as too few.
  CHECK_THROWS_AS(parse_transcript(kHeader + kS0 + kS1 +
                                   R"({"record":"sample","round":0,"phase":"BOB_PERTURB","u_c":"1/1","i_c":"1/1","t":2})"
                                   "\n"),
                  FormatError);
}

TEST_CASE("the checked-in truncated file fails at record 3") {
  const auto path = std::filesystem::path(KEXLAB_TEST_DATA) / "truncated.jsonl";
  try {
    load_transcript(path);
    FAIL("expected a FormatError");
  } catch (const FormatError& e) {
    CHECK(e.record_index() == 3);
  }
}

TEST_CASE("save and load through the filesystem") {
  Rng rng(4);
  auto f = random_file(rng);
  while (f.analog.size() + f.expander.size() == 0) f = random_file(rng);
  const auto path = std::filesystem::temp_directory_path() / "kexlab_io_test.jsonl";
  save_transcript(path, f);
  CHECK(load_transcript(path) == f);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_transcript(path), FormatError);
}
