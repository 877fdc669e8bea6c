#include "kexlab/errors.hpp"
#include "kexlab/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kexlab;
using namespace kexlab::experiment;

namespace {

ExperimentConfig worked(std::uint64_t rounds = 1) {
  ExperimentConfig cfg;
  cfg.palettes = {Palette::resistances({1000}), Palette::resistances({2000}), Palette::resistances({3000}),
                  Palette({5}), Palette({1})};
  cfg.rounds = rounds;
  cfg.seed = 3;
  return cfg;
}

ExperimentConfig small(std::uint64_t rounds, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.palettes = {Palette::resistances({1000, 1500, 2500}), Palette::resistances({2000, 2500, 4000, 7000}),
                  Palette::resistances({3000, 3500}), Palette({5, 6, -2}), Palette({1, 0})};
  cfg.rounds = rounds;
  cfg.seed = seed;
  cfg.compromise = Compromise::RsAfter;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kexlab_exp_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("the worked loop end to end") {
  const auto res = run_experiment(worked());
  CHECK(res.r_s == 1000);
  REQUIRE(res.transcript.analog.size() == 3);
  const auto& e = res.transcript.analog.entries();
  CHECK(e[0].observation.u_c.value() == Rational(23, 7));
  CHECK(e[0].observation.i_c.value() == Rational(1, 1750));
  CHECK(e[0].t == 0);
  CHECK(e[2].t == 2);
  CHECK(res.keys_agree);
  CHECK_FALSE(res.alarm);
  CHECK(res.errors.empty());
  REQUIRE(res.rounds.size() == 1);
  const auto& r = res.rounds[0];
  CHECK(r.alice_view->r.value() == 3000);
  CHECK(r.alice_view->u.value() == 1);
  CHECK(r.bob_view->r.value() == 2000);
  CHECK(r.bob_view->u.value() == 5);
  CHECK(r.eve_x->x_a == 3000);
  CHECK(r.eve_x->x_b == 4000);
  CHECK(r.eve_voltages->u_a.value() == 5);
  CHECK(r.eve_voltages->u_b.value() == 1);
  // One-value palettes carry no key bits and |P_S| = 1 leaves nothing to guess.
  CHECK(res.alice_key.bits.size() == 0);
  REQUIRE(res.posterior.has_value());
  CHECK(res.posterior->h_rs_bits == 0.0);
}

TEST_CASE("zero rounds") {
  auto cfg = small(0, 1);
  const auto res = run_experiment(cfg);
  CHECK(res.transcript.analog.size() == 0);
  CHECK(res.alice_key.bits.size() == 0);
  CHECK(res.keys_agree);
  CHECK_FALSE(res.alarm);
  REQUIRE(res.posterior.has_value());
  CHECK(res.posterior->h_rs_bits == doctest::Approx(std::log2(3.0)));
  CHECK(res.posterior->h_key_bits == res.posterior->h_rs_bits);
}

TEST_CASE("a fixed seed reproduces byte-identical outputs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  write_outputs(run_experiment(small(25, 42)), a);
  write_outputs(run_experiment(small(25, 42)), b);
  CHECK(slurp(a / "transcript.jsonl") == slurp(b / "transcript.jsonl"));
  CHECK(slurp(a / "report.jsonl") == slurp(b / "report.jsonl"));
  CHECK_FALSE(slurp(a / "transcript.jsonl").empty());

  const auto c = scratch("det_c");
  write_outputs(run_experiment(small(25, 43)), c);
  CHECK(slurp(a / "transcript.jsonl") != slurp(c / "transcript.jsonl"));
  for (const auto& d : {a, b, c}) std::filesystem::remove_all(d);
}

TEST_CASE("Eve's tap equals the published transcript") {
  const auto res = run_experiment(small(40, 9));
  CHECK(res.eve_recording == res.transcript.analog);
  CHECK(res.keys_agree);
  REQUIRE(res.crack.has_value());
  CHECK(res.crack_matches);
  CHECK(res.crack->key.bits == res.alice_key.bits);
  CHECK(res.alice_key.bits.size() > 0);
}

TEST_CASE("rs-before cracks round by round") {
  auto cfg = small(12, 5);
  cfg.compromise = Compromise::RsBefore;
  const auto res = run_experiment(cfg);
  REQUIRE(res.crack.has_value());
  CHECK(res.crack_matches);
}

TEST_CASE("replay from the persisted transcript") {
  const auto dir = scratch("replay");
  const auto res = run_experiment(small(30, 77));
  write_outputs(res, dir);
  const auto path = dir / "transcript.jsonl";
  const auto crack = replay_attack(path, res.r_s, res.config.palettes);
  CHECK(crack.complete);
  CHECK(crack.key.bits == res.alice_key.bits);

  // Every candidate R_S either fails to fit or is still counted as consistent.
  const auto file = io::load_transcript(path);
  const auto post = transcript_posterior(file, res.config.palettes);
  for (const auto& c : post.candidates) {
    const auto attempt = eve::try_crack(file.analog, c.r_s, {res.config.palettes.p_a, res.config.palettes.p_b});
    CHECK(attempt.has_value() == c.consistent);
  }
  CHECK(transcript_round_count(file) == 30);
  CHECK(transcript_posterior(file, res.config.palettes, 0).rounds_used == 0);

  // Cut the file and the replay refuses it.
  const auto text = slurp(path);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text.substr(0, text.size() - 20);
  }
  CHECK_THROWS_AS(replay_attack(path, res.r_s, res.config.palettes), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("injection: detected without the key, hidden with it") {
  auto cfg = small(3, 8);
  cfg.attack = InjectionScenario{circuit::Current(Rational(1, 1000000)), {}, {}};
  cfg.attack->phases = {protocol::Phase::Baseline, protocol::Phase::AlicePerturb, protocol::Phase::BobPerturb};
  const auto caught = run_experiment(cfg);
  CHECK(caught.alarm);
  CHECK(std::any_of(caught.defense.begin(), caught.defense.end(), [](const DefenseRecord& d) {
    return d.verdict.reason == defense::Reason::CurrentMismatch;
  }));

  cfg.compromise = Compromise::RsAndAuthKey;
  const auto hidden = run_experiment(cfg);
  CHECK(hidden.forged_reports == 2 * 3 * 3);
  CHECK(std::none_of(hidden.defense.begin(), hidden.defense.end(),
                     [](const DefenseRecord& d) { return d.verdict.alarm; }));
  REQUIRE(hidden.crack.has_value());
  CHECK(hidden.crack->complete);
}

TEST_CASE("socket transport produces the same run") {
  auto cfg = small(10, 21);
  const auto mem = run_experiment(cfg);
  cfg.transport = TransportKind::Socket;
  const auto sock = run_experiment(cfg);
  CHECK(io::to_text(mem.transcript).substr(io::to_text(mem.transcript).find('\n')) ==
        io::to_text(sock.transcript).substr(io::to_text(sock.transcript).find('\n')));
  CHECK(mem.alice_key == sock.alice_key);
}

TEST_CASE("expander modes run through the harness") {
  ExperimentConfig cfg;
  cfg.mode = Mode::ExpanderModular;
  cfg.modulus = BigInt(16);
  cfg.palettes = {Palette::range(16), Palette::range(16), Palette::range(16), Palette({0}), Palette({0})};
  cfg.rounds = 2500;
  cfg.seed = 6;
  cfg.compromise = Compromise::RsAfter;
  const auto res = run_experiment(cfg);
  CHECK(res.keys_agree);
  CHECK(res.alice_key.bits.size() == 2500 * 8);
  // 2500 values need three chunks each way.
  CHECK(res.transcript.expander.size() == 6);
  CHECK(res.crack_matches);
  CHECK(res.posterior->h_rs_bits == 4.0);
  CHECK(*res.transcript.modulus == 16);

  ExperimentConfig plain;
  plain.mode = Mode::ExpanderPlain;
  plain.palettes = {Palette({75191}), Palette({809}), Palette({809}), Palette({0}), Palette({0})};
  plain.rounds = 1;
  const auto p = run_experiment(plain);
  REQUIRE(p.transcript.expander.size() == 2);
  CHECK(p.transcript.expander[0].message.x_list[0] == 76000);
  CHECK_FALSE(p.transcript.modulus.has_value());
}

TEST_CASE("report records") {
  const auto recs = report_records(run_experiment(small(2, 1)));
  CHECK(recs.front()["record"] == "config");
  CHECK(recs.back()["record"] == "summary");
  CHECK(recs.back()["alarm"] == false);
  const auto n = std::count_if(recs.begin(), recs.end(), [](const auto& j) { return j["record"] == "round"; });
  CHECK(n == 2);
  CHECK(summary(run_experiment(small(2, 1))).find("OK") != std::string::npos);
}

TEST_CASE("noisy samples differ from the exact ones yet snap back") {
  auto cfg = small(20, 4);
  cfg.compromise = Compromise::None;
  const auto exact = run_experiment(cfg);
  cfg.noise = {1e-9, 1e-9};
  cfg.defense_tolerance = Rational(1, 10000000);
  const auto noisy = run_experiment(cfg);
  CHECK(noisy.transcript.analog.size() == exact.transcript.analog.size());
  CHECK(noisy.transcript.analog != exact.transcript.analog);
  CHECK(noisy.keys_agree);
  CHECK_FALSE(noisy.alarm);
  CHECK(noisy.alice_key == exact.alice_key);
  // No exact crack or posterior on noisy data.
  CHECK_FALSE(noisy.posterior.has_value());
}
