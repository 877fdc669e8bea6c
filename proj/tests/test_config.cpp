#include "kexlab/config.hpp"
#include "kexlab/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>

using namespace kexlab;

namespace {

std::vector<FieldDiagnostic> diagnostics_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigInvalid& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<FieldDiagnostic>& d, std::string_view field) {
  return std::any_of(d.begin(), d.end(), [&](const FieldDiagnostic& f) { return f.field == field; });
}

const char* kCircuit =
    "palette.rs = 1000, 1500\n"
    "palette.ra = 2000, 2500\n"
    "palette.rb = 3000, 3500\n"
    "palette.ua = 5\n"
    "palette.ub = 1\n";

}  // namespace

TEST_CASE("a circuit config parses with defaults") {
  const auto cfg = parse_config(std::string(kCircuit) + "rounds:int = 4   # trailing comment\ncompromise = rs-after\n");
  CHECK(cfg.mode == Mode::Circuit);
  CHECK(cfg.rounds == 4);
  CHECK(cfg.compromise == Compromise::RsAfter);
  CHECK(cfg.palettes.p_s.size() == 2);
  CHECK(cfg.palettes.p_b[1] == 3500);
  CHECK(cfg.delta_u_a.value() == 1);
  CHECK_FALSE(cfg.attack.has_value());
  CHECK_FALSE(cfg.noise.enabled());
}

TEST_CASE("every bad field is reported at once") {
  const auto d = diagnostics_of("palette.rs = 1000, -5\nrounds:int = many\ndelta.ua = 0\nbogus = 1\n");
  CHECK(mentions(d, "palette.rs"));
  CHECK(mentions(d, "rounds"));
  CHECK(mentions(d, "delta.ua"));
  CHECK(mentions(d, "bogus"));
  CHECK(mentions(d, "palette.ra"));
  CHECK(d.size() >= 5);
}

TEST_CASE("type annotations must match the schema") {
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "rounds:real = 3\n"), "rounds"));
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "rounds = 3\nrounds = 4\n"), "rounds"));
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "no equals sign\n"), "line 6"));
}

TEST_CASE("mode rules") {
  const auto m = parse_config("mode = expander-modular\nmodulus = 16\npalette.rs = 0, 3, 9\nrounds = 2\n");
  CHECK(m.mode == Mode::ExpanderModular);
  CHECK(*m.modulus == 16);
  CHECK(m.palettes.p_a.size() == 16);
  CHECK(m.palettes.p_ua[0] == 0);

  CHECK(mentions(diagnostics_of("mode = expander-modular\npalette.rs = 1\n"), "modulus"));
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "modulus = 7\n"), "modulus"));
  CHECK(mentions(diagnostics_of("mode = expander-modular\nmodulus = 5\npalette.rs = 5\n"), "palette.rs"));
  CHECK(mentions(diagnostics_of("mode = expander-plain\npalette.rs = 1/2\npalette.ra = 1\npalette.rb = 1\n"),
                 "palette.rs"));
  CHECK(mentions(diagnostics_of("mode = expander-plain\npalette.rs = 1\npalette.ra = 1\npalette.rb = 1\n"
                                "attack.current = 1/1000\n"),
                 "attack.current"));
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "secret.rs = 1200\n"), "secret.rs"));
}

TEST_CASE("noise requires a defense tolerance above the noise floor") {
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "noise.sigma_u = 0.001\n"), "auth.tolerance"));
  const auto ok = parse_config(std::string(kCircuit) + "noise.sigma_u = 0.001\nauth.tolerance = 1/100\n");
  CHECK(ok.noise.enabled());
  CHECK(ok.defense_tolerance == Rational(1, 100));
}

TEST_CASE("attack and auth fields") {
  const auto cfg = parse_config(std::string(kCircuit) +
                                "attack.current = -1/2000\nattack.rounds = 0, 2\nattack.phases = BOB_PERTURB\n"
                                "auth.key = 000102030405060708090a0b0c0d0e0f\nauth.mac = SHA512\ntransport = socket\n");
  REQUIRE(cfg.attack.has_value());
  CHECK(cfg.attack->i_inject.value() == Rational(-1, 2000));
  CHECK(cfg.attack->active(2, protocol::Phase::BobPerturb));
  CHECK_FALSE(cfg.attack->active(1, protocol::Phase::BobPerturb));
  CHECK_FALSE(cfg.attack->active(2, protocol::Phase::Baseline));
  CHECK(cfg.auth_key->size() == 16);
  CHECK(cfg.mac_digest == "SHA512");
  CHECK(cfg.transport == TransportKind::Socket);

  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "auth.key = 0011\n"), "auth.key"));
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "auth.mac = NOPE\n"), "auth.mac"));
  CHECK(mentions(diagnostics_of(std::string(kCircuit) + "attack.rounds = 1\n"), "attack.rounds"));
}

TEST_CASE("KEXLAB_SEED overrides the file seed") {
  auto cfg = parse_config(std::string(kCircuit) + "seed = 5\n");
  CHECK(cfg.seed == 5);
  ::setenv("KEXLAB_SEED", "77", 1);
  apply_environment(cfg);
  CHECK(cfg.seed == 77);
  ::setenv("KEXLAB_SEED", "x", 1);
  CHECK_THROWS_AS(apply_environment(cfg), ConfigInvalid);
  ::unsetenv("KEXLAB_SEED");
  apply_environment(cfg);
  CHECK(cfg.seed == 77);
}

TEST_CASE("canonical text and hash ignore formatting") {
  const auto a = parse_config(std::string(kCircuit) + "rounds = 4\n");
  const auto b = parse_config(
      "# same thing, shuffled\nrounds:int=4\npalette.ub=1\npalette.ua = 10/2\n"
      "palette.rb = 3500, 3000\npalette.ra=2500,2000\npalette.rs = 1500 , 1000\n");
  CHECK(canonical_text(a) == canonical_text(b));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  auto c = a;
  c.seed = 1;
  CHECK(config_hash(c) != config_hash(a));
  // The canonical text parses back to the same configuration.
  CHECK(canonical_text(parse_config(canonical_text(a))) == canonical_text(a));
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/kexlab.conf"), ConfigInvalid); }
