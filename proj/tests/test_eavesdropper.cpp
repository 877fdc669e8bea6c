#include "kexlab/eavesdropper.hpp"
#include "kexlab/errors.hpp"

#include <doctest.h>

#include <thread>

using namespace kexlab;
using namespace kexlab::protocol;
using kexlab::eve::EveRecording;

namespace {

SharedSecret shared(Rational rs) { return SharedSecret(Resistance(rs), std::vector<std::uint8_t>(16, 1)); }
PartySecrets secrets(Rational r, Rational u) { return {Resistance(r), Voltage(u), 0}; }

RoundResult worked(std::uint64_t k = 0) {
  return run_round(k, shared(1000), secrets(2000, 5), secrets(3000, 1), Voltage(1), Voltage(1));
}

EveRecording record(const Transcript& t) {
  EveRecording rec;
  for (const auto& e : t.entries()) rec.record(e);
  return rec;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("X values of the worked round") {
  const auto rec = record(worked().segment);
  const auto x = eve::eve_x_values(rec, 0);
  CHECK(x.x_a == 3000);
  CHECK(x.x_b == 4000);
}

TEST_CASE("missing phase is an incomplete round") {
  const auto seg = worked().segment;
  EveRecording rec;
  rec.record(seg.entries()[0]);
  rec.record(seg.entries()[1]);
  CHECK(code_of([&] { eve::eve_x_values(rec, 0); }) == Errc::IncompleteRound);
  CHECK(code_of([&] { eve::eve_x_values(rec, 5); }) == Errc::IncompleteRound);
}

TEST_CASE("voltages fall out without R_S") {
  const auto seg = worked().segment;
  const auto& base = seg.entries()[0].observation;
  const auto v = eve::eve_recover_voltages({3000, 4000, 0}, base);
  CHECK(v.u_b.value() == 1);
  CHECK(v.u_a.value() == 5);

  const circuit::LineObservation idle{Voltage(Rational(7, 3)), Current(0)};
  const auto w = eve::eve_recover_voltages({123, 456, 0}, idle);
  CHECK(w.u_a.value() == Rational(7, 3));
  CHECK(w.u_b.value() == Rational(7, 3));
}

TEST_CASE("crack with the true R_S reproduces the honest key") {
  const auto r = worked();
  const auto rec = record(r.segment);
  const Palette p = Palette::resistances({1000, 2000, 3000, 4000});
  const auto crack = eve::eve_crack_with_secret(rec, Resistance(1000), {p, p});
  REQUIRE(crack.rounds.size() == 1);
  CHECK(crack.rounds[0].r_a == 2000);
  CHECK(crack.rounds[0].r_b == 3000);
  CHECK(crack.rounds[0].u_a == Rational(5));
  CHECK(crack.rounds[0].u_b == Rational(1));
  CHECK(crack.complete);
  std::vector<KeyMaterial> honest{{0, r.record.bob_view.r.value(), r.record.alice_view.r.value()}};
  CHECK(crack.key == derive_key(honest, p, p));
}

TEST_CASE("a wrong but palette-consistent R_S gives a different key") {
  const auto rec = record(worked().segment);
  const Palette p = Palette::resistances({1000, 2000, 3000, 4000});
  const auto wrong = eve::eve_crack_with_secret(rec, Resistance(2000), {p, p});
  CHECK(wrong.rounds[0].r_a == 1000);
  CHECK(wrong.rounds[0].r_b == 2000);
  const auto right = eve::eve_crack_with_secret(rec, Resistance(1000), {p, p});
  CHECK(wrong.key.bits != right.key.bits);

  CHECK(code_of([&] { eve::eve_crack_with_secret(rec, Resistance(2500), {p, p}); }) == Errc::ValueNotInPalette);
  CHECK_FALSE(eve::try_crack(rec.snapshot(), 2500, {p, p}).has_value());
  CHECK(eve::try_crack(rec.snapshot(), 2000, {p, p}).has_value());
}

TEST_CASE("empty recording cracks to nothing") {
  const Palette p = Palette::resistances({1000, 2000});
  const auto c = eve::eve_crack_with_secret(EveRecording{}, Resistance(1000), {p, p});
  CHECK(c.rounds.empty());
  CHECK(c.key.bits.empty());
  CHECK_FALSE(c.complete);
}

TEST_CASE("incomplete trailing round is skipped and flagged") {
  Transcript t = worked(0).segment;
  t.append(worked(1).segment.entries()[0]);
  const Palette p = Palette::resistances({1000, 2000, 3000, 4000});
  const auto c = eve::eve_crack_with_secret(t, Resistance(1000), {p, p});
  CHECK(c.rounds.size() == 1);
  CHECK_FALSE(c.complete);
}

TEST_CASE("retroactive: recording first, R_S learned later") {
  EveRecording rec;
  std::vector<KeyMaterial> honest;
  const Palette pa = Palette::resistances({100, 200, 300, 400});
  const Palette pb = Palette::resistances({150, 250});
  Rng rng(8);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto a = draw_round_secrets(pa, Palette({1, 2, 3}), rng);
    const auto b = draw_round_secrets(pb, Palette({1, 2, 3}), rng);
    const auto r = run_round(k, shared(50), a, b, Voltage(1), Voltage(1));
    for (const auto& e : r.segment.entries()) rec.record(e);
    honest.push_back({k, a.r.value(), b.r.value()});
  }
  // Only now does Eve learn R_S.
  const auto c = eve::eve_crack_with_secret(rec, Resistance(50), {pa, pb});
  CHECK(c.complete);
  CHECK(c.key == derive_key(honest, pa, pb));
}

TEST_CASE("transient samples expose only the X values") {
  const auto r = worked();
  const auto rec = record(r.segment);
  const auto& o = r.record.observations;
  const std::vector<eve::TransientSample> along_alice{
      {Phase::AlicePerturb, eve::interpolate(o.baseline, o.alice_perturbed, Rational(1, 5))},
      {Phase::AlicePerturb, eve::interpolate(o.baseline, o.alice_perturbed, Rational(3, 4))}};
  const auto tx = eve::transient_view(rec, 0, along_alice);
  CHECK(tx.phase == Phase::AlicePerturb);
  CHECK(tx.x == 4000);
  CHECK(tx.x == eve::eve_x_values(rec, 0).x_b);

  const std::vector<eve::TransientSample> along_bob{
      {Phase::BobPerturb, eve::interpolate(o.baseline, o.bob_perturbed, Rational(1, 3))},
      {Phase::BobPerturb, eve::interpolate(o.baseline, o.bob_perturbed, Rational(1, 2))},
      {Phase::BobPerturb, eve::interpolate(o.baseline, o.bob_perturbed, Rational(1))}};
  CHECK(eve::transient_view(rec, 0, along_bob).x == 3000);

  const std::vector<eve::TransientSample> mixed{along_alice[0], along_bob[0]};
  CHECK(code_of([&] { eve::transient_view(rec, 0, mixed); }) == Errc::PhaseMismatch);
  const std::vector<eve::TransientSample> single{along_alice[0]};
  CHECK(code_of([&] { eve::transient_view(rec, 0, single); }) == Errc::ZeroCurrentDelta);
  const std::vector<eve::TransientSample> repeated{along_alice[0], along_alice[0]};
  CHECK(code_of([&] { eve::transient_view(rec, 0, repeated); }) == Errc::ZeroCurrentDelta);
}

TEST_CASE("property: X values and voltages equal ground truth") {
  Rng rng(99);
  EveRecording rec;
  for (std::uint64_t k = 0; k < 300; ++k) {
    const Rational rs(static_cast<long long>(uniform_index(rng, 100000) + 1));
    const auto a = secrets(Rational(static_cast<long long>(uniform_index(rng, 100000) + 1)),
                           Rational(static_cast<long long>(uniform_index(rng, 2001)) - 1000, 3));
    const auto b = secrets(Rational(static_cast<long long>(uniform_index(rng, 100000) + 1)),
                           Rational(static_cast<long long>(uniform_index(rng, 2001)) - 1000, 7));
    const auto r = run_round(k, shared(rs), a, b, Voltage(1), Voltage(2));
    for (const auto& e : r.segment.entries()) rec.record(e);
    const auto x = eve::eve_x_values(rec, k);
    CHECK(x.x_a == rs + a.r.value());
    CHECK(x.x_b == rs + b.r.value());
    const auto v = eve::eve_recover_voltages(x, r.record.observations.baseline);
    CHECK(v.u_a == a.u);
    CHECK(v.u_b == b.u);
  }
}

TEST_CASE("recording: one writer, concurrent readers") {
  EveRecording rec;
  const auto r0 = worked(0).segment;
  std::thread writer([&] {
    for (std::uint64_t k = 0; k < 200; ++k) {
      const auto r = worked(k);
      for (const auto& e : r.segment.entries()) rec.record(e);
    }
  });
  std::size_t last = 0;
  bool monotone = true;
  for (int i = 0; i < 200; ++i) {
    const auto snap = rec.snapshot();
    monotone = monotone && snap.size() >= last;
    last = snap.size();
  }
  writer.join();
  CHECK(monotone);
  CHECK(rec.snapshot().size() == 600);
  CHECK(rec.snapshot().entries()[0] == r0.entries()[0]);
}
