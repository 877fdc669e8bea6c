#include "kexlab/protocol.hpp"

#include "kexlab/errors.hpp"

#include <algorithm>

namespace kexlab::protocol {

std::string_view to_string(Role role) noexcept { return role == Role::Alice ? "ALICE" : "BOB"; }

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Baseline: return "BASELINE";
    case Phase::AlicePerturb: return "ALICE_PERTURB";
    case Phase::BobPerturb: return "BOB_PERTURB";
  }
  return "?";
}

std::optional<Phase> parse_phase(std::string_view text) noexcept {
  if (text == "BASELINE") return Phase::Baseline;
  if (text == "ALICE_PERTURB") return Phase::AlicePerturb;
  if (text == "BOB_PERTURB") return Phase::BobPerturb;
  return std::nullopt;
}

SharedSecret::SharedSecret(Resistance r_s_, std::vector<std::uint8_t> auth_key_)
    : r_s(std::move(r_s_)), auth_key(std::move(auth_key_)) {
  if (auth_key.size() < 16) throw Error(Errc::InvalidArgument, "auth_key must be at least 16 bytes");
}

PartySecrets draw_round_secrets(const Palette& palette_r, const Palette& palette_u, Rng& rng) {
  const std::size_t ri = uniform_index(rng, palette_r.size());
  const std::size_t ui = uniform_index(rng, palette_u.size());
  return {Resistance(palette_r[ri]), Voltage(palette_u[ui]), ri};
}

PartySecrets draw_round_secrets(const Palette& palette_r, const Palette& palette_u, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return draw_round_secrets(palette_r, palette_u, rng);
}

void Transcript::append(TranscriptEntry entry) {
  if (!entries_.empty()) {
    const auto& last = entries_.back();
    const bool same_round_later_phase = entry.round_k == last.round_k && entry.phase > last.phase;
    if (!same_round_later_phase && entry.round_k <= last.round_k)
      throw Error(Errc::PhaseMismatch, "transcript entry for round " + std::to_string(entry.round_k) + " phase " +
                                           std::string(to_string(entry.phase)) + " is out of order");
  }
  entries_.push_back(std::move(entry));
}

void Transcript::append(const Transcript& segment) {
  for (const auto& e : segment.entries_) append(e);
}

std::vector<std::uint64_t> Transcript::rounds() const {
  std::vector<std::uint64_t> out;
  for (const auto& e : entries_)
    if (out.empty() || out.back() != e.round_k) out.push_back(e.round_k);
  return out;
}

std::optional<LineObservation> Transcript::find(std::uint64_t round_k, Phase phase) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const TranscriptEntry& e) { return e.round_k == round_k && e.phase == phase; });
  if (it == entries_.end()) return std::nullopt;
  return it->observation;
}

namespace {

Resistance partner_resistance(const Resistance& r_s, const Rational& slope) {
  if (slope <= r_s.value())
    throw Error(Errc::NegativeResistance, "slope " + format_rational(slope) + " does not exceed r_s " +
                                              format_rational(r_s.value()));
  return Resistance(slope - r_s.value());
}

}  // namespace

PartnerView alice_extract(const Resistance& r_s, const LineObservation& baseline,
                          const LineObservation& alice_perturbed) {
  Resistance r_b = partner_resistance(r_s, circuit::differential_slope(baseline, alice_perturbed));
  Voltage u_b(baseline.u_c.value() - (r_s.value() + r_b.value()) * baseline.i_c.value());
  return {std::move(r_b), std::move(u_b)};
}

PartnerView bob_extract(const Resistance& r_s, const LineObservation& baseline, const LineObservation& bob_perturbed) {
  Resistance r_a = partner_resistance(r_s, circuit::differential_slope(baseline, bob_perturbed));
  Voltage u_a(baseline.u_c.value() + (r_s.value() + r_a.value()) * baseline.i_c.value());
  return {std::move(r_a), std::move(u_a)};
}

void cross_check(Role role, const Resistance& r_s, const PartySecrets& own, const PartnerView& partner,
                 const RoundObservations& obs, const Voltage& delta_u_a, const Voltage& delta_u_b,
                 const Rational& tolerance) {
  const Rational& rs = r_s.value();
  const std::pair<Phase, const LineObservation*> phases[] = {
      {Phase::Baseline, &obs.baseline},
      {Phase::AlicePerturb, &obs.alice_perturbed},
      {Phase::BobPerturb, &obs.bob_perturbed},
  };
  for (const auto& [phase, o] : phases) {
    const Rational shift_a = phase == Phase::AlicePerturb ? delta_u_a.value() : Rational(0);
    const Rational shift_b = phase == Phase::BobPerturb ? delta_u_b.value() : Rational(0);
    const Rational& u = o->u_c.value();
    const Rational& i = o->i_c.value();

    // Alice side: U_c = U_A - (R_A + R_S) I_c; Bob side: U_c = U_B + (R_S + R_B) I_c.
    Rational own_residual, partner_residual;
    if (role == Role::Alice) {
      own_residual = u - (own.u.value() + shift_a - (own.r.value() + rs) * i);
      partner_residual = u - (partner.u.value() + shift_b + (rs + partner.r.value()) * i);
    } else {
      own_residual = u - (own.u.value() + shift_b + (rs + own.r.value()) * i);
      partner_residual = u - (partner.u.value() + shift_a - (partner.r.value() + rs) * i);
    }
    if (abs(own_residual) > tolerance || abs(partner_residual) > tolerance)
      throw Error(Errc::CrossCheckFailed, std::string(to_string(role)) + " sees an inconsistent " +
                                              std::string(to_string(phase)) + " observation");
  }
}

RoundResult run_round(std::uint64_t round_k, const SharedSecret& shared, const PartySecrets& alice,
                      const PartySecrets& bob, const Voltage& delta_u_a, const Voltage& delta_u_b) {
  if (delta_u_a.value() == 0 || delta_u_b.value() == 0)
    throw Error(Errc::InvalidArgument, "both perturbation deltas must be nonzero");

  const circuit::LoopParams params{shared.r_s, alice.r, bob.r, alice.u, bob.u};
  const Voltage zero;
  auto by_alice = circuit::perturbed_pair(params, delta_u_a, zero);
  auto by_bob = circuit::perturbed_pair(params, zero, delta_u_b);

  const RoundObservations obs{by_alice.baseline, by_alice.perturbed, by_bob.perturbed};
  // Each side works from the public observations plus its own secrets only.
  PartnerView alice_view = alice_extract(shared.r_s, obs.baseline, obs.alice_perturbed);
  PartnerView bob_view = bob_extract(shared.r_s, obs.baseline, obs.bob_perturbed);
  cross_check(Role::Alice, shared.r_s, alice, alice_view, obs, delta_u_a, delta_u_b);
  cross_check(Role::Bob, shared.r_s, bob, bob_view, obs, delta_u_a, delta_u_b);

  RoundResult out{{round_k, obs, delta_u_a, delta_u_b, std::move(alice_view), std::move(bob_view)}, {}};
  const std::uint64_t t0 = round_k * 3;
  out.segment.append({round_k, Phase::Baseline, obs.baseline, t0});
  out.segment.append({round_k, Phase::AlicePerturb, obs.alice_perturbed, t0 + 1});
  out.segment.append({round_k, Phase::BobPerturb, obs.bob_perturbed, t0 + 2});
  return out;
}

Key derive_key(std::span<const KeyMaterial> material, const Palette& palette_a, const Palette& palette_b) {
  Key key;
  for (const auto& m : material) {
    auto ia = palette_a.index_of(m.r_a);
    auto ib = palette_b.index_of(m.r_b);
    if (!ia || !ib)
      throw Error(Errc::ValueNotInPalette, "round " + std::to_string(m.round_k) + ": " +
                                               format_rational(ia ? m.r_b : m.r_a) + " is not a palette value");
    key.bits.append(*ia, palette_a.bit_width());
    key.bits.append(*ib, palette_b.bit_width());
    key.provenance.push_back({m.round_k, *ia, *ib});
  }
  return key;
}

Party::Party(PartyConfig config, SharedSecret shared) : config_(std::move(config)), shared_(std::move(shared)) {
  if (config_.delta_u_a.value() == 0 || config_.delta_u_b.value() == 0)
    throw Error(Errc::InvalidArgument, "both perturbation deltas must be nonzero");
}

const PartySecrets& Party::begin_round(std::uint64_t round_k, Rng& rng) {
  return begin_round(round_k, draw_round_secrets(config_.own_r, config_.own_u, rng));
}

const PartySecrets& Party::begin_round(std::uint64_t round_k, PartySecrets secrets) {
  if (state_ != State::Idle) throw Error(Errc::PhaseMismatch, "previous round still in progress");
  if (!material_.empty() && round_k <= material_.back().round_k)
    throw Error(Errc::PhaseMismatch, "round indices must strictly increase");
  round_k_ = round_k;
  secrets_ = std::move(secrets);
  baseline_.reset();
  alice_perturbed_.reset();
  bob_perturbed_.reset();
  state_ = State::AwaitBaseline;
  return *secrets_;
}

const PartySecrets& Party::secrets() const {
  if (!secrets_) throw Error(Errc::PhaseMismatch, "no round has begun");
  return *secrets_;
}

Voltage Party::source_voltage(Phase phase) const {
  const Rational& u = secrets().u.value();
  if (config_.role == Role::Alice && phase == Phase::AlicePerturb) return Voltage(u + config_.delta_u_a.value());
  if (config_.role == Role::Bob && phase == Phase::BobPerturb) return Voltage(u + config_.delta_u_b.value());
  return Voltage(u);
}

void Party::observe(std::uint64_t round_k, Phase phase, const LineObservation& obs) {
  if (round_k != round_k_) throw Error(Errc::PhaseMismatch, "observation for a different round");
  switch (phase) {
    case Phase::Baseline:
      if (state_ != State::AwaitBaseline) break;
      baseline_ = obs;
      state_ = State::AwaitAlicePerturb;
      return;
    case Phase::AlicePerturb:
      if (state_ != State::AwaitAlicePerturb) break;
      alice_perturbed_ = obs;
      state_ = State::AwaitBobPerturb;
      return;
    case Phase::BobPerturb:
      if (state_ != State::AwaitBobPerturb) break;
      bob_perturbed_ = obs;
      state_ = State::AwaitCompletion;
      return;
  }
  throw Error(Errc::PhaseMismatch, std::string(to_string(phase)) + " observation arrived out of order");
}

PartnerView Party::complete_round() {
  if (state_ != State::AwaitCompletion) throw Error(Errc::IncompleteRound, "round has missing phases");
  const RoundObservations obs{*baseline_, *alice_perturbed_, *bob_perturbed_};
  const bool alice = config_.role == Role::Alice;
  // A failed round is abandoned; the party is ready for the next one either way.
  state_ = State::Idle;

  PartnerView view = alice ? alice_extract(shared_.r_s, obs.baseline, obs.alice_perturbed)
                           : bob_extract(shared_.r_s, obs.baseline, obs.bob_perturbed);
  if (config_.snap_to_palette) {
    const std::size_t ri = config_.partner_r.nearest_index(view.r.value());
    Resistance r(config_.partner_r[ri]);
    // Re-derive the voltage with the snapped resistance before snapping it too.
    const Rational rs_r = shared_.r_s.value() + r.value();
    const Rational raw_u = alice ? Rational(obs.baseline.u_c.value() - rs_r * obs.baseline.i_c.value())
                                 : Rational(obs.baseline.u_c.value() + rs_r * obs.baseline.i_c.value());
    Voltage u(config_.partner_u[config_.partner_u.nearest_index(raw_u)]);
    view = {std::move(r), std::move(u)};
  }
  cross_check(config_.role, shared_.r_s, *secrets_, view, obs, config_.delta_u_a, config_.delta_u_b,
              config_.cross_check_tolerance);

  if (alice) material_.push_back({round_k_, secrets_->r.value(), view.r.value()});
  else material_.push_back({round_k_, view.r.value(), secrets_->r.value()});
  return view;
}

Key Party::key(const Palette& palette_a, const Palette& palette_b) const {
  return derive_key(material_, palette_a, palette_b);
}

}  // namespace kexlab::protocol
