#include "kexlab/experiment.hpp"

#include "kexlab/errors.hpp"
#include "kexlab/simulation.hpp"
#include "kexlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kexlab::experiment {

using json = nlohmann::ordered_json;
using protocol::Phase;
using protocol::Role;

namespace {

constexpr std::size_t kExpanderChunk = 1024;
constexpr Phase kPhases[] = {Phase::Baseline, Phase::AlicePerturb, Phase::BobPerturb};

wire::Frame receive(transport::Endpoint& endpoint) {
  auto frame = endpoint.try_receive();
  if (!frame) throw Error(Errc::TransportError, "expected frame was not delivered");
  return std::move(*frame);
}

// Widest loop resistance either side can present; scales the noise
// tolerance of the cross-check.
Rational max_x(const PaletteSet& p) {
  const auto& a = p.p_a.values();
  const auto& b = p.p_b.values();
  return p.p_s.values().back() + std::max(a.back(), b.back());
}

circuit::LineObservation measure(const circuit::LineObservation& exact, const ExperimentConfig& cfg,
                                 std::uint64_t k, Phase phase, Role side) {
  if (!cfg.noise.enabled()) return exact;
  const auto seed = derive_seed(cfg.seed, {simulation::kNoiseStream, k, static_cast<std::uint64_t>(phase),
                                           static_cast<std::uint64_t>(side)});
  return circuit::to_exact(circuit::observe_with_noise(exact, cfg.noise.sigma_u, cfg.noise.sigma_i, seed));
}

std::string key_bits(const protocol::Key& key) { return key.bits.to_string(); }

json rational_json(const Rational& r) { return format_rational(r); }

bool crack_agrees(const eve::CrackResult& crack, const protocol::Key& key) {
  return crack.complete && crack.key.bits == key.bits;
}

void run_circuit(ExperimentResult& res, const std::vector<std::uint8_t>& auth_key) {
  const auto& cfg = res.config;
  const auto& pal = cfg.palettes;
  const circuit::Resistance r_s(res.r_s);
  const bool noisy = cfg.noise.enabled();
  const Rational cross_tol =
      noisy ? rational_from_double(8.0 * (cfg.noise.sigma_u + to_double(max_x(pal)) * cfg.noise.sigma_i))
            : Rational(0);

  protocol::PartyConfig ac{Role::Alice, simulation::draw_palette_a(cfg), pal.p_ua, pal.p_b, pal.p_ub,
                           cfg.delta_u_a, cfg.delta_u_b, noisy, cross_tol};
  protocol::PartyConfig bc{Role::Bob, simulation::draw_palette_b(cfg), pal.p_ub, pal.p_a, pal.p_ua,
                           cfg.delta_u_a, cfg.delta_u_b, noisy, cross_tol};
  protocol::Party alice(std::move(ac), protocol::SharedSecret(r_s, auth_key));
  protocol::Party bob(std::move(bc), protocol::SharedSecret(r_s, auth_key));
  Rng alice_rng = simulation::party_rng(cfg, Role::Alice);
  Rng bob_rng = simulation::party_rng(cfg, Role::Bob);

  const bool forging = cfg.attack && cfg.compromise == Compromise::RsAndAuthKey;
  const Rational inj_value = cfg.attack ? cfg.attack->i_inject.value() : Rational(0);

  // Line to each party; Eve taps the public wire as seen at Alice's end.
  eve::EveRecording tap;
  auto line_alice = transport::make_link(cfg.transport, [&](transport::Direction, wire::Frame& f) {
    if (f.type == wire::MessageType::AnalogSample) tap.record(wire::decode_sample(f));
  });
  auto line_bob = transport::make_link(cfg.transport);

  // Digital channel between the parties. With the auth key in hand, Eve
  // rewrites each report's current to what the receiver measured.
  auto digital = transport::make_link(cfg.transport, [&](transport::Direction dir, wire::Frame& f) {
    if (!forging || f.type != wire::MessageType::AuthReport) return;
    auto report = defense::decode_report(f);
    if (!cfg.attack->active(report.round_k, report.phase)) return;
    const Rational receiver_i = dir == transport::Direction::AToB ? Rational(report.i_end.value() + inj_value)
                                                                  : Rational(report.i_end.value() - inj_value);
    f = defense::encode_report(
        defense::forge_report(report, circuit::Current(receiver_i), auth_key, cfg.mac_digest));
    ++res.forged_reports;
  });

  std::optional<eve::CrackResult> incremental;
  for (std::uint64_t k = 0; k < cfg.rounds; ++k) {
    RoundOutcome out;
    out.round_k = k;
    const auto& sa = alice.begin_round(k, alice_rng);
    const auto& sb = bob.begin_round(k, bob_rng);
    out.r_a = sa.r.value();
    out.u_a = sa.u.value();
    out.r_b = sb.r.value();
    out.u_b = sb.u.value();

    for (Phase phase : kPhases) {
      const circuit::LoopParams params{r_s, sa.r, sb.r, alice.source_voltage(phase), bob.source_voltage(phase)};
      const bool injecting = cfg.attack && cfg.attack->active(k, phase);
      const auto ends =
          defense::solve_loop_with_injection(params, injecting ? cfg.attack->i_inject : circuit::Current(0));
      const auto at_alice = measure(ends.alice_end, cfg, k, phase, Role::Alice);
      const auto at_bob = measure(ends.bob_end, cfg, k, phase, Role::Bob);
      const std::uint64_t t = 3 * k + static_cast<std::uint64_t>(phase);

      line_alice.b->send(wire::encode_sample({k, phase, at_alice, t}));
      line_bob.b->send(wire::encode_sample({k, phase, at_bob, t}));
      const auto ea = wire::decode_sample(receive(*line_alice.a));
      const auto eb = wire::decode_sample(receive(*line_bob.a));
      res.transcript.analog.append(ea);
      alice.observe(k, phase, ea.observation);
      bob.observe(k, phase, eb.observation);

      // Authenticated end-to-end comparison, checked on both sides.
      const auto ra = defense::make_report(Role::Alice, k, phase, ea.observation, auth_key, cfg.mac_digest);
      const auto rb = defense::make_report(Role::Bob, k, phase, eb.observation, auth_key, cfg.mac_digest);
      digital.a->send(defense::encode_report(ra));
      digital.b->send(defense::encode_report(rb));
      const auto bob_got = defense::decode_report(receive(*digital.b));
      const auto alice_got = defense::decode_report(receive(*digital.a));
      auto va = defense::verify_round(ra, alice_got, auth_key, cfg.defense_tolerance, cfg.mac_digest);
      auto vb = defense::verify_round(bob_got, rb, auth_key, cfg.defense_tolerance, cfg.mac_digest);
      res.defense.push_back({Role::Alice, va});
      res.defense.push_back({Role::Bob, vb});
    }

    std::vector<std::string> problems;
    try {
      out.alice_view = alice.complete_round();
    } catch (const Error& e) {
      problems.push_back(std::string("ALICE: ") + e.what());
    }
    try {
      out.bob_view = bob.complete_round();
    } catch (const Error& e) {
      problems.push_back(std::string("BOB: ") + e.what());
    }
    try {
      const auto snap = tap.snapshot();
      out.eve_x = eve::eve_x_values(snap, k);
      if (auto base = snap.find(k, Phase::Baseline)) out.eve_voltages = eve::eve_recover_voltages(*out.eve_x, *base);
    } catch (const Error& e) {
      problems.push_back(std::string("EVE: ") + e.what());
    }
    for (std::size_t i = 0; i < problems.size(); ++i) out.error += (i ? "; " : "") + problems[i];
    if (!out.error.empty()) res.errors.push_back("round " + std::to_string(k) + ": " + out.error);

    // Eve already holds R_S: she reads each round off as it completes.
    if (cfg.compromise == Compromise::RsBefore && !noisy) {
      try {
        incremental = eve::eve_crack_with_secret(tap, r_s, {pal.p_a, pal.p_b});
      } catch (const Error& e) {
        res.errors.push_back(std::string("crack: ") + e.what());
      }
    }
    res.rounds.push_back(std::move(out));
  }

  res.eve_recording = tap.snapshot();
  try {
    res.alice_key = alice.key(pal.p_a, pal.p_b);
    res.bob_key = bob.key(pal.p_a, pal.p_b);
  } catch (const Error& e) {
    res.errors.push_back(std::string("key: ") + e.what());
  }
  // A party's ledger only holds rounds it completed; both must hold all.
  res.keys_agree = res.alice_key == res.bob_key && res.alice_key.provenance.size() == cfg.rounds;

  if (cfg.compromise != Compromise::None && !noisy) {
    if (cfg.compromise == Compromise::RsBefore) {
      res.crack = incremental;
    } else {
      try {
        res.crack = eve::eve_crack_with_secret(tap, r_s, {pal.p_a, pal.p_b});
      } catch (const Error& e) {
        res.errors.push_back(std::string("crack: ") + e.what());
      }
    }
  }
  if (!noisy && pal.p_s.size() <= cfg.entropy_cap)
    res.posterior = entropy::brute_force_posterior(tap, pal.p_s, pal.p_a, pal.p_b);
}

void run_expander(ExperimentResult& res) {
  const auto& cfg = res.config;
  const auto& pal = cfg.palettes;
  const BigInt s = boost::multiprecision::numerator(res.r_s);
  const Palette draw_a = simulation::draw_palette_a(cfg);
  const Palette draw_b = simulation::draw_palette_b(cfg);
  Rng alice_rng = simulation::party_rng(cfg, Role::Alice);
  Rng bob_rng = simulation::party_rng(cfg, Role::Bob);

  std::vector<BigInt> ra, rb;
  for (std::uint64_t k = 0; k < cfg.rounds; ++k) {
    ra.push_back(boost::multiprecision::numerator(draw_a[uniform_index(alice_rng, draw_a.size())]));
    rb.push_back(boost::multiprecision::numerator(draw_b[uniform_index(bob_rng, draw_b.size())]));
  }

  std::vector<expander::ExpanderMessage> tapped;
  auto digital = transport::make_link(cfg.transport, [&](transport::Direction, wire::Frame& f) {
    if (f.type == wire::MessageType::ExpanderMsg) tapped.push_back(wire::decode_expander(f));
  });

  // Alternate chunks so that each direction stays within one chunk in flight.
  std::vector<BigInt> got_a(cfg.rounds), got_b(cfg.rounds);  // what Bob and Alice recover
  std::uint64_t t = 0;
  for (std::uint64_t first = 0; first < cfg.rounds; first += kExpanderChunk) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kExpanderChunk, cfg.rounds - first));
    const auto ma = expander::expand(s, std::span(ra).subspan(first, n), cfg.modulus, Role::Alice, first);
    const auto mb = expander::expand(s, std::span(rb).subspan(first, n), cfg.modulus, Role::Bob, first);
    digital.a->send(wire::encode_expander(ma));
    const auto at_bob = wire::decode_expander(receive(*digital.b));
    res.transcript.expander.push_back({at_bob, t++});
    digital.b->send(wire::encode_expander(mb));
    const auto at_alice = wire::decode_expander(receive(*digital.a));
    res.transcript.expander.push_back({at_alice, t++});

    const auto rec_a = expander::recover_partner_randoms(at_bob, s, cfg.modulus);
    const auto rec_b = expander::recover_partner_randoms(at_alice, s, cfg.modulus);
    std::copy(rec_a.begin(), rec_a.end(), got_a.begin() + static_cast<std::ptrdiff_t>(first));
    std::copy(rec_b.begin(), rec_b.end(), got_b.begin() + static_cast<std::ptrdiff_t>(first));
  }
  res.eve_messages = tapped;

  const auto xs = entropy::x_values_from_messages(tapped);
  std::vector<protocol::KeyMaterial> alice_material, bob_material;
  for (std::uint64_t k = 0; k < cfg.rounds; ++k) {
    RoundOutcome out;
    out.round_k = k;
    out.r_a = Rational(ra[k]);
    out.r_b = Rational(rb[k]);
    if (k < xs.size()) out.eve_x = xs[k];
    alice_material.push_back({k, Rational(ra[k]), Rational(got_b[k])});
    bob_material.push_back({k, Rational(got_a[k]), Rational(rb[k])});
    res.rounds.push_back(std::move(out));
  }
  try {
    res.alice_key = protocol::derive_key(alice_material, pal.p_a, pal.p_b);
    res.bob_key = protocol::derive_key(bob_material, pal.p_a, pal.p_b);
  } catch (const Error& e) {
    res.errors.push_back(std::string("key: ") + e.what());
  }
  res.keys_agree = res.alice_key == res.bob_key && res.alice_key.provenance.size() == cfg.rounds;

  if (cfg.compromise != Compromise::None) {
    try {
      res.crack = crack_transcript(res.transcript, res.r_s, pal);
    } catch (const Error& e) {
      res.errors.push_back(std::string("crack: ") + e.what());
    }
  }
  if (pal.p_s.size() <= cfg.entropy_cap)
    res.posterior = entropy::brute_force_posterior(xs, pal.p_s, pal.p_a, pal.p_b,
                                                   cfg.mode == Mode::ExpanderModular ? cfg.modulus : std::nullopt);
}

std::vector<eve::XValues> transcript_x_values(const io::TranscriptFile& file) {
  if (file.mode != Mode::Circuit) {
    std::vector<expander::ExpanderMessage> msgs;
    for (const auto& r : file.expander) msgs.push_back(r.message);
    return entropy::x_values_from_messages(msgs);
  }
  std::vector<eve::XValues> xs;
  for (auto k : file.analog.rounds()) {
    try {
      xs.push_back(eve::eve_x_values(file.analog, k));
    } catch (const Error& e) {
      if (e.code() != Errc::IncompleteRound) throw;
    }
  }
  return xs;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult res;
  res.config = config;
  res.r_s = simulation::shared_rs(config);
  const auto auth_key = simulation::auth_key(config);
  res.transcript.config_hash = config_hash(config);
  res.transcript.mode = config.mode;
  res.transcript.modulus = config.mode == Mode::ExpanderModular ? config.modulus : std::nullopt;

  if (config.mode == Mode::Circuit) run_circuit(res, auth_key);
  else run_expander(res);

  if (res.crack) res.crack_matches = crack_agrees(*res.crack, res.alice_key);
  const bool defense_alarm =
      std::any_of(res.defense.begin(), res.defense.end(), [](const DefenseRecord& d) { return d.verdict.alarm; });
  // Eve's own failures (a crack that does not fit, say) are not the parties' concern.
  const bool party_failure = std::any_of(res.rounds.begin(), res.rounds.end(), [&](const RoundOutcome& r) {
    return config.mode == Mode::Circuit && (!r.alice_view || !r.bob_view);
  });
  res.alarm = defense_alarm || party_failure || !res.keys_agree;
  return res;
}

std::vector<json> report_records(const ExperimentResult& res) {
  std::vector<json> out;
  const auto& cfg = res.config;

  json c;
  c["record"] = "config";
  c["config_hash"] = res.transcript.config_hash;
  c["mode"] = std::string(to_string(cfg.mode));
  c["rounds"] = cfg.rounds;
  c["seed"] = cfg.seed;
  c["compromise"] = std::string(to_string(cfg.compromise));
  c["transport"] = std::string(to_string(cfg.transport));
  if (cfg.attack) c["inject"] = rational_json(cfg.attack->i_inject.value());
  out.push_back(std::move(c));

  for (const auto& r : res.rounds) {
    json j;
    j["record"] = "round";
    j["round"] = r.round_k;
    j["r_a"] = rational_json(r.r_a);
    j["r_b"] = rational_json(r.r_b);
    if (cfg.mode == Mode::Circuit) {
      j["u_a"] = rational_json(r.u_a);
      j["u_b"] = rational_json(r.u_b);
    }
    if (r.alice_view) {
      j["alice_sees_r_b"] = rational_json(r.alice_view->r.value());
      j["alice_sees_u_b"] = rational_json(r.alice_view->u.value());
    }
    if (r.bob_view) {
      j["bob_sees_r_a"] = rational_json(r.bob_view->r.value());
      j["bob_sees_u_a"] = rational_json(r.bob_view->u.value());
    }
    if (r.eve_x) {
      j["eve_x_a"] = rational_json(r.eve_x->x_a);
      j["eve_x_b"] = rational_json(r.eve_x->x_b);
    }
    if (r.eve_voltages) {
      j["eve_u_a"] = rational_json(r.eve_voltages->u_a.value());
      j["eve_u_b"] = rational_json(r.eve_voltages->u_b.value());
    }
    if (!r.error.empty()) j["error"] = r.error;
    out.push_back(std::move(j));
  }

  for (const auto& d : res.defense) {
    json j;
    j["record"] = "defense";
    j["verifier"] = std::string(protocol::to_string(d.verifier));
    j["round"] = d.verdict.round_k;
    j["phase"] = std::string(protocol::to_string(d.verdict.phase));
    j["alarm"] = d.verdict.alarm;
    j["reason"] = std::string(defense::to_string(d.verdict.reason));
    out.push_back(std::move(j));
  }

  json k;
  k["record"] = "key";
  k["alice"] = key_bits(res.alice_key);
  k["bob"] = key_bits(res.bob_key);
  k["bits"] = res.alice_key.bits.size();
  k["agree"] = res.keys_agree;
  out.push_back(std::move(k));

  if (res.crack) {
    json j;
    j["record"] = "crack";
    j["key"] = key_bits(res.crack->key);
    j["complete"] = res.crack->complete;
    j["matches_alice"] = res.crack_matches;
    out.push_back(std::move(j));
  }
  if (res.posterior) {
    json j;
    j["record"] = "posterior";
    j["rounds_used"] = res.posterior->rounds_used;
    j["consistent"] = res.posterior->consistent_count();
    j["h_rs_bits"] = res.posterior->h_rs_bits;
    j["h_key_bits"] = res.posterior->h_key_bits;
    out.push_back(std::move(j));
  }

  json s;
  s["record"] = "summary";
  s["alarm"] = res.alarm;
  s["forged_reports"] = res.forged_reports;
  s["errors"] = res.errors;
  out.push_back(std::move(s));
  return out;
}

std::string summary(const ExperimentResult& res) {
  std::ostringstream ss;
  ss << "mode " << to_string(res.config.mode) << ", " << res.config.rounds << " round(s), key "
     << res.alice_key.bits.size() << " bit(s), keys " << (res.keys_agree ? "agree" : "DISAGREE") << '\n';
  std::size_t alarms = 0;
  for (const auto& d : res.defense) alarms += d.verdict.alarm ? 1 : 0;
  if (!res.defense.empty()) ss << "defense: " << alarms << " alarm(s) over " << res.defense.size() << " check(s)\n";
  if (res.forged_reports) ss << "forged reports: " << res.forged_reports << '\n';
  if (res.crack)
    ss << "crack with known R_S: " << (res.crack_matches ? "recovers the key" : "does not recover the key") << '\n';
  if (res.posterior)
    ss << "posterior: " << res.posterior->consistent_count() << " of " << res.posterior->candidates.size()
       << " R_S candidates consistent, H(R_S) = " << res.posterior->h_rs_bits
       << " bits, H(key) = " << res.posterior->h_key_bits << " bits\n";
  for (const auto& e : res.errors) ss << "error: " << e << '\n';
  ss << (res.alarm ? "ALARM" : "OK") << '\n';
  return ss.str();
}

void write_outputs(const ExperimentResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::save_transcript(dir / "transcript.jsonl", res.transcript);
  std::ofstream out(dir / "report.jsonl", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + (dir / "report.jsonl").string());
  for (const auto& r : report_records(res)) out << r.dump() << '\n';
}

eve::CrackResult crack_transcript(const io::TranscriptFile& file, const Rational& r_s, const PaletteSet& palettes) {
  if (file.mode == Mode::Circuit)
    return eve::eve_crack_with_secret(file.analog, circuit::Resistance(r_s), {palettes.p_a, palettes.p_b});

  if (!is_integer(r_s)) throw Error(Errc::InvalidArgument, "expander R_S must be an integer");
  std::vector<expander::ExpanderMessage> msgs;
  for (const auto& r : file.expander) msgs.push_back(r.message);
  const auto xs = entropy::x_values_from_messages(msgs);

  eve::CrackResult out;
  std::vector<protocol::KeyMaterial> material;
  for (const auto& x : xs) {
    Rational a = x.x_a - r_s;
    Rational b = x.x_b - r_s;
    if (file.modulus) {
      const Rational q(*file.modulus);
      if (a < 0) a += q;
      if (b < 0) b += q;
    }
    out.rounds.push_back({x.round_k, a, b, std::nullopt, std::nullopt});
    material.push_back({x.round_k, a, b});
  }
  out.key = protocol::derive_key(material, palettes.p_a, palettes.p_b);
  std::size_t alice_count = 0, bob_count = 0;
  for (const auto& m : msgs) (m.sender == Role::Alice ? alice_count : bob_count) += m.x_list.size();
  out.complete = !xs.empty() && alice_count == bob_count && alice_count == xs.size();
  return out;
}

eve::CrackResult replay_attack(const std::filesystem::path& path, const Rational& r_s, const PaletteSet& palettes) {
  return crack_transcript(io::load_transcript(path), r_s, palettes);
}

entropy::PosteriorReport transcript_posterior(const io::TranscriptFile& file, const PaletteSet& palettes,
                                              std::optional<std::uint64_t> max_rounds) {
  auto xs = transcript_x_values(file);
  if (max_rounds && xs.size() > *max_rounds) xs.resize(static_cast<std::size_t>(*max_rounds));
  return entropy::brute_force_posterior(xs, palettes.p_s, palettes.p_a, palettes.p_b,
                                        file.mode == Mode::ExpanderModular ? file.modulus : std::nullopt);
}

std::uint64_t transcript_round_count(const io::TranscriptFile& file) { return transcript_x_values(file).size(); }

}  // namespace kexlab::experiment
