#include "kexlab/entropy.hpp"

#include "kexlab/errors.hpp"
#include "kexlab/simulation.hpp"

#include <cmath>
#include <map>
#include <thread>

namespace kexlab::entropy {

std::size_t PosteriorReport::consistent_count() const {
  std::size_t n = 0;
  for (const auto& c : candidates) n += c.consistent ? 1 : 0;
  return n;
}

namespace {

// Enumeration is split across threads only above this many candidates.
constexpr std::size_t kParallelThreshold = 512;

Rational reduce(const Rational& v, const BigInt& q) {
  BigInt n = boost::multiprecision::numerator(v) % q;
  if (n < 0) n += q;
  return Rational(n);
}

Candidate evaluate(const Rational& s, std::span<const eve::XValues> rounds, const Palette& p_a, const Palette& p_b,
                   const std::optional<BigInt>& modulus) {
  Candidate c{s, true, std::nullopt, std::nullopt};
  BitString key;
  for (const auto& x : rounds) {
    Rational ra = x.x_a - s;
    Rational rb = x.x_b - s;
    if (modulus) {
      ra = reduce(ra, *modulus);
      rb = reduce(rb, *modulus);
    }
    auto ia = p_a.index_of(ra);
    auto ib = p_b.index_of(rb);
    if (!ia || !ib) {
      c.consistent = false;
      c.eliminated_at = x.round_k;
      return c;
    }
    key.append(*ia, p_a.bit_width());
    key.append(*ib, p_b.bit_width());
  }
  c.key = std::move(key);
  return c;
}

// H = log2(n) - (1/n) sum_i c_i log2 c_i for a uniform posterior over n
// candidates grouped into classes of sizes c_i. All-singleton classes give
// exactly log2(n), the same double as the candidate entropy.
double grouped_entropy(std::size_t n, const std::vector<std::size_t>& class_sizes) {
  if (n == 0) return 0.0;
  double correction = 0.0;
  for (auto c : class_sizes)
    if (c > 1) correction += static_cast<double>(c) * std::log2(static_cast<double>(c));
  return std::log2(static_cast<double>(n)) - correction / static_cast<double>(n);
}

}  // namespace

PosteriorReport brute_force_posterior(std::span<const eve::XValues> rounds, const Palette& p_s, const Palette& p_a,
                                      const Palette& p_b, const std::optional<BigInt>& modulus) {
  PosteriorReport report;
  report.rounds_used = rounds.size();
  const auto& values = p_s.values();
  report.candidates.resize(values.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) report.candidates[i] = evaluate(values[i], rounds, p_a, p_b, modulus);
  };
  const std::size_t threads = values.size() >= kParallelThreshold
                                  ? std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8))
                                  : 1;
  if (threads == 1) {
    work(0, values.size());
  } else {
    // Each thread owns a disjoint slice, so the merge order is the palette order.
    std::vector<std::thread> pool;
    const std::size_t chunk = (values.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(values.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  const std::size_t n = report.consistent_count();
  report.posterior.assign(values.size(), 0.0);
  std::map<std::string, std::size_t> key_classes;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& c = report.candidates[i];
    if (!c.consistent) continue;
    report.posterior[i] = 1.0 / static_cast<double>(n);
    ++key_classes[c.key->to_string()];
  }
  report.h_rs_bits = grouped_entropy(n, std::vector<std::size_t>(n, 1));
  if (rounds.empty()) {
    // No key bits exist yet; every future key is fixed by R_S alone.
    report.h_key_bits = report.h_rs_bits;
  } else {
    std::vector<std::size_t> sizes;
    for (const auto& [key, count] : key_classes) sizes.push_back(count);
    report.h_key_bits = grouped_entropy(n, sizes);
  }
  return report;
}

PosteriorReport brute_force_posterior(const eve::EveRecording& recording, const Palette& p_s, const Palette& p_a,
                                      const Palette& p_b) {
  const auto transcript = recording.snapshot();
  std::vector<eve::XValues> rounds;
  for (auto k : transcript.rounds()) {
    try {
      rounds.push_back(eve::eve_x_values(transcript, k));
    } catch (const Error& e) {
      if (e.code() != Errc::IncompleteRound) throw;
    }
  }
  return brute_force_posterior(rounds, p_s, p_a, p_b);
}

std::vector<eve::XValues> x_values_from_messages(std::span<const expander::ExpanderMessage> messages) {
  std::map<std::uint64_t, std::pair<std::optional<BigInt>, std::optional<BigInt>>> by_round;
  for (const auto& m : messages) {
    for (std::size_t i = 0; i < m.x_list.size(); ++i) {
      auto& slot = by_round[m.k_first + i];
      (m.sender == protocol::Role::Alice ? slot.first : slot.second) = m.x_list[i];
    }
  }
  std::vector<eve::XValues> out;
  for (const auto& [k, pair] : by_round)
    if (pair.first && pair.second) out.push_back({Rational(*pair.first), Rational(*pair.second), k});
  return out;
}

std::vector<EntropyPoint> entropy_vs_rounds(const ExperimentConfig& config, std::uint64_t max_rounds) {
  const auto& pal = config.palettes;
  const Rational r_s = simulation::shared_rs(config);
  const Palette draw_a = simulation::draw_palette_a(config);
  const Palette draw_b = simulation::draw_palette_b(config);
  Rng alice_rng = simulation::party_rng(config, protocol::Role::Alice);
  Rng bob_rng = simulation::party_rng(config, protocol::Role::Bob);
  const std::optional<BigInt> modulus = config.mode == Mode::ExpanderModular ? config.modulus : std::nullopt;

  std::vector<eve::XValues> xs;
  std::vector<EntropyPoint> out;
  const protocol::SharedSecret shared(circuit::Resistance(config.mode == Mode::Circuit ? r_s : Rational(1)),
                                      simulation::auth_key(config));
  for (std::uint64_t k = 0; k < max_rounds; ++k) {
    if (config.mode == Mode::Circuit) {
      const auto alice = protocol::draw_round_secrets(draw_a, pal.p_ua, alice_rng);
      const auto bob = protocol::draw_round_secrets(draw_b, pal.p_ub, bob_rng);
      auto round = protocol::run_round(k, shared, alice, bob, config.delta_u_a, config.delta_u_b);
      xs.push_back(eve::eve_x_values(round.segment, k));
    } else {
      // Expander randoms may be zero, so they are not resistances.
      const BigInt s = boost::multiprecision::numerator(r_s);
      const BigInt ra[] = {boost::multiprecision::numerator(draw_a[uniform_index(alice_rng, draw_a.size())])};
      const BigInt rb[] = {boost::multiprecision::numerator(draw_b[uniform_index(bob_rng, draw_b.size())])};
      const auto xa = expander::expand(s, ra, modulus).x_list.front();
      const auto xb = expander::expand(s, rb, modulus).x_list.front();
      xs.push_back({Rational(xa), Rational(xb), k});
    }

    const auto report = brute_force_posterior(xs, pal.p_s, pal.p_a, pal.p_b, modulus);
    const auto single = brute_force_posterior(std::span(xs).last(1), pal.p_s, pal.p_a, pal.p_b, modulus);
    out.push_back({k + 1, report.h_rs_bits, report.h_key_bits,
                   (k + 1) * (pal.p_a.bit_width() + pal.p_b.bit_width()),
                   single.consistent_count() < pal.p_s.size()});
  }
  return out;
}

}  // namespace kexlab::entropy
