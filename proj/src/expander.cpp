#include "kexlab/expander.hpp"

#include "kexlab/errors.hpp"

#include <algorithm>

namespace kexlab::expander {

namespace {

BigInt reduce(const BigInt& v, const BigInt& q) {
  BigInt r = v % q;
  if (r < 0) r += q;
  return r;
}

void check_modulus(const std::optional<BigInt>& modulus) {
  if (modulus && *modulus < 2) throw Error(Errc::OutOfRange, "modulus must be at least 2");
}

void check_residue(const BigInt& v, const BigInt& q) {
  if (v < 0 || v >= q) throw Error(Errc::OutOfRange, v.str() + " is not in [0, " + q.str() + ")");
}

}  // namespace

ExpanderMessage expand(const BigInt& r_s, std::span<const BigInt> randoms, const std::optional<BigInt>& modulus,
                       Role sender, std::uint64_t k_first) {
  check_modulus(modulus);
  ExpanderMessage msg{sender, k_first, modulus, {}};
  msg.x_list.reserve(randoms.size());
  if (modulus) check_residue(r_s, *modulus);
  for (const auto& r : randoms) {
    if (modulus) {
      check_residue(r, *modulus);
      msg.x_list.push_back(reduce(r_s + r, *modulus));
    } else {
      msg.x_list.push_back(r_s + r);
    }
  }
  return msg;
}

std::vector<BigInt> recover_partner_randoms(const ExpanderMessage& msg, const BigInt& r_s,
                                            const std::optional<BigInt>& modulus) {
  check_modulus(modulus);
  std::vector<BigInt> out;
  out.reserve(msg.x_list.size());
  for (const auto& x : msg.x_list) out.push_back(modulus ? reduce(x - r_s, *modulus) : BigInt(x - r_s));
  return out;
}

bool equivalence_check(const protocol::Transcript& circuit_transcript, const BigInt& r_s,
                       std::span<const RoundTruth> round_secrets) {
  for (std::uint64_t k : circuit_transcript.rounds()) {
    auto truth = std::find_if(round_secrets.begin(), round_secrets.end(),
                              [k](const RoundTruth& t) { return t.round_k == k; });
    if (truth == round_secrets.end()) return false;
    eve::XValues x;
    try {
      x = eve::eve_x_values(circuit_transcript, k);
    } catch (const Error&) {
      return false;
    }
    const BigInt ra[] = {truth->r_a};
    const BigInt rb[] = {truth->r_b};
    const auto xa = expand(r_s, ra).x_list.front();
    const auto xb = expand(r_s, rb).x_list.front();
    if (x.x_a != Rational(xa) || x.x_b != Rational(xb)) return false;
  }
  return true;
}

}  // namespace kexlab::expander
