#include "kexlab/errors.hpp"
#include "kexlab/expander.hpp"
#include "kexlab/eavesdropper.hpp"
#include "kexlab/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace kexlab;
using namespace kexlab::expander;

namespace {

std::vector<BigInt> ints(std::initializer_list<long long> v) {
  std::vector<BigInt> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

protocol::SharedSecret shared(long long rs) {
  return protocol::SharedSecret(circuit::Resistance(rs), std::vector<std::uint8_t>(16, 2));
}

}  // namespace

TEST_CASE("plain expansion of the published number") {
  const auto r = ints({809});
  const auto msg = expand(75191, r);
  CHECK(msg.x_list == ints({76000}));
  CHECK(recover_partner_randoms(msg, 75191) == ints({809}));
  CHECK(expand(5, std::vector<BigInt>{}).x_list.empty());
}

TEST_CASE("modular expansion") {
  const std::optional<BigInt> q = BigInt(5);
  const auto r = ints({4, 0});
  const auto msg = expand(3, r, q, protocol::Role::Bob, 7);
  CHECK(msg.x_list == ints({2, 3}));
  CHECK(msg.sender == protocol::Role::Bob);
  CHECK(msg.k_first == 7);
  CHECK(recover_partner_randoms(msg, 3, q) == ints({4, 0}));
}

TEST_CASE("modular preconditions") {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  const auto ok = ints({1});
  const auto big = ints({5});
  const auto neg = ints({-1});
  CHECK(code([&] { expand(3, big, BigInt(5)); }) == Errc::OutOfRange);
  CHECK(code([&] { expand(3, neg, BigInt(5)); }) == Errc::OutOfRange);
  CHECK(code([&] { expand(5, ok, BigInt(5)); }) == Errc::OutOfRange);
  CHECK(code([&] { expand(0, ok, BigInt(1)); }) == Errc::OutOfRange);
}

TEST_CASE("property: expand then recover is the identity") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const bool modular = i % 2;
    const BigInt q = BigInt(2 + uniform_index(rng, 1u << 20));
    const BigInt s = modular ? BigInt(uniform_index(rng, q.convert_to<std::uint64_t>()))
                             : BigInt(uniform_index(rng, 1u << 30));
    std::vector<BigInt> r;
    for (std::uint64_t j = 0, n = uniform_index(rng, 8); j < n; ++j)
      r.emplace_back(modular ? uniform_index(rng, q.convert_to<std::uint64_t>()) : uniform_index(rng, 1u << 30));
    const std::optional<BigInt> mod = modular ? std::optional<BigInt>(q) : std::nullopt;
    CHECK(recover_partner_randoms(expand(s, r, mod), s, mod) == r);
  }
}

TEST_CASE("circuit and expander expose the same sums") {
  const auto r = protocol::run_round(0, shared(1000), {circuit::Resistance(2000), circuit::Voltage(5), 0},
                                     {circuit::Resistance(3000), circuit::Voltage(1), 0}, circuit::Voltage(1),
                                     circuit::Voltage(1));
  const std::vector<RoundTruth> truth{{0, 2000, 3000}};
  CHECK(equivalence_check(r.segment, 1000, truth));

  // Tamper with one observation.
  protocol::Transcript tampered;
  auto entries = r.segment.entries();
  entries[1].observation.u_c = circuit::Voltage(entries[1].observation.u_c.value() + Rational(1, 1000));
  for (const auto& e : entries) tampered.append(e);
  CHECK_FALSE(equivalence_check(tampered, 1000, truth));

  CHECK(equivalence_check(protocol::Transcript{}, 1000, truth));
  CHECK_FALSE(equivalence_check(r.segment, 1000, std::vector<RoundTruth>{}));
}

TEST_CASE("property: equivalence over 500 random circuit runs") {
  Rng rng(500);
  for (std::uint64_t k = 0; k < 500; ++k) {
    const long long rs = 1 + static_cast<long long>(uniform_index(rng, 1000000));
    const long long ra = 1 + static_cast<long long>(uniform_index(rng, 1000000));
    const long long rb = 1 + static_cast<long long>(uniform_index(rng, 1000000));
    const auto r = protocol::run_round(
        k, shared(rs), {circuit::Resistance(ra), circuit::Voltage(static_cast<long long>(uniform_index(rng, 1000))), 0},
        {circuit::Resistance(rb), circuit::Voltage(-static_cast<long long>(uniform_index(rng, 1000))), 0},
        circuit::Voltage(1), circuit::Voltage(1));
    const std::vector<RoundTruth> truth{{k, ra, rb}};
    CHECK(equivalence_check(r.segment, rs, truth));
  }
}

TEST_CASE("modular x values are uniform whatever R_S is") {
  // Chi-square on 20000 draws over q = 16 cells, for two different secrets.
  const std::uint64_t q = 16;
  for (long long rs : {0LL, 11LL}) {
    Rng rng(static_cast<std::uint64_t>(rs) + 1);
    std::vector<BigInt> r;
    const int n = 20000;
    for (int i = 0; i < n; ++i) r.emplace_back(uniform_index(rng, q));
    const auto msg = expand(rs, r, BigInt(q));
    std::vector<double> counts(q, 0);
    for (const auto& x : msg.x_list) counts[x.convert_to<std::size_t>()] += 1;
    double chi2 = 0;
    const double e = static_cast<double>(n) / q;
    for (double c : counts) chi2 += (c - e) * (c - e) / e;
    // 15 degrees of freedom; 0.1% critical value is 37.7.
    CHECK(chi2 < 37.7);
  }
}
