#pragma once

// Exact DC model of the two-party resistive loop.
//
//   U_A --[R_A]--[R_S]--+---- public wire ----+--[R_S]--[R_B]-- U_B
//                       |   (U_c, I_c  ->)     |
//
// Both sources are referenced to a common ground. Positive I_c flows from
// Alice's side toward Bob's side. The wire is ideal (no series impedance, no
// shunt), so U_c and I_c are the same at every point along it.

#include "kexlab/rational.hpp"

#include <cstdint>
#include <utility>

namespace kexlab::circuit {

class Resistance {
 public:
  // Throws Error(InvalidArgument) unless ohms > 0.
  explicit Resistance(Rational ohms);

  const Rational& value() const noexcept { return ohms_; }

  friend bool operator==(const Resistance&, const Resistance&) = default;

 private:
  Rational ohms_;
};

class Voltage {
 public:
  Voltage() = default;
  explicit Voltage(Rational volts) : volts_(std::move(volts)) {}

  const Rational& value() const noexcept { return volts_; }

  friend bool operator==(const Voltage&, const Voltage&) = default;

 private:
  Rational volts_;
};

class Current {
 public:
  Current() = default;
  explicit Current(Rational amperes) : amperes_(std::move(amperes)) {}

  const Rational& value() const noexcept { return amperes_; }

  friend bool operator==(const Current&, const Current&) = default;

 private:
  Rational amperes_;
};

struct LoopParams {
  Resistance r_s;
  Resistance r_a;
  Resistance r_b;
  Voltage u_a;
  Voltage u_b;
};

struct LineObservation {
  Voltage u_c;
  Current i_c;

  friend bool operator==(const LineObservation&, const LineObservation&) = default;
};

// Floating-point measurement, produced only by the optional noise layer.
struct NoisyObservation {
  double u_c = 0.0;
  double i_c = 0.0;
};

LineObservation solve_loop(const LoopParams& params);

struct PerturbedPair {
  LineObservation baseline;
  LineObservation perturbed;
};

// Exactly one of the deltas must be nonzero; throws BothDeltasZero /
// BothDeltasNonzero otherwise.
PerturbedPair perturbed_pair(const LoopParams& params, const Voltage& delta_u_a, const Voltage& delta_u_b);

// |dU_c / dI_c| between two observations. Throws ZeroCurrentDelta when the
// currents coincide.
Rational differential_slope(const LineObservation& baseline, const LineObservation& perturbed);

double differential_slope(const NoisyObservation& baseline, const NoisyObservation& perturbed);

// Adds independent zero-mean Gaussian errors to both quantities. Deterministic
// for a given seed; sigma == 0 leaves the quantity at its exact value rounded
// to double. Throws InvalidArgument on a negative sigma.
NoisyObservation observe_with_noise(const LineObservation& obs, double sigma_u, double sigma_i,
                                    std::uint64_t rng_seed);

// Exact rational image of a floating-point measurement.
LineObservation to_exact(const NoisyObservation& obs);

}  // namespace kexlab::circuit
