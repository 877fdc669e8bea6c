#include "kexlab/circuit.hpp"

#include "kexlab/errors.hpp"

#include <cmath>
#include <random>

namespace kexlab::circuit {

Resistance::Resistance(Rational ohms) : ohms_(std::move(ohms)) {
  if (ohms_ <= 0) throw Error(Errc::InvalidArgument, "resistance must be positive, got " + format_rational(ohms_));
}

LineObservation solve_loop(const LoopParams& p) {
  const Rational& rs = p.r_s.value();
  const Rational& ra = p.r_a.value();
  const Rational& rb = p.r_b.value();
  Rational i_c = (p.u_a.value() - p.u_b.value()) / (ra + 2 * rs + rb);
  Rational u_c = p.u_a.value() - (ra + rs) * i_c;
  return {Voltage(std::move(u_c)), Current(std::move(i_c))};
}

PerturbedPair perturbed_pair(const LoopParams& params, const Voltage& delta_u_a, const Voltage& delta_u_b) {
  const bool a = delta_u_a.value() != 0;
  const bool b = delta_u_b.value() != 0;
  if (a && b) throw Error(Errc::BothDeltasNonzero, "only one side may perturb at a time");
  if (!a && !b) throw Error(Errc::BothDeltasZero, "one side must perturb");

  LoopParams shifted = params;
  if (a) shifted.u_a = Voltage(params.u_a.value() + delta_u_a.value());
  else shifted.u_b = Voltage(params.u_b.value() + delta_u_b.value());
  return {solve_loop(params), solve_loop(shifted)};
}

Rational differential_slope(const LineObservation& baseline, const LineObservation& perturbed) {
  Rational di = perturbed.i_c.value() - baseline.i_c.value();
  if (di == 0) throw Error(Errc::ZeroCurrentDelta, "perturbation produced no current change");
  return abs(Rational((perturbed.u_c.value() - baseline.u_c.value()) / di));
}

double differential_slope(const NoisyObservation& baseline, const NoisyObservation& perturbed) {
  double di = perturbed.i_c - baseline.i_c;
  if (di == 0.0) throw Error(Errc::ZeroCurrentDelta, "perturbation produced no current change");
  return std::fabs((perturbed.u_c - baseline.u_c) / di);
}

NoisyObservation observe_with_noise(const LineObservation& obs, double sigma_u, double sigma_i,
                                    std::uint64_t rng_seed) {
  if (!(sigma_u >= 0.0) || !(sigma_i >= 0.0))
    throw Error(Errc::InvalidArgument, "noise sigma must be non-negative");
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  NoisyObservation out{to_double(obs.u_c.value()), to_double(obs.i_c.value())};
  // Draw both variates unconditionally so the stream layout does not depend on sigma.
  const double nu = unit(rng);
  const double ni = unit(rng);
  if (sigma_u > 0.0) out.u_c += sigma_u * nu;
  if (sigma_i > 0.0) out.i_c += sigma_i * ni;
  return out;
}

LineObservation to_exact(const NoisyObservation& obs) {
  return {Voltage(rational_from_double(obs.u_c)), Current(rational_from_double(obs.i_c))};
}

}  // namespace kexlab::circuit
