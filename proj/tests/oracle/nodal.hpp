#pragma once

// Test-only modified nodal analysis over exact rationals. Deliberately
// shares nothing with the library's closed-form loop solution: it stamps a
// general netlist and solves it by Gaussian elimination.

#include "kexlab/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using kexlab::Rational;

class Netlist {
 public:
  // Node 0 is ground.
  explicit Netlist(std::size_t nodes) : nodes_(nodes) {}

  void resistor(std::size_t a, std::size_t b, Rational ohms) { resistors_.push_back({a, b, std::move(ohms)}); }
  // V(plus) - V(minus) = volts. Returns the branch index for current().
  std::size_t voltage_source(std::size_t plus, std::size_t minus, Rational volts) {
    sources_.push_back({plus, minus, std::move(volts)});
    return sources_.size() - 1;
  }
  // Current pushed into `node` from ground.
  void current_source(std::size_t node, Rational amperes) { injections_.push_back({node, 0, std::move(amperes)}); }

  struct Solution {
    std::vector<Rational> v;               // v[0] == 0
    std::vector<Rational> source_current;  // into the + terminal from outside
  };

  Solution solve() const {
    const std::size_t n = nodes_ - 1;
    const std::size_t m = sources_.size();
    const std::size_t dim = n + m;
    std::vector<std::vector<Rational>> a(dim, std::vector<Rational>(dim + 1, Rational(0)));

    auto at = [&](std::size_t node) { return node - 1; };
    for (const auto& r : resistors_) {
      const Rational g = Rational(1) / r.value;
      if (r.a) a[at(r.a)][at(r.a)] += g;
      if (r.b) a[at(r.b)][at(r.b)] += g;
      if (r.a && r.b) {
        a[at(r.a)][at(r.b)] -= g;
        a[at(r.b)][at(r.a)] -= g;
      }
    }
    for (const auto& i : injections_)
      if (i.a) a[at(i.a)][dim] += i.value;
    for (std::size_t k = 0; k < m; ++k) {
      const auto& s = sources_[k];
      if (s.a) {
        a[at(s.a)][n + k] += 1;
        a[n + k][at(s.a)] += 1;
      }
      if (s.b) {
        a[at(s.b)][n + k] -= 1;
        a[n + k][at(s.b)] -= 1;
      }
      a[n + k][dim] = s.value;
    }

    for (std::size_t col = 0; col < dim; ++col) {
      std::size_t piv = col;
      while (piv < dim && a[piv][col] == 0) ++piv;
      if (piv == dim) throw std::runtime_error("singular netlist");
      std::swap(a[piv], a[col]);
      for (std::size_t row = 0; row < dim; ++row) {
        if (row == col || a[row][col] == 0) continue;
        const Rational f = a[row][col] / a[col][col];
        for (std::size_t c = col; c <= dim; ++c) a[row][c] -= f * a[col][c];
      }
    }

    Solution out;
    out.v.assign(nodes_, Rational(0));
    for (std::size_t i = 0; i < n; ++i) out.v[i + 1] = a[i][dim] / a[i][i];
    // MNA unknown is the current flowing out of the + terminal into the source.
    for (std::size_t k = 0; k < m; ++k) out.source_current.push_back(-(a[n + k][dim] / a[n + k][n + k]));
    return out;
  }

 private:
  struct Element {
    std::size_t a, b;
    Rational value;
  };
  std::size_t nodes_;
  std::vector<Element> resistors_, sources_, injections_;
};

// The two-party loop as a netlist:
//   1 --R_A-- 2 --R_S-- 3 (wire) --R_S-- 4 --R_B-- 5, sources at 1 and 5.
struct LoopAnswer {
  Rational u_c;
  Rational i_alice;  // through Alice's R_S toward the wire
  Rational i_bob;    // through Bob's R_S away from the wire
};

inline LoopAnswer solve_loop(const Rational& r_s, const Rational& r_a, const Rational& r_b, const Rational& u_a,
                             const Rational& u_b, const Rational& i_inject = Rational(0)) {
  Netlist net(6);
  net.voltage_source(1, 0, u_a);
  net.voltage_source(5, 0, u_b);
  net.resistor(1, 2, r_a);
  net.resistor(2, 3, r_s);
  net.resistor(3, 4, r_s);
  net.resistor(4, 5, r_b);
  if (i_inject != 0) net.current_source(3, i_inject);
  const auto s = net.solve();
  return {s.v[3], (s.v[2] - s.v[3]) / r_s, (s.v[3] - s.v[4]) / r_s};
}

}  // namespace oracle
