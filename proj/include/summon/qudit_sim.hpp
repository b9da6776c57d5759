// Copyright 2026 The summon toolkit developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/** \file qudit_sim.hpp
 *  Dense statevector simulator for prime-dimension qudits.
 *
 *  The global state is kept factored: independent tensor factors are stored
 *  as separate amplitude vectors and merged only when an entangling
 *  operation spans them. Measurements remove qudits (recycling), so the
 *  peak live width stays small even for protocols that touch many wires
 *  over their lifetime.
 *
 *  Measurements come in three flavours so protocol verification can choose
 *  its regime:
 *   - sampled: Born-rule sampling with the state's deterministic generator;
 *   - forced:  project onto a chosen outcome and report its probability
 *              (used to enumerate every measurement branch literally);
 *   - deferred: unitary basis change only, keeping the would-be outcome as
 *              live registers (used to certify all branches at once; see
 *              split_off_product).
 *
 *  Conventions. omega = exp(2*pi*i/p); X|j> = |j+1>, Z|j> = omega^j |j>;
 *  the Bell family is |Phi_ab> = (I (x) X^a Z^b)|Phi> with
 *  |Phi> = p^{-1/2} sum_j |jj>. A Bell measurement of (q1,q2) applies
 *  SUM^{-1}(q1->q2) then the inverse Fourier on q1, after which q1 holds b
 *  and q2 holds a. Teleporting psi through half (e,e') of |Phi> by
 *  measuring (psi,e) with outcome (a,b) leaves X^a Z^{-b} psi on e'; the
 *  correction is X^{-a} followed by Z^{b}.
 */

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace summon {

/** Opaque handle to a live qudit. Invalidated by measurement or discard. */
struct QuditRef {
  int id = -1;
  bool valid() const { return id >= 0; }
  bool operator==(const QuditRef& other) const { return id == other.id; }
  bool operator<(const QuditRef& other) const { return id < other.id; }
};

/** The maximally entangled two-qudit state |Phi> at dimension p. */
Eigen::VectorXcd bell_state(int p);

/** 0.5 * trace norm of (a - b) for hermitian matrices. */
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/** A ((k, 2k-1)) quantum threshold code over F_p (a CSS-style polynomial
 *  code in the Cleve–Gottesman–Lo construction). The secret is the leading
 *  (degree k-1) coefficient of a uniformly superposed polynomial and the
 *  2k-1 shares are its evaluations at the distinct points 0..2k-2. Any k
 *  shares reconstruct the secret exactly; any k-1 shares carry no
 *  information about it. */
struct CssCode {
  int k;
  int p;
  std::vector<int> points;  // evaluation points, size 2k-1

  /** \throws InputError unless p is prime and p >= 2k-1 (need 2k-1 distinct
   *  field points), k >= 1. */
  CssCode(int k, int p);

  int shares() const { return 2 * k - 1; }
};

class SimState {
 public:
  /** An empty state of local dimension p (prime, 2 <= p <= 13). `seed`
   *  drives all sampled measurements deterministically. */
  explicit SimState(int p, std::uint64_t seed = 0);

  int dimension() const { return p_; }
  int live_count() const { return live_count_; }
  int peak_live() const { return peak_live_; }

  /** Allocates a fresh qudit in |0>. */
  QuditRef alloc();
  std::vector<QuditRef> alloc_many(int count);

  /** Allocates two qudits in |Phi>. */
  std::pair<QuditRef, QuditRef> bell_pair();

  /** Removes an unentangled qudit (it must occupy its own tensor factor;
   *  measure first otherwise). \throws ContractViolation if entangled. */
  void discard(QuditRef q);

  /** Overwrites a freshly allocated (still unentangled, |0>) qudit with the
   *  given normalized p-vector; used to prepare test inputs. */
  void set_state(QuditRef q, const Eigen::VectorXcd& amplitudes);

  void apply_x(QuditRef q, int a = 1);
  void apply_z(QuditRef q, int b = 1);
  void apply_fourier(QuditRef q, bool inverse = false);
  /** |x> -> |c*x mod p>, c nonzero. */
  void apply_scalar_mult(QuditRef q, int c);
  /** Any p x p unitary on one qudit. */
  void apply_single_qudit_unitary(QuditRef q, const Eigen::MatrixXcd& u);
  /** |c,t> -> |c, t + scale*c>. */
  void apply_sum(QuditRef control, QuditRef target, int scale = 1);
  /** |a,b> -> omega^{scale*a*b} |a,b>. */
  void apply_czpow(QuditRef a, QuditRef b, int scale = 1);
  /** Exchanges the contents of two wires (tensor-slot relabelling). */
  void swap_wires(QuditRef a, QuditRef b);
  /** Basis permutation |v> -> |M v mod p> over the listed qudits; M must be
   *  an invertible matrix over F_p. */
  void apply_linear_map(const std::vector<QuditRef>& qs,
                        const std::vector<std::vector<int>>& m);

  /** Samples a computational measurement and removes the qudit. */
  int measure_out(QuditRef q);
  /** Projects onto outcome v, removes the qudit, returns the outcome's
   *  probability (0 means the branch is unrealizable and the state is left
   *  unusable). */
  double measure_out_forced(QuditRef q, int v);

  /** Bell-basis measurement of (q1,q2): outcome (a,b) labels |Phi_ab>; both
   *  qudits are removed. */
  std::pair<int, int> measure_bell(QuditRef q1, QuditRef q2);
  double measure_bell_forced(QuditRef q1, QuditRef q2, int a, int b);
  /** Deferred variant: applies the basis change only. Afterwards q1 holds
   *  the would-be outcome b and q2 holds a; both stay live as outcome
   *  registers (read them with controlled gates). */
  void measure_bell_defer(QuditRef q1, QuditRef q2);

  /** Verifies that the pair (q1,q2) is in a product state with the rest of
   *  its factor (top Schmidt coefficient >= 1 - tol across the cut) and, if
   *  so, removes the pair. Used to retire deferred outcome registers after
   *  their last use. Returns false (state untouched) otherwise. */
  bool split_off_product(QuditRef q1, QuditRef q2, double tol = 1e-9);

  /** Removes as many of the listed qudits as possible without disturbing
   *  anything else: a tensor factor consisting only of listed qudits is
   *  dropped outright (an exact partial trace of an independent subsystem),
   *  and where the listed subset of a factor is in a product with the
   *  factor's remainder it is split off and dropped. Entangled leftovers
   *  stay live. Returns the number of qudits removed. */
  int retire_decoupled(const std::vector<QuditRef>& qs, double tol = 1e-9);

  /** Reduced density matrix of the listed qudits, in the given order. */
  Eigen::MatrixXcd reduced_state(const std::vector<QuditRef>& qs) const;

  /** <target| rho |target> for the reduced state of qs. */
  double fidelity_with(const std::vector<QuditRef>& qs,
                       const Eigen::VectorXcd& target) const;

  bool is_live(QuditRef q) const;

 private:
  struct Factor {
    std::vector<int> qudits;  // handle ids; first is the most significant digit
    Eigen::VectorXcd amps;
  };

  int factor_of(QuditRef q, const char* what) const;
  int position_in_factor(const Factor& f, int id) const;
  /** Ensures all listed qudits share one factor; returns its index. */
  int merge_factors(const std::vector<QuditRef>& qs);
  void check_norm(const Factor& f, const char* what) const;
  int remove_qudit_digit(int factor_index, int id, int digit, double prob);
  double digit_probability(const Factor& f, int pos, int digit) const;
  int sample_digit(const Factor& f, int pos);
  double uniform01();
  void bump_live(int delta);

  int p_;
  std::uint64_t rng_state_;
  std::vector<std::optional<Factor>> factors_;
  std::vector<int> owner_;  // handle id -> factor index, -1 when dead
  int live_count_ = 0;
  int peak_live_ = 0;
};

/** Encodes `secret` into 2k-1 shares of `code` (an isometry; the secret
 *  handle is consumed). Share i sits at evaluation point code.points[i]. */
std::vector<QuditRef> cgl_encode(SimState& state, QuditRef secret,
                                 const CssCode& code);

/** Reconstructs the secret from any k shares. `positions` gives each
 *  share's index into code.points. The k-1 non-secret registers are left
 *  exactly decoupled from the secret; this variant measures them out and
 *  discards them. \throws InputError on wrong share count or duplicates. */
QuditRef cgl_decode(SimState& state, const std::vector<QuditRef>& shares,
                    const std::vector<int>& positions, const CssCode& code);

/** As cgl_decode, but keeps the decoupled non-secret registers live and
 *  returns them after the secret; used by deferred-measurement runs. */
std::vector<QuditRef> cgl_decode_keep(SimState& state,
                                      const std::vector<QuditRef>& shares,
                                      const std::vector<int>& positions,
                                      const CssCode& code);

}  // namespace summon
