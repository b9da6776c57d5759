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

#include "summon/qudit_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "summon/errors.hpp"

namespace summon {

namespace {

constexpr double kNormTol = 1e-9;

bool prime_dimension(int k) {
  if (k < 2) return false;
  for (int d = 2; d * d <= k; ++d) {
    if (k % d == 0) return false;
  }
  return true;
}

int mod_norm(int v, int p) {
  const int r = v % p;
  return r < 0 ? r + p : r;
}

int mod_pow(int base, int exp, int p) {
  int result = 1;
  base = mod_norm(base, p);
  for (int i = 0; i < exp; ++i) result = result * base % p;
  return result;
}

int mod_inv(int v, int p) {
  v = mod_norm(v, p);
  if (v == 0) throw ContractViolation("mod_inv: zero has no inverse");
  return mod_pow(v, p - 2, p);
}

/** Rank of a square matrix over F_p (Gaussian elimination). */
bool invertible_mod_p(std::vector<std::vector<int>> m, int p) {
  const std::size_t n = m.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && mod_norm(m[pivot][col], p) == 0) ++pivot;
    if (pivot == n) return false;
    std::swap(m[col], m[pivot]);
    const int inv = mod_inv(m[col][col], p);
    for (std::size_t r = col + 1; r < n; ++r) {
      const int factor = mod_norm(m[r][col] * inv, p);
      if (factor == 0) continue;
      for (std::size_t c = col; c < n; ++c) {
        m[r][c] = mod_norm(m[r][c] - factor * m[col][c], p);
      }
    }
  }
  return true;
}

std::complex<double> root_of_unity(int p, int power) {
  const double angle = 2.0 * std::numbers::pi * mod_norm(power, p) / p;
  return {std::cos(angle), std::sin(angle)};
}

Eigen::MatrixXcd fourier_matrix(int p, bool inverse) {
  Eigen::MatrixXcd f(p, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      f(j, k) = root_of_unity(p, inverse ? -j * k : j * k) * scale;
    }
  }
  return f;
}

std::int64_t int_pow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

Eigen::VectorXcd bell_state(int p) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(p) * p);
  const double amp = 1.0 / std::sqrt(static_cast<double>(p));
  for (int i = 0; i < p; ++i) v(static_cast<Eigen::Index>(i) * p + i) = amp;
  return v;
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractViolation("trace_distance: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a - b);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

CssCode::CssCode(int k_in, int p_in) : k(k_in), p(p_in) {
  if (k < 1) throw InputError("CssCode: k must be >= 1");
  if (!prime_dimension(p)) throw InputError("CssCode: p must be prime");
  if (p < 2 * k - 1) {
    throw InputError("CssCode: need p >= 2k-1 distinct evaluation points (k=" +
                     std::to_string(k) + ", p=" + std::to_string(p) + ")");
  }
  for (int i = 0; i < 2 * k - 1; ++i) points.push_back(i);
}

SimState::SimState(int p, std::uint64_t seed) : p_(p), rng_state_(seed) {
  if (!prime_dimension(p) || p > 13) {
    throw InputError("SimState: dimension must be a prime <= 13, got " +
                     std::to_string(p));
  }
}

double SimState::uniform01() {
  // splitmix64: deterministic across platforms, unlike <random> distributions.
  rng_state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = rng_state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

void SimState::bump_live(int delta) {
  live_count_ += delta;
  peak_live_ = std::max(peak_live_, live_count_);
}

QuditRef SimState::alloc() {
  Factor f;
  const int id = static_cast<int>(owner_.size());
  f.qudits = {id};
  f.amps = Eigen::VectorXcd::Zero(p_);
  f.amps(0) = 1.0;
  factors_.push_back(std::move(f));
  owner_.push_back(static_cast<int>(factors_.size()) - 1);
  bump_live(1);
  return QuditRef{id};
}

std::vector<QuditRef> SimState::alloc_many(int count) {
  std::vector<QuditRef> out;
  for (int i = 0; i < count; ++i) out.push_back(alloc());
  return out;
}

std::pair<QuditRef, QuditRef> SimState::bell_pair() {
  Factor f;
  const int id1 = static_cast<int>(owner_.size());
  const int id2 = id1 + 1;
  f.qudits = {id1, id2};
  f.amps = bell_state(p_);
  factors_.push_back(std::move(f));
  owner_.push_back(static_cast<int>(factors_.size()) - 1);
  owner_.push_back(static_cast<int>(factors_.size()) - 1);
  bump_live(2);
  return {QuditRef{id1}, QuditRef{id2}};
}

bool SimState::is_live(QuditRef q) const {
  return q.id >= 0 && q.id < static_cast<int>(owner_.size()) && owner_[q.id] >= 0;
}

int SimState::factor_of(QuditRef q, const char* what) const {
  if (!is_live(q)) {
    throw ContractViolation(std::string(what) + ": dead or invalid qudit handle " +
                            std::to_string(q.id));
  }
  return owner_[q.id];
}

int SimState::position_in_factor(const Factor& f, int id) const {
  for (std::size_t i = 0; i < f.qudits.size(); ++i) {
    if (f.qudits[i] == id) return static_cast<int>(i);
  }
  throw ContractViolation("position_in_factor: handle not in factor");
}

void SimState::check_norm(const Factor& f, const char* what) const {
  const double n = f.amps.squaredNorm();
  if (std::abs(n - 1.0) > kNormTol) {
    throw ContractViolation(std::string(what) + ": norm drifted to " +
                            std::to_string(n));
  }
}

void SimState::discard(QuditRef q) {
  const int fi = factor_of(q, "discard");
  Factor& f = *factors_[fi];
  if (f.qudits.size() != 1) {
    throw ContractViolation(
        "discard: qudit " + std::to_string(q.id) +
        " is entangled (or at least shares a tensor factor); measure it out first");
  }
  factors_[fi].reset();
  owner_[q.id] = -1;
  bump_live(-1);
}

void SimState::set_state(QuditRef q, const Eigen::VectorXcd& amplitudes) {
  const int fi = factor_of(q, "set_state");
  Factor& f = *factors_[fi];
  if (f.qudits.size() != 1) {
    throw ContractViolation("set_state: qudit is not in its own factor");
  }
  if (amplitudes.size() != p_) {
    throw ContractViolation("set_state: amplitude vector has wrong length");
  }
  if (std::abs(amplitudes.squaredNorm() - 1.0) > kNormTol) {
    throw ContractViolation("set_state: amplitude vector is not normalized");
  }
  f.amps = amplitudes;
}

int SimState::merge_factors(const std::vector<QuditRef>& qs) {
  std::vector<int> indices;
  for (QuditRef q : qs) {
    const int fi = factor_of(q, "merge_factors");
    if (std::find(indices.begin(), indices.end(), fi) == indices.end()) {
      indices.push_back(fi);
    }
  }
  while (indices.size() > 1) {
    const int a = indices[0], b = indices[1];
    Factor& fa = *factors_[a];
    Factor& fb = *factors_[b];
    Factor merged;
    merged.qudits = fa.qudits;
    merged.qudits.insert(merged.qudits.end(), fb.qudits.begin(), fb.qudits.end());
    merged.amps = Eigen::VectorXcd(fa.amps.size() * fb.amps.size());
    for (Eigen::Index i = 0; i < fa.amps.size(); ++i) {
      merged.amps.segment(i * fb.amps.size(), fb.amps.size()) = fa.amps(i) * fb.amps;
    }
    factors_[a] = std::move(merged);
    factors_[b].reset();
    for (int id : factors_[a]->qudits) owner_[id] = a;
    indices.erase(indices.begin() + 1);
  }
  return indices[0];
}

void SimState::apply_single_qudit_unitary(QuditRef q, const Eigen::MatrixXcd& u) {
  if (u.rows() != p_ || u.cols() != p_) {
    throw ContractViolation("apply_single_qudit_unitary: matrix must be p x p");
  }
  const int fi = factor_of(q, "apply_single_qudit_unitary");
  Factor& f = *factors_[fi];
  const int pos = position_in_factor(f, q.id);
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t stride = int_pow(p_, m - 1 - pos);
  const std::int64_t block = stride * p_;
  Eigen::VectorXcd scratch(p_);
  for (std::int64_t base = 0; base < f.amps.size(); base += block) {
    for (std::int64_t off = 0; off < stride; ++off) {
      for (int d = 0; d < p_; ++d) scratch(d) = f.amps(base + d * stride + off);
      scratch = u * scratch;
      for (int d = 0; d < p_; ++d) f.amps(base + d * stride + off) = scratch(d);
    }
  }
  check_norm(f, "apply_single_qudit_unitary");
}

void SimState::apply_x(QuditRef q, int a) {
  const int fi = factor_of(q, "apply_x");
  Factor& f = *factors_[fi];
  const int pos = position_in_factor(f, q.id);
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t stride = int_pow(p_, m - 1 - pos);
  const int shift = mod_norm(a, p_);
  if (shift == 0) return;
  Eigen::VectorXcd out(f.amps.size());
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    const int d = static_cast<int>((idx / stride) % p_);
    const std::int64_t target = idx + (mod_norm(d + shift, p_) - d) * stride;
    out(target) = f.amps(idx);
  }
  f.amps = std::move(out);
}

void SimState::apply_z(QuditRef q, int b) {
  const int fi = factor_of(q, "apply_z");
  Factor& f = *factors_[fi];
  const int pos = position_in_factor(f, q.id);
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t stride = int_pow(p_, m - 1 - pos);
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    const int d = static_cast<int>((idx / stride) % p_);
    f.amps(idx) *= root_of_unity(p_, b * d);
  }
}

void SimState::apply_fourier(QuditRef q, bool inverse) {
  apply_single_qudit_unitary(q, fourier_matrix(p_, inverse));
}

void SimState::apply_scalar_mult(QuditRef q, int c) {
  if (mod_norm(c, p_) == 0) {
    throw ContractViolation("apply_scalar_mult: multiplier must be nonzero");
  }
  const int fi = factor_of(q, "apply_scalar_mult");
  Factor& f = *factors_[fi];
  const int pos = position_in_factor(f, q.id);
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t stride = int_pow(p_, m - 1 - pos);
  Eigen::VectorXcd out(f.amps.size());
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    const int d = static_cast<int>((idx / stride) % p_);
    const std::int64_t target = idx + (mod_norm(c * d, p_) - d) * stride;
    out(target) = f.amps(idx);
  }
  f.amps = std::move(out);
}

void SimState::apply_sum(QuditRef control, QuditRef target, int scale) {
  if (control == target) throw ContractViolation("apply_sum: distinct qudits required");
  const int fi = merge_factors({control, target});
  Factor& f = *factors_[fi];
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t sc = int_pow(p_, m - 1 - position_in_factor(f, control.id));
  const std::int64_t st = int_pow(p_, m - 1 - position_in_factor(f, target.id));
  Eigen::VectorXcd out(f.amps.size());
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    const int c = static_cast<int>((idx / sc) % p_);
    const int t = static_cast<int>((idx / st) % p_);
    const std::int64_t to = idx + (mod_norm(t + scale * c, p_) - t) * st;
    out(to) = f.amps(idx);
  }
  f.amps = std::move(out);
}

void SimState::apply_czpow(QuditRef a, QuditRef b, int scale) {
  if (a == b) throw ContractViolation("apply_czpow: distinct qudits required");
  const int fi = merge_factors({a, b});
  Factor& f = *factors_[fi];
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t sa = int_pow(p_, m - 1 - position_in_factor(f, a.id));
  const std::int64_t sb = int_pow(p_, m - 1 - position_in_factor(f, b.id));
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    const int da = static_cast<int>((idx / sa) % p_);
    const int db = static_cast<int>((idx / sb) % p_);
    f.amps(idx) *= root_of_unity(p_, scale * da * db);
  }
}

void SimState::swap_wires(QuditRef a, QuditRef b) {
  if (a == b) return;
  const int fa = factor_of(a, "swap_wires");
  const int fb = factor_of(b, "swap_wires");
  // Exchanging which handle names which tensor slot is exactly a SWAP gate.
  if (fa == fb) {
    Factor& f = *factors_[fa];
    const int ia = position_in_factor(f, a.id);
    const int ib = position_in_factor(f, b.id);
    std::swap(f.qudits[ia], f.qudits[ib]);
  } else {
    Factor& faf = *factors_[fa];
    Factor& fbf = *factors_[fb];
    faf.qudits[position_in_factor(faf, a.id)] = b.id;
    fbf.qudits[position_in_factor(fbf, b.id)] = a.id;
    std::swap(owner_[a.id], owner_[b.id]);
  }
}

void SimState::apply_linear_map(const std::vector<QuditRef>& qs,
                                const std::vector<std::vector<int>>& m) {
  const std::size_t r = qs.size();
  if (m.size() != r) {
    throw ContractViolation("apply_linear_map: matrix rows must match qudit count");
  }
  for (const auto& row : m) {
    if (row.size() != r) {
      throw ContractViolation("apply_linear_map: matrix must be square");
    }
  }
  if (!invertible_mod_p(m, p_)) {
    throw ContractViolation("apply_linear_map: matrix is singular over F_p");
  }
  const int fi = merge_factors(qs);
  Factor& f = *factors_[fi];
  const int width = static_cast<int>(f.qudits.size());
  std::vector<std::int64_t> strides(r);
  for (std::size_t i = 0; i < r; ++i) {
    strides[i] = int_pow(p_, width - 1 - position_in_factor(f, qs[i].id));
  }
  Eigen::VectorXcd out(f.amps.size());
  std::vector<int> v(r), w(r);
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    for (std::size_t i = 0; i < r; ++i) {
      v[i] = static_cast<int>((idx / strides[i]) % p_);
    }
    std::int64_t to = idx;
    for (std::size_t i = 0; i < r; ++i) {
      int acc = 0;
      for (std::size_t j = 0; j < r; ++j) acc += m[i][j] * v[j];
      w[i] = mod_norm(acc, p_);
      to += (w[i] - v[i]) * strides[i];
    }
    out(to) = f.amps(idx);
  }
  f.amps = std::move(out);
}

double SimState::digit_probability(const Factor& f, int pos, int digit) const {
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t stride = int_pow(p_, m - 1 - pos);
  double prob = 0.0;
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    if (static_cast<int>((idx / stride) % p_) == digit) {
      prob += std::norm(f.amps(idx));
    }
  }
  return prob;
}

int SimState::sample_digit(const Factor& f, int pos) {
  const double u = uniform01();
  double acc = 0.0;
  for (int d = 0; d < p_ - 1; ++d) {
    acc += digit_probability(f, pos, d);
    if (u < acc) return d;
  }
  return p_ - 1;
}

int SimState::remove_qudit_digit(int factor_index, int id, int digit, double prob) {
  Factor& f = *factors_[factor_index];
  const int pos = position_in_factor(f, id);
  const int m = static_cast<int>(f.qudits.size());
  const std::int64_t stride = int_pow(p_, m - 1 - pos);
  const std::int64_t block = stride * p_;
  if (prob <= 0.0) {
    // Unrealizable branch: mark the qudit dead and zero the factor so the
    // caller can observe probability 0 and abandon the branch.
    owner_[id] = -1;
    bump_live(-1);
    f.qudits.erase(f.qudits.begin() + pos);
    if (f.qudits.empty()) {
      factors_[factor_index].reset();
    } else {
      f.amps = Eigen::VectorXcd::Zero(f.amps.size() / p_);
    }
    return digit;
  }
  const double scale = 1.0 / std::sqrt(prob);
  Eigen::VectorXcd out(f.amps.size() / p_);
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    if (static_cast<int>((idx / stride) % p_) == digit) {
      out((idx / block) * stride + idx % stride) = f.amps(idx) * scale;
    }
  }
  f.amps = std::move(out);
  f.qudits.erase(f.qudits.begin() + pos);
  owner_[id] = -1;
  bump_live(-1);
  if (f.qudits.empty()) factors_[factor_index].reset();
  return digit;
}

int SimState::measure_out(QuditRef q) {
  const int fi = factor_of(q, "measure_out");
  Factor& f = *factors_[fi];
  const int pos = position_in_factor(f, q.id);
  const int d = sample_digit(f, pos);
  const double prob = digit_probability(f, pos, d);
  remove_qudit_digit(fi, q.id, d, prob);
  return d;
}

double SimState::measure_out_forced(QuditRef q, int v) {
  if (v < 0 || v >= p_) throw ContractViolation("measure_out_forced: bad outcome");
  const int fi = factor_of(q, "measure_out_forced");
  Factor& f = *factors_[fi];
  const double prob = digit_probability(f, position_in_factor(f, q.id), v);
  remove_qudit_digit(fi, q.id, v, prob);
  return prob;
}

std::pair<int, int> SimState::measure_bell(QuditRef q1, QuditRef q2) {
  measure_bell_defer(q1, q2);
  const int b = measure_out(q1);
  const int a = measure_out(q2);
  return {a, b};
}

double SimState::measure_bell_forced(QuditRef q1, QuditRef q2, int a, int b) {
  measure_bell_defer(q1, q2);
  const double pb = measure_out_forced(q1, b);
  if (pb <= 0.0) {
    measure_out_forced(q2, a);  // keep handle lifecycle consistent
    return 0.0;
  }
  const double pa = measure_out_forced(q2, a);
  return pb * pa;
}

void SimState::measure_bell_defer(QuditRef q1, QuditRef q2) {
  if (q1 == q2) throw ContractViolation("measure_bell: distinct qudits required");
  factor_of(q1, "measure_bell");
  factor_of(q2, "measure_bell");
  // (F^dag (x) I) . SUM^{-1} maps |Phi_ab> to |b>|a>.
  apply_sum(q1, q2, -1);
  apply_fourier(q1, /*inverse=*/true);
}

bool SimState::split_off_product(QuditRef q1, QuditRef q2, double tol) {
  if (q1 == q2) throw ContractViolation("split_off_product: distinct qudits required");
  const int fi = merge_factors({q1, q2});
  Factor& f = *factors_[fi];
  const int m = static_cast<int>(f.qudits.size());
  if (m == 2) {
    check_norm(f, "split_off_product");
    owner_[q1.id] = -1;
    owner_[q2.id] = -1;
    factors_[fi].reset();
    bump_live(-2);
    return true;
  }
  const int pos1 = position_in_factor(f, q1.id);
  const int pos2 = position_in_factor(f, q2.id);
  const std::int64_t s1 = int_pow(p_, m - 1 - pos1);
  const std::int64_t s2 = int_pow(p_, m - 1 - pos2);
  const std::int64_t pair_dim = static_cast<std::int64_t>(p_) * p_;
  const std::int64_t rest_dim = f.amps.size() / pair_dim;
  // Row index = (digit of q1, digit of q2); column = the remaining digits
  // packed in their existing order.
  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(pair_dim, rest_dim);
  for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
    const int d1 = static_cast<int>((idx / s1) % p_);
    const int d2 = static_cast<int>((idx / s2) % p_);
    std::int64_t rest = 0;
    for (int pos = 0; pos < m; ++pos) {
      if (pos == pos1 || pos == pos2) continue;
      const std::int64_t stride = int_pow(p_, m - 1 - pos);
      rest = rest * p_ + (idx / stride) % p_;
    }
    mat(d1 * p_ + d2, rest) = f.amps(idx);
  }
  const Eigen::MatrixXcd gram = mat * mat.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
  const Eigen::Index top = gram.rows() - 1;
  const double lambda = solver.eigenvalues()(top);
  if (lambda < 1.0 - tol) return false;
  const Eigen::VectorXcd u = solver.eigenvectors().col(top);
  // For amps = w (x) r the matrix is the outer product w r^T (no conjugate),
  // so recover r by projecting with u^dag from the left; using mat.adjoint()
  // here would hand back conj(r).
  Eigen::VectorXcd rest_state =
      (u.adjoint() * mat).transpose() / std::sqrt(lambda);
  Factor rest;
  for (int pos = 0; pos < m; ++pos) {
    if (pos != pos1 && pos != pos2) rest.qudits.push_back(f.qudits[pos]);
  }
  rest.amps = std::move(rest_state);
  factors_[fi] = std::move(rest);
  for (int id : factors_[fi]->qudits) owner_[id] = fi;
  owner_[q1.id] = -1;
  owner_[q2.id] = -1;
  bump_live(-2);
  check_norm(*factors_[fi], "split_off_product");
  return true;
}

int SimState::retire_decoupled(const std::vector<QuditRef>& qs, double tol) {
  // Deduplicate, ignore already-dead handles, and group the rest by factor.
  std::map<int, std::vector<int>> by_factor;
  std::vector<char> seen(owner_.size(), 0);
  for (QuditRef q : qs) {
    if (q.id < 0 || q.id >= static_cast<int>(owner_.size())) {
      throw ContractViolation("retire_decoupled: unknown qudit handle");
    }
    if (owner_[q.id] < 0 || seen[q.id]) continue;
    seen[q.id] = 1;
    by_factor[owner_[q.id]].push_back(q.id);
  }
  int removed = 0;
  for (auto& [fi, ids] : by_factor) {
    Factor& f = *factors_[fi];
    const int m = static_cast<int>(f.qudits.size());
    const int s = static_cast<int>(ids.size());
    if (s == m) {
      // The whole factor is unwanted; dropping an independent tensor factor
      // is an exact partial trace.
      check_norm(f, "retire_decoupled");
      for (int id : f.qudits) owner_[id] = -1;
      factors_[fi].reset();
      bump_live(-s);
      removed += s;
      continue;
    }
    std::vector<char> listed(m, 0);
    for (int id : ids) listed[position_in_factor(f, id)] = 1;
    const std::int64_t drop_dim = int_pow(p_, s);
    const std::int64_t keep_dim = f.amps.size() / drop_dim;
    // Rows: kept digits in factor order; columns: unwanted digits likewise.
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(keep_dim, drop_dim);
    for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
      std::int64_t kidx = 0;
      std::int64_t didx = 0;
      for (int pos = 0; pos < m; ++pos) {
        const std::int64_t stride = int_pow(p_, m - 1 - pos);
        const std::int64_t digit = (idx / stride) % p_;
        if (listed[pos]) {
          didx = didx * p_ + digit;
        } else {
          kidx = kidx * p_ + digit;
        }
      }
      mat(kidx, didx) = f.amps(idx);
    }
    // Eigendecompose the Gram matrix on the smaller side of the cut. For a
    // product amps = k (x) d the matrix is the outer product k d^T without
    // conjugation, so the kept state is the top eigenvector of mat*mat^dag
    // directly, or mat applied to the top eigenvector of mat^dag*mat (which
    // is conj(d)). A stray global phase on the kept factor is harmless.
    Eigen::VectorXcd keep_state;
    double lambda = 0.0;
    if (keep_dim <= drop_dim) {
      const Eigen::MatrixXcd gram = mat * mat.adjoint();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
      const Eigen::Index top = gram.rows() - 1;
      lambda = solver.eigenvalues()(top);
      if (lambda < 1.0 - tol) continue;
      keep_state = solver.eigenvectors().col(top);
    } else {
      const Eigen::MatrixXcd gram = mat.adjoint() * mat;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
      const Eigen::Index top = gram.rows() - 1;
      lambda = solver.eigenvalues()(top);
      if (lambda < 1.0 - tol) continue;
      keep_state = mat * solver.eigenvectors().col(top) / std::sqrt(lambda);
    }
    Factor rest;
    for (int pos = 0; pos < m; ++pos) {
      if (!listed[pos]) rest.qudits.push_back(f.qudits[pos]);
    }
    rest.amps = std::move(keep_state);
    factors_[fi] = std::move(rest);
    for (int id : factors_[fi]->qudits) owner_[id] = fi;
    for (int id : ids) owner_[id] = -1;
    bump_live(-s);
    removed += s;
    check_norm(*factors_[fi], "retire_decoupled");
  }
  return removed;
}

Eigen::MatrixXcd SimState::reduced_state(const std::vector<QuditRef>& qs) const {
  if (qs.empty()) throw ContractViolation("reduced_state: empty qudit list");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t j = i + 1; j < qs.size(); ++j) {
      if (qs[i] == qs[j]) throw ContractViolation("reduced_state: duplicate qudit");
    }
  }
  // Group the requested qudits by tensor factor, keeping request order
  // within each group and ordering groups by first appearance.
  std::vector<int> group_factor;
  std::vector<std::vector<QuditRef>> groups;
  for (QuditRef q : qs) {
    const int fi = factor_of(q, "reduced_state");
    auto it = std::find(group_factor.begin(), group_factor.end(), fi);
    if (it == group_factor.end()) {
      group_factor.push_back(fi);
      groups.push_back({q});
    } else {
      groups[it - group_factor.begin()].push_back(q);
    }
  }
  Eigen::MatrixXcd rho(1, 1);
  rho(0, 0) = 1.0;
  std::vector<QuditRef> concat_order;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Factor& f = *factors_[group_factor[g]];
    const int m = static_cast<int>(f.qudits.size());
    std::vector<std::int64_t> keep_strides;
    for (QuditRef q : groups[g]) {
      keep_strides.push_back(int_pow(p_, m - 1 - position_in_factor(f, q.id)));
      concat_order.push_back(q);
    }
    const std::int64_t keep_dim = int_pow(p_, static_cast<int>(groups[g].size()));
    const std::int64_t rest_dim = f.amps.size() / keep_dim;
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(keep_dim, rest_dim);
    for (std::int64_t idx = 0; idx < f.amps.size(); ++idx) {
      std::int64_t row = 0;
      for (const std::int64_t s : keep_strides) row = row * p_ + (idx / s) % p_;
      std::int64_t col = 0;
      for (int pos = 0; pos < m; ++pos) {
        const std::int64_t s = int_pow(p_, m - 1 - pos);
        bool kept = false;
        for (const std::int64_t ks : keep_strides) {
          if (ks == s) {
            kept = true;
            break;
          }
        }
        if (!kept) col = col * p_ + (idx / s) % p_;
      }
      mat(row, col) = f.amps(idx);
    }
    const Eigen::MatrixXcd rho_g = mat * mat.adjoint();
    // rho = rho (x) rho_g
    Eigen::MatrixXcd next(rho.rows() * rho_g.rows(), rho.cols() * rho_g.cols());
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        next.block(i * rho_g.rows(), j * rho_g.cols(), rho_g.rows(), rho_g.cols()) =
            rho(i, j) * rho_g;
      }
    }
    rho = std::move(next);
  }
  // Permute tensor slots from concat order to the requested order.
  if (concat_order == qs) return rho;
  const int width = static_cast<int>(qs.size());
  std::vector<int> source_slot(width);  // requested slot i comes from concat slot
  for (int i = 0; i < width; ++i) {
    for (int j = 0; j < width; ++j) {
      if (qs[i] == concat_order[j]) source_slot[i] = j;
    }
  }
  const std::int64_t dim = rho.rows();
  std::vector<std::int64_t> remap(dim);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::vector<int> digits(width);
    std::int64_t rem = idx;
    for (int i = width - 1; i >= 0; --i) {
      digits[i] = static_cast<int>(rem % p_);
      rem /= p_;
    }
    std::int64_t concat_idx = 0;
    std::vector<int> concat_digits(width);
    for (int i = 0; i < width; ++i) concat_digits[source_slot[i]] = digits[i];
    for (int i = 0; i < width; ++i) concat_idx = concat_idx * p_ + concat_digits[i];
    remap[idx] = concat_idx;
  }
  Eigen::MatrixXcd out(dim, dim);
  for (std::int64_t r = 0; r < dim; ++r) {
    for (std::int64_t c = 0; c < dim; ++c) {
      out(r, c) = rho(remap[r], remap[c]);
    }
  }
  return out;
}

double SimState::fidelity_with(const std::vector<QuditRef>& qs,
                               const Eigen::VectorXcd& target) const {
  const Eigen::MatrixXcd rho = reduced_state(qs);
  if (target.size() != rho.rows()) {
    throw ContractViolation("fidelity_with: target dimension mismatch");
  }
  return std::real((target.adjoint() * rho * target)(0, 0));
}

std::vector<QuditRef> cgl_encode(SimState& state, QuditRef secret,
                                 const CssCode& code) {
  if (state.dimension() != code.p) {
    throw ContractViolation("cgl_encode: code and state dimensions differ");
  }
  const int k = code.k;
  if (k == 1) return {secret};  // one share: the secret itself
  const int p = code.p;
  // Register order: [secret (degree k-1), k-1 uniform coefficients
  // (degrees k-2..0), k-1 zero pads (degrees k..2k-2)]; the linear map sends
  // coefficient vectors to evaluations at the code points.
  std::vector<QuditRef> regs{secret};
  std::vector<QuditRef> coeffs = state.alloc_many(k - 1);
  for (QuditRef c : coeffs) {
    state.apply_fourier(c);  // |0> -> uniform superposition
    regs.push_back(c);
  }
  std::vector<QuditRef> pads = state.alloc_many(k - 1);
  regs.insert(regs.end(), pads.begin(), pads.end());
  std::vector<int> degree;
  degree.push_back(k - 1);
  for (int d = k - 2; d >= 0; --d) degree.push_back(d);
  for (int d = k; d <= 2 * k - 2; ++d) degree.push_back(d);
  const int width = 2 * k - 1;
  std::vector<std::vector<int>> m(width, std::vector<int>(width));
  for (int row = 0; row < width; ++row) {
    for (int col = 0; col < width; ++col) {
      m[row][col] = mod_pow(code.points[row], degree[col], p);
    }
  }
  state.apply_linear_map(regs, m);
  return regs;
}

namespace {

std::vector<std::vector<int>> decode_matrix(const CssCode& code,
                                            const std::vector<int>& positions) {
  const int k = code.k;
  const int p = code.p;
  if (static_cast<int>(positions.size()) != k) {
    throw InputError("cgl_decode: exactly k shares are required");
  }
  std::vector<int> local;
  for (int pos : positions) {
    if (pos < 0 || pos >= code.shares()) {
      throw InputError("cgl_decode: share position out of range");
    }
    local.push_back(code.points[pos]);
  }
  std::vector<int> sorted = local;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("cgl_decode: duplicate share positions");
  }
  std::vector<int> remote;
  for (int point : code.points) {
    if (std::find(local.begin(), local.end(), point) == local.end()) {
      remote.push_back(point);
    }
  }
  // s = sum_i gamma_i y_i extracts the leading coefficient of the
  // interpolating polynomial; gamma_i = 1 / prod_{j != i} (l_i - l_j).
  std::vector<int> gamma(k);
  for (int i = 0; i < k; ++i) {
    int prod = 1;
    for (int j = 0; j < k; ++j) {
      if (j != i) prod = mod_norm(prod * (local[i] - local[j]), p);
    }
    gamma[i] = mod_inv(prod, p);
  }
  // h(x) = f(x) - s * prod_{r in remote} (x - r) has degree <= k-2 and
  // agrees with f on the remote points, so the registers (s, h(l_1..l_{k-1}))
  // carry the secret exactly decoupled from everything still outside.
  std::vector<std::vector<int>> m(k, std::vector<int>(k));
  m[0] = gamma;
  for (int i = 0; i < k - 1; ++i) {
    int c = 1;
    for (int r : remote) c = mod_norm(c * (local[i] - r), p);
    for (int j = 0; j < k; ++j) {
      m[i + 1][j] = mod_norm((i == j ? 1 : 0) - c * gamma[j], p);
    }
  }
  return m;
}

}  // namespace

std::vector<QuditRef> cgl_decode_keep(SimState& state,
                                      const std::vector<QuditRef>& shares,
                                      const std::vector<int>& positions,
                                      const CssCode& code) {
  if (shares.size() != positions.size()) {
    throw InputError("cgl_decode: shares/positions size mismatch");
  }
  if (code.k == 1) {
    if (shares.size() != 1) throw InputError("cgl_decode: exactly k shares required");
    return {shares[0]};
  }
  const auto m = decode_matrix(code, positions);
  state.apply_linear_map(shares, m);
  return shares;  // shares[0] now holds the secret; the rest are decoupled
}

QuditRef cgl_decode(SimState& state, const std::vector<QuditRef>& shares,
                    const std::vector<int>& positions, const CssCode& code) {
  const auto regs = cgl_decode_keep(state, shares, positions, code);
  for (std::size_t i = 1; i < regs.size(); ++i) {
    state.measure_out(regs[i]);
  }
  return regs[0];
}

}  // namespace summon
