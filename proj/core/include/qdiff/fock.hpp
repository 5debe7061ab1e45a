#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace qdiff::fock {

using Complex = std::complex<double>;

// Largest per-mode cutoff accepted without an explicit override.
inline constexpr int kDefaultCutoffBudget = 255;

enum class Mode : std::uint8_t { K = 0, KPrime = 1 };

struct LadderOp {
  Mode mode;
  bool dagger;

  static constexpr LadderOp create(Mode m) { return {m, true}; }
  static constexpr LadderOp annihilate(Mode m) { return {m, false}; }
  friend constexpr bool operator==(LadderOp, LadderOp) = default;
};

// Product basis |n, m> with 0 <= n, m <= n_max; n counts photons in mode k,
// m in mode k'. Flat index is n * (n_max + 1) + m.
class FockBasis {
 public:
  explicit FockBasis(int n_max);

  int n_max() const noexcept { return n_max_; }
  std::size_t dimension() const noexcept {
    const auto s = static_cast<std::size_t>(n_max_ + 1);
    return s * s;
  }
  bool contains(int n, int m) const noexcept {
    return n >= 0 && m >= 0 && n <= n_max_ && m <= n_max_;
  }
  std::size_t index(int n, int m) const noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n_max_ + 1) +
           static_cast<std::size_t>(m);
  }
  std::pair<int, int> occupation(std::size_t idx) const noexcept {
    const auto s = static_cast<std::size_t>(n_max_ + 1);
    return {static_cast<int>(idx / s), static_cast<int>(idx % s)};
  }

  friend bool operator==(const FockBasis&, const FockBasis&) = default;

 private:
  int n_max_;
};

// Throws std::invalid_argument when n_max is negative or exceeds the budget.
FockBasis make_basis(int n_max, int cutoff_budget = kDefaultCutoffBudget);

// Amplitudes over a FockBasis. Never renormalised: probability mass that
// falls outside the basis is tracked in truncation_loss().
class TwoModeState {
 public:
  TwoModeState(FockBasis basis, std::vector<Complex> amplitudes, double truncation_loss = 0.0);

  static TwoModeState basis_ket(FockBasis basis, int n, int m);

  const FockBasis& basis() const noexcept { return basis_; }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  Complex amplitude(int n, int m) const noexcept;
  double truncation_loss() const noexcept { return truncation_loss_; }
  double norm_squared() const noexcept;

 private:
  FockBasis basis_;
  std::vector<Complex> amps_;
  double truncation_loss_;
};

TwoModeState apply_ladder(const TwoModeState& state, LadderOp op);

// <bra|ket>; both must share a basis.
Complex inner(const TwoModeState& bra, const TwoModeState& ket);

bool is_normally_ordered(std::span<const LadderOp> ops) noexcept;

// <psi| ops |psi> for a normally ordered product of at most four operators.
Complex expect_normal_ordered(const TwoModeState& state, std::span<const LadderOp> ops);

// <n,m| ops |n,m> for a single basis ket, evaluated without a dense vector.
double diagonal_expectation(int n, int m, std::span<const LadderOp> ops);

// Index helpers: first[first_index(X, Y)] = <a_X^dag a_Y>,
// second[second_index(X, Y, Z, W)] = <a_X^dag a_Y^dag a_Z a_W>.
constexpr std::size_t first_index(Mode x, Mode y) noexcept {
  return 2U * static_cast<std::size_t>(x) + static_cast<std::size_t>(y);
}
constexpr std::size_t second_index(Mode x, Mode y, Mode z, Mode w) noexcept {
  return 8U * static_cast<std::size_t>(x) + 4U * static_cast<std::size_t>(y) +
         2U * static_cast<std::size_t>(z) + static_cast<std::size_t>(w);
}

struct NormalMoments {
  std::array<Complex, 4> first{};
  std::array<Complex, 16> second{};
};

// Every first- and second-order normally ordered moment of a pure state.
// Lowered kets are computed once and shared between entries. With
// max_order = 1 the second-order block is left at zero.
NormalMoments normal_moments(const TwoModeState& state, int max_order = 2);

// Moments of the incoherent mixture sum_{n,m} |psi_nm|^2 |n,m><n,m|, which is
// what remains of a pure state after averaging an independent uniform phase
// on every Fock term.
NormalMoments diagonal_moments(const TwoModeState& state);

}  // namespace qdiff::fock
