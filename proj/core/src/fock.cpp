#include "qdiff/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qdiff/numeric.hpp"

namespace qdiff::fock {

FockBasis::FockBasis(int n_max) : n_max_(n_max) {
  if (n_max < 0) throw std::invalid_argument("FockBasis: n_max must be non-negative");
}

FockBasis make_basis(int n_max, int cutoff_budget) {
  if (n_max < 0) throw std::invalid_argument("make_basis: n_max must be non-negative");
  if (n_max > cutoff_budget) {
    throw std::invalid_argument("make_basis: n_max " + std::to_string(n_max) +
                                " exceeds cutoff budget " + std::to_string(cutoff_budget));
  }
  return FockBasis(n_max);
}

TwoModeState::TwoModeState(FockBasis basis, std::vector<Complex> amplitudes, double truncation_loss)
    : basis_(basis), amps_(std::move(amplitudes)), truncation_loss_(truncation_loss) {
  if (amps_.size() != basis_.dimension()) {
    throw std::invalid_argument("TwoModeState: amplitude count does not match basis dimension");
  }
}

TwoModeState TwoModeState::basis_ket(FockBasis basis, int n, int m) {
  if (!basis.contains(n, m)) throw std::out_of_range("basis_ket: occupation outside basis");
  std::vector<Complex> amps(basis.dimension());
  amps[basis.index(n, m)] = 1.0;
  return TwoModeState(basis, std::move(amps));
}

Complex TwoModeState::amplitude(int n, int m) const noexcept {
  if (!basis_.contains(n, m)) return {};
  return amps_[basis_.index(n, m)];
}

double TwoModeState::norm_squared() const noexcept {
  NeumaierSum acc;
  for (const auto& a : amps_) acc.add(std::norm(a));
  return acc.value();
}

namespace {

// Lowers or raises one mode of a dense amplitude vector in place into `out`.
// Returns the squared norm promoted beyond the cutoff.
double ladder_into(const FockBasis& basis, std::span<const Complex> in, LadderOp op,
                   std::vector<Complex>& out) {
  const int nmax = basis.n_max();
  out.assign(basis.dimension(), Complex{});
  double lost = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    for (int m = 0; m <= nmax; ++m) {
      const Complex c = in[basis.index(n, m)];
      if (c == Complex{}) continue;
      const int occ = op.mode == Mode::K ? n : m;
      if (op.dagger) {
        const double f = std::sqrt(static_cast<double>(occ + 1));
        if (occ == nmax) {
          lost += std::norm(c) * (occ + 1);
          continue;
        }
        const std::size_t j = op.mode == Mode::K ? basis.index(n + 1, m) : basis.index(n, m + 1);
        out[j] += f * c;
      } else {
        if (occ == 0) continue;
        const double f = std::sqrt(static_cast<double>(occ));
        const std::size_t j = op.mode == Mode::K ? basis.index(n - 1, m) : basis.index(n, m - 1);
        out[j] += f * c;
      }
    }
  }
  return lost;
}

// Annihilation only, which never leaves the basis. Strided loops keep this
// cheap for the large chaotic bases.
void lower_into(const FockBasis& basis, std::span<const Complex> in, Mode mode,
                std::vector<Complex>& out) {
  const int nmax = basis.n_max();
  const std::size_t s = static_cast<std::size_t>(nmax + 1);
  out.assign(basis.dimension(), Complex{});
  if (mode == Mode::K) {
    for (int n = 1; n <= nmax; ++n) {
      const double f = std::sqrt(static_cast<double>(n));
      const Complex* src = in.data() + static_cast<std::size_t>(n) * s;
      Complex* dst = out.data() + static_cast<std::size_t>(n - 1) * s;
      for (std::size_t m = 0; m < s; ++m) dst[m] = f * src[m];
    }
  } else {
    std::vector<double> f(s);
    for (std::size_t m = 1; m < s; ++m) f[m] = std::sqrt(static_cast<double>(m));
    for (std::size_t n = 0; n < s; ++n) {
      const Complex* src = in.data() + n * s;
      Complex* dst = out.data() + n * s;
      for (std::size_t m = 1; m < s; ++m) dst[m - 1] = f[m] * src[m];
    }
  }
}

Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
  // Separate compensated sums for the real and imaginary parts.
  NeumaierSum re;
  NeumaierSum im;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Complex p = std::conj(a[i]) * b[i];
    re.add(p.real());
    im.add(p.imag());
  }
  return {re.value(), im.value()};
}

// Plain accumulation with manual complex arithmetic; used for the hot moment
// loops where the compensated version is measurably slower.
Complex dot_fast(std::span<const Complex> a, std::span<const Complex> b) {
  double re0 = 0.0, im0 = 0.0, re1 = 0.0, im1 = 0.0;
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const double ar0 = a[i].real(), ai0 = a[i].imag(), br0 = b[i].real(), bi0 = b[i].imag();
    const double ar1 = a[i + 1].real(), ai1 = a[i + 1].imag(), br1 = b[i + 1].real(), bi1 = b[i + 1].imag();
    re0 += ar0 * br0 + ai0 * bi0;
    im0 += ar0 * bi0 - ai0 * br0;
    re1 += ar1 * br1 + ai1 * bi1;
    im1 += ar1 * bi1 - ai1 * br1;
  }
  if (i < n) {
    re0 += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im0 += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re0 + re1, im0 + im1};
}

}  // namespace

TwoModeState apply_ladder(const TwoModeState& state, LadderOp op) {
  std::vector<Complex> out;
  const double lost = ladder_into(state.basis(), state.amplitudes(), op, out);
  return TwoModeState(state.basis(), std::move(out), state.truncation_loss() + lost);
}

Complex inner(const TwoModeState& bra, const TwoModeState& ket) {
  if (!(bra.basis() == ket.basis())) throw std::invalid_argument("inner: basis mismatch");
  return dot(bra.amplitudes(), ket.amplitudes());
}

bool is_normally_ordered(std::span<const LadderOp> ops) noexcept {
  bool seen_annihilator = false;
  for (const auto& op : ops) {
    if (op.dagger && seen_annihilator) return false;
    if (!op.dagger) seen_annihilator = true;
  }
  return true;
}

namespace {

void check_product(std::span<const LadderOp> ops) {
  if (ops.size() > 4) throw std::invalid_argument("operator product longer than 4 is not supported");
  if (!is_normally_ordered(ops)) throw std::invalid_argument("operator product is not normally ordered");
}

}  // namespace

Complex expect_normal_ordered(const TwoModeState& state, std::span<const LadderOp> ops) {
  check_product(ops);
  // <psi| C1 .. Cp A1 .. Aq |psi> = < Cp^dag .. C1^dag psi | A1 .. Aq psi >.
  std::size_t split = 0;
  while (split < ops.size() && ops[split].dagger) ++split;

  std::vector<Complex> ket(state.amplitudes().begin(), state.amplitudes().end());
  std::vector<Complex> tmp;
  for (std::size_t i = ops.size(); i-- > split;) {
    lower_into(state.basis(), ket, ops[i].mode, tmp);
    ket.swap(tmp);
  }
  std::vector<Complex> bra(state.amplitudes().begin(), state.amplitudes().end());
  for (std::size_t i = 0; i < split; ++i) {
    lower_into(state.basis(), bra, ops[i].mode, tmp);
    bra.swap(tmp);
  }
  return dot(bra, ket);
}

double diagonal_expectation(int n, int m, std::span<const LadderOp> ops) {
  check_product(ops);
  std::size_t split = 0;
  while (split < ops.size() && ops[split].dagger) ++split;

  auto lower = [](int& nk, int& mk, double& coeff, Mode mode) {
    int& occ = mode == Mode::K ? nk : mk;
    coeff *= std::sqrt(static_cast<double>(occ));
    if (occ > 0) --occ;
  };
  int kn = n, km = m;
  double kc = 1.0;
  for (std::size_t i = ops.size(); i-- > split;) lower(kn, km, kc, ops[i].mode);
  int bn = n, bm = m;
  double bc = 1.0;
  for (std::size_t i = 0; i < split; ++i) lower(bn, bm, bc, ops[i].mode);
  if (kn != bn || km != bm) return 0.0;
  return kc * bc;
}

NormalMoments normal_moments(const TwoModeState& state, int max_order) {
  const FockBasis& b = state.basis();
  const auto psi = state.amplitudes();
  constexpr Mode modes[2] = {Mode::K, Mode::KPrime};

  // once[X] = a_X psi; twice[X][Y] = a_X a_Y psi.
  std::array<std::vector<Complex>, 2> once;
  for (int x = 0; x < 2; ++x) lower_into(b, psi, modes[x], once[x]);
  NormalMoments out;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) out.first[first_index(modes[x], modes[y])] = dot_fast(once[x], once[y]);
  }
  if (max_order < 2) return out;

  std::array<std::array<std::vector<Complex>, 2>, 2> twice;
  lower_into(b, once[0], Mode::K, twice[0][0]);
  lower_into(b, once[1], Mode::K, twice[0][1]);
  lower_into(b, once[0], Mode::KPrime, twice[1][0]);
  lower_into(b, once[1], Mode::KPrime, twice[1][1]);

  // <a_X^dag a_Y^dag a_Z a_W> = < a_Y a_X psi | a_Z a_W psi >.
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int w = 0; w < 2; ++w) {
          out.second[second_index(modes[x], modes[y], modes[z], modes[w])] =
              dot_fast(twice[y][x], twice[z][w]);
        }
  return out;
}

NormalMoments diagonal_moments(const TwoModeState& state) {
  const FockBasis& b = state.basis();
  const auto psi = state.amplitudes();
  // Only entries whose creators and annihilators carry the same mode content
  // survive on a basis ket.
  NeumaierSum nk, nkp, kk, kkp, kpkp;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double w = std::norm(psi[i]);
    if (w == 0.0) continue;
    const auto [n, m] = b.occupation(i);
    nk.add(w * n);
    nkp.add(w * m);
    kk.add(w * n * (n - 1.0));
    kkp.add(w * n * static_cast<double>(m));
    kpkp.add(w * m * (m - 1.0));
  }
  NormalMoments out;
  const Mode K = Mode::K, P = Mode::KPrime;
  out.first[first_index(K, K)] = nk.value();
  out.first[first_index(P, P)] = nkp.value();
  out.second[second_index(K, K, K, K)] = kk.value();
  out.second[second_index(P, P, P, P)] = kpkp.value();
  for (Mode x : {K, P})
    for (Mode z : {K, P}) {
      // creators {x, other(x)} and annihilators {z, other(z)}: one of each mode.
      const Mode y = x == K ? P : K;
      const Mode w = z == K ? P : K;
      out.second[second_index(x, y, z, w)] = kkp.value();
    }
  return out;
}

}  // namespace qdiff::fock
