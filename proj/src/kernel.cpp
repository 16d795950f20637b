#include <algorithm>
#include <map>

#include "mmrrw/simulate.hpp"

namespace mmrrw {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : state_(mix64(seed ^ mix64(stream + 0x9e3779b97f4a7c15ULL))) {}

std::uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

namespace {

constexpr int kMaxKernelDim = 10;

int pow3(int d) {
  int p = 1;
  for (int k = 0; k < d; ++k) p *= 3;
  return p;
}

}  // namespace

int CompiledKernel::class_code(std::span<const int> x) {
  int code = 0, p = 1;
  for (int v : x) {
    code += std::min(v, 2) * p;
    p *= 3;
  }
  return code;
}

CompiledKernel::CompiledKernel(const MmrrwModel& m) : d_(m.d) {
  if (d_ < 1 || d_ > kMaxKernelDim)
    throw ModelError("simulation supports 1 <= d <= " + std::to_string(kMaxKernelDim));
  const int codes = pow3(d_);
  std::map<std::uint64_t, std::uint32_t> step_index;
  slot_base_.resize(codes + 1);
  offset_.push_back(0);
  std::size_t slot = 0;
  for (int code = 0; code < codes; ++code) {
    Face A, E;
    for (int l = 0, c = code; l < d_; ++l, c /= 3) {
      if (c % 3 > 0) A = A.with(l);
      if (c % 3 == 1) E = E.with(l);
    }
    slot_base_[code] = slot;
    const int n = m.bg_size(A);
    for (int i = 0; i < n; ++i) {
      double cum = 0;
      for (auto it = m.blocks.lower_bound(BlockKey{A, 0, Face()}); it != m.blocks.end() && it->first.from == A; ++it) {
        Step z = decode_step(it->first.z, d_);
        if (target_face(A, z, E) != it->first.to) continue;
        const Eigen::MatrixXd& P = it->second;
        for (int j = 0; j < P.cols(); ++j) {
          if (P(i, j) <= 0) continue;
          auto [pos, fresh] = step_index.try_emplace(it->first.z, static_cast<std::uint32_t>(steps_.size()));
          if (fresh) steps_.push_back(z);
          cum += P(i, j);
          out_.push_back({cum, pos->second, j});
        }
      }
      offset_.push_back(out_.size());
      ++slot;
    }
  }
  slot_base_[codes] = slot;
}

bool CompiledKernel::has_moves(int code, int i) const {
  std::size_t s = slot_base_[code] + i;
  return offset_[s + 1] > offset_[s];
}

void CompiledKernel::step(std::vector<int>& x, int& i, Rng& rng) const {
  const std::size_t s = slot_base_[class_code(x)] + i;
  const std::size_t lo = offset_[s], hi = offset_[s + 1];
  if (lo == hi) return;
  const double u = rng.uniform() * out_[hi - 1].cum;
  std::size_t k = lo;
  while (k + 1 < hi && out_[k].cum <= u) ++k;
  const Outcome& o = out_[k];
  const auto& z = steps_[o.step];
  for (int l = 0; l < d_; ++l) x[l] += z[l];
  i = o.j;
}

}  // namespace mmrrw
