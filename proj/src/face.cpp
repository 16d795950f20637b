#include "mmrrw/face.hpp"

#include <algorithm>
#include <charconv>

namespace mmrrw {

Face Face::of(std::initializer_list<int> zero_based) {
  std::vector<int> v(zero_based);
  return from_members(v);
}

Face Face::from_members(std::span<const int> zero_based) {
  std::uint32_t m = 0;
  for (int l : zero_based) {
    if (l < 0 || l >= kMaxDim) throw ModelError("face member out of range: " + std::to_string(l));
    m |= 1u << l;
  }
  return Face(m);
}

Face Face::parse(std::string_view key, int d) {
  std::uint32_t m = 0;
  std::size_t pos = 0;
  while (pos < key.size()) {
    std::size_t comma = key.find(',', pos);
    if (comma == std::string_view::npos) comma = key.size();
    auto tok = key.substr(pos, comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size())
      throw ModelError("bad face key '" + std::string(key) + "'");
    if (v < 1 || v > d)
      throw ModelError("face key '" + std::string(key) + "' has index outside 1.." + std::to_string(d));
    if (m & (1u << (v - 1))) throw ModelError("face key '" + std::string(key) + "' repeats an index");
    m |= 1u << (v - 1);
    pos = comma + 1;
  }
  return Face(m);
}

std::vector<int> Face::members() const {
  std::vector<int> out;
  for (int l = 0; l < 32; ++l)
    if (contains(l)) out.push_back(l);
  return out;
}

std::string Face::key() const {
  std::string s;
  for (int l : members()) {
    if (!s.empty()) s += ',';
    s += std::to_string(l + 1);
  }
  return s;
}

Face face_of(std::span<const int> x) {
  std::uint32_t m = 0;
  for (std::size_t l = 0; l < x.size(); ++l)
    if (x[l] > 0) m |= 1u << l;
  return Face(m);
}

bool lex_less(Face a, Face b) {
  auto ma = a.members(), mb = b.members();
  return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
}

std::vector<Face> faces_by_size_desc(int d) {
  std::vector<Face> out;
  for (std::uint32_t m = 0; m < (1u << d); ++m) out.emplace_back(m);
  std::stable_sort(out.begin(), out.end(), [](Face a, Face b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return lex_less(a, b);
  });
  return out;
}

std::uint64_t encode_step(std::span<const int> z) {
  std::uint64_t code = 0, p = 1;
  for (int v : z) {
    if (v < -1 || v > 1) throw ModelError("step entry outside {-1,0,1}");
    code += static_cast<std::uint64_t>(v + 1) * p;
    p *= 3;
  }
  return code;
}

Step decode_step(std::uint64_t code, int d) {
  Step z(d);
  for (int l = 0; l < d; ++l) {
    z[l] = static_cast<int>(code % 3) - 1;
    code /= 3;
  }
  return z;
}

}  // namespace mmrrw
