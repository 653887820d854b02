#pragma once

// Descriptors of countable abelian groups of bounded exponent, written as
// direct sums of cyclic prime-power groups Z_{p^n} with multiplicity finite or
// omega, and the invariants that decide bi-embeddability and tractability.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eqcsp/error.hpp"

namespace eqcsp {

/// Finite positive count or omega.  omega + c = omega - 1 = omega.
class Multiplicity {
 public:
  static Multiplicity omega() { return Multiplicity(true, 0); }
  static Multiplicity finite(std::uint64_t count) {
    if (count == 0) throw InputError("multiplicity must be positive");
    return Multiplicity(false, count);
  }

  bool is_omega() const noexcept { return omega_; }
  std::uint64_t count() const {
    if (omega_) throw Error("omega has no finite count");
    return count_;
  }

  friend Multiplicity operator+(Multiplicity a, Multiplicity b) {
    if (a.omega_ || b.omega_) return omega();
    return finite(a.count_ + b.count_);
  }

  std::string to_string() const { return omega_ ? "w" : std::to_string(count_); }

  friend bool operator==(const Multiplicity&, const Multiplicity&) = default;

 private:
  Multiplicity(bool omega, std::uint64_t count) : omega_(omega), count_(count) {}
  bool omega_;
  std::uint64_t count_;
};

inline bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  for (std::uint64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

/// p^n, or nullopt if it does not fit in 63 bits.
inline std::optional<std::uint64_t> checked_power(std::uint64_t p, unsigned n) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < n; ++i) {
    if (r > (std::uint64_t{1} << 62) / p) return std::nullopt;
    r *= p;
  }
  return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > (std::uint64_t{1} << 62) / a) throw InputError("modulus exceeds 64-bit range");
  return a * b;
}

class GroupDescriptor {
 public:
  using Key = std::pair<std::uint64_t, unsigned>;  // (prime, level)

  GroupDescriptor() = default;

  void add(std::uint64_t p, unsigned n, Multiplicity s) {
    if (!is_prime(p)) throw InputError("not a prime: " + std::to_string(p));
    if (n < 1) throw InputError("level must be at least 1");
    if (!checked_power(p, n)) throw InputError("cyclic factor too large: " + std::to_string(p) + "^" + std::to_string(n));
    auto [it, inserted] = parts_.try_emplace(Key{p, n}, s);
    if (!inserted) it->second = it->second + s;
  }

  const std::map<Key, Multiplicity>& parts() const noexcept { return parts_; }
  bool trivial() const noexcept { return parts_.empty(); }
  bool is_finite() const {
    for (const auto& [k, s] : parts_)
      if (s.is_omega()) return false;
    return true;
  }

  friend bool operator==(const GroupDescriptor&, const GroupDescriptor&) = default;

 private:
  std::map<Key, Multiplicity> parts_;
};

/// Grammar: "1" or atoms `p^n:s` joined by '+', with s a positive integer or `w`.
inline GroupDescriptor parse_descriptor(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw InputError("empty group descriptor");
  GroupDescriptor d;
  if (s == "1") return d;
  std::size_t pos = 0;
  auto number = [&](const char* what) -> std::uint64_t {
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) throw InputError(std::string("descriptor: expected ") + what + " at offset " + std::to_string(start));
    if (pos - start > 18) throw InputError(std::string("descriptor: ") + what + " too large");
    return std::stoull(s.substr(start, pos - start));
  };
  auto expect = [&](char c) {
    if (pos >= s.size() || s[pos] != c)
      throw InputError(std::string("descriptor: expected '") + c + "' at offset " + std::to_string(pos));
    ++pos;
  };
  while (true) {
    const std::uint64_t p = number("prime");
    expect('^');
    const std::uint64_t n = number("level");
    expect(':');
    Multiplicity m = Multiplicity::omega();
    if (pos < s.size() && s[pos] == 'w') {
      ++pos;
    } else {
      m = Multiplicity::finite(number("multiplicity"));
    }
    if (n > 64) throw InputError("descriptor: level too large");
    d.add(p, static_cast<unsigned>(n), m);
    if (pos == s.size()) break;
    expect('+');
  }
  return d;
}

/// Canonical text: primes ascending, levels descending within a prime.
inline std::string to_string(const GroupDescriptor& d) {
  if (d.trivial()) return "1";
  std::vector<std::pair<GroupDescriptor::Key, Multiplicity>> items(d.parts().begin(), d.parts().end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.first.first != b.first.first) return a.first.first < b.first.first;
    return a.first.second > b.first.second;
  });
  std::string out;
  for (const auto& [key, s] : items) {
    if (!out.empty()) out += " + ";
    out += std::to_string(key.first) + "^" + std::to_string(key.second) + ":" + s.to_string();
  }
  return out;
}

inline std::map<std::uint64_t, GroupDescriptor> primary_decomposition(const GroupDescriptor& d) {
  std::map<std::uint64_t, GroupDescriptor> out;
  for (const auto& [key, s] : d.parts()) out[key.first].add(key.first, key.second, s);
  return out;
}

inline std::uint64_t exponent(const GroupDescriptor& d) {
  std::map<std::uint64_t, unsigned> top;
  for (const auto& [key, s] : d.parts()) top[key.first] = std::max(top[key.first], key.second);
  std::uint64_t e = 1;
  for (const auto& [p, n] : top) e = checked_mul(e, *checked_power(p, n));
  return e;
}

/// Invariant of one p-part: the top omega level and the finite multiplicities
/// strictly above it.
struct PrimeClass {
  unsigned m = 0;
  std::map<unsigned, std::uint64_t> finite;
  friend bool operator==(const PrimeClass&, const PrimeClass&) = default;
};

struct BiEmbedClass {
  std::map<std::uint64_t, PrimeClass> primes;  // only primes occurring in the group
  friend bool operator==(const BiEmbedClass&, const BiEmbedClass&) = default;

  /// prod p^{m_p}
  std::uint64_t omega_modulus() const {
    std::uint64_t n = 1;
    for (const auto& [p, c] : primes) n = checked_mul(n, *checked_power(p, c.m));
    return n;
  }

  /// Cyclic moduli of the finite remainder H, with repetition.
  std::vector<std::uint64_t> finite_moduli() const {
    std::vector<std::uint64_t> out;
    for (const auto& [p, c] : primes)
      for (const auto& [level, count] : c.finite) {
        if (count > 64) throw InputError("finite part too large to enumerate");
        for (std::uint64_t i = 0; i < count; ++i) out.push_back(*checked_power(p, level));
      }
    return out;
  }
};

inline BiEmbedClass biembed_normal_form(const GroupDescriptor& d) {
  BiEmbedClass cls;
  for (const auto& [key, s] : d.parts()) {
    auto& pc = cls.primes[key.first];
    if (s.is_omega()) pc.m = std::max(pc.m, key.second);
  }
  for (const auto& [key, s] : d.parts()) {
    auto& pc = cls.primes[key.first];
    if (key.second > pc.m) pc.finite[key.second] = s.count();
  }
  return cls;
}

inline bool biembeddable(const GroupDescriptor& a, const GroupDescriptor& b) {
  return biembed_normal_form(a) == biembed_normal_form(b);
}

/// Quotient by an involution lying in a cyclic factor of level i of the
/// 2-part: one Z_{2^i} becomes Z_{2^{i-1}}.  Other primes are untouched.
inline GroupDescriptor quotient_by_involution(const GroupDescriptor& d, unsigned i) {
  auto it = d.parts().find({2, i});
  if (it == d.parts().end()) throw InputError("no 2-part factor at level " + std::to_string(i));
  GroupDescriptor out;
  for (const auto& [key, s] : d.parts()) {
    if (key.first == 2 && key.second == i) {
      if (s.is_omega())
        out.add(2, i, s);
      else if (s.count() > 1)
        out.add(2, i, Multiplicity::finite(s.count() - 1));
    } else {
      out.add(key.first, key.second, s);
    }
  }
  if (i > 1) out.add(2, i - 1, Multiplicity::finite(1));
  return out;
}

inline bool has_square_embedding(const GroupDescriptor& d) {
  for (const auto& [p, c] : biembed_normal_form(d).primes)
    if (!c.finite.empty()) return false;
  return true;
}

struct Classification {
  bool tractable = false;
  std::uint64_t m = 1;
  bool with_double = false;
  friend bool operator==(const Classification&, const Classification&) = default;

  static Classification np_hard() { return {false, 0, false}; }
};

inline Classification classify(const GroupDescriptor& d) {
  const BiEmbedClass cls = biembed_normal_form(d);
  bool with_double = false;
  for (const auto& [p, c] : cls.primes) {
    if (c.finite.empty()) continue;
    if (p != 2) return Classification::np_hard();
    if (c.finite.size() != 1 || c.finite.begin()->first != c.m + 1 || c.finite.begin()->second != 1)
      return Classification::np_hard();
    with_double = true;
  }
  return {true, cls.omega_modulus(), with_double};
}

inline std::string to_string(const Classification& c) {
  if (!c.tractable) return "np-hard";
  std::ostringstream out;
  out << "tractable(m=" << c.m << (c.with_double ? ", double" : "") << ")";
  return out.str();
}

/// Cyclic moduli of a finite descriptor, each p^n repeated s times.
inline std::vector<std::uint64_t> finite_moduli(const GroupDescriptor& d) {
  std::vector<std::uint64_t> out;
  for (const auto& [key, s] : d.parts()) {
    if (s.is_omega()) throw InputError("descriptor is infinite");
    if (s.count() > 64) throw InputError("descriptor too large to enumerate");
    for (std::uint64_t i = 0; i < s.count(); ++i) out.push_back(*checked_power(key.first, key.second));
  }
  return out;
}

}  // namespace eqcsp
