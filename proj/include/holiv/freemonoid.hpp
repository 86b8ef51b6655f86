#pragma once

#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "holiv/error.hpp"

namespace holiv::freemonoid {

// One factor g^e of a word; exponents are always >= 1 after normalization.
struct Factor {
  int gen = 0;
  int exp = 1;
  friend bool operator==(const Factor&, const Factor&) = default;
};

// A word of the free monoid over opaque integer generator ids.
// Normal form: exponents >= 1, adjacent factors have distinct ids, the empty
// factor list is the identity.
class FreeWord {
 public:
  FreeWord() = default;
  static FreeWord single(int gen, int exp = 1);
  static FreeWord from_factors(std::vector<Factor> raw);

  const std::vector<Factor>& factors() const { return factors_; }
  bool is_identity() const { return factors_.empty(); }
  int letter_length() const;
  std::vector<int> letters() const;  // expanded id sequence

  // Serialized form "g3^2.g1.g7^4": dot-separated factors, caret exponents,
  // "^1" omitted; the identity serializes as "1".
  std::string str() const;
  static FreeWord parse(const std::string& s);

  friend bool operator==(const FreeWord&, const FreeWord&) = default;

  // Length-then-lexicographic order on expanded letters; used for canonical
  // word scans and as the map key order.
  friend std::strong_ordering operator<=>(const FreeWord& a, const FreeWord& b);

 private:
  std::vector<Factor> factors_;
};

FreeWord concat(const FreeWord& a, const FreeWord& b);
FreeWord pow(const FreeWord& w, int k);

struct GeneratingSet {
  std::vector<FreeWord> words;  // g_1 .. g_N0
  int n0() const { return static_cast<int>(words.size()); }
};

// { g_i } ∪ { g_i g_j } ∪ { g_i g_j g_k }, deduplicated after normalization.
std::set<FreeWord> build_g0(const GeneratingSet& gens);

// { g in G0 : g_i g in G0 for every i }.
std::set<FreeWord> build_g0_prime(const std::set<FreeWord>& g0,
                                  const GeneratingSet& gens);

// Map word -> complex trace value, with an optional per-entry error bound
// carried alongside (harvested characters attach certified errors).
class CharTable {
 public:
  void set(const FreeWord& w, std::complex<double> value, double error = 0.0);
  bool contains(const FreeWord& w) const;
  std::complex<double> at(const FreeWord& w) const;  // MissingWord
  double error_at(const FreeWord& w) const;
  const std::map<FreeWord, std::complex<double>>& values() const {
    return values_;
  }

 private:
  std::map<FreeWord, std::complex<double>> values_;
  std::map<FreeWord, double> errors_;
};

}  // namespace holiv::freemonoid
