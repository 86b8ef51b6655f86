#include "holiv/freemonoid.hpp"

#include <algorithm>
#include <cmath>

namespace holiv::freemonoid {

FreeWord FreeWord::single(int gen, int exp) {
  if (exp < 1) fail(Err::InvalidArgument, "FreeWord: exponent must be >= 1");
  FreeWord w;
  w.factors_.push_back({gen, exp});
  return w;
}

FreeWord FreeWord::from_factors(std::vector<Factor> raw) {
  FreeWord w;
  for (const Factor& f : raw) {
    if (f.exp < 1)
      fail(Err::InvalidArgument, "FreeWord: exponent must be >= 1");
    if (!w.factors_.empty() && w.factors_.back().gen == f.gen)
      w.factors_.back().exp += f.exp;
    else
      w.factors_.push_back(f);
  }
  return w;
}

int FreeWord::letter_length() const {
  int n = 0;
  for (const Factor& f : factors_) n += f.exp;
  return n;
}

std::vector<int> FreeWord::letters() const {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(letter_length()));
  for (const Factor& f : factors_)
    for (int i = 0; i < f.exp; ++i) out.push_back(f.gen);
  return out;
}

std::string FreeWord::str() const {
  if (factors_.empty()) return "1";
  std::string out;
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (i) out += '.';
    out += 'g' + std::to_string(factors_[i].gen);
    if (factors_[i].exp != 1) out += '^' + std::to_string(factors_[i].exp);
  }
  return out;
}

FreeWord FreeWord::parse(const std::string& s) {
  if (s.empty()) fail(Err::ParseError, "FreeWord: empty string");
  if (s == "1") return FreeWord();
  std::vector<Factor> factors;
  size_t pos = 0;
  while (pos < s.size()) {
    if (s[pos] != 'g')
      fail(Err::ParseError, "FreeWord: expected 'g' at position " +
                                std::to_string(pos) + " in '" + s + "'");
    ++pos;
    size_t digits = 0;
    long id = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      id = id * 10 + (s[pos] - '0');
      ++pos;
      ++digits;
    }
    if (!digits) fail(Err::ParseError, "FreeWord: missing generator id");
    long exp = 1;
    if (pos < s.size() && s[pos] == '^') {
      ++pos;
      digits = 0;
      exp = 0;
      while (pos < s.size() &&
             std::isdigit(static_cast<unsigned char>(s[pos]))) {
        exp = exp * 10 + (s[pos] - '0');
        ++pos;
        ++digits;
      }
      if (!digits) fail(Err::ParseError, "FreeWord: missing exponent");
      if (exp < 1) fail(Err::ParseError, "FreeWord: exponent must be >= 1");
    }
    factors.push_back({static_cast<int>(id), static_cast<int>(exp)});
    if (pos < s.size()) {
      if (s[pos] != '.')
        fail(Err::ParseError, "FreeWord: expected '.' separator");
      ++pos;
      if (pos == s.size()) fail(Err::ParseError, "FreeWord: trailing '.'");
    }
  }
  return from_factors(std::move(factors));
}

std::strong_ordering operator<=>(const FreeWord& a, const FreeWord& b) {
  const int la = a.letter_length(), lb = b.letter_length();
  if (la != lb) return la <=> lb;
  return a.letters() <=> b.letters();
}

FreeWord concat(const FreeWord& a, const FreeWord& b) {
  std::vector<Factor> all = a.factors();
  all.insert(all.end(), b.factors().begin(), b.factors().end());
  return FreeWord::from_factors(std::move(all));
}

FreeWord pow(const FreeWord& w, int k) {
  if (k < 0) fail(Err::InvalidArgument, "pow: negative exponent");
  FreeWord out;
  for (int i = 0; i < k; ++i) out = concat(out, w);
  return out;
}

std::set<FreeWord> build_g0(const GeneratingSet& gens) {
  std::set<FreeWord> out;
  for (const auto& gi : gens.words) out.insert(gi);
  for (const auto& gi : gens.words)
    for (const auto& gj : gens.words) out.insert(concat(gi, gj));
  for (const auto& gi : gens.words)
    for (const auto& gj : gens.words)
      for (const auto& gk : gens.words)
        out.insert(concat(concat(gi, gj), gk));
  return out;
}

std::set<FreeWord> build_g0_prime(const std::set<FreeWord>& g0,
                                  const GeneratingSet& gens) {
  std::set<FreeWord> out;
  for (const auto& g : g0) {
    bool keep = true;
    for (const auto& gi : gens.words) {
      if (!g0.count(concat(gi, g))) {
        keep = false;
        break;
      }
    }
    if (keep) out.insert(g);
  }
  return out;
}

void CharTable::set(const FreeWord& w, std::complex<double> value,
                    double error) {
  if (w.is_identity()) {
    // The empty word's trace is the representation dimension.
    const double re = value.real();
    if (std::abs(value.imag()) > 1e-9 || re < 0.5 ||
        std::abs(re - std::round(re)) > 1e-9)
      fail(Err::InvalidArgument,
           "CharTable: empty-word value must be a positive integer dimension");
  }
  values_[w] = value;
  errors_[w] = error;
}

bool CharTable::contains(const FreeWord& w) const {
  return values_.count(w) != 0;
}

std::complex<double> CharTable::at(const FreeWord& w) const {
  auto it = values_.find(w);
  if (it == values_.end())
    fail(Err::MissingWord, "CharTable: no entry for " + w.str());
  return it->second;
}

double CharTable::error_at(const FreeWord& w) const {
  auto it = errors_.find(w);
  if (it == errors_.end())
    fail(Err::MissingWord, "CharTable: no entry for " + w.str());
  return it->second;
}

}  // namespace holiv::freemonoid
