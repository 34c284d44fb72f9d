#include "selmerlab/family.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "selmerlab/f2.hpp"

namespace selmerlab::family {

namespace {

bool splits(const std::vector<SquareClass>& L, i64 p) {
  for (const SquareClass& m : L)
    if (kronecker(m.value(), p) != 1) return false;
  return true;
}

bool class_ok(const FamilySpec& spec, i64 d) {
  for (std::size_t i = 0; i < spec.sigma.places.size(); ++i) {
    const auto& c = spec.b[i];
    if (c && local_bits(d, spec.sigma.places[i]) != c->bits) return false;
  }
  return true;
}

bool primes_split(const FamilySpec& spec, std::span<const u64> primes) {
  for (u64 p : primes)
    if (!spec.sigma.contains_prime(static_cast<i64>(p)) && !splits(spec.L_gens, static_cast<i64>(p))) return false;
  return true;
}

// Squarefree |d| < X passing the class test, ascending |d|, negative first; flags L-splitting.
std::vector<std::pair<i64, bool>> class_members(const FamilySpec& spec, u64 X, u64 from) {
  std::vector<std::pair<i64, bool>> out;
  if (X < 2) return out;
  squarefree_sieve(X - 1, [&](u64 n, std::span<const u64> primes) {
    if (n < from) return;
    const bool split = primes_split(spec, primes);
    for (i64 d : {-static_cast<i64>(n), static_cast<i64>(n)})
      if (class_ok(spec, d)) out.emplace_back(d, split);
  });
  return out;
}

}  // namespace

FamilySpec FamilySpec::make(const Curve2T& E, std::vector<SquareClass> L_gens, const std::vector<i64>& extra) {
  std::vector<i64> ps = extra;
  for (const SquareClass& m : L_gens)
    for (i64 p : prime_divisors(m.value())) ps.push_back(p);
  FamilySpec s{E, selmer::sigma_for(E, ps), std::move(L_gens), {}};
  s.b.assign(s.sigma.places.size(), std::nullopt);
  return s;
}

FamilySpec& FamilySpec::with_b(const selmer::BClass& full) {
  if (full.classes.size() != sigma.places.size()) throw std::invalid_argument("b-class does not match sigma");
  for (std::size_t i = 0; i < full.classes.size(); ++i) {
    if (!(full.classes[i].place == sigma.places[i])) throw std::invalid_argument("b-class does not match sigma");
    b[i] = full.classes[i];
  }
  return *this;
}

FamilySpec& FamilySpec::restrict_place(const LocalClass& c) {
  for (std::size_t i = 0; i < sigma.places.size(); ++i)
    if (sigma.places[i] == c.place) {
      b[i] = c;
      return *this;
    }
  throw std::invalid_argument("place not in sigma");
}

bool FamilySpec::b_is_full() const {
  return std::all_of(b.begin(), b.end(), [](const auto& c) { return c.has_value(); });
}

selmer::BClass FamilySpec::full_b() const {
  if (!b_is_full()) throw std::invalid_argument("family leaves some place of sigma unrestricted");
  selmer::BClass out;
  for (const auto& c : b) out.classes.push_back(*c);
  return out;
}

int FamilySpec::n_L() const {
  curve::ClassCoordinates coords(L_gens);
  std::vector<f2::vec> vs;
  for (const SquareClass& m : L_gens) vs.push_back(coords.of(m));
  return 1 << f2::rank(vs);
}

void FamilySpec::validate() const {
  selmer::require_sigma(curve, sigma);
  if (b.size() != sigma.places.size()) throw std::invalid_argument("b-class does not match sigma");
  for (const SquareClass& m : L_gens)
    for (i64 p : prime_divisors(m.value()))
      if (!sigma.contains_prime(p)) throw std::invalid_argument("L ramifies outside sigma");
}

bool is_member(const FamilySpec& spec, i64 d) {
  if (d == 0 || squarefree_kernel(d) != d) return false;
  if (!class_ok(spec, d)) return false;
  for (i64 p : prime_divisors(d))
    if (!spec.sigma.contains_prime(p) && !splits(spec.L_gens, p)) return false;
  return true;
}

std::vector<i64> sieve_family(const FamilySpec& spec, u64 X) {
  spec.validate();
  std::vector<i64> out;
  for (auto [d, split] : class_members(spec, X, 0))
    if (split) out.push_back(d);
  return out;
}

std::vector<ProbeRow> asymptotic_probe(const FamilySpec& spec, const std::vector<u64>& Xs) {
  if (!std::is_sorted(Xs.begin(), Xs.end())) throw std::invalid_argument("X list must be ascending");
  std::vector<ProbeRow> out;
  if (Xs.empty()) return out;
  const std::vector<i64> all = sieve_family(spec, Xs.back());
  const double expo = 1.0 / spec.n_L() - 1.0;
  for (u64 X : Xs) {
    ProbeRow r{X, 0, 0};
    r.count = static_cast<u64>(std::count_if(all.begin(), all.end(), [X](i64 d) { return static_cast<u64>(std::abs(d)) < X; }));
    const double scale = static_cast<double>(X) * std::pow(std::log(static_cast<double>(X)), expo);
    r.ratio = r.count == 0 ? 0.0 : static_cast<double>(r.count) / scale;
    out.push_back(r);
  }
  return out;
}

double Census::mass(int r) const {
  auto it = histogram.find(r);
  if (it == histogram.end() || members == 0) return 0;
  return static_cast<double>(it->second) / static_cast<double>(members);
}

Census census(const FamilySpec& spec, u64 X, const std::vector<DescentClass>& tracked, const CensusOptions& opts) {
  spec.validate();
  const selmer::BClass b = spec.full_b();
  Census out;
  const curve::ConditionGammaReport cg = curve::check_condition_gamma(spec.curve, spec.L_gens);
  if (!cg.satisfied()) out.warnings.push_back("condition on the image of gamma fails for this curve and L");
  out.n_b = selmer::systematic_subspace(spec.curve, spec.sigma, b, spec.L_gens, opts.image_seed).n_b;
  const int kappa = selmer::parity_kappa(spec.curve, spec.sigma, b, opts.image_seed);
  out.m_b_kappa = ((kappa - out.n_b) % 2 + 2) % 2;

  std::vector<std::pair<i64, bool>> cand = class_members(spec, X, opts.from);
  if (!opts.include_nonmembers) std::erase_if(cand, [](const auto& c) { return !c.second; });

  std::vector<CensusRow> rows(cand.size());
  std::vector<std::string> errors(cand.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < cand.size(); i += step) {
      CensusRow& row = rows[i];
      row.d = cand[i].first;
      row.in_family = cand[i].second;
      try {
        const selmer::SelmerGroup G = selmer::selmer_kernel(spec.curve, row.d, spec.sigma, opts.image_seed);
        row.dim_sel = G.dim;
        for (const DescentClass& t : tracked) row.sel_contains.push_back(G.contains(t));
      } catch (const std::exception& e) {
        errors[i] = e.what();
        row.dim_sel = -1;
      }
    }
  };
  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, static_cast<std::size_t>(w), static_cast<std::size_t>(workers));
  }

  const int base = 2 + out.n_b;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!errors[i].empty()) {
      out.skipped.emplace_back(rows[i].d, errors[i]);
      continue;
    }
    if (!rows[i].in_family) {
      out.rows.push_back(std::move(rows[i]));
      continue;
    }
    const int dim = rows[i].dim_sel;
    if (out.m_b < 0) out.m_b = ((dim - base) % 2 + 2) % 2;
    if (((dim - base - out.m_b) % 2 + 2) % 2 != 0) {
      out.parity_violations.push_back(rows[i].d);
    } else {
      const int r = (dim - base - out.m_b) / 2;
      ++out.histogram[r];
      ++out.members;
    }
    out.rows.push_back(std::move(rows[i]));
  }
  if (out.m_b < 0) out.m_b = out.m_b_kappa;
  if (out.m_b != out.m_b_kappa) out.warnings.push_back("empirical m_b disagrees with the parity prediction");
  return out;
}

Interval wilson_interval(u64 k, u64 n, double z) {
  if (n == 0) return {0, 1};
  const double N = static_cast<double>(n), p = static_cast<double>(k) / N, z2 = z * z;
  const double centre = (p + z2 / (2 * N)) / (1 + z2 / N);
  const double half = z * std::sqrt(p * (1 - p) / N + z2 / (4 * N * N)) / (1 + z2 / N);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double local_share(const LocalClass& c) {
  const Place& v = c.place;
  switch (v.kind) {
    case Place::Kind::real:
      return 0.5;
    case Place::Kind::two:
      return (c.bits & 1) ? 1.0 / 12 : 1.0 / 6;
    case Place::Kind::odd: {
      const double p = static_cast<double>(v.p);
      return (c.bits & 1) ? 1.0 / (2 * (p + 1)) : p / (2 * (p + 1));
    }
  }
  return 0;
}

double expected_class_count(const FamilySpec& spec, u64 X) {
  double e = 2.0 * static_cast<double>(X) * 6.0 / (std::numbers::pi * std::numbers::pi);
  for (const auto& c : spec.b)
    if (c) e *= local_share(*c);
  return e;
}

}  // namespace selmerlab::family
