#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "report.hpp"
#include "selmerlab/arith.hpp"
#include "selmerlab/curve.hpp"
#include "selmerlab/dist.hpp"
#include "selmerlab/family.hpp"
#include "selmerlab/isotropy.hpp"
#include "selmerlab/lattices.hpp"
#include "selmerlab/pell.hpp"
#include "selmerlab/randmat.hpp"
#include "selmerlab/selmer.hpp"

namespace {

using namespace selmerlab;
using namespace selmerlab::cli;

struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Global {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string format = "tsv";
  std::string out;
};

std::vector<i64> parse_list(const std::string& s) {
  std::vector<i64> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    i64 v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw usage_error("not an integer: '" + tok + "'");
    }
    if (used != tok.size()) throw usage_error("not an integer: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

curve::Curve2T parse_curve(const std::string& s) {
  const std::vector<i64> a = parse_list(s);
  if (a.size() != 3) throw usage_error("--curve needs three roots a1,a2,a3");
  try {
    return curve::Curve2T::make(a[0], a[1], a[2]);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
}

std::vector<SquareClass> parse_classes(const std::string& s) {
  std::vector<SquareClass> out;
  for (i64 m : parse_list(s)) {
    if (m == 0) throw usage_error("square class 0 is not allowed");
    out.push_back(SquareClass::of(m));
  }
  return out;
}

curve::DescentClass parse_descent(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw usage_error("descent class must be c1:c2");
  const std::vector<i64> a = parse_list(s.substr(0, colon)), b = parse_list(s.substr(colon + 1));
  if (a.size() != 1 || b.size() != 1 || a[0] == 0 || b[0] == 0) throw usage_error("descent class must be c1:c2");
  return {SquareClass::of(a[0]), SquareClass::of(b[0])};
}

std::vector<curve::DescentClass> parse_tracked(const std::string& s) {
  std::vector<curve::DescentClass> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(parse_descent(tok));
  return out;
}

std::map<std::string, i64> parse_params(const std::vector<std::string>& kv) {
  std::map<std::string, i64> out;
  for (const std::string& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw usage_error("expected key=value, got '" + s + "'");
    const std::vector<i64> v = parse_list(s.substr(eq + 1));
    if (v.size() != 1) throw usage_error("expected a single integer in '" + s + "'");
    out[s.substr(0, eq)] = v[0];
  }
  return out;
}

i64 param(const std::map<std::string, i64>& m, const std::string& key, std::optional<i64> fallback = std::nullopt) {
  const auto it = m.find(key);
  if (it != m.end()) return it->second;
  if (fallback) return *fallback;
  throw usage_error("missing parameter " + key + "=");
}

std::string rational_str(const dist::Rational& r) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(r);
  if (boost::multiprecision::denominator(r) != 1) os << '/' << boost::multiprecision::denominator(r);
  return os.str();
}

std::string real_str(const dist::Real& r, int digits = 30) {
  std::ostringstream os;
  os << std::setprecision(digits) << r;
  return os.str();
}

json curve_json(const curve::Curve2T& E) { return json::array({E.a1, E.a2, E.a3}); }

json classes_json(const std::vector<SquareClass>& v) {
  json out = json::array();
  for (SquareClass c : v) out.push_back(c.value());
  return out;
}

json sigma_json(const SigmaSet& sigma) {
  json out = json::array();
  for (const Place& v : sigma.places) out.push_back(v.name());
  return out;
}

std::vector<i64> with_primes_of(std::vector<i64> extra, i64 d) {
  if (d != 0)
    for (i64 p : prime_divisors(d < 0 ? -d : d))
      if (p != 2) extra.push_back(p);
  return extra;
}

// ---- selmer

struct SelmerArgs {
  std::string curve;
  i64 d = 1;
  std::string extra;
  std::string oracle = "all";
  std::string track;
};

bool same_span(const selmer::SelmerGroup& a, const selmer::SelmerGroup& b) {
  if (a.dim != b.dim) return false;
  for (const auto& c : a.basis)
    if (!b.contains(c)) return false;
  return true;
}

int cmd_selmer(const SelmerArgs& a, Report& rep) {
  const curve::Curve2T E = parse_curve(a.curve);
  if (a.d == 0 || squarefree_kernel(a.d) != a.d) throw usage_error("--d must be a nonzero squarefree integer");
  const SigmaSet sigma = selmer::sigma_for(E, parse_list(a.extra));
  rep.meta["config"] = json{{"curve", curve_json(E)}, {"d", a.d}, {"extra", parse_list(a.extra)}, {"oracle", a.oracle}, {"track", a.track}};
  rep.summary["sigma"] = sigma_json(sigma);
  const bool all = a.oracle == "all";
  std::optional<selmer::SelmerGroup> direct, kernel;
  std::optional<std::uint64_t> count;
  if (all || a.oracle == "direct") direct = selmer::selmer_direct(E, a.d, sigma);
  if (all || a.oracle == "kernel") kernel = selmer::selmer_kernel(E, a.d, sigma);
  if (all || a.oracle == "formula") count = selmer::selmer_count_formula(E, a.d, sigma);
  const selmer::SelmerGroup* shown = kernel ? &*kernel : direct ? &*direct : nullptr;
  if (direct) rep.summary["dim_direct"] = exact(direct->dim);
  if (kernel) rep.summary["dim_kernel"] = exact(kernel->dim);
  if (count) rep.summary["count_formula"] = exact(*count);
  bool agree = true;
  if (direct && kernel) agree = agree && same_span(*direct, *kernel);
  if (count && shown) agree = agree && *count == (std::uint64_t{1} << shown->dim);
  rep.summary["oracles_agree"] = agree;
  if (shown) {
    rep.summary["dim"] = exact(shown->dim);
    rep.columns = {"index", "c1", "c2"};
    for (std::size_t i = 0; i < shown->basis.size(); ++i) rep.add_row({i, shown->basis[i].c1.value(), shown->basis[i].c2.value()});
    json contains = json::object();
    for (const curve::DescentClass& t : parse_tracked(a.track)) contains[t.str()] = shown->contains(t);
    if (!contains.empty()) rep.summary["contains"] = contains;
  }
  if (!agree) {
    std::cerr << "selmer: oracle disagreement for d = " << a.d << '\n';
    return kExitInvariant;
  }
  return kExitOk;
}

// ---- census

struct CensusArgs {
  std::string curve, L, extra, track;
  i64 b = 1;
  u64 X = 0;
  u64 from = 0;
  bool nonmembers = false;
};

int cmd_census(const CensusArgs& a, const Global& g, Report& rep) {
  const curve::Curve2T E = parse_curve(a.curve);
  const std::vector<SquareClass> L = parse_classes(a.L);
  if (a.b == 0) throw usage_error("--b must be nonzero");
  family::FamilySpec spec = family::FamilySpec::make(E, L, parse_list(a.extra));
  spec.with_b(selmer::BClass::of(spec.sigma, a.b));
  const std::vector<curve::DescentClass> tracked = parse_tracked(a.track);
  rep.meta["config"] = json{{"curve", curve_json(E)}, {"L", classes_json(L)}, {"b", a.b},      {"X", a.X},
                            {"from", a.from},         {"track", a.track},       {"extra", a.extra}, {"include_nonmembers", a.nonmembers}};
  family::CensusOptions opts;
  opts.workers = g.workers;
  opts.from = a.from;
  opts.include_nonmembers = a.nonmembers;
  const family::Census c = family::census(spec, a.X, tracked, opts);

  rep.summary["sigma"] = sigma_json(spec.sigma);
  rep.summary["b"] = spec.full_b().str();
  rep.summary["n_b"] = exact(c.n_b);
  rep.summary["m_b"] = exact(c.m_b);
  rep.summary["m_b_parity_prediction"] = exact(c.m_b_kappa);
  rep.summary["members"] = c.members;
  json hist = json::array();
  for (const auto& [r, count] : c.histogram) {
    const family::Interval w = family::wilson_interval(count, c.members);
    const double alpha = c.m_b < 0 ? 0.0 : dist::to_double(dist::alpha(c.m_b + 2 * r));
    hist.push_back(json{{"r", r},
                        {"dim", 2 + c.n_b + c.m_b + 2 * r},
                        {"count", count},
                        {"mass", empirical(c.mass(r), 0.05)},
                        {"wilson95", json::array({w.lo, w.hi})},
                        {"alpha", exact(alpha)},
                        {"abs_gap", std::abs(c.mass(r) - alpha)}});
  }
  rep.summary["histogram"] = hist;
  json viol = json::array();
  for (i64 d : c.parity_violations) viol.push_back(d);
  rep.summary["parity_violations"] = viol;
  json skipped = json::array();
  for (const auto& [d, why] : c.skipped) skipped.push_back(json{{"d", d}, {"reason", why}});
  rep.summary["skipped"] = skipped;
  rep.summary["warnings"] = c.warnings;

  rep.columns = {"d", "dim_sel", "in_family"};
  for (const auto& t : tracked) rep.columns.push_back("contains_" + t.str());
  for (const family::CensusRow& row : c.rows) {
    json r = json::array({row.d, row.dim_sel, row.in_family ? 1 : 0});
    for (bool b : row.sel_contains) r.push_back(b ? 1 : 0);
    rep.add_row(std::move(r));
  }
  if (!c.parity_violations.empty()) {
    std::cerr << "census: parity violation at d =";
    for (i64 d : c.parity_violations) std::cerr << ' ' << d;
    std::cerr << '\n';
    return kExitInvariant;
  }
  return kExitOk;
}

// ---- randmat

struct RandmatArgs {
  bool gamma = false, hist = false, lines = false;
  std::vector<std::string> params;
};

int cmd_randmat(const RandmatArgs& a, const Global& g, Report& rep) {
  if (a.gamma + a.hist + a.lines != 1) throw usage_error("choose exactly one of --gamma, --hist, --lines");
  const auto P = parse_params(a.params);
  randmat::SampleOptions opts;
  opts.seed = g.seed;
  opts.workers = g.workers;
  opts.e = static_cast<int>(param(P, "e", 0));
  const int p = static_cast<int>(param(P, "p", 2));
  const u64 N = static_cast<u64>(param(P, "N", 100000));
  json config = json::object();
  for (const auto& [k, v] : P) config[k] = v;
  config["mode"] = a.gamma ? "gamma" : a.hist ? "hist" : "lines";
  rep.meta["config"] = config;

  if (a.gamma) {
    const randmat::GammaEstimate r =
        randmat::gamma_n_empirical(static_cast<int>(param(P, "n")), static_cast<int>(param(P, "s")), p, N, opts);
    rep.summary["precision"] = r.e;
    rep.summary["samples"] = r.samples;
    rep.summary["hits"] = r.hits;
    rep.summary["retried"] = r.retried;
    rep.summary["undetermined"] = r.undetermined;
    rep.summary["estimate"] = empirical(r.estimate, 3 * r.stderr_);
    rep.summary["stderr"] = r.stderr_;
    rep.summary["exact"] = exact(rational_str(r.exact));
    rep.summary["exact_value"] = exact(dist::to_double(r.exact));
    rep.summary["z"] = r.z();
    rep.summary["within_3_sigma"] = std::abs(r.z()) <= 3.0;
    return kExitOk;
  }
  if (a.hist) {
    const int n = static_cast<int>(param(P, "n", 0)), s = static_cast<int>(param(P, "s"));
    const randmat::KernelHistogram h = randmat::kernel_dim_distribution(n, s, p, N, opts);
    const std::vector<dist::Rational> law = randmat::exact_kernel_distribution(n, s, p);
    rep.summary["precision"] = h.e;
    rep.summary["samples"] = h.samples;
    rep.summary["parity_ok"] = h.parity_ok();
    rep.summary["max_alpha_gap"] = empirical(h.max_alpha_gap(), 0.02);
    rep.columns = {"dim", "count", "mass", "alpha", "finite_s_exact"};
    for (int d = 0; d <= s; ++d)
      rep.add_row({d, h.counts[d], h.mass(d), randmat::alpha_prediction(n, d, p), dist::to_double(law[d])});
    return h.parity_ok() ? kExitOk : kExitInvariant;
  }
  const int s = static_cast<int>(param(P, "s")), U = static_cast<int>(param(P, "U"));
  const randmat::LineTest t = randmat::line_equidistribution_test(s, p, U, N, opts);
  rep.summary["precision"] = t.e;
  rep.summary["drawn"] = t.drawn;
  rep.summary["conditioned"] = t.conditioned;
  rep.summary["undetermined"] = t.undetermined;
  rep.summary["chi2"] = t.chi2;
  rep.summary["dof"] = t.dof;
  rep.summary["p_value"] = empirical(t.p_value, 0.001);
  rep.summary["inconclusive"] = t.inconclusive;
  rep.columns = {"line", "count"};
  const auto lines = randmat::lines_of(U, p);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string name;
    for (u64 x : lines[i]) name += std::to_string(x);
    rep.add_row({name, t.counts[i]});
  }
  return kExitOk;
}

// ---- dist

struct DistArgs {
  std::optional<int> alpha, beta, moment;
  std::string gamma;
  int p = 2;
  bool pell = false;
};

int cmd_dist(const DistArgs& a, Report& rep) {
  rep.meta["config"] = json{{"alpha", a.alpha ? json(*a.alpha) : json()},
                            {"beta", a.beta ? json(*a.beta) : json()},
                            {"gamma", a.gamma},
                            {"moment", a.moment ? json(*a.moment) : json()},
                            {"p", a.p},
                            {"pell_constants", a.pell}};
  bool any = false;
  if (a.alpha) {
    any = true;
    rep.summary["alpha"] = exact(real_str(dist::alpha(*a.alpha, a.p)));
    rep.summary["alpha_total_mass"] = exact(real_str(dist::alpha_total_mass(a.p)));
  }
  if (a.beta) {
    any = true;
    const dist::Rational rec = dist::beta_recurrence(*a.beta, a.p), closed = dist::beta_closed_form(*a.beta, a.p);
    rep.summary["beta"] = exact(rational_str(rec));
    rep.summary["beta_closed_form_agrees"] = rec == closed;
    rep.summary["beta_series"] = empirical(real_str(dist::beta_series(*a.beta, a.p)), 1e-12);
  }
  if (!a.gamma.empty()) {
    any = true;
    const std::vector<i64> v = parse_list(a.gamma);
    if (v.size() != 3) throw usage_error("--gamma needs n,s,p");
    const dist::Rational gx = dist::gamma_exact(static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]));
    rep.summary["gamma"] = exact(rational_str(gx));
    rep.summary["gamma_value"] = exact(dist::to_double(gx));
  }
  if (a.moment) {
    any = true;
    std::ostringstream os;
    os << dist::hom_moment_closed_form(*a.moment);
    rep.summary["hom_moment_closed_form"] = exact(os.str());
    rep.summary["alpha_moment_even"] = exact(real_str(dist::alpha_moment(*a.moment, 0)));
    rep.summary["alpha_moment_odd"] = exact(real_str(dist::alpha_moment(*a.moment, 1)));
    rep.summary["moment_identity"] = dist::alpha_moment_check(*a.moment, 1e-12);
  }
  if (a.pell) {
    any = true;
    const dist::PellConstants c = dist::pell_constants();
    rep.summary["c_pell"] = exact(real_str(c.c_pell));
    rep.summary["alpha_pell"] = exact(real_str(c.alpha_pell));
    rep.summary["euler_gap"] = exact(real_str(c.euler_gap));
    rep.summary["selmer_sum"] = exact(real_str(c.selmer_sum()));
  }
  if (!any) throw usage_error("dist: choose at least one of --alpha, --beta, --gamma, --moment, --pell-constants");
  return kExitOk;
}

// ---- pell

struct PellArgs {
  std::optional<u64> census;
  std::optional<i64> d;
};

int cmd_pell(const PellArgs& a, const Global& g, Report& rep) {
  if (a.census.has_value() == a.d.has_value()) throw usage_error("pell: choose exactly one of --census X, --d D");
  if (a.d) {
    rep.meta["config"] = json{{"d", *a.d}};
    const pell::Fundamental f = pell::fundamental_solution(*a.d);
    const pell::PellSelmer S = pell::pell_selmer(*a.d);
    std::ostringstream x, y;
    x << f.x;
    y << f.y;
    rep.summary["soluble"] = exact(pell::pell_soluble(*a.d));
    rep.summary["cf_period"] = exact(pell::cf_period(*a.d));
    rep.summary["fundamental"] = exact(json{{"x", x.str()}, {"y", y.str()}, {"norm", f.norm}});
    rep.summary["in_family"] = pell::in_family(*a.d);
    rep.summary["discriminant"] = S.disc;
    rep.summary["selmer_dim"] = exact(S.dim);
    rep.summary["selmer_elements"] = S.elements;
    return kExitOk;
  }
  rep.meta["config"] = json{{"census", *a.census}};
  const pell::CensusReport c = pell::stevenhagen_census(*a.census, {.workers = g.workers});
  const family::Interval w = c.wilson();
  const dist::PellConstants k = dist::pell_constants();
  rep.summary["family_size"] = c.rows.size();
  rep.summary["squarefree_scanned"] = c.scanned;
  rep.summary["soluble"] = c.soluble;
  rep.summary["soluble_fraction"] = informational(c.soluble_fraction());
  rep.summary["wilson95"] = json::array({w.lo, w.hi});
  rep.summary["c_pell"] = exact(dist::to_double(k.c_pell));
  rep.summary["selmer_prediction"] = informational(c.selmer_prediction());
  json pr = json::object();
  for (const auto& [r, n] : c.by_dim) pr[std::to_string(r)] = c.pr(r);
  rep.summary["pr"] = pr;
  rep.summary["dim1_insoluble"] = exact(c.dim1_insoluble);
  rep.summary["soluble_outside_family"] = exact(c.soluble_outside_family);
  rep.summary["soluble_not_in_selmer"] = exact(c.soluble_not_in_selmer);
  rep.summary["selmer_membership_mismatch"] = exact(c.selmer_membership_mismatch);
  rep.summary["implications_hold"] = c.implications_hold();
  rep.columns = {"d", "dim", "soluble"};
  for (const pell::CensusRow& r : c.rows) rep.add_row({r.d, r.dim, r.soluble ? 1 : 0});
  return c.implications_hold() ? kExitOk : kExitInvariant;
}

// ---- isotropy

struct IsotropyArgs {
  std::optional<int> dim;
  bool main_term = false;
  std::string curve, L, extra;
  i64 b = 1;
  bool literal = false;
};

int cmd_isotropy(const IsotropyArgs& a, Report& rep) {
  if (a.dim.has_value() == a.main_term) throw usage_error("isotropy: choose exactly one of --dim, --main-term");
  if (a.dim) {
    const int n = *a.dim;
    if (n < 2 || n % 2 != 0) throw usage_error("--dim must be a positive even number");
    rep.meta["config"] = json{{"dim", n}};
    const isotropy::F2Space V = isotropy::F2Space::symplectic(n / 2);
    std::ostringstream formula;
    formula << isotropy::max_isotropic_count(n);
    rep.summary["max_isotropic_formula"] = exact(formula.str());
    bool ok = true;
    if (n <= isotropy::kMaxEnumerateDim) {
      const u64 enumerated = isotropy::enumerate_max_isotropic(V).size();
      rep.summary["max_isotropic_enumerated"] = exact(enumerated);
      ok = ok && formula.str() == std::to_string(enumerated);
    }
    if (n <= isotropy::kMaxBruteForceDim) {
      const u64 brute = isotropy::brute_force_max_isotropic(V).size();
      rep.summary["max_isotropic_brute_force"] = exact(brute);
      ok = ok && formula.str() == std::to_string(brute);
      const isotropy::UnlinkedReport u = isotropy::unlinked_classification_check(V);
      rep.summary["maximal_unlinked"] = exact(u.maximal_unlinked);
      rep.summary["cosets"] = exact(u.cosets);
      rep.summary["unlinked_are_cosets"] = u.ok();
      ok = ok && u.ok();
    }
    rep.summary["consistent"] = ok;
    return ok ? kExitOk : kExitInvariant;
  }
  const curve::Curve2T E = parse_curve(a.curve);
  const std::vector<SquareClass> L = parse_classes(a.L);
  std::vector<i64> extra = parse_list(a.extra);
  for (SquareClass c : L) extra = with_primes_of(extra, c.value());
  const SigmaSet sigma = selmer::sigma_for(E, extra);
  const selmer::BClass b = selmer::BClass::of(sigma, a.b);
  rep.meta["config"] = json{{"curve", curve_json(E)}, {"L", classes_json(L)}, {"b", a.b}, {"extra", a.extra}, {"literal", a.literal}};
  isotropy::YOptions opts;
  opts.literal = a.literal;
  const isotropy::MainTermReport m = isotropy::main_term_identity_check(E, sigma, b, L, opts);
  rep.summary["sigma"] = sigma_json(sigma);
  rep.summary["n_b"] = exact(m.n_b);
  rep.summary["condition_gamma"] = m.condition_gamma;
  rep.summary["lhs"] = exact(rational_str(m.lhs));
  rep.summary["rhs"] = exact(rational_str(m.rhs));
  rep.summary["equal"] = m.equal();
  rep.columns = {"dim_U", "U_basis", "phi", "y", "star", "gamma_invariant"};
  for (const isotropy::WTerm& t : m.terms) {
    json U = json::array(), phi = json::array();
    for (auto u : t.W.U_basis) U.push_back(u);
    for (auto f : t.W.phi) phi.push_back(f);
    rep.add_row({t.W.dim_U(), U.dump(), phi.dump(), rational_str(t.y), t.star ? 1 : 0, t.gamma_invariant ? 1 : 0});
  }
  if (m.condition_gamma && !m.equal()) {
    std::cerr << "isotropy: main-term identity fails under the condition on gamma\n";
    return kExitInvariant;
  }
  return kExitOk;
}

// ---- lattice

struct LatticeArgs {
  int n1 = 0, n2 = 0, n3 = 0;
  int trials = 50;
};

int cmd_lattice(const LatticeArgs& a, const Global& g, Report& rep) {
  if (a.n1 < 0 || a.n2 < 0 || a.n3 < 0 || a.n1 + a.n2 + 2 * a.n3 == 0) throw usage_error("lattice: need nonnegative n1,n2,n3 with positive rank");
  if (a.n1 + a.n2 + 2 * a.n3 > 12) throw usage_error("lattice: rank above 12 is not supported");
  rep.meta["config"] = json{{"n1", a.n1}, {"n2", a.n2}, {"n3", a.n3}, {"trials", a.trials}};
  const lattices::IntMatrix G = lattices::block_sum(a.n1, a.n2, a.n3);
  const lattices::Multiplicities want{a.n1, a.n2, a.n3};
  std::mt19937_64 rng(g.seed);
  rep.columns = {"trial", "n1", "n2", "n3", "norm_index"};
  bool ok = true;
  for (int t = 0; t < a.trials; ++t) {
    auto [U, Ui] = lattices::random_unimodular(static_cast<int>(G.rows()), rng);
    const lattices::IntMatrix H = Ui * G * U;
    const lattices::Multiplicities got = lattices::decompose(H);
    const std::int64_t idx = lattices::norm_index(H);
    ok = ok && got == want && idx == (std::int64_t{1} << a.n1);
    rep.add_row({t, got.n1, got.n2, got.n3, idx});
  }
  rep.summary["expected_norm_index"] = exact(std::int64_t{1} << a.n1);
  rep.summary["all_recovered"] = ok;
  return ok ? kExitOk : kExitInvariant;
}

// ---- condition-check

struct ConditionArgs {
  std::string curve, L, zeta, extra;
};

int cmd_condition(const ConditionArgs& a, Report& rep) {
  const curve::Curve2T E = parse_curve(a.curve);
  const std::vector<SquareClass> L = parse_classes(a.L);
  rep.meta["config"] = json{{"curve", curve_json(E)}, {"L", classes_json(L)}, {"zeta", a.zeta}, {"extra", a.extra}};
  const curve::ConditionGammaReport r = curve::check_condition_gamma(E, L);
  json gamma = json::array();
  for (const curve::GammaElement& x : r.gamma) gamma.push_back(x.code());
  rep.summary["condition_gamma"] = r.satisfied();
  rep.summary["gamma_codes"] = gamma;
  rep.summary["e4_kummer_gens"] = classes_json(r.e4_gens);
  rep.summary["intersection_with_L"] = classes_json(r.intersection);
  rep.summary["invariant_line"] = r.simplicity.invariant_line ? json(*r.simplicity.invariant_line) : json();
  rep.summary["commuting_element"] = r.simplicity.commuting ? json(r.simplicity.commuting->code()) : json();
  if (!a.zeta.empty()) {
    const curve::DescentClass z = parse_descent(a.zeta);
    std::vector<i64> extra = parse_list(a.extra);
    for (SquareClass c : {z.c1, z.c2}) extra = with_primes_of(extra, c.value());
    const SigmaSet sigma = selmer::sigma_for(E, extra);
    const std::optional<selmer::BClass> w = selmer::find_condition_E_witness(E, sigma, z);
    rep.summary["condition_E_witness"] = w ? json(w->str()) : json();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-Selmer experiments for quadratic twist families"};
  app.set_version_flag("--version", std::string(SELMERLAB_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Random seed")->envname("SELMERLAB_SEED");
  app.add_option("--workers", g.workers, "Worker threads")->envname("SELMERLAB_WORKERS")->check(CLI::Range(1, 256));
  app.add_option("--format", g.format, "Output format")->envname("SELMERLAB_FORMAT")->check(CLI::IsMember({"tsv", "json"}));
  app.add_option("--out", g.out, "Output file (default stdout)")->envname("SELMERLAB_OUT");

  SelmerArgs sa;
  auto* sel = app.add_subcommand("selmer", "Selmer group of a twist by three methods");
  sel->add_option("--curve", sa.curve, "Roots a1,a2,a3")->required()->envname("SELMERLAB_CURVE");
  sel->add_option("--d", sa.d, "Squarefree twist");
  sel->add_option("--extra", sa.extra, "Extra primes in sigma");
  sel->add_option("--track", sa.track, "Descent classes c1:c2 to test for membership");
  sel->add_option("--oracle", sa.oracle)->check(CLI::IsMember({"direct", "kernel", "formula", "all"}));

  CensusArgs ca;
  auto* cen = app.add_subcommand("census", "Selmer dimension census over a twist family");
  cen->add_option("--curve", ca.curve)->required()->envname("SELMERLAB_CURVE");
  cen->add_option("--L", ca.L, "Generators m1,m2 of L")->envname("SELMERLAB_L");
  cen->add_option("--b", ca.b, "Integer representing the local class b");
  cen->add_option("--X", ca.X, "Bound on |d|")->required()->envname("SELMERLAB_X");
  cen->add_option("--from", ca.from, "Resume: skip |d| below this bound");
  cen->add_option("--track", ca.track, "Descent classes c1:c2, comma separated");
  cen->add_option("--extra", ca.extra, "Extra primes in sigma");
  cen->add_flag("--include-nonmembers", ca.nonmembers);

  RandmatArgs ra;
  auto* rm = app.add_subcommand("randmat", "Random alternating matrix model");
  rm->add_flag("--gamma", ra.gamma, "Estimate gamma_n(s): n= s= p= N= [e=]");
  rm->add_flag("--hist", ra.hist, "Kernel dimension histogram: n= s= p= N= [e=]");
  rm->add_flag("--lines", ra.lines, "Line equidistribution: s= p= U= N= [e=]");
  rm->add_option("params", ra.params, "key=value parameters");

  DistArgs da;
  auto* ds = app.add_subcommand("dist", "Exact distribution constants");
  ds->add_option("--alpha", da.alpha, "alpha(r)");
  ds->add_option("--beta", da.beta, "beta_n");
  ds->add_option("--gamma", da.gamma, "gamma_n(s) as n,s,p");
  ds->add_option("--moment", da.moment, "Moment identity of order k");
  ds->add_option("--p", da.p, "Prime for alpha and beta");
  ds->add_flag("--pell-constants", da.pell);

  PellArgs pa;
  auto* pl = app.add_subcommand("pell", "Negative Pell solubility and its Selmer group");
  pl->add_option("--census", pa.census, "Census of the family below X");
  pl->add_option("--d", pa.d, "Single squarefree d");

  IsotropyArgs ia;
  auto* iso = app.add_subcommand("isotropy", "Maximal isotropic subspaces and the main term");
  iso->add_option("--dim", ia.dim, "dim A[2]");
  iso->add_flag("--main-term", ia.main_term);
  iso->add_option("--curve", ia.curve)->envname("SELMERLAB_CURVE");
  iso->add_option("--L", ia.L)->envname("SELMERLAB_L");
  iso->add_option("--b", ia.b);
  iso->add_option("--extra", ia.extra);
  iso->add_flag("--literal", ia.literal);

  LatticeArgs la;
  auto* lat = app.add_subcommand("lattice", "Z[C2]-lattice classification under conjugation");
  lat->add_option("--n1", la.n1);
  lat->add_option("--n2", la.n2);
  lat->add_option("--n3", la.n3);
  lat->add_option("--trials", la.trials)->check(CLI::Range(1, 100000));

  ConditionArgs cc;
  auto* cond = app.add_subcommand("condition-check", "Condition on the image of gamma and witness search");
  cond->add_option("--curve", cc.curve)->required()->envname("SELMERLAB_CURVE");
  cond->add_option("--L", cc.L)->envname("SELMERLAB_L");
  cond->add_option("--zeta", cc.zeta, "Descent class c1:c2 for the witness search");
  cond->add_option("--extra", cc.extra);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Report rep;
  CLI::App* sub = app.get_subcommands().front();
  rep.meta["tool"] = "selmerlab";
  rep.meta["version"] = SELMERLAB_VERSION;
  rep.meta["command"] = sub->get_name();
  rep.meta["seed"] = g.seed;

  int code = kExitOk;
  try {
    if (sub == sel) code = cmd_selmer(sa, rep);
    else if (sub == cen) code = cmd_census(ca, g, rep);
    else if (sub == rm) code = cmd_randmat(ra, g, rep);
    else if (sub == ds) code = cmd_dist(da, rep);
    else if (sub == pl) code = cmd_pell(pa, g, rep);
    else if (sub == iso) code = cmd_isotropy(ia, rep);
    else if (sub == lat) code = cmd_lattice(la, g, rep);
    else code = cmd_condition(cc, rep);
  } catch (const selmer::budget_error& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const curve::local_image_budget_error& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::overflow_error& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!g.out.empty()) {
    file.open(g.out, std::ios::binary);
    if (!file) {
      std::cerr << "cannot open " << g.out << '\n';
      return kExitUsage;
    }
    os = &file;
  }
  if (g.format == "json")
    rep.write_json(*os);
  else
    rep.write_tsv(*os);
  return code;
}
