// coarsegeo: command-line front end for the coarse library.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coarse/analysis.hpp"
#include "coarse/asdim.hpp"
#include "coarse/factorize.hpp"
#include "coarse/quotients.hpp"
#include "json.hpp"

using namespace coarse;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfig = 2;

struct RunConfig {
  std::string subcommand;
  std::string descriptor;
  std::string scheme = "standard";
  std::string format;  // empty: csv for tables, json otherwise
  std::string out;
  std::string construction;
  std::string x;
  std::string acting = "G";
  std::string chain;
  std::vector<std::string> subgroup;
  std::optional<double> radius;
  std::int64_t budget = kDefaultBudget;
  std::uint64_t seed = 1;
  std::int64_t N = 20;
  std::int64_t n = 2;
  std::int64_t level = 8;
  std::int64_t eps = 6;
  std::int64_t stage = 0;
  double tail = 0.5;
  std::vector<double> Ds{2};
  std::vector<double> Ms;
  std::vector<double> deltas;
  bool colors_witness = false;
  bool fc = false;
};

struct Report {
  Json json;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool table = false;
  int exit = kOk;
};

// Exact numbers: integers stay integers, anything else becomes a decimal string.
Json exact(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Snowflaked norms are square roots; keep them symbolic unless integral.
Json exact(const NormValue& v) {
  if (!v.sqrt) return v.raw;
  auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v.raw))));
  if (r * r == v.raw) return r;
  return "sqrt(" + std::to_string(v.raw) + ")";
}

Json fitted(double v) { return Json{{"fitted", v}}; }

template <class T>
std::string cell(const T& v) {
  Json j = exact(v);
  return j.is_string() ? j.get<std::string>() : j.dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

Json config_json(const RunConfig& c) {
  Json j;
  j["subcommand"] = c.subcommand;
  if (!c.descriptor.empty()) j["descriptor"] = c.descriptor;
  j["scheme"] = c.scheme;
  if (c.radius) j["radius"] = exact(*c.radius);
  j["budget"] = c.budget;
  j["seed"] = c.seed;
  if (!c.construction.empty()) j["construction"] = c.construction;
  if (!c.x.empty()) j["x"] = c.x;
  if (c.subcommand == "orbit") j["acting"] = c.acting;
  if (!c.chain.empty()) j["chain"] = c.chain;
  if (!c.subgroup.empty()) j["subgroup"] = c.subgroup;
  if (c.subcommand == "growth" || c.subcommand == "growthfit" || c.subcommand == "distortion") j["N"] = c.N;
  if (c.subcommand == "growthfit" || c.subcommand == "distortion") j["tail"] = exact(c.tail);
  if (c.subcommand == "section") {
    j["level"] = c.level;
    j["eps"] = c.eps;
  }
  if (c.subcommand == "asdim") {
    Json d = Json::array(), m = Json::array();
    for (double v : c.Ds) d.push_back(exact(v));
    for (double v : c.Ms) m.push_back(exact(v));
    j["D"] = d;
    j["M"] = m;
  }
  if (!c.deltas.empty()) {
    Json d = Json::array();
    for (double v : c.deltas) d.push_back(exact(v));
    j["deltas"] = d;
  }
  return j;
}

Group group_of(const RunConfig& c) {
  if (c.descriptor.empty()) throw Error("--descriptor is required");
  return Group::parse(c.descriptor);
}

NormScheme scheme_of(const RunConfig& c, const Group& g) {
  NormScheme s = NormScheme::standard(g, c.budget);
  if (c.scheme == "standard") return s;
  if (c.scheme == "snowflake") return s.snowflake();
  throw Error("unknown scheme '" + c.scheme + "' (expected standard or snowflake)");
}

double radius_of(const RunConfig& c, double fallback) {
  double r = c.radius.value_or(fallback);
  if (r < 0) throw Error("--radius must be nonnegative");
  return r;
}

std::string kebab(Construction t) {
  std::string s = to_string(t), out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::isupper(static_cast<unsigned char>(s[i])) && i > 0 && std::islower(static_cast<unsigned char>(s[i - 1])))
      out += '-';
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
  }
  return out;
}

Json modulus_json(const ModulusReport& m, const MetricSpace& X) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < m.deltas.size(); ++k) {
    Json r{{"delta", exact(m.deltas[k])}, {"omega", exact(m.omega[k])}};
    if (m.witness[k]) r["witness"] = {X.format(m.witness[k]->first), X.format(m.witness[k]->second)};
    rows.push_back(r);
  }
  return Json{{"map", m.map}, {"R", exact(m.R)}, {"points", m.points}, {"pairs", m.pairs}, {"table", rows}};
}

Json certificate_json(const WitnessRecipe& w, const CertificateReport& r) {
  Json j;
  j["name"] = w.name;
  j["construction"] = kebab(w.tag);
  j["bijective"] = w.bijective;
  j["K"] = exact(w.certificate.K);
  j["pass"] = r.pass;
  j["reason"] = r.reason;
  j["R_x"] = exact(r.R_x);
  j["R_y"] = exact(r.R_y);
  j["f_modulus"] = modulus_json(r.f_modulus, *w.certificate.f.domain);
  j["g_modulus"] = modulus_json(r.g_modulus, *w.certificate.g.domain);
  j["f_bounded"] = r.f_bounded;
  j["g_bounded"] = r.g_bounded;
  j["f_round_trip"] = exact(r.f_round_trip);
  j["g_round_trip"] = exact(r.g_round_trip);
  if (!w.params.empty()) {
    Json p;
    for (const auto& [k, v] : w.params) p[k] = v;
    j["params"] = p;
  }
  if (!w.table.empty()) j["table"] = w.table;
  return j;
}

// Named constructions shared by verify and modulus.
std::vector<WitnessRecipe> resolve(const RunConfig& c) {
  if (c.construction == "z-times-zn") {
    auto w = z_times_zn_witness(c.n, radius_of(c, 1000));
    return {w};
  }
  if (c.construction == "classification") return classification_witness(group_of(c)).stages;
  if (c.construction == "ut3-obvious") {
    NormScheme s = NormScheme::standard(Group::parse("UT3"), c.budget);
    SectionFn sec{"H(x,0,z)", [](const Element& q) { return Element{{q.c[0], 0, q.c[2]}}; }};
    FactorizationOptions opt;
    opt.R_x = opt.R_y = radius_of(c, 12);
    opt.deltas = {1};
    return {t4_witness(s, ut3_center(), ut3_center_quotient(c.budget), sec, opt)};
  }
  throw Error("unknown --construction '" + c.construction + "' (expected z-times-zn, classification or ut3-obvious)");
}

// ---------------------------------------------------------------------------

Report cmd_ball(const RunConfig& c) {
  Group g = group_of(c);
  NormScheme s = scheme_of(c, g);
  double r = radius_of(c, 2);
  Ball b = s.ball(r);
  Report rep;
  rep.table = true;
  rep.header = {"norm", "element"};
  Json el = Json::array();
  for (std::size_t i = 0; i < b.size(); ++i) {
    rep.rows.push_back({cell(b.norms[i]), csv_field(g.format(b.elements[i]))});
    el.push_back(Json{{"norm", exact(b.norms[i])}, {"element", g.format(b.elements[i])}});
  }
  rep.json["radius"] = exact(r);
  rep.json["size"] = static_cast<std::int64_t>(b.size());
  rep.json["elements"] = el;
  return rep;
}

Report cmd_growth(const RunConfig& c) {
  Group g = group_of(c);
  auto p = growth_sequence(scheme_of(c, g), c.N);
  if (p.truncated) throw BudgetExceeded("growth sequence stopped at n = " + std::to_string(p.max_n + 1), c.budget);
  Report rep;
  rep.table = true;
  rep.header = {"n", "size"};
  for (std::size_t n = 0; n < p.sizes.size(); ++n) rep.rows.push_back({std::to_string(n), std::to_string(p.sizes[n])});
  rep.json["generating_set"] = p.generating_set;
  rep.json["sizes"] = p.sizes;
  return rep;
}

Report cmd_growthfit(const RunConfig& c) {
  Group g = group_of(c);
  auto p = growth_sequence(scheme_of(c, g), c.N);
  if (p.truncated) throw BudgetExceeded("growth sequence stopped at n = " + std::to_string(p.max_n + 1), c.budget);
  auto f = growth_fit(p, c.tail);
  Report rep;
  rep.header = {"degree", "C", "residual", "from", "to"};
  rep.rows.push_back({std::to_string(f.exponent), std::to_string(f.C), std::to_string(f.residual),
                      std::to_string(f.from), std::to_string(f.to)});
  rep.json["degree"] = fitted(f.exponent);
  rep.json["C"] = fitted(f.C);
  rep.json["residual"] = fitted(f.residual);
  rep.json["tail"] = Json{{"from", f.from}, {"to", f.to}, {"fraction", exact(f.tail_fraction)}};
  rep.json["sizes"] = p.sizes;
  return rep;
}

FactorChain parse_mode(const std::string& m) {
  if (m == "whole") return FactorChain::whole();
  if (m == "trivial") return FactorChain::trivial();
  auto colon = m.find(':');
  if (colon != std::string::npos) {
    std::string head = m.substr(0, colon);
    std::int64_t v = std::stoll(m.substr(colon + 1));
    if (head == "mult") return FactorChain::multiples(v);
    if (head == "coords") return FactorChain::coordinates(v);
  }
  throw Error("unknown chain mode '" + m + "' (expected whole, trivial, mult:N or coords:N)");
}

Report cmd_section(const RunConfig& c) {
  Group g = group_of(c);
  SubgroupChain ch = [&] {
    if (c.chain.empty()) return SubgroupChain::exhaustion(g);
    std::vector<FactorChain> modes;
    std::stringstream ss(c.chain);
    for (std::string m; std::getline(ss, m, ',');) modes.push_back(parse_mode(m));
    return SubgroupChain(g, modes);
  }();
  Section s(ch, scheme_of(c, g), whole_group(), {}, c.budget);
  auto chk = check_section(s, c.level, c.eps, c.budget);
  Report rep;
  bool ok = chk.section_property && chk.bound_holds;
  rep.json["pass"] = ok;
  rep.json["section_property"] = chk.section_property;
  rep.json["bound_holds"] = chk.bound_holds;
  rep.json["cosets_checked"] = chk.cosets_checked;
  rep.json["pairs_checked"] = chk.pairs_checked;
  Json diam = Json::array();
  for (double d : chk.diameters) diam.push_back(exact(d));
  rep.json["diameters"] = diam;
  if (chk.witness) rep.json["witness"] = {g.format(chk.witness->first), g.format(chk.witness->second)};
  rep.json["detail"] = chk.detail;
  Json alpha = Json::array();
  for (const auto& a : s.alpha_table())
    alpha.push_back(Json{{"level", a.level}, {"coset", g.format(a.coset_key)}, {"alpha", g.format(a.value)}});
  rep.json["alpha"] = alpha;
  rep.header = {"eps", "diameter"};
  for (std::size_t e = 0; e < chk.diameters.size(); ++e) rep.rows.push_back({std::to_string(e), cell(chk.diameters[e])});
  rep.exit = ok ? kOk : kFailed;
  return rep;
}

Report cmd_witness(const RunConfig& c) {
  Classification cl = classification_witness(group_of(c));
  Report rep;
  rep.json["target"] = cl.target;
  rep.json["torsion_free_rank"] = cl.r0 ? Json(*cl.r0) : Json("inf");
  rep.json["finitely_generated"] = cl.finitely_generated;
  std::string name;
  Json stages = Json::array();
  bool all = true;
  rep.header = {"stage", "construction", "pass", "R_x", "R_y"};
  for (std::size_t i = 0; i < cl.stages.size(); ++i) {
    const auto& w = cl.stages[i];
    auto r = verify_recipe(w);
    all = all && r.pass;
    name += (i ? " + " : "") + kebab(w.tag);
    stages.push_back(certificate_json(w, r));
    rep.rows.push_back({std::to_string(i), kebab(w.tag), r.pass ? "true" : "false", cell(r.R_x), cell(r.R_y)});
  }
  rep.json["witness"] = name;
  rep.json["verified"] = all;
  rep.json["stages"] = stages;
  rep.exit = all ? kOk : kFailed;
  return rep;
}

Report cmd_verify(const RunConfig& c) {
  auto ws = resolve(c);
  Report rep;
  Json stages = Json::array();
  bool all = true;
  rep.header = {"stage", "name", "pass", "f_round_trip", "g_round_trip"};
  for (std::size_t i = 0; i < ws.size(); ++i) {
    auto& w = ws[i];
    if (!c.deltas.empty()) w.deltas = c.deltas;
    auto r = verify_recipe(w);
    all = all && r.pass;
    stages.push_back(certificate_json(w, r));
    rep.rows.push_back({std::to_string(i), csv_field(w.name), r.pass ? "true" : "false", cell(r.f_round_trip),
                        cell(r.g_round_trip)});
  }
  rep.json["pass"] = all;
  rep.json["stages"] = stages;
  rep.exit = all ? kOk : kFailed;
  return rep;
}

Report cmd_modulus(const RunConfig& c) {
  auto ws = resolve(c);
  if (c.stage < 0 || c.stage >= static_cast<std::int64_t>(ws.size()))
    throw Error("--stage out of range (construction has " + std::to_string(ws.size()) + " stages)");
  const auto& w = ws[static_cast<std::size_t>(c.stage)];
  auto deltas = c.deltas.empty() ? w.deltas : c.deltas;
  double R = radius_of(c, w.R_x);
  auto m = continuity_modulus(w.certificate.f, deltas, R);
  Report rep;
  rep.json["stage"] = w.name;
  rep.json["modulus"] = modulus_json(m, *w.certificate.f.domain);
  rep.header = {"delta", "omega"};
  for (std::size_t k = 0; k < m.deltas.size(); ++k) rep.rows.push_back({cell(m.deltas[k]), cell(m.omega[k])});
  return rep;
}

Report cmd_asdim(const RunConfig& c) {
  Group g = group_of(c);
  auto R = static_cast<std::int64_t>(radius_of(c, 20));
  Report rep;
  Json entries = Json::array();
  bool all = true;
  rep.header = {"D", "colors", "mesh", "pass", "M", "exact_min"};
  std::optional<AsdimReport> exact_rep;
  if (!c.Ms.empty()) exact_rep = asdim_report(g, R, c.Ds, c.Ms, 200, c.budget);
  for (double D : c.Ds) {
    ColoredCover cover = group_cover(g, D, R, c.budget);
    Json e{{"D", exact(D)}, {"construction", cover.construction}, {"colors", cover.color_count()},
           {"mesh", exact(cover.mesh)}, {"pieces", static_cast<std::int64_t>(cover.pieces.size())}};
    std::string pass = "";
    if (c.colors_witness) {
      auto v = verify_cover(cover);
      all = all && v.pass;
      e["pass"] = v.pass;
      e["reason"] = v.reason;
      if (v.offending) e["offending"] = {g.format(v.offending->first), g.format(v.offending->second)};
      pass = v.pass ? "true" : "false";
    }
    Json mins = Json::array();
    bool any = false;
    if (exact_rep)
      for (const auto& x : exact_rep->entries)
        if (x.D == D) {
          any = true;
          Json m{{"M", exact(x.M)}};
          m["exact_min"] = x.exact_min ? Json(*x.exact_min) : Json("instance too large");
          mins.push_back(m);
          rep.rows.push_back({cell(D), std::to_string(cover.color_count()), cell(cover.mesh), pass, cell(x.M),
                              x.exact_min ? std::to_string(*x.exact_min) : ""});
        }
    if (!any) rep.rows.push_back({cell(D), std::to_string(cover.color_count()), cell(cover.mesh), pass, "", ""});
    if (exact_rep) e["exact"] = mins;
    entries.push_back(e);
  }
  rep.json["radius"] = R;
  rep.json["entries"] = entries;
  if (c.colors_witness) rep.json["pass"] = all;
  rep.exit = all ? kOk : kFailed;
  return rep;
}

SetSpec acting_set(const Group& g, const std::string& text, std::int64_t limit) {
  if (text == "G") return whole_set();
  // Cyclic subgroup <t>: powers t^k with |k| <= limit.
  Element t = g.parse_element(text);
  auto powers = std::make_shared<std::set<Element>>();
  Element p = g.identity();
  powers->insert(p);
  for (std::int64_t k = 1; k <= limit; ++k) {
    p = g.mul(p, t);
    if (g.is_identity(p)) break;
    powers->insert(p);
    powers->insert(g.inv(p));
  }
  return {"<" + g.format(t) + ">", [powers](const Element& x) { return powers->count(x) > 0; }};
}

Report cmd_orbit(const RunConfig& c) {
  Group g = group_of(c);
  // The quasi-centralizer test doubles the budget five times.
  RunConfig wide = c;
  wide.budget = c.budget * 32;
  NormScheme s = scheme_of(wide, g);
  Report rep;
  rep.header = {"budget", "orbit_size"};
  if (c.fc) {
    auto f = fc_test(s, c.budget);
    rep.json["fc"] = f.fc;
    rep.json["verdict"] = f.verdict;
    rep.json["sampled"] = f.sampled;
    rep.json["counterexamples"] = f.counterexamples;
    if (f.witness) rep.json["witness"] = g.format(*f.witness);
    if (f.witness_trace)
      for (std::size_t i = 0; i < f.witness_trace->budgets.size(); ++i)
        rep.rows.push_back({std::to_string(f.witness_trace->budgets[i]), std::to_string(f.witness_trace->counts[i])});
    return rep;
  }
  if (c.x.empty()) throw Error("--x is required unless --fc is given");
  Element x = g.parse_element(c.x);
  SetSpec A = acting_set(g, c.acting, 4 * c.budget);
  auto q = quasi_centralizer_test(s, x, A, c.budget);
  rep.json["x"] = g.format(x);
  rep.json["acting"] = A.name;
  rep.json["verdict"] = to_string(q.verdict);
  rep.json["orbit_verdict"] = to_string(q.last.verdict);
  rep.json["orbit_size"] = q.last.count();
  rep.json["radius"] = q.last.radius;
  Json trace = Json::array();
  for (std::size_t i = 0; i < q.budgets.size(); ++i) {
    trace.push_back(Json{{"budget", q.budgets[i]}, {"orbit_size", q.counts[i]}});
    rep.rows.push_back({std::to_string(q.budgets[i]), std::to_string(q.counts[i])});
  }
  rep.json["trace"] = trace;
  Json orbit = Json::array();
  for (const auto& y : q.last.orbit) orbit.push_back(g.format(y));
  rep.json["orbit"] = orbit;
  return rep;
}

Report cmd_distortion(const RunConfig& c) {
  Group g = group_of(c);
  if (c.subgroup.empty()) throw Error("--subgroup is required (one element per flag)");
  std::vector<Element> gens;
  for (const auto& t : c.subgroup) gens.push_back(g.parse_element(t));
  auto p = distortion_profile(gens, scheme_of(c, g), c.N, c.budget, c.tail);
  Report rep;
  rep.table = true;
  rep.header = {"n", "min", "max", "count"};
  Json rows = Json::array();
  for (const auto& r : p.table) {
    rep.rows.push_back({std::to_string(r.n), cell(r.min), cell(r.max), std::to_string(r.count)});
    rows.push_back(Json{{"n", r.n}, {"min", exact(r.min)}, {"max", exact(r.max)}, {"count", r.count}});
  }
  Json gj = Json::array();
  for (const auto& x : gens) gj.push_back(g.format(x));
  rep.json["generators"] = gj;
  rep.json["exponent"] = fitted(p.fit.exponent);
  rep.json["residual"] = fitted(p.fit.residual);
  rep.json["tail"] = Json{{"from", p.fit.from}, {"to", p.fit.to}, {"fraction", exact(p.fit.tail_fraction)}};
  rep.json["table"] = rows;
  return rep;
}

Report cmd_doubling(const RunConfig& c) {
  Group g = group_of(c);
  auto d = doubling_constant(scheme_of(c, g), radius_of(c, 10));
  Report rep;
  rep.header = {"radius", "numerator", "denominator"};
  rep.rows.push_back({std::to_string(d.at_radius), std::to_string(d.numerator), std::to_string(d.denominator)});
  rep.json["numerator"] = d.numerator;
  rep.json["denominator"] = d.denominator;
  rep.json["at_radius"] = d.at_radius;
  rep.json["value"] = exact(d.value());
  return rep;
}

Report dispatch(const RunConfig& c) {
  const std::string& s = c.subcommand;
  if (s == "ball") return cmd_ball(c);
  if (s == "growth") return cmd_growth(c);
  if (s == "growthfit") return cmd_growthfit(c);
  if (s == "section") return cmd_section(c);
  if (s == "witness") return cmd_witness(c);
  if (s == "verify") return cmd_verify(c);
  if (s == "modulus") return cmd_modulus(c);
  if (s == "asdim") return cmd_asdim(c);
  if (s == "orbit") return cmd_orbit(c);
  if (s == "distortion") return cmd_distortion(c);
  if (s == "doubling") return cmd_doubling(c);
  throw Error("no subcommand given");
}

std::string render(const RunConfig& c, Report& rep) {
  std::string fmt = c.format.empty() ? (rep.table ? "csv" : "json") : c.format;
  if (fmt == "csv") {
    std::string out;
    for (std::size_t i = 0; i < rep.header.size(); ++i) out += (i ? "," : "") + rep.header[i];
    out += '\n';
    for (const auto& r : rep.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += '\n';
    }
    return out;
  }
  Json j;
  j["schema"] = 1;
  j["config"] = config_json(c);
  for (auto& [k, v] : rep.json.items()) j[k] = v;
  return j.dump(2) + "\n";
}

int emit_error(const RunConfig& c, const std::string& kind, const std::string& msg) {
  std::cerr << "coarsegeo: " << kind << ": " << msg << "\n";
  if (c.format != "csv") {
    Json j;
    j["schema"] = 1;
    j["config"] = config_json(c);
    j["error"] = Json{{"kind", kind}, {"message", msg}};
    std::cout << j.dump(2) << "\n";
  }
  return kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"coarse geometry of countable groups at desk scale", "coarsegeo"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* s) {
    s->add_option("--descriptor", c.descriptor, "group descriptor, e.g. \"Z^2 + Z_6\"");
    s->add_option("--radius", c.radius, "window radius");
    s->add_option("--budget", c.budget, "element budget for enumerations")->check(CLI::PositiveNumber);
    s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    s->add_option("--seed", c.seed, "seed recorded with the run");
    s->add_option("--out", c.out, "write the report to a file");
    s->add_option("--scheme", c.scheme, "standard or snowflake")->check(CLI::IsMember({"standard", "snowflake"}));
  };
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    common(s);
    s->callback([&c, name] { c.subcommand = name; });
    return s;
  };

  sub("ball", "closed ball around the identity");
  sub("growth", "growth sequence |S^n|")->add_option("--N", c.N, "largest n");
  auto* gf = sub("growthfit", "fitted growth degree");
  gf->add_option("--N", c.N, "largest n");
  gf->add_option("--tail", c.tail, "fraction of the profile used by the fit");
  auto* sec = sub("section", "bornologous section over a subgroup chain");
  sec->add_option("--chain", c.chain, "per-factor modes: whole, trivial, mult:N, coords:N (comma separated)");
  sec->add_option("--level", c.level, "coset level checked");
  sec->add_option("--eps", c.eps, "largest scale of the bornology bound");
  sub("witness", "classification witness with verification");
  for (const char* name : {"verify", "modulus"}) {
    auto* v = sub(name, name == std::string("verify") ? "verify a named construction" : "continuity modulus");
    v->add_option("--construction", c.construction, "z-times-zn, classification or ut3-obvious")->required();
    v->add_option("--n", c.n, "n for z-times-zn");
    v->add_option("--delta", c.deltas, "delta grid")->delimiter(',');
    v->add_option("--stage", c.stage, "stage index (modulus)");
  }
  auto* as = sub("asdim", "colored covers at scale");
  as->add_option("--D", c.Ds, "separation scales")->delimiter(',');
  as->add_option("--M", c.Ms, "mesh bounds for the exact search")->delimiter(',');
  as->add_flag("--colors-witness", c.colors_witness, "verify the constructed cover");
  auto* ob = sub("orbit", "conjugacy orbit and quasi-centralizer test");
  ob->add_option("--x", c.x, "element, e.g. \"([1,0,0])\"");
  ob->add_option("--acting", c.acting, "G or a generator of a cyclic subgroup");
  ob->add_flag("--fc", c.fc, "run the FC test instead");
  auto* di = sub("distortion", "distortion profile of a subgroup");
  di->add_option("--subgroup", c.subgroup, "subgroup generator (repeatable)");
  di->add_option("--N", c.N, "largest subgroup norm");
  di->add_option("--tail", c.tail, "fraction of the table used by the fit");
  sub("doubling", "doubling constant max |B_2r| / |B_r|");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "coarsegeo: config: " << e.what() << "\n";
    return kConfig;
  }

  Report rep;
  try {
    rep = dispatch(c);
  } catch (const BudgetExceeded& e) {
    return emit_error(c, "budget", e.what());
  } catch (const ParseError& e) {
    return emit_error(c, "parse", e.what());
  } catch (const std::exception& e) {
    return emit_error(c, "config", e.what());
  }
  std::string text = render(c, rep);
  if (c.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(c.out);
    if (!f) return emit_error(c, "config", "cannot open " + c.out);
    f << text;
  }
  return rep.exit;
}
