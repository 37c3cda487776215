#ifndef LICORM_TOOLS_CLI_HPP
#define LICORM_TOOLS_CLI_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "licorm/licorm.hpp"

namespace licorm::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNumeric = 3;

enum class Command { Eval, Dual, Check, Kusuoka };

inline std::string_view to_string(Command c)
{
  switch (c) {
    case Command::Eval: return "eval";
    case Command::Dual: return "dual";
    case Command::Check: return "check";
    case Command::Kusuoka: return "kusuoka";
  }
  return "unknown";
}

struct RunConfig
{
  Command command = Command::Eval;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> spec_path;
  std::optional<std::string> spec_json;
  std::optional<std::filesystem::path> out;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_iters;
  std::optional<double> target_gap;
  std::optional<double> tol;
  bool snap_atoms = false;
  std::size_t instances = 1000;
  bool random_instance = false;
};

struct Outcome
{
  json report;
  int exit_code = kExitOk;
};

// ---------------------------------------------------------------------------
// Input parsing
// ---------------------------------------------------------------------------

struct SampleFile
{
  std::vector<double> values;
  std::optional<std::vector<double>> weights;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s)
{
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

} // namespace detail

/// One sample per line, optional second column holding the weight. A first
/// line whose first token is not numeric is treated as a header.
inline SampleFile read_samples_csv(std::istream& in)
{
  SampleFile out;
  std::string line;
  std::size_t lineno = 0;
  bool any_weighted = false;
  bool any_unweighted = false;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto comma = body.find(',');
    const auto first = body.substr(0, comma);
    const auto value = detail::parse_double(first);
    if (!value) {
      if (out.values.empty() && lineno == 1) continue;
      detail::parse_fail("line " + std::to_string(lineno) + ": not a number");
    }
    out.values.push_back(*value);
    if (comma == std::string_view::npos) {
      any_unweighted = true;
    } else {
      const auto w = detail::parse_double(body.substr(comma + 1));
      if (!w) detail::parse_fail("line " + std::to_string(lineno) + ": weight is not a number");
      weights.push_back(*w);
      any_weighted = true;
    }
  }
  if (out.values.empty()) throw Error(ErrorCode::EmptyInput, "sample file has no data");
  if (any_weighted && any_unweighted) detail::parse_fail("weight column present on some lines only");
  if (any_weighted) out.weights = std::move(weights);
  return out;
}

inline SampleFile read_samples_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) detail::parse_fail("cannot open input file " + path.string());
  return read_samples_csv(in);
}

inline DiscreteMeasure to_measure(const SampleFile& s, AtomMerge merge)
{
  if (s.weights) return from_samples(s.values, std::span<const double>(*s.weights), merge);
  return from_samples(s.values, std::nullopt, merge);
}

struct ParsedSpec
{
  RiskSpec spec;
  json echo;
  json solver; ///< solver overrides from the document, possibly null
};

namespace detail {

inline double number_at(const json& j, const char* key)
{
  if (!j.contains(key)) parse_fail(std::string("spec is missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) parse_fail(std::string("spec key '") + key + "' must be a number");
  return v.get<double>();
}

inline MomentOrder order_from_json(const json& v)
{
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return MomentOrder::infinity();
    parse_fail("moment order must be a number or \"inf\"");
  }
  if (!v.is_number()) parse_fail("moment order must be a number or \"inf\"");
  return MomentOrder::finite(v.get<double>());
}

inline json order_to_json(MomentOrder p)
{
  if (p.is_infinite()) return "inf";
  return p.value();
}

} // namespace detail

inline json spec_to_json(const RiskSpec& spec)
{
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CvarSpec>) {
          return {{"type", "cvar"}, {"beta", s.beta}};
        } else if constexpr (std::is_same_v<T, HigherMomentSpec>) {
          return {{"type", "higher_moment"}, {"p", s.p}, {"c", s.c}};
        } else if constexpr (std::is_same_v<T, KusuokaSpec>) {
          json mix = json::array();
          for (const auto& a : s.atoms) mix.push_back({{"beta", a.beta}, {"weight", a.weight}});
          return {{"type", "kusuoka"}, {"mixture", mix}};
        } else {
          return {{"type", "explicit"},
                  {"support", s.set.support()},
                  {"vertices", s.set.vertices()},
                  {"hull_mode", s.set.mode() == HullMode::FiniteSet ? "finite_set" : "convex_hull"},
                  {"p", detail::order_to_json(s.p)}};
        }
      },
      spec);
}

/// Parses and validates a spec document.
inline ParsedSpec parse_spec(const json& doc)
{
  if (!doc.is_object()) detail::parse_fail("spec must be a JSON object");
  if (!doc.contains("type") || !doc.at("type").is_string()) detail::parse_fail("spec needs a string 'type'");
  const auto type = doc.at("type").get<std::string>();
  RiskSpec spec = CvarSpec{0.0};
  if (type == "cvar") {
    spec = CvarSpec{detail::number_at(doc, "beta")};
  } else if (type == "higher_moment") {
    spec = HigherMomentSpec{detail::number_at(doc, "p"), detail::number_at(doc, "c")};
  } else if (type == "kusuoka") {
    if (!doc.contains("mixture") || !doc.at("mixture").is_array()) detail::parse_fail("kusuoka spec needs 'mixture'");
    KusuokaSpec k;
    for (const auto& a : doc.at("mixture")) {
      if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number())
        k.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
      else if (a.is_object())
        k.atoms.push_back({detail::number_at(a, "beta"), detail::number_at(a, "weight")});
      else
        detail::parse_fail("mixture entries must be {beta, weight} objects or [beta, weight] pairs");
    }
    spec = std::move(k);
  } else if (type == "explicit") {
    std::vector<double> support;
    std::vector<std::vector<double>> vertices;
    try {
      support = doc.at("support").get<std::vector<double>>();
      vertices = doc.at("vertices").get<std::vector<std::vector<double>>>();
    } catch (const json::exception&) {
      detail::parse_fail("explicit spec needs numeric 'support' and 'vertices'");
    }
    HullMode mode = HullMode::FiniteSet;
    if (doc.contains("hull_mode")) {
      const auto& hm = doc.at("hull_mode");
      if (hm == "finite_set")
        mode = HullMode::FiniteSet;
      else if (hm == "convex_hull")
        mode = HullMode::ConvexHull;
      else
        detail::parse_fail("hull_mode must be \"finite_set\" or \"convex_hull\"");
    }
    const MomentOrder p = doc.contains("p") ? detail::order_from_json(doc.at("p")) : MomentOrder::finite(1.0);
    spec = ExplicitSpec{GeneratorSet::create(std::move(support), std::move(vertices), mode), p};
  } else {
    detail::parse_fail("unknown spec type '" + type + "'");
  }
  validate(spec);
  return {spec, spec_to_json(spec), doc.contains("solver") ? doc.at("solver") : json()};
}

inline ParsedSpec parse_spec_text(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    detail::parse_fail(std::string("spec is not valid JSON: ") + e.what());
  }
  return parse_spec(doc);
}

inline SolverOptions solver_options(const RunConfig& cfg, const json& overrides)
{
  SolverOptions o;
  if (overrides.is_object()) {
    try {
      if (overrides.contains("max_iters")) o.max_iters = overrides.at("max_iters").get<std::size_t>();
      if (overrides.contains("fw_max_iters")) o.fw_max_iters = overrides.at("fw_max_iters").get<std::size_t>();
      if (overrides.contains("target_gap")) o.target_gap = overrides.at("target_gap").get<double>();
      if (overrides.contains("seed")) o.seed = overrides.at("seed").get<std::uint64_t>();
    } catch (const json::exception&) {
      detail::parse_fail("solver options have the wrong type");
    }
  }
  if (cfg.max_iters) o.max_iters = *cfg.max_iters;
  if (cfg.target_gap) o.target_gap = *cfg.target_gap;
  o.seed = cfg.seed;
  o.validate();
  return o;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json measure_summary(const DiscreteMeasure& m)
{
  return {{"atoms", m.size()},
          {"mean", expectation(m)},
          {"min", m.min()},
          {"max", m.max()},
          {"moment_1", moment_p(m, MomentOrder::finite(1.0))},
          {"moment_2", moment_p(m, MomentOrder::finite(2.0))},
          {"moment_inf", moment_p(m, MomentOrder::infinity())}};
}

inline json coupling_json(const Coupling& c, std::size_t max_cells = 10'000)
{
  json cells = json::array();
  for (std::size_t i = 0; i < c.atoms().size() && i < max_cells; ++i) {
    const auto& a = c.atoms()[i];
    cells.push_back({a.x, a.y, a.mass});
  }
  return {{"objective", c.objective()}, {"atoms", c.atoms().size()}, {"cells", cells}};
}

inline json header(Command c)
{
  return {{"schema_version", kSchemaVersion}, {"command", std::string(to_string(c))}};
}

inline json gap_json(const GapReport& rep)
{
  return {{"primal_lower", rep.primal_lower},
          {"dual_upper", rep.dual_upper},
          {"gap", rep.gap},
          {"status", rep.status == SolveStatus::Converged ? "Converged" : "IterLimit"},
          {"lambda", rep.lambda},
          {"g", rep.dual_witness.values()},
          {"iterations", {{"frank_wolfe", rep.fw_iterations}, {"subgradient", rep.dual_iterations}}}};
}

inline json check_json(const PropertyCheck& c)
{
  return {{"name", c.name}, {"max_violation", c.max_violation}, {"witness", c.witness}, {"evaluated", c.evaluated}};
}

inline ParsedSpec load_spec(const RunConfig& cfg)
{
  if (cfg.spec_json) return parse_spec_text(*cfg.spec_json);
  if (cfg.spec_path) {
    std::ifstream in(*cfg.spec_path);
    if (!in) detail::parse_fail("cannot open spec file " + cfg.spec_path->string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec_text(ss.str());
  }
  detail::parse_fail("a spec is required (--spec or --spec-json)");
}

inline DiscreteMeasure load_measure(const RunConfig& cfg)
{
  if (!cfg.input) detail::parse_fail("--input is required");
  return to_measure(read_samples_file(*cfg.input), cfg.snap_atoms ? AtomMerge::Snap : AtomMerge::Exact);
}

inline void require_finite(double v, const char* what)
{
  if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + what);
}

inline json cmd_eval(const RunConfig& cfg)
{
  const auto parsed = load_spec(cfg);
  const auto opts = solver_options(cfg, parsed.solver);
  const auto m = load_measure(cfg);
  json rep = header(Command::Eval);
  rep["spec"] = parsed.echo;
  rep["measure"] = measure_summary(m);

  const double value = rho(parsed.spec, m, opts);
  require_finite(value, "risk value");
  rep["value"] = value;

  if (const auto* hm = std::get_if<HigherMomentSpec>(&parsed.spec)) {
    const auto cert = higher_moment_dual_cert(m, hm->p, hm->c);
    rep["t_star"] = cert.t_bar;
    rep["dual_certificate"] = {{"t_bar", cert.t_bar}, {"u_bar", cert.u_bar}, {"dual_value", cert.dual_value}};
  } else if (const auto set = target_set(parsed.spec)) {
    if (set->mode() == HullMode::FiniteSet) {
      const auto best = chi_generators(m, *set);
      auto c = coupling_json(comonotone_coupling(m, set->vertex_measure(best.vertex)));
      c["target_vertex"] = best.vertex;
      rep["coupling"] = std::move(c);
    } else {
      const auto gap = duality_gap_report(m, *set, opts);
      rep["gap_report"] = gap_json(gap);
      rep["coupling"] = coupling_json(gap.coupling);
    }
  }
  return rep;
}

/// Seeded hull instance: n <= 200 atoms, K <= 8, V <= 6.
inline std::pair<DiscreteMeasure, GeneratorSet> random_dual_instance(std::uint64_t seed)
{
  SplitMix64 rng(seed);
  auto m = random_measure(rng, 200);
  auto set = random_generator_set(rng, rng.between(1, 8), rng.between(1, 6), HullMode::ConvexHull);
  return {std::move(m), std::move(set)};
}

inline Outcome cmd_dual(const RunConfig& cfg)
{
  json rep = header(Command::Dual);
  std::optional<DiscreteMeasure> m;
  std::optional<GeneratorSet> set;
  json solver_overrides;
  if (cfg.random_instance) {
    auto inst = random_dual_instance(cfg.seed);
    rep["random_instance"] = {{"seed", cfg.seed}};
    rep["spec"] = spec_to_json(ExplicitSpec{inst.second, MomentOrder::finite(1.0)});
    rep["measure"] = measure_summary(inst.first);
    m = std::move(inst.first);
    set = std::move(inst.second);
  } else {
    const auto parsed = load_spec(cfg);
    set = target_set(parsed.spec);
    if (!set) detail::parse_fail("spec does not resolve to a generator set");
    solver_overrides = parsed.solver;
    rep["spec"] = parsed.echo;
    m = load_measure(cfg);
    rep["measure"] = measure_summary(*m);
  }
  const auto opts = solver_options(cfg, solver_overrides);
  const auto gap = duality_gap_report(*m, *set, opts);
  require_finite(gap.primal_lower, "primal bound");
  require_finite(gap.dual_upper, "dual bound");
  const json fields = gap_json(gap);
  for (const auto& [k, v] : fields.items()) rep[k] = v;
  if (gap.status == SolveStatus::IterLimit)
    rep["warning"] = "iteration limit reached before the gap met the target";
  return {rep, kExitOk};
}

inline Outcome cmd_check(const RunConfig& cfg)
{
  const auto parsed = load_spec(cfg);
  const auto opts = solver_options(cfg, parsed.solver);
  const bool iterative = std::holds_alternative<HigherMomentSpec>(parsed.spec) ||
                         (std::holds_alternative<ExplicitSpec>(parsed.spec) &&
                          std::get<ExplicitSpec>(parsed.spec).set.mode() == HullMode::ConvexHull);
  const double tol = cfg.tol ? *cfg.tol : (iterative ? 1e-6 : 1e-9);
  if (cfg.instances == 0) detail::parse_fail("--instances must be positive");

  const auto samples = random_samples(cfg.seed, cfg.instances, 64);
  const auto axioms = check_axioms(parsed.spec, samples, tol, cfg.seed, opts);
  const auto bounds = check_bounds(parsed.spec, samples, tol, opts);

  json rep = header(Command::Check);
  rep["spec"] = parsed.echo;
  rep["seed"] = cfg.seed;
  rep["instances"] = cfg.instances;
  rep["tol"] = tol;
  rep["axioms"] = json::array();
  for (const auto& c : axioms.checks) rep["axioms"].push_back(check_json(c));
  rep["supplementary"] = json::array();
  for (const auto& c : axioms.supplementary) rep["supplementary"].push_back(check_json(c));
  json b = {{"p", detail::order_to_json(bounds.constants.p)}, {"lipschitz", bounds.constants.lipschitz}};
  b["checks"] = json::array();
  for (const auto& c : bounds.checks) b["checks"].push_back(check_json(c));
  rep["bounds"] = b;
  const bool passed = axioms.passed() && bounds.passed();
  rep["passed"] = passed;
  return {rep, passed ? kExitOk : kExitViolation};
}

inline json cmd_kusuoka(const RunConfig& cfg)
{
  const auto parsed = load_spec(cfg);
  const auto* k = std::get_if<KusuokaSpec>(&parsed.spec);
  if (!k) detail::parse_fail("kusuoka command needs a spec of type \"kusuoka\"");
  const auto image = kusuoka_to_measure(k->atoms);
  json rep = header(Command::Kusuoka);
  rep["spec"] = parsed.echo;
  json psi = json::array();
  for (const auto& b : image.psi_breaks) psi.push_back({b.t, b.value});
  json atoms = json::array();
  for (const auto& a : image.image_measure.atoms()) atoms.push_back({a.position, a.weight});
  rep["psi"] = psi;
  rep["image"] = atoms;
  rep["expectation"] = expectation(image.image_measure);
  return rep;
}

/// Runs one command; library errors become a machine-readable error report.
inline Outcome run(const RunConfig& cfg)
{
  try {
    switch (cfg.command) {
      case Command::Eval: return {cmd_eval(cfg), kExitOk};
      case Command::Dual: return cmd_dual(cfg);
      case Command::Check: return cmd_check(cfg);
      case Command::Kusuoka: return {cmd_kusuoka(cfg), kExitOk};
    }
  } catch (const Error& e) {
    const int code = kExitParse;
    json rep = header(cfg.command);
    rep["error"] = {{"code", std::string(licorm::to_string(e.code()))}, {"message", e.what()}, {"exit_code", code}};
    return {rep, code};
  } catch (const std::exception& e) {
    json rep = header(cfg.command);
    rep["error"] = {{"code", "NumericFailure"}, {"message", e.what()}, {"exit_code", kExitNumeric}};
    return {rep, kExitNumeric};
  }
  return {header(cfg.command), kExitNumeric};
}

/// Writes the report to `out` through a temporary file and a rename, or to stdout.
inline void write_report(const json& report, const std::optional<std::filesystem::path>& out)
{
  const std::string text = report.dump(2) + "\n";
  if (!out) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  auto tmp = *out;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << text;
    if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, *out);
}

} // namespace licorm::cli

#endif // LICORM_TOOLS_CLI_HPP
