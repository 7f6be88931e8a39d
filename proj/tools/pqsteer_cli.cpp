// Copyright 2026 The pqsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pqsteer command-line front end.
//
// Exit codes: 0 success, 1 analytic failure, 2 input error, 3 solver trouble.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pqsteer/acceptance.hpp"
#include "pqsteer/json_io.hpp"
#include "pqsteer/ptp.hpp"

using namespace pqsteer;

namespace {

enum Exit { kOk = 0, kAnalytic = 1, kInput = 2, kSolver = 3 };

struct Globals {
  std::string format = "text";
  std::uint64_t seed = 1;
  double tol = kValidationTol;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// FNV-1a over the canonical dump; enough to tell inputs apart in reports.
std::string digest(const Json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// --- Inputs -------------------------------------------------------------------

const char* kAssemblageBuiltins =
    "builtin:pr-box, builtin:pauli-transpose, builtin:instrumental-pauli, "
    "builtin:random-quantum, builtin:random-ns-traditional, builtin:random-ns-sequential";

AnyAssemblage load_assemblage(const std::string& src, std::uint64_t seed) {
  if (src == "builtin:pr-box") return pr_box_assemblage();
  if (src == "builtin:pauli-transpose") return pauli_transpose_assemblage();
  if (src == "builtin:instrumental-pauli") return instrumental_from_bwi(pauli_transpose_assemblage());
  if (src == "builtin:random-quantum") {
    return random_quantum_bwi({2, 3, 2, 2, ScenarioKind::BobWithInput}, seed);
  }
  if (src == "builtin:random-ns-traditional") {
    return random_ns_traditional(2, 3, random_density_matrix(2, seed), seed + 1);
  }
  if (src == "builtin:random-ns-sequential") return random_ns_sequential({2, 2, 2, 2, 2}, seed);
  if (src.rfind("builtin:", 0) == 0) {
    throw InvalidInputError("unknown builtin " + src + " (known: " + kAssemblageBuiltins + ")");
  }
  return assemblage_from_json(read_json_file(src));
}

AnyFunctional load_functional(const std::string& src) {
  if (src == "builtin:canonical") return canonical_functional();
  if (src == "builtin:canonical-instrumental") return post_select(canonical_functional());
  if (src.rfind("builtin:", 0) == 0) {
    throw InvalidInputError("unknown builtin " + src +
                            " (known: builtin:canonical, builtin:canonical-instrumental)");
  }
  return any_functional_from_json(read_json_file(src));
}

Json to_json_any(const AnyAssemblage& a) {
  return std::visit([](const auto& s) { return to_json(s); }, a);
}

// --- Reports ------------------------------------------------------------------

struct Report {
  Json doc;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Report(const std::vector<std::string>& argv_echo, const Globals& g) {
    std::string cmd;
    for (const auto& a : argv_echo) cmd += (cmd.empty() ? "" : " ") + a;
    doc["command"] = cmd;
    doc["seed"] = g.seed;
    doc["inputs"] = Json::object();
    doc["results"] = Json::object();
    doc["residuals"] = Json::object();
    doc["solver"] = Json::object();
  }
};

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "[" + std::to_string(k) + "]", out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

void emit(Report& r, const Globals& g, std::ostream& os = std::cout) {
  r.doc["wall_time_s"] = elapsed(r.t0);
  if (g.format == "json") {
    os << r.doc.dump(2) << "\n";
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  Json shown = r.doc;
  // Realizations are bulky; text mode names them only.
  if (shown["results"].contains("realization")) shown["results"]["realization"] = "(use --format json or --out)";
  flatten(shown, "", rows);
  std::size_t w = 0;
  for (const auto& [k, v] : rows) w = std::max(w, k.size());
  for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(w) + 2) << k << v << "\n";
}

Json solver_json(const BoundResult& b) {
  Json sides = Json::array();
  for (int s : b.block_sides) sides.push_back(s);
  return Json{{"status", sdp::to_string(b.status)},   {"iterations", b.iterations},
              {"equalities_raw", b.equalities_raw}, {"equalities_kept", b.equalities_kept},
              {"block_sides", sides},               {"seconds", b.seconds}};
}

Json residual_json(const BoundResult& b, double tol) {
  return Json{{"primal_feas", b.residuals.primal_feas},
              {"dual_feas", b.residuals.dual_feas},
              {"gap", b.residuals.gap},
              {"tolerance", tol}};
}

Json checks_json(const ValidationReport& v) {
  Json out = Json::object();
  for (const ConstraintCheck& c : v.checks) {
    out[c.name] = Json{{"residual", c.residual}, {"passed", c.passed}};
  }
  return out;
}

Json feasibility_json(const FeasibilityReport& f) {
  return Json{{"feasible", f.feasible}, {"margin", f.margin}, {"threshold", f.threshold},
              {"status", sdp::to_string(f.status)}, {"iterations", f.iterations}};
}

// --- validate -----------------------------------------------------------------

int cmd_validate(const std::string& src, const std::string& scenario, Report& r, const Globals& g) {
  const AnyAssemblage a = load_assemblage(src, g.seed);
  r.doc["inputs"] = Json{{"source", src}, {"digest", digest(to_json_any(a))}};
  ValidationReport v;
  std::string kind;
  if (const auto* b = std::get_if<BwiAssemblage>(&a)) {
    kind = to_string(b->shape().kind);
    v = validate_ns_bwi(*b, g.tol);
  } else if (const auto* s = std::get_if<SequentialAssemblage>(&a)) {
    kind = "sequential";
    v = validate_ns_sequential(*s, g.tol);
  } else {
    kind = "instrumental";
    v = validate_instrumental(std::get<InstrumentalAssemblage>(a), g.tol);
  }
  if (!scenario.empty() && scenario != kind) {
    throw InvalidInputError("input is a " + kind + " assemblage, --scenario asked for " + scenario);
  }
  r.doc["results"] = Json{{"scenario", kind}, {"valid", v.passed}};
  if (!v.passed) r.doc["results"]["failed"] = v.failures();
  r.doc["residuals"] = checks_json(v);
  r.doc["residuals"]["tolerance"] = g.tol;
  emit(r, g);
  return v.passed ? kOk : kAnalytic;
}

// --- bounds -------------------------------------------------------------------

int cmd_bounds(const std::string& src, std::vector<std::string> which, Report& r, const Globals& g) {
  const AnyFunctional f = load_functional(src);
  sdp::SolveOptions opts;
  const bool custom_tol = g.tol != kValidationTol;
  if (custom_tol) opts.feas_tol = opts.gap_tol = g.tol;
  const double tol = opts.feas_tol;
  const auto* bwi = std::get_if<SteeringFunctional>(&f);
  r.doc["inputs"] = Json{{"source", src},
                         {"digest", digest(std::visit([](const auto& x) { return to_json(x); }, f))}};
  if (which.empty() || (which.size() == 1 && which[0] == "all")) {
    which.clear();
    if (bwi) {
      which = {"lhs", "ns"};
      if (bwi->shape().n_a == 2) which.push_back("qtilde");
      if (bwi->shape().n_a == 2 && bwi->shape().m_b >= 2) which.push_back("qtilde-instrumental");
    } else {
      which = {"qtilde-instrumental"};
    }
  }
  auto record = [&](const std::string& name, const BoundResult& b) {
    r.doc["results"][name] = b.value;
    r.doc["residuals"][name] = residual_json(b, tol);
    r.doc["solver"][name] = solver_json(b);
  };
  for (const std::string& w : which) {
    if (w == "qtilde-instrumental") {
      const InstrumentalFunctional inst = bwi ? post_select(*bwi) : std::get<InstrumentalFunctional>(f);
      record(w, qtilde_instrumental_bound(inst, opts).result);
      continue;
    }
    if (!bwi) throw InvalidInputError("--which " + w + " needs a Bob-with-input functional");
    if (w == "lhs") {
      record(w, lhs_bound(*bwi, opts).result);
    } else if (w == "ns") {
      record(w, ns_bound(*bwi, opts).result);
    } else if (w == "qtilde") {
      record(w, qtilde_bound(*bwi, opts).result);
    } else {
      throw InvalidInputError("unknown bound '" + w + "' (lhs, ns, qtilde, qtilde-instrumental, all)");
    }
  }
  emit(r, g);
  return kOk;
}

// --- certify ------------------------------------------------------------------

// Largest CHSH expression over input pairs, Bob measuring in the computational
// basis after his input. Only for binary outcomes and qubits.
double max_chsh(const BwiAssemblage& s) {
  const ScenarioShape& sh = s.shape();
  const BellTable t = bell_correlations(s, {basis_projector(2, 0), basis_projector(2, 1)});
  auto corr = [&](int x, int y) {
    double c = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) c += ((a + b) % 2 == 0 ? 1.0 : -1.0) * t(a, b, x, y);
    return c;
  };
  double best = 0.0;
  for (int x0 = 0; x0 < sh.m_a; ++x0)
    for (int x1 = x0 + 1; x1 < sh.m_a; ++x1)
      for (int y0 = 0; y0 < sh.m_b; ++y0)
        for (int y1 = y0 + 1; y1 < sh.m_b; ++y1) {
          const double e[2][2] = {{corr(x0, y0), corr(x0, y1)}, {corr(x1, y0), corr(x1, y1)}};
          const double sum = e[0][0] + e[0][1] + e[1][0] + e[1][1];
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) best = std::max(best, std::abs(sum - 2 * e[i][j]));
        }
  return best;
}

int cmd_certify(const std::string& src, const std::string& expect, Report& r, const Globals& g) {
  const AnyAssemblage any = load_assemblage(src, g.seed);
  r.doc["inputs"] = Json{{"source", src}, {"digest", digest(to_json_any(any))}};
  const auto* sp = std::get_if<BwiAssemblage>(&any);
  if (!sp) throw InvalidInputError("certify handles traditional and Bob-with-input assemblages");
  const BwiAssemblage& s = *sp;
  const ScenarioShape& sh = s.shape();
  const ValidationReport v = validate_ns_bwi(s, g.tol);
  if (!v.passed) throw InvalidInputError("assemblage is not non-signalling: " + v.failures());

  Json ev = Json::object();
  std::vector<std::string> certificates;

  const LhsMembership lhs = lhs_membership(s);
  ev["lhs_membership"] = feasibility_json(lhs.report);

  if (sh.n_a == 2) {
    const QtildeMembership q = qtilde_membership(s);
    ev["qtilde_membership"] = feasibility_json(q.report);
    if (!q.report.feasible) certificates.push_back("qtilde-infeasible");
  } else {
    ev["qtilde_membership"] = "skipped (needs binary outcomes)";
  }

  Json lemma = Json::array();
  for (int y_ref = 0; y_ref < sh.m_b && sh.m_b > 1; ++y_ref) {
    Json row{{"y_ref", y_ref}};
    try {
      const CertificateReport c = pure_state_lemma_check(s, y_ref);
      row["status"] = to_string(c.status);
      double worst = 0.0;
      for (const LemmaMap& m : c.maps) worst = std::min(worst, m.choi_min_eigenvalue);
      row["choi_min_eigenvalue"] = worst;
      row["detail"] = c.detail;
      if (c.status == LemmaStatus::PostQuantum &&
          std::find(certificates.begin(), certificates.end(), "choi") == certificates.end()) {
        certificates.push_back("choi");
      }
    } catch (const InvalidInputError& e) {
      row["status"] = "not-applicable";
      row["detail"] = e.what();
    }
    lemma.push_back(row);
  }
  ev["pure_state_lemma"] = lemma;

  if (sh == ScenarioShape{2, 3, 2, 2, ScenarioKind::BobWithInput}) {
    const double value = evaluate(canonical_functional(), s);
    const QtildeBound qb = qtilde_bound(canonical_functional());
    ev["canonical_functional"] = Json{{"value", value}, {"qtilde_bound", qb.result.value}};
    if (value < qb.result.value - 1e-6) certificates.push_back("steering-inequality");
  }

  if (sh.n_a == 2 && sh.m_a >= 2 && sh.m_b >= 2 && sh.d == 2) {
    const double chsh = max_chsh(s);
    Json bell{{"max_chsh", chsh}, {"tsirelson", 2 * std::sqrt(2.0)}};
    if (s.shape().m_a == 2 && s.shape().m_b == 2) {
      const BellTable t = bell_correlations(s, {basis_projector(2, 0), basis_projector(2, 1)});
      Json table = Json::object();
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              table[std::to_string(a) + "," + std::to_string(b) + "|" + std::to_string(x) + "," +
                    std::to_string(y)] = t(a, b, x, y);
            }
      bell["table"] = table;
    }
    ev["bell"] = bell;
    if (chsh > 2 * std::sqrt(2.0) + 1e-9) certificates.push_back("bell-tsirelson");
  }

  std::string cls;
  if (!certificates.empty()) {
    cls = "post-quantum";
  } else if (lhs.report.feasible) {
    cls = "LHS";
  } else {
    cls = "steerable-possibly-quantum";
  }
  Json certs = Json::array();
  for (const auto& c : certificates) certs.push_back(c);
  r.doc["results"] = Json{{"classification", cls}, {"certificates", certs}};
  r.doc["residuals"] = checks_json(v);
  r.doc["solver"] = ev;

  int code = kOk;
  if (!expect.empty()) {
    const bool pq = cls == "post-quantum";
    bool match = false;
    if (expect == "post-quantum") match = pq;
    else if (expect == "not-post-quantum") match = !pq;
    else if (expect == "lhs") match = cls == "LHS";
    else if (expect == "steerable-possibly-quantum") match = cls == "steerable-possibly-quantum";
    else throw InvalidInputError("unknown --expect " + expect);
    r.doc["results"]["expected"] = expect;
    r.doc["results"]["as_expected"] = match;
    if (!match) code = kAnalytic;
  }
  emit(r, g);
  return code;
}

// --- ghjw ---------------------------------------------------------------------

int cmd_ghjw(const std::string& src, std::string scenario, const std::string& out_path, Report& r,
             const Globals& g) {
  const AnyAssemblage any = load_assemblage(src, g.seed);
  r.doc["inputs"] = Json{{"source", src}, {"digest", digest(to_json_any(any))}};
  if (scenario.empty()) scenario = std::holds_alternative<SequentialAssemblage>(any) ? "sequential" : "traditional";
  constexpr double kRoundTrip = 1e-8;
  double worst = 0.0, comp = 0.0;
  Json realization;
  if (scenario == "sequential") {
    const auto* s = std::get_if<SequentialAssemblage>(&any);
    if (!s) throw InvalidInputError("--scenario sequential needs a sequential assemblage");
    const SequentialRealization real = ghjw_sequential(*s, g.tol);
    worst = max_deviation(reconstruct_sequential(real), *s);
    comp = std::max(real.kraus_residual(), real.completeness_residual());
    realization = to_json(real);
    r.doc["results"]["support_rank"] = real.support_rank;
  } else if (scenario == "traditional") {
    const auto* s = std::get_if<BwiAssemblage>(&any);
    if (!s) throw InvalidInputError("--scenario traditional needs a traditional or Bob-with-input assemblage");
    const ScenarioShape& sh = s->shape();
    // One realization per Bob input.
    realization = Json::array();
    for (int y = 0; y < sh.m_b; ++y) {
      BwiAssemblage slice({sh.n_a, sh.m_a, 1, sh.d, ScenarioKind::Traditional});
      for (int x = 0; x < sh.m_a; ++x)
        for (int a = 0; a < sh.n_a; ++a) slice.at(a, x) = s->at(a, x, y);
      const TraditionalRealization real = ghjw_traditional(slice, g.tol);
      worst = std::max(worst, max_deviation(reconstruct_traditional(real), slice));
      comp = std::max(comp, real.completeness_residual());
      realization.push_back(to_json(real));
    }
    if (sh.m_b == 1) realization = realization[0];
  } else {
    throw InvalidInputError("--scenario must be traditional or sequential");
  }
  const bool ok = worst <= kRoundTrip;
  r.doc["results"]["scenario"] = scenario;
  r.doc["results"]["round_trip_ok"] = ok;
  r.doc["results"]["realization"] = realization;
  r.doc["residuals"] = Json{{"round_trip", worst}, {"round_trip_tolerance", kRoundTrip}, {"completeness", comp}};
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw InvalidInputError("cannot write " + out_path);
    out << realization.dump(2) << "\n";
    r.doc["results"]["written"] = out_path;
  }
  emit(r, g);
  return ok ? kOk : kAnalytic;
}

// --- reproduce ----------------------------------------------------------------

int cmd_reproduce(const std::vector<int>& only, Report& r, const Globals& g) {
  AcceptanceOptions opts;
  opts.seed = g.seed == 1 ? AcceptanceOptions{}.seed : g.seed;
  opts.only = only;
  const auto rows = run_acceptance(opts);
  int failed = 0;
  Json table = Json::array();
  for (const auto& row : rows) {
    if (!row.passed) ++failed;
    table.push_back(Json{{"id", row.id}, {"name", row.name}, {"passed", row.passed},
                         {"value", std::isfinite(row.value) ? Json(row.value) : Json(nullptr)},
                         {"detail", row.detail}, {"seconds", row.seconds}});
  }
  if (g.format == "json") {
    r.doc["results"] = Json{{"criteria", table}, {"failed", failed}};
    emit(r, g);
  } else {
    for (const auto& row : rows) std::cout << format_row(row) << "\n";
    std::cout << failed << " of " << rows.size() << " criteria failed\n";
  }
  return failed == 0 ? kOk : kAnalytic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pqsteer: post-quantum steering toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--seed", g.seed, "Seed for randomized inputs and suites");
  app.add_option("--tol", g.tol, "Validation / solver tolerance")->check(CLI::PositiveNumber);

  std::string input, scenario, expect, out_path;
  std::vector<std::string> which;
  std::vector<int> only;

  auto* validate = app.add_subcommand("validate", "Check an assemblage against the non-signalling conditions");
  validate->add_option("input", input, "JSON file or builtin name")->required();
  validate->add_option("--scenario", scenario, "Expected scenario")
      ->check(CLI::IsMember({"traditional", "bwi", "sequential", "instrumental"}));

  auto* bounds = app.add_subcommand("bounds", "Compute bounds of a steering functional");
  bounds->add_option("input", input, "JSON file, builtin:canonical or builtin:canonical-instrumental")->required();
  bounds->add_option("--which", which, "lhs, ns, qtilde, qtilde-instrumental or all")->delimiter(',');

  auto* certify = app.add_subcommand("certify", "Classify an assemblage");
  certify->add_option("input", input, "JSON file or builtin name")->required();
  certify->add_option("--expect", expect, "lhs, steerable-possibly-quantum, post-quantum or not-post-quantum");

  auto* ghjw = app.add_subcommand("ghjw", "Quantum realization of a non-signalling assemblage");
  ghjw->add_option("input", input, "JSON file or builtin name")->required();
  ghjw->add_option("--scenario", scenario, "traditional or sequential")
      ->check(CLI::IsMember({"traditional", "sequential"}));
  ghjw->add_option("--out", out_path, "Write the realization JSON here");

  auto* reproduce = app.add_subcommand("reproduce", "Run every reproduction criterion");
  reproduce->add_option("--only", only, "Criterion ids")->delimiter(',');

  for (auto* sub : {validate, bounds, certify, ghjw, reproduce}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  std::vector<std::string> echo(argv + 1, argv + argc);
  Report r(echo, g);
  try {
    if (*validate) return cmd_validate(input, scenario, r, g);
    if (*bounds) return cmd_bounds(input, which, r, g);
    if (*certify) return cmd_certify(input, expect, r, g);
    if (*ghjw) return cmd_ghjw(input, scenario, out_path, r, g);
    if (*reproduce) return cmd_reproduce(only, r, g);
  } catch (const JsonInputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
