// Acceptance gate: one PASS/FAIL line per primary criterion.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "generators.hpp"
#include "maud/service/api.hpp"
#include "maud/service/store.hpp"
#include "support.hpp"

using namespace maud;
using namespace testing_support;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && s > budget_s) {
    o.pass = false;
    o.detail += " (over time budget " + std::to_string(budget_s) + " s)";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-34s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), s, o.detail.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

std::vector<AttributeSpec> unit_attrs(std::size_t n) {
  std::vector<AttributeSpec> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back(unit_attribute("a" + std::to_string(j)));
  return out;
}

Outcome mau_normalization() {
  std::mt19937_64 rng(1001);
  double worst_res = 0, worst_corner = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng() % 7;
    auto k = random_k(rng, n);
    auto p = make_profile(unit_attrs(n), std::vector<double>(n, 0.5), k);
    if (p.aggregation_mode == AggregationMode::multiplicative) {
      long double prod = 1.0L;
      for (double kj : k) prod *= 1.0L + static_cast<long double>(p.master_constant) * kj;
      worst_res = std::max(worst_res, double(std::fabs(prod - (1.0L + p.master_constant))));
    }
    worst_corner = std::max(worst_corner, std::abs(aggregate(p, std::vector<double>(n, 1.0)) - 1.0));
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      worst_corner = std::max(worst_corner, std::abs(aggregate(p, e) - k[j]));
    }
  }
  return {worst_res <= 1e-10 && worst_corner <= 1e-9,
          "max residual " + sci(worst_res) + ", max corner error " + sci(worst_corner)};
}

Outcome additive_limit() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  bool exact_path = true;
  for (double eps : {1e-4, -1e-4}) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 2 + rng() % 7;
      auto k = random_k(rng, n, 0.05, 0.95);
      double s = 0;
      for (double v : k) s += v;
      for (auto& v : k) v /= s;  // sum 1 up to rounding
      auto add = k;
      auto mul = k;
      mul.back() += eps;
      if (mul.back() <= 0.0 || mul.back() >= 1.0) continue;
      auto pa = make_profile(unit_attrs(n), std::vector<double>(n, 0.0), add);
      auto pm = make_profile(unit_attrs(n), std::vector<double>(n, 0.0), mul);
      exact_path = exact_path && pa.aggregation_mode == AggregationMode::additive_limit &&
                   pm.aggregation_mode == AggregationMode::multiplicative;
      for (int i = 0; i < 10; ++i) {
        std::vector<double> u(n);
        for (auto& v : u) v = unit(rng);
        worst = std::max(worst, std::abs(aggregate(pm, u) - aggregate(pa, u)));
      }
    }
  }
  for (double off : {5e-10, -5e-10, 9.9e-10}) {
    auto mc = solve_master_constant(std::vector<double>{0.5, 0.3, 0.2 + off});
    exact_path = exact_path && mc.mode == AggregationMode::additive_limit;
  }
  return {worst <= 1e-3 && exact_path,
          "max |multiplicative - additive| " + sci(worst) + (exact_path ? ", additive path taken" : ", WRONG PATH")};
}

Outcome beta_correctness() {
  double worst_int = 0, worst_moment = 0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (double p : {1.0, 1.1, 1.5, 2.0, 3.0, 4.5, 7.0, 9.0})
    for (double q : {1.0, 1.3, 2.0, 2.025, 3.0, 5.0, 9.0}) {
      BetaSpec s{10.0, 100.0, p, q};
      auto f = [&](double x) { return beta_density(s, x); };
      worst_int = std::max(worst_int, std::abs(numeric::integrate(f, s.lower, s.upper, 1e-12).value - 1.0));
      auto m = numeric::integrate([&](double x) { return x * f(x); }, s.lower, s.upper, 1e-12).value;
      worst_moment = std::max(worst_moment, std::abs(m - beta_mean(s)));
      if (p + q > 2.0 && p > 1.0 && q > 1.0) {
        double a = s.lower, b = s.upper;
        for (int i = 0; i < 300 && b - a > 1e-13 * s.range(); ++i) {
          const double c = b - g * (b - a), d = a + g * (b - a);
          if (f(c) > f(d)) b = d;
          else a = c;
        }
        worst_moment = std::max(worst_moment, std::abs(0.5 * (a + b) - beta_mode(s)));
      }
    }
  auto ex = fit_beta(10.0, 100.0, Shape::p, 1.1, Statistic::mode, 18.0);
  const double dq = std::abs(ex.q - 2.025), dm = std::abs(beta_mean(ex) - 41.68);
  return {worst_int <= 1e-8 && worst_moment <= 1e-6 && dq <= 1e-9 && dm <= 1e-9,
          "integral err " + sci(worst_int) + ", mean/mode err " + sci(worst_moment) + ", worked example q err " +
              sci(dq) + ", mean err " + sci(dm)};
}

Outcome series_quadrature() {
  double worst = 0;
  int cases = 0;
  for (auto [lo, hi] : {std::pair{0.0, 1.0}, std::pair{0.2, 0.5}})
    for (double c : {-2.0, -0.5, 0.5, 2.0})
      for (int p = 1; p <= 9; ++p)
        for (int q = 1; q <= 9; ++q) {
          auto u = make_exponential_utility(unit_attribute(), c);
          BetaSpec s{lo, hi, double(p), double(q)};
          worst = std::max(worst, std::abs(expected_utility_series(u, s) - expected_utility_quadrature(u, s)));
          ++cases;
        }
  return {worst <= 1e-7, std::to_string(cases) + " cases, max diff " + sci(worst)};
}

Outcome jensen() {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> shape(1.0, 9.0), cd(0.05, 8.0), frac(0.0, 1.0);
  double worst = 0;
  bool ok = true;
  for (int i = 0; i < 200; ++i) {
    auto attr = random_attribute(rng, "a");
    const double w = attr.range_max() - attr.range_min();
    double a = frac(rng), b = frac(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 0.01) b = std::min(1.0, a + 0.01);
    BetaSpec s{attr.range_min() + a * w, attr.range_min() + b * w, shape(rng), shape(rng)};
    const double c = cd(rng), mu = beta_mean(s);
    auto cc = make_exponential_utility(attr, c), cv = make_exponential_utility(attr, -c),
         ln = make_exponential_utility(attr, 0.0);
    const double d1 = expected_utility(cc, {"a", s}) - cc(mu);
    const double d2 = cv(mu) - expected_utility(cv, {"a", s});
    const double d3 = std::abs(expected_utility(ln, {"a", s}) - ln(mu));
    ok = ok && d1 <= 1e-10 && d2 <= 1e-10 && d3 <= 1e-10;
    worst = std::max({worst, d1, d2, d3});
  }
  return {ok, "200 pairs, worst violation " + sci(worst)};
}

Outcome elicitation() {
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> cd(-10.0, 10.0), pd(0.01, 0.99);
  double worst = 0;
  bool k_exact = true;
  for (int user = 0; user < 100; ++user) {
    const std::size_t n = 2 + rng() % 5;
    std::vector<AttributeSpec> attrs;
    std::vector<double> cs, ks;
    for (std::size_t j = 0; j < n; ++j) {
      attrs.push_back(random_attribute(rng, "a" + std::to_string(j)));
      cs.push_back(cd(rng));
      ks.push_back(pd(rng));
    }
    auto s = start_session(attrs, 1, "user" + std::to_string(user));
    while (auto q = next_question(s)) {
      const auto j = q->attribute_index;
      const double v = q->kind == QuestionKind::certainty_equivalent ? certainty_equivalent_for(attrs[j], cs[j]) : ks[j];
      s = submit_answer(s, q->sequence, v);
    }
    auto p = finalize_profile(s);
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(p.utilities[j].risk_coefficient() - cs[j]));
    k_exact = k_exact && p.scaling_constants == ks;
  }
  return {worst <= 1e-6 && k_exact, "max |c - c*| " + sci(worst) + (k_exact ? ", k exact" : ", k MISMATCH")};
}

std::string pick(const Alternative& a) {
  return *a.material("fascia") + "/" + *a.material("energy_absorber") + "/" + *a.material("beam");
}

Outcome truck_scenario() {
  const auto kb = bumper_kb();
  const auto facts = truck_facts();
  auto typ = compare_modes(kb, facts, fixture_profile("typical"));
  auto aty = compare_modes(kb, facts, fixture_profile("atypical"));
  const bool a = pick(typ.conventional.alternative) == "none/none/stamped_steel";
  const bool b = typ.same_selection;
  const bool c = pick(aty.integrated.alternative) == "thermoset/foam/stamped_steel";
  const double ei = aty.integrated.expected_utility, ec = aty.conventional.expected_utility;
  const bool d = ei > ec && ei > 0 && ei < 1 && ec > 0 && ec < 1;
  std::ostringstream os;
  os << "(a)" << (a ? "ok" : "NO") << " (b)" << (b ? "ok" : "NO") << " (c)" << (c ? "ok" : "NO") << " (d)"
     << (d ? "ok" : "NO") << "  atypical E[U] integrated " << ei << " vs conventional " << ec;
  return {a && b && c && d, os.str()};
}

Outcome rule_properties() {
  const auto base = bumper_kb();
  std::mt19937_64 rng(1008);
  int mono = 0, det = 0, sound = 0, infeasible = 0;
  for (int i = 0; i < 500; ++i) {
    auto kb = mutate_kb(rng, base);
    auto facts = random_facts(rng);
    RestrictionResult a;
    try {
      a = run_restrictions(kb, facts);
    } catch (const Error& e) {
      if (e.code() != Errc::infeasible_design) throw;
      ++infeasible;
      continue;
    }
    if (!restriction_trace_sound(kb, facts, a)) ++sound;

    auto again = run_restrictions(kb, facts);
    auto shuffled = kb;
    std::shuffle(shuffled.rules.begin(), shuffled.rules.end(), rng);
    if (again.feasible != a.feasible || again.trace != a.trace ||
        run_restrictions(shuffled, facts).feasible != a.feasible)
      ++det;
    try {
      auto c1 = enumerate_configurations(kb, facts, a.feasible);
      auto c2 = enumerate_configurations(kb, facts, a.feasible);
      if (c1.alternatives.size() != c2.alternatives.size() || c1.trace != c2.trace) ++det;
    } catch (const Error& e) {
      if (e.code() != Errc::infeasible_configuration) throw;
    }

    auto more = kb;
    more.rules.push_back(random_restriction(rng, kb, "extra"));
    try {
      if (!is_subset(run_restrictions(more, facts).feasible, a.feasible)) ++mono;
    } catch (const Error& e) {
      if (e.code() != Errc::infeasible_design) throw;
    }
  }
  std::ostringstream os;
  os << "500 mutations (" << infeasible << " infeasible designs): monotonicity violations " << mono
     << ", nondeterminism " << det << ", unsound traces " << sound;
  return {mono == 0 && det == 0 && sound == 0, os.str()};
}

std::string run_cli(const std::string& args, int& status) {
  const std::string cmd = std::string(MAUD_CLI) + " " + args + " 2>&1";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  status = pclose(p);
  return out;
}

Outcome cli_service() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / ("maud-accept-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  service::DocumentStore store(dir / "store");
  service::Api api(store);
  const auto setup_json = data_json("bumper_attributes.json");
  const auto setup = parse_assessment_setup(setup_json);
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> cd(-8.0, 8.0), pd(0.02, 0.98), nudge(-0.02, 0.02);
  int matches = 0;
  std::string first_problem;
  for (int i = 0; i < 20; ++i) {
    const int ce_count = 1 + static_cast<int>(rng() % 3);
    AnswerScript script;
    for (const auto& a : setup.attributes) {
      const double c = cd(rng);
      for (int step = 0; step < ce_count; ++step) {
        const double z = std::clamp(detail::ce_position(c) + (step ? nudge(rng) : 0.0), 0.05, 0.95);
        script.push_back({a.id, QuestionKind::certainty_equivalent, step, a.from_normalized(z)});
      }
    }
    for (const auto& a : setup.attributes) script.push_back({a.id, QuestionKind::probability_equivalence, 0, pd(rng)});

    json setup_doc = setup_json;
    setup_doc["ce_count"] = ce_count;
    const auto attrs_path = dir / ("attrs" + std::to_string(i) + ".json");
    const auto script_path = dir / ("script" + std::to_string(i) + ".json");
    const auto out_path = dir / ("profile" + std::to_string(i) + ".json");
    std::ofstream(attrs_path) << setup_doc.dump();
    std::ofstream(script_path) << answer_script_to_json(script).dump();
    int status = 0;
    auto out = run_cli("assess --attributes " + attrs_path.string() + " --answers " + script_path.string() +
                           " --out " + out_path.string(),
                       status);
    if (status != 0) {
      if (first_problem.empty()) first_problem = "cli: " + out;
      continue;
    }
    const auto cli_fp = json::parse(slurp(out_path.string())).at("fingerprint").get<std::string>();

    auto created = json::parse(api.handle({"POST", "/sessions", setup_doc.dump()}).body);
    const auto id = created.at("session_id").get<std::string>();
    json progress = created;
    while (!progress.at("done").get<bool>()) {
      const auto& q = progress.at("question");
      double v = 0;
      for (const auto& a : script)
        if (a.attribute == q.at("attribute") && kind_name(a.kind) == q.at("kind").get<std::string>() &&
            a.step == q.at("step").get<int>())
          v = a.value;
      progress = json::parse(
          api.handle({"POST", "/sessions/" + id + "/answers", json{{"index", q.at("sequence")}, {"answer", v}}.dump()})
              .body);
    }
    auto fin = json::parse(api.handle({"POST", "/sessions/" + id + "/finalize", "{}"}).body);
    if (fin.value("fingerprint", std::string()) == cli_fp) ++matches;
    else if (first_problem.empty()) first_problem = "fingerprint mismatch on script " + std::to_string(i);
  }
  fs::remove_all(dir);
  return {matches == 20, std::to_string(matches) + "/20 fingerprints identical" +
                             (first_problem.empty() ? "" : "; " + first_problem)};
}

}  // namespace

int main() {
  criterion("MAU normalization & corners", 1.0, mau_normalization);
  criterion("Additive limit", 0.0, additive_limit);
  criterion("Beta correctness", 5.0, beta_correctness);
  criterion("Series-quadrature oracle", 10.0, series_quadrature);
  criterion("Jensen property", 0.0, jensen);
  criterion("Elicitation fit", 0.0, elicitation);
  criterion("Truck mode comparison", 1.0, truck_scenario);
  criterion("Rule-engine properties", 0.0, rule_properties);
  criterion("CLI/service equivalence", 0.0, cli_service);
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
