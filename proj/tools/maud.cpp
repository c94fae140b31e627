// maud: command-line driver for scripted assessment, beta fitting,
// evaluation, mode comparison, and the HTTP service.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "maud/maud.hpp"
#include "maud/service/api.hpp"
#include "maud/service/http.hpp"
#include "maud/service/store.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw maud::Error(maud::Errc::io, "cannot open " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw maud::Error(maud::Errc::malformed, path + " is not valid JSON: " + e.what(), path);
  }
}

void write_file(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw maud::Error(maud::Errc::io, "cannot write " + path, path);
  out << bytes;
}

/// Accepts a profile document or a bare profile object.
maud::UserProfile read_profile(const std::string& path) {
  auto j = read_json(path);
  if (j.contains("format_version")) return maud::parse_profile_document(j).profile;
  return maud::profile_from_json(j);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiattribute utility design evaluation"};
  app.require_subcommand(1);

  auto* assess = app.add_subcommand("assess", "Run a scripted lottery assessment and write a profile");
  std::string attributes_path, answers_path, out_path, owner;
  assess->add_option("--attributes", attributes_path, "Attribute set (JSON)")->required();
  assess->add_option("--answers", answers_path, "Answer script (JSON)")->required();
  assess->add_option("--out", out_path, "Profile document to write ('-' for stdout)")->required();
  assess->add_option("--owner", owner, "Owner label stored with the profile");

  auto* fit = app.add_subcommand("fit-beta", "Fit a beta distribution from bounds, one shape and a mode or mean");
  double lower = 0, upper = 0;
  std::optional<double> p, q, mode, mean;
  fit->add_option("--lower", lower, "Lower bound")->required();
  fit->add_option("--upper", upper, "Upper bound")->required();
  auto* p_opt = fit->add_option("--p", p, "Known shape p");
  auto* q_opt = fit->add_option("--q", q, "Known shape q");
  p_opt->excludes(q_opt);
  auto* mode_opt = fit->add_option("--mode", mode, "Most likely value");
  auto* mean_opt = fit->add_option("--mean", mean, "Mean value");
  mode_opt->excludes(mean_opt);
  std::string fit_format = "table";
  fit->add_option("--format", fit_format, "table | document");

  std::string kb_path, facts_path, profile_path, format = "table";
  auto add_eval_opts = [&](CLI::App* sub) {
    sub->add_option("--kb", kb_path, "Knowledge base (JSON)")->required();
    sub->add_option("--facts", facts_path, "Design inputs (JSON)")->required();
    sub->add_option("--profile", profile_path, "Profile document (JSON)")->required();
    sub->add_option("--format", format, "table | document | csv");
  };
  auto* evaluate = app.add_subcommand("evaluate", "Rank feasible alternatives by expected utility");
  add_eval_opts(evaluate);
  auto* compare = app.add_subcommand("compare", "Compare conventional and integrated selections");
  add_eval_opts(compare);

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  std::string addr = env_or("MAUD_ADDR", "127.0.0.1:8080");
  std::string data_dir = env_or("MAUD_DATA_DIR", "maud-data");
  serve->add_option("--addr", addr, "Listen address host:port (env MAUD_ADDR)");
  serve->add_option("--data-dir", data_dir, "Storage directory (env MAUD_DATA_DIR)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*assess) {
      auto setup = maud::parse_assessment_setup(read_json(attributes_path));
      auto script = maud::parse_answer_script(read_json(answers_path));
      auto session = maud::run_answer_script(setup, script);
      auto doc = maud::make_profile_document(session, owner);
      write_file(out_path, maud::profile_document_to_json(doc).dump(2) + "\n");
      if (out_path != "-") std::cout << "profile " << doc.fingerprint << " written to " << out_path << '\n';
    } else if (*fit) {
      if (!p && !q) throw maud::Error(maud::Errc::usage, "give --p or --q", "p");
      if (!mode && !mean) throw maud::Error(maud::Errc::usage, "give --mode or --mean", "mode");
      const auto f = maud::parse_format(fit_format);
      auto spec = maud::fit_beta(lower, upper, p ? maud::Shape::p : maud::Shape::q, p ? *p : *q,
                                 mode ? maud::Statistic::mode : maud::Statistic::mean, mode ? *mode : *mean);
      if (f == maud::OutputFormat::document) {
        std::cout << maud::service::Api::beta_summary(spec, 101).dump(2) << '\n';
      } else {
        std::cout.precision(12);
        std::cout << "lower " << spec.lower << "\nupper " << spec.upper << "\np " << spec.p << "\nq " << spec.q
                  << "\nmean " << maud::beta_mean(spec) << '\n';
        if (spec.p + spec.q != 2.0) std::cout << "mode " << maud::beta_mode(spec) << '\n';
      }
    } else if (*evaluate || *compare) {
      const auto f = maud::parse_format(format);
      const auto kb = maud::load_knowledge_base(std::string_view(read_file(kb_path)));
      const auto facts = maud::parse_facts(read_json(facts_path));
      const auto profile = read_profile(profile_path);
      if (*evaluate)
        std::cout << maud::render(maud::evaluate_integrated(kb, facts, profile), f);
      else
        std::cout << maud::render(maud::compare_modes(kb, facts, profile), f);
    } else if (*serve) {
      const auto listen = maud::service::parse_listen_address(addr);
      maud::service::DocumentStore store(data_dir);
      maud::service::Api api(store);
      httplib::Server server;
      maud::service::install_routes(server, api);
      std::cerr << "maud listening on " << listen.host << ':' << listen.port << " (data: " << data_dir << ")\n";
      if (!server.listen(listen.host, listen.port))
        throw maud::Error(maud::Errc::io, "cannot listen on " + addr, "addr");
    }
  } catch (const maud::Error& e) {
    std::cerr << json{{"error", e.to_json()}}.dump() << '\n';
    return e.code() == maud::Errc::usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "io"}, {"message", e.what()}, {"field", ""}}}}.dump() << '\n';
    return 1;
  }
  return 0;
}
