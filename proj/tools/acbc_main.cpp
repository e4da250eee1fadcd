#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "acbc/http_server.hpp"
#include "acbc/io.hpp"
#include "acbc/paprika.hpp"
#include "acbc/population.hpp"
#include "acbc/report.hpp"
#include "acbc/simulation.hpp"

namespace {

using namespace acbc;

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct Globals {
  std::uint64_t seed = 20170501;
  std::string out;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

std::pair<std::string, std::string> key_value(const std::string& text, const char* what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ValidationError(std::string(what) + " must look like KEY=VALUE, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::int64_t parse_int(const std::string& text, const char* what) {
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ValidationError(std::string(what) + ": '" + text + "' is not an integer");
  }
  return value;
}

std::map<std::string, std::int64_t> parse_sizes(const std::vector<std::string>& items) {
  std::map<std::string, std::int64_t> sizes;
  for (const auto& item : items) {
    const auto [tag, n] = key_value(item, "--population");
    sizes[tag] = parse_int(n, "--population");
  }
  return sizes;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fixed(double value, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

std::string counts_string(const std::vector<std::int64_t>& counts) {
  std::string out = "(";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(counts[i]);
  }
  return out + ")";
}

// validate ------------------------------------------------------------------

struct ValidateArgs {
  std::string design;
  std::string records;
  std::int64_t n = 0;
  std::int64_t population = 0;
};

int run_validate(const ValidateArgs& args) {
  const auto design = load_design(args.design);
  std::cout << "design: " << design.attribute_count() << " attributes, max " << design.max_levels()
            << " levels, a = " << design.alternatives << ", t = " << design.tasks << '\n';
  if (!args.records.empty()) {
    const auto records = load_records(args.records);
    std::map<std::string, int> per_tag;
    for (const auto& record : records) {
      check_record(record, design);
      ++per_tag[record.population_tag];
    }
    std::cout << "records: " << records.size() << " valid";
    for (const auto& [tag, count] : per_tag) std::cout << ", " << tag << " = " << count;
    std::cout << '\n';
  }
  if (args.population > 0) {
    const auto report = validate_design(design, args.n, args.population);
    std::cout << "bound (c/(a t)) * 1000 = " << fixed(report.bound, 2) << "; n = " << report.sample
              << ", N = " << report.population << ": " << report.message << '\n';
    if (!report.small_study) return kExitValidation;
  }
  return 0;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  std::string mode = "all";
  std::int64_t trials = 10000;
  std::string utilities = "2,1,0";
  bool force_byo = false;
  bool exact = false;
  unsigned threads = 0;
};

int run_simulate(const SimulateArgs& args, const Globals& globals) {
  TrialOptions options;
  options.utilities.clear();
  for (const auto& u : split(args.utilities, ',')) {
    try {
      options.utilities.push_back(std::stod(u));
    } catch (const std::exception&) {
      throw ValidationError("--utilities: '" + u + "' is not a number");
    }
  }
  options.force_byo_in_field = args.force_byo;
  options.feasibility = args.exact ? FeasibilityMode::Exact : FeasibilityMode::Ordinal;
  if (args.trials < 1) throw ValidationError("--trials must be at least 1");

  std::vector<ByoMode> modes;
  if (args.mode == "all") {
    modes = {ByoMode::Ideal, ByoMode::Typical, ByoMode::Random};
  } else {
    modes = {parse_byo_mode(args.mode)};
  }

  std::vector<HitProbabilities> rows;
  std::cout << std::left << std::setw(10) << "mode" << std::right;
  for (const char* level : {"A1", "B1", "C1", "D1"}) std::cout << std::setw(16) << level;
  std::cout << '\n';
  for (const auto mode : modes) {
    rows.push_back(
        estimate_hit_probabilities(mode, args.trials, globals.seed, options, args.threads));
    const auto& row = rows.back();
    std::cout << std::left << std::setw(10) << to_string(mode) << std::right;
    for (std::size_t a = 0; a < row.probability.size(); ++a) {
      std::cout << std::setw(16)
                << (fixed(row.probability[a], 3) + " +/- " + fixed(row.standard_error[a], 3));
    }
    std::cout << '\n';
  }
  if (!globals.out.empty()) {
    auto out = open_out(globals.out);
    write_hit_table_csv(out, rows);
  }
  return 0;
}

// paprika -------------------------------------------------------------------

struct PaprikaArgs {
  std::string design;
  std::string records;
  std::string respondent;
  bool exact = false;
};

int run_paprika(const PaprikaArgs& args, const Globals& globals) {
  const auto design = load_design(args.design);
  const auto records = load_records(args.records);
  const auto space = make_ranking_space(design);
  const auto mode = args.exact ? FeasibilityMode::Exact : FeasibilityMode::Ordinal;
  bool found = false;
  for (const auto& record : records) {
    if (!args.respondent.empty() && record.id != args.respondent) continue;
    found = true;
    check_record(record, design);
    const auto constraints = constraints_from_tasks(record.tasks);
    const auto frs = feasible_set(space, constraints, mode);
    std::cout << record.id << " (" << record.population_tag << "): " << frs.size() << " of "
              << space->size() << " rankings feasible";
    if (frs.empty()) {
      std::cout << "; inconsistent, removed\n";
      continue;
    }
    std::cout << "; MI";
    const auto shares = mi_counts(frs);
    for (int a = 0; a < design.attribute_count(); ++a) {
      std::cout << ' ' << design.attributes[a].label << '=';
      bool first = true;
      for (std::size_t l = 0; l < shares[a].size(); ++l) {
        if (shares[a][l] == 0) continue;
        if (!first) std::cout << '|';
        first = false;
        std::cout << design.attributes[a].levels[l];
        if (shares[a][l] != 1) std::cout << " (" << format_rational(shares[a][l]) << ')';
      }
    }
    std::cout << '\n';
    if (!globals.out.empty()) {
      auto out = open_out(std::filesystem::path(globals.out) / (record.id + "_feasible.csv"));
      write_feasible_csv(out, frs, design);
    }
  }
  if (!found) throw ValidationError("no record with id '" + args.respondent + "'");
  return 0;
}

// estimate ------------------------------------------------------------------

struct EstimateArgs {
  std::string counts;
  std::int64_t population = 0;
};

int run_estimate(const EstimateArgs& args, const Globals& globals) {
  Counts sample;
  for (const auto& c : split(args.counts, ',')) sample.push_back(parse_int(c, "--counts"));
  const AdmissibleEnsemble ensemble(sample, args.population);
  const auto mle = mle_estimate(sample, args.population);
  const auto best = minimize_wmae(ensemble);
  const auto proportions = population_proportions(sample, args.population);
  std::int64_t n = 0;
  for (auto c : sample) n += c;

  std::cout << "sample " << counts_string(sample) << ", n = " << n << ", N = " << args.population
            << '\n';
  std::cout << "admissible populations: " << ensemble.size() << '\n';
  std::cout << "MLE " << counts_string(mle.counts) << " (ID "
            << ensemble.id(ensemble.index_of(mle.counts)) << "), WMAE "
            << fixed(wmae(mle.counts, ensemble), 4) << (mle.non_unique ? ", not unique" : "")
            << '\n';
  std::cout << "WMAE minimiser " << counts_string(best.counts) << " (ID "
            << ensemble.id(ensemble.index_of(best.counts)) << "), WMAE " << fixed(best.wmae, 4)
            << '\n';
  std::cout << "MAE bound " << fixed(mae_bound(ensemble.levels(), args.population, n), 4) << '\n';
  std::cout << "population proportions:";
  for (double p : proportions.proportions) std::cout << ' ' << fixed(p, 2);
  std::cout << " +/- " << fixed(proportions.rounded_error, 2) << '\n';

  if (!globals.out.empty()) {
    const auto profile = wmae_profile(ensemble);
    auto out = open_out(globals.out);
    out << "id";
    for (int i = 0; i < ensemble.levels(); ++i) out << ",N" << i + 1;
    out << ",weight,wmae\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      out << ensemble.id(k);
      for (auto v : ensemble.member(k)) out << ',' << v;
      out << ',' << ensemble.weights()[k] << ',' << profile[k] << '\n';
    }
  }
  return 0;
}

// report --------------------------------------------------------------------

struct ReportArgs {
  std::string design;
  std::string records;
  std::vector<std::string> populations;
  double ridge = kDefaultRidge;
  bool exact = false;
};

int run_report_command(const ReportArgs& args, const Globals& globals) {
  ReportOptions options;
  options.ridge = args.ridge;
  options.feasibility = args.exact ? FeasibilityMode::Exact : FeasibilityMode::Ordinal;
  const std::filesystem::path out = globals.out.empty() ? "report" : globals.out;
  run_report(args.design, args.records, parse_sizes(args.populations), out, options);
  std::ifstream text(out / "report.txt");
  std::cout << text.rdbuf();
  std::cout << "\nwrote " << (out / "report.txt").string() << " and section_{a,b,c}.csv\n";
  return 0;
}

// serve ---------------------------------------------------------------------

struct ServeArgs {
  std::vector<std::string> studies;
  std::string data_dir = "survey-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  bool force_byo = false;
};

HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ServeArgs& args) {
  std::map<std::string, SurveyDesign> studies;
  for (const auto& item : args.studies) {
    const auto [id, path] = key_value(item, "--study");
    studies[id] = load_design(path);
  }
  ServiceOptions options;
  options.data_dir = args.data_dir;
  options.force_byo_in_field = args.force_byo;
  SurveyService service(std::move(studies), options);
  std::optional<std::filesystem::path> static_dir;
  if (!args.static_dir.empty()) static_dir = args.static_dir;
  HttpServer server(service, static_dir);
  const int port = server.bind(args.host, args.port);
  std::cout << "serving " << args.studies.size() << " stud"
            << (args.studies.size() == 1 ? "y" : "ies") << " on http://" << args.host << ':' << port
            << " (" << service.session_count() << " sessions restored)" << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-sample ACBC toolkit: MT/MI levels, PAPRIKA, population estimates"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--seed", globals.seed, "Random seed")->capture_default_str();
  app.add_option("--out", globals.out, "Output file or directory");

  ValidateArgs validate;
  auto* validate_cmd =
      app.add_subcommand("validate", "Check a design, records and the small-study bound");
  validate_cmd->add_option("--design", validate.design, "Design JSON")->required();
  validate_cmd->add_option("--records", validate.records, "Respondent records (JSON Lines)");
  validate_cmd->add_option("-n,--sample", validate.n, "Sample size n");
  validate_cmd->add_option("-N,--population", validate.population, "Population size N")
      ->needs(validate_cmd->get_option("--sample"));

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo MI hit probabilities");
  simulate_cmd->add_option("--mode", simulate.mode, "ideal | typical | random | all")
      ->check(CLI::IsMember({"ideal", "typical", "random", "all"}))
      ->capture_default_str();
  simulate_cmd->add_option("--trials", simulate.trials, "Trials per mode")->capture_default_str();
  simulate_cmd->add_option("--utilities", simulate.utilities, "Part-worths of levels 1..3")
      ->capture_default_str();
  simulate_cmd->add_flag("--force-byo-in-field", simulate.force_byo,
                         "Always include the BYO in the tournament field");
  simulate_cmd->add_flag("--exact", simulate.exact, "Exact linear feasibility filter");
  simulate_cmd->add_option("--threads", simulate.threads, "Worker threads (0 = all cores)");

  PaprikaArgs paprika;
  auto* paprika_cmd =
      app.add_subcommand("paprika", "Feasible rankings and MI levels per respondent");
  paprika_cmd->add_option("--design", paprika.design, "Design JSON")->required();
  paprika_cmd->add_option("--records", paprika.records, "Respondent records")->required();
  paprika_cmd->add_option("--respondent", paprika.respondent, "Only this respondent id");
  paprika_cmd->add_flag("--exact", paprika.exact, "Exact linear feasibility filter");

  EstimateArgs estimate;
  auto* estimate_cmd =
      app.add_subcommand("estimate", "Population frequency estimate from sample counts");
  estimate_cmd->add_option("--counts", estimate.counts, "Sample counts, e.g. 9,0,3")->required();
  estimate_cmd->add_option("-N,--N", estimate.population, "Population size")->required();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "MT/MI study report");
  report_cmd->add_option("--design", report.design, "Design JSON")->required();
  report_cmd->add_option("--records", report.records, "Respondent records")->required();
  report_cmd->add_option("--population", report.populations, "TAG=N, once per population")
      ->required();
  report_cmd->add_option("--ridge", report.ridge, "Part-worth ridge penalty")
      ->capture_default_str();
  report_cmd->add_flag("--exact", report.exact, "Exact linear feasibility filter");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the survey HTTP service");
  serve_cmd->add_option("--study", serve.studies, "ID=design.json, once per study")->required();
  serve_cmd->add_option("--data-dir", serve.data_dir, "Event logs and records")
      ->capture_default_str();
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--static-dir", serve.static_dir, "Respondent UI assets served at /");
  serve_cmd->add_flag("--force-byo-in-field", serve.force_byo,
                      "Always include the BYO in the tournament field");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*validate_cmd) return run_validate(validate);
    if (*simulate_cmd) return run_simulate(simulate, globals);
    if (*paprika_cmd) return run_paprika(paprika, globals);
    if (*estimate_cmd) return run_estimate(estimate, globals);
    if (*report_cmd) return run_report_command(report, globals);
    if (*serve_cmd) return run_serve(serve);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
