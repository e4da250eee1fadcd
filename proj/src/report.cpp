#include "acbc/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "acbc/io.hpp"

namespace acbc {

namespace {

std::string fixed2(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

std::string decimal(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return fixed2(boost::rational_cast<double>(value));
}

std::string join_cases(const std::vector<Counts>& cases, int level) {
  std::string out;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    if (c > 0) out += '|';
    out += std::to_string(cases[c][level]);
  }
  return out;
}

}  // namespace

StudyReport build_report(const SurveyDesign& design, const std::vector<RespondentRecord>& records,
                         const std::map<std::string, std::int64_t>& population_sizes,
                         const ReportOptions& options) {
  check_design(design);
  if (records.empty()) throw ValidationError("no respondent records to report on");

  std::vector<std::string> tags;
  for (const auto& record : records) {
    check_record(record, design);
    if (std::find(tags.begin(), tags.end(), record.population_tag) == tags.end()) {
      if (!population_sizes.contains(record.population_tag)) {
        throw ValidationError("population tag '" + record.population_tag +
                              "' has no population size N");
      }
      tags.push_back(record.population_tag);
    }
  }

  const auto space = make_ranking_space(design);
  const auto level_counts = design.level_counts();
  const int k = design.attribute_count();

  StudyReport report;
  report.design = design;
  for (const auto& tag : tags) {
    PopulationBlock block;
    block.tag = tag;
    block.population = population_sizes.at(tag);

    std::vector<std::vector<Level>> mt(k);
    std::vector<std::vector<Level>> partworth(k);
    std::vector<int> partworth_ties(k, 0);
    std::vector<RespondentMi> paprika;
    for (const auto& record : records) {
      if (record.population_tag != tag) continue;
      ++block.respondents;
      for (int a = 0; a < k; ++a) mt[a].push_back(record.byo.levels[a]);

      if (record.tasks.empty()) {
        block.removals.push_back({record.id, "no answered choice tasks"});
        paprika.push_back({record.id, std::nullopt});
        continue;
      }
      NewtonOptions newton;
      newton.ridge = options.ridge;
      const auto mi = mi_from_partworths(estimate_partworths(level_counts, record.tasks, newton));
      for (int a = 0; a < k; ++a) {
        partworth[a].push_back(mi.levels[a]);
        if (mi.tied[a]) ++partworth_ties[a];
      }

      const auto constraints = constraints_from_tasks(record.tasks);
      const auto frs = feasible_set(space, constraints, options.feasibility);
      if (frs.empty()) {
        block.removals.push_back({record.id, "empty feasible ranking set (inconsistent choices)"});
        paprika.push_back({record.id, std::nullopt});
      } else {
        paprika.push_back({record.id, mi_counts(frs)});
      }
    }

    const auto compiled = compile_mi_distribution(level_counts, paprika);
    block.paprika_respondents = compiled.n;
    block.small_study =
        validate_design(design, block.respondents, std::max(block.population, block.respondents));
    if (block.population < block.respondents) {
      throw ValidationError("population '" + tag + "' has N = " + std::to_string(block.population) +
                            " below its " + std::to_string(block.respondents) + " respondents");
    }

    for (int a = 0; a < k; ++a) {
      AttributeBlock attribute;
      attribute.attribute = a;
      attribute.mt = tally(a, mt[a], level_counts[a], DistributionKind::MostTypical);
      attribute.partworth_mi =
          tally(a, partworth[a], level_counts[a], DistributionKind::MostIdealPartworth);
      attribute.partworth_ties = partworth_ties[a];
      attribute.paprika_mi = compiled.distributions[a];
      attribute.paprika_rounding_cases = compiled.rounding_cases[a];
      const auto counts = attribute.mt.integer_counts();
      for (auto count : counts)
        attribute.sample_mt_proportions.emplace_back(count, block.respondents);
      attribute.population_mt = population_proportions(counts, block.population);
      block.attributes.push_back(std::move(attribute));
    }
    report.populations.push_back(std::move(block));
  }
  return report;
}

std::string render_text(const StudyReport& report) {
  std::ostringstream out;
  const auto& design = report.design;
  out << "MT/MI study report\n";
  out << "Part-worth MI: ridge-penalised pairwise logit per respondent; argmax ties go to the\n"
         "lowest level index. PAPRIKA MI: ordinal feasible-ranking filter; tied top levels\n"
         "share one count (1/2 or 1/3). Population MT: WMAE-minimising estimate, +/- WMAE / N.\n";

  for (const auto& pop : report.populations) {
    out << "\n=== Population " << pop.tag << " (N = " << pop.population
        << ", n = " << pop.respondents << ", PAPRIKA n = " << pop.paprika_respondents << ")\n";
    out << "small-study bound (c/(a t)) * 1000 = " << fixed2(pop.small_study.bound) << ": "
        << pop.small_study.message << '\n';
    for (const auto& removal : pop.removals) {
      out << "removed " << removal.respondent << ": " << removal.reason << '\n';
    }

    out << "\n(A) BYO MT vs part-worth MI\n";
    out << std::left << std::setw(26) << "attribute" << std::setw(24) << "level" << std::right
        << std::setw(8) << "BYO MT" << std::setw(12) << "pw MI" << '\n';
    for (const auto& block : pop.attributes) {
      const auto& attr = design.attributes[block.attribute];
      for (std::size_t l = 0; l < attr.levels.size(); ++l) {
        out << std::left << std::setw(26) << (l == 0 ? attr.label : "") << std::setw(24)
            << attr.levels[l] << std::right << std::setw(8) << format_rational(block.mt.counts[l])
            << std::setw(12) << format_rational(block.partworth_mi.counts[l]) << '\n';
      }
      if (block.partworth_ties > 0) {
        out << "  (" << block.partworth_ties << " part-worth argmax tie(s), lowest level used)\n";
      }
    }

    out << "\n(B) part-worth MI vs PAPRIKA MI\n";
    out << std::left << std::setw(26) << "attribute" << std::setw(24) << "level" << std::right
        << std::setw(8) << "pw MI" << std::setw(12) << "PAPRIKA" << std::setw(12) << "rounded"
        << '\n';
    for (const auto& block : pop.attributes) {
      const auto& attr = design.attributes[block.attribute];
      for (std::size_t l = 0; l < attr.levels.size(); ++l) {
        out << std::left << std::setw(26) << (l == 0 ? attr.label : "") << std::setw(24)
            << attr.levels[l] << std::right << std::setw(8)
            << format_rational(block.partworth_mi.counts[l]) << std::setw(12)
            << decimal(block.paprika_mi.counts[l]) << std::setw(12)
            << join_cases(block.paprika_rounding_cases, static_cast<int>(l)) << '\n';
      }
      if (block.paprika_rounding_cases.size() > 1) {
        out << "  (tied fractional counts: " << block.paprika_rounding_cases.size()
            << " rounding cases, separated by '|')\n";
      }
    }

    out << "\n(C) sample MT vs population MT\n";
    out << std::left << std::setw(26) << "attribute" << std::setw(24) << "level" << std::right
        << std::setw(10) << "sample" << std::setw(16) << "population" << '\n';
    for (const auto& block : pop.attributes) {
      const auto& attr = design.attributes[block.attribute];
      for (std::size_t l = 0; l < attr.levels.size(); ++l) {
        out << std::left << std::setw(26) << (l == 0 ? attr.label : "") << std::setw(24)
            << attr.levels[l] << std::right << std::setw(10)
            << fixed2(round_to_cents(block.sample_mt_proportions[l])) << std::setw(16)
            << (fixed2(block.population_mt.proportions[l]) + " +/- " +
                fixed2(block.population_mt.rounded_error))
            << '\n';
      }
    }
  }
  return out.str();
}

std::string render_section_a_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "population,attribute,level,byo_mt,partworth_mi\n";
  for (const auto& pop : report.populations) {
    for (const auto& block : pop.attributes) {
      const auto& attr = report.design.attributes[block.attribute];
      for (std::size_t l = 0; l < attr.levels.size(); ++l) {
        out << csv_field(pop.tag) << ',' << csv_field(attr.label) << ','
            << csv_field(attr.levels[l]) << ',' << format_rational(block.mt.counts[l]) << ','
            << format_rational(block.partworth_mi.counts[l]) << '\n';
      }
    }
  }
  return out.str();
}

std::string render_section_b_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "population,attribute,level,partworth_mi,paprika_mi_exact,paprika_mi,paprika_rounded\n";
  for (const auto& pop : report.populations) {
    for (const auto& block : pop.attributes) {
      const auto& attr = report.design.attributes[block.attribute];
      for (std::size_t l = 0; l < attr.levels.size(); ++l) {
        out << csv_field(pop.tag) << ',' << csv_field(attr.label) << ','
            << csv_field(attr.levels[l]) << ',' << format_rational(block.partworth_mi.counts[l])
            << ',' << format_rational(block.paprika_mi.counts[l]) << ','
            << decimal(block.paprika_mi.counts[l]) << ','
            << join_cases(block.paprika_rounding_cases, static_cast<int>(l)) << '\n';
      }
    }
  }
  return out.str();
}

std::string render_section_c_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "population,attribute,level,sample_mt,population_count,population_mt,error\n";
  for (const auto& pop : report.populations) {
    for (const auto& block : pop.attributes) {
      const auto& attr = report.design.attributes[block.attribute];
      for (std::size_t l = 0; l < attr.levels.size(); ++l) {
        out << csv_field(pop.tag) << ',' << csv_field(attr.label) << ','
            << csv_field(attr.levels[l]) << ','
            << fixed2(round_to_cents(block.sample_mt_proportions[l])) << ','
            << block.population_mt.estimate.counts[l] << ','
            << fixed2(block.population_mt.proportions[l]) << ','
            << fixed2(block.population_mt.rounded_error) << '\n';
      }
    }
  }
  return out.str();
}

std::string render_removals_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "population,respondent,reason\n";
  for (const auto& pop : report.populations) {
    for (const auto& removal : pop.removals) {
      out << csv_field(pop.tag) << ',' << csv_field(removal.respondent) << ','
          << csv_field(removal.reason) << '\n';
    }
  }
  return out.str();
}

StudyReport run_report(const std::filesystem::path& design_file,
                       const std::filesystem::path& records_file,
                       const std::map<std::string, std::int64_t>& population_sizes,
                       const std::filesystem::path& output_dir, const ReportOptions& options) {
  const auto design = load_design(design_file);
  const auto records = load_records(records_file);
  auto report = build_report(design, records, population_sizes, options);

  std::filesystem::create_directories(output_dir);
  const auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(output_dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (output_dir / name).string());
    out << text;
  };
  write("report.txt", render_text(report));
  write("section_a.csv", render_section_a_csv(report));
  write("section_b.csv", render_section_b_csv(report));
  write("section_c.csv", render_section_c_csv(report));
  write("removals.csv", render_removals_csv(report));
  return report;
}

}  // namespace acbc
