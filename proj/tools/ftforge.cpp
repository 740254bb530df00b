/*
 * Copyright 2026 The ftforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/// @file ftforge.cpp
/// Command-line front end: transform, analyze, cutsets, verify, validate.
///
/// Exit codes: 0 success, 1 I/O, 2 validation or input, 3 enumeration cap,
/// 4 exact analysis disagrees with the oracle.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ftforge/ftforge.hpp"

namespace {

using ftforge::ActivityModel;
using nlohmann::json;

enum Exit { kOk = 0, kIo = 1, kInvalid = 2, kCap = 3, kMismatch = 4 };

/// I/O failure with its own exit code.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validation failure whose report has already been printed.
class Reported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string input;
  std::string out;
  std::string dot_fpc;
  std::string dot_ft;
  std::string trace;
  std::string probs;
  std::string mode = "exact";
  bool mc = false;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 42;
  std::optional<std::size_t> cap;
  bool pretty = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

std::size_t cap_of(const Config& c) {
  if (c.cap) return *c.cap;
  if (const char* env = std::getenv("FTFORGE_CAP")) {
    try {
      return static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      throw ftforge::InputError(std::string("FTFORGE_CAP is not a number: ") + env);
    }
  }
  return ftforge::kDefaultCap;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Parses and validates; prints the report to stderr when invalid.
ActivityModel load_model(const std::string& path) {
  ActivityModel model;
  try {
    model = ftforge::parse_activity(read_file(path));
  } catch (const ftforge::ParseError& e) {
    throw ftforge::InputError(path + ":" + e.what());
  }
  const ftforge::ValidationReport report = ftforge::validate_ram(model);
  if (!report.ok()) {
    std::cerr << json{{"valid", false}, {"violations", report.to_json()}}.dump(2) << "\n";
    throw Reported("invalid model");
  }
  return model;
}

ftforge::ProbabilityAssignment load_probs(const Config& c, const ActivityModel& model) {
  if (c.probs.empty()) throw ftforge::InputError("this command needs --probs");
  json j;
  try {
    j = json::parse(read_file(c.probs));
  } catch (const json::parse_error& e) {
    throw ftforge::InputError(c.probs + ": " + e.what());
  }
  ftforge::ProbabilityAssignment p = ftforge::ProbabilityAssignment::from_json(j);
  p.check(model);
  return p;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

void emit(const Config& c, const json& report, const std::string& text) {
  std::cout << (c.pretty ? text : report.dump(2) + "\n");
}

int cmd_transform(const Config& c) {
  const ActivityModel model = load_model(c.input);
  const ftforge::Transformation t = ftforge::transform(model);
  const std::string tree = ftforge::export_tree(t.tree, "json");
  if (c.out.empty()) {
    std::cout << tree;
  } else {
    write_file(c.out, tree);
  }
  if (!c.dot_fpc.empty()) write_file(c.dot_fpc, ftforge::to_dot(t.fpc));
  if (!c.dot_ft.empty()) write_file(c.dot_ft, ftforge::export_tree(t.tree, "dot"));
  if (!c.trace.empty()) write_file(c.trace, t.trace.to_json().dump(2) + "\n");
  return kOk;
}

int cmd_analyze(const Config& c) {
  const ActivityModel model = load_model(c.input);
  const ftforge::ProbabilityAssignment p = load_probs(c, model);
  const ftforge::Transformation t = ftforge::transform(model);
  const double paper = ftforge::top_probability_paper(t.fpc, p);
  std::optional<double> exact;
  try {
    exact = ftforge::top_probability_exact(t.tree, model, p, cap_of(c));
  } catch (const ftforge::CapExceeded&) {
    if (c.mode == "exact") throw;
  }
  const auto cut_sets = ftforge::minimal_cut_sets(t.tree, model);

  json report{{"mode", c.mode}};
  report["top_probability"] = c.mode == "paper" ? paper : *exact;
  report["modes"] = {{"paper", paper}};
  if (exact) {
    report["modes"]["exact"] = *exact;
    if (std::abs(paper - *exact) > 1e-12) report["delta"] = paper - *exact;
  }
  report["cut_sets"] = ftforge::to_json(cut_sets);

  std::ostringstream text;
  text << "model            " << model.name << "\n"
       << "mode             " << c.mode << "\n"
       << "top probability  " << fmt(report["top_probability"].get<double>()) << "\n"
       << "paper mode       " << fmt(paper) << "\n";
  if (exact) text << "exact mode       " << fmt(*exact) << "\n";
  if (report.contains("delta")) text << "delta            " << fmt(report["delta"].get<double>()) << "\n";
  text << "minimal cut sets (" << cut_sets.size() << ")\n";
  for (const auto& cs : cut_sets) text << "  " << cs.to_string() << "\n";
  emit(c, report, text.str());
  return kOk;
}

int cmd_cutsets(const Config& c) {
  const ActivityModel model = load_model(c.input);
  const ftforge::Transformation t = ftforge::transform(model);
  const auto cut_sets = ftforge::minimal_cut_sets(t.tree, model);
  std::ostringstream text;
  for (const auto& cs : cut_sets) text << cs.to_string() << "\n";
  emit(c, json{{"cut_sets", ftforge::to_json(cut_sets)}}, text.str());
  return kOk;
}

int cmd_verify(const Config& c) {
  const ActivityModel model = load_model(c.input);
  const ftforge::ProbabilityAssignment p = load_probs(c, model);
  const ftforge::Transformation t = ftforge::transform(model);
  const double paper = ftforge::top_probability_paper(t.fpc, p);

  json report{{"paper", paper}};
  std::ostringstream text;
  text << "paper mode       " << fmt(paper) << "\n";
  int status = kOk;

  std::optional<double> oracle;
  try {
    const double exact = ftforge::top_probability_exact(t.tree, model, p, cap_of(c));
    oracle = ftforge::enumerate_exact(model, p, cap_of(c));
    const double deviation = std::abs(exact - *oracle);
    const bool agree = deviation <= 1e-9;
    report["exact"] = {{"analytic", exact}, {"oracle", *oracle}, {"deviation", deviation}, {"agree", agree}};
    report["paper_delta"] = paper - *oracle;
    text << "exact mode       " << fmt(exact) << "\n"
         << "oracle (enum)    " << fmt(*oracle) << "\n"
         << "exact vs oracle  " << (agree ? "agree" : "DISAGREE") << " (deviation " << fmt(deviation) << ")\n"
         << "paper - oracle   " << fmt(paper - *oracle) << "\n";
    if (!agree) status = kMismatch;
  } catch (const ftforge::CapExceeded& e) {
    if (!c.mc) throw ftforge::CapExceeded(std::string(e.what()) + "; rerun with --mc to sample instead");
    report["exact"] = {{"skipped", e.what()}};
    text << "exact mode       skipped (" << e.what() << ")\n";
  }

  if (c.mc) {
    const ftforge::MonteCarloResult mc = ftforge::monte_carlo(model, p, c.trials, c.seed);
    json j = mc.to_json();
    const double reference = oracle ? *oracle : paper;
    const double distance = std::abs(mc.estimate - reference);
    const bool within = mc.standard_error > 0 ? distance <= 4 * mc.standard_error : distance == 0.0;
    j["reference"] = oracle ? "oracle" : "paper";
    j["within_4se"] = within;
    report["monte_carlo"] = j;
    text << "monte carlo      " << fmt(mc.estimate) << " +/- " << fmt(mc.standard_error) << " ("
         << mc.trials << " trials, seed " << mc.seed << ") "
         << (within ? "within" : "outside") << " 4 standard errors of the " << (oracle ? "oracle" : "paper value")
         << "\n";
  }
  emit(c, report, text.str());
  return status;
}

int cmd_validate(const Config& c) {
  ftforge::ValidationReport report;
  if (ends_with(c.input, ".json")) {
    json j;
    try {
      j = json::parse(read_file(c.input));
    } catch (const json::parse_error& e) {
      throw ftforge::InputError(c.input + ": " + e.what());
    }
    report = ftforge::validate_ftm(ftforge::fault_tree_from_json(j));
  } else {
    try {
      report = ftforge::validate_ram(ftforge::parse_activity(read_file(c.input)));
    } catch (const ftforge::ParseError& e) {
      report.add("syntax", e.what(), c.input);
    }
  }
  std::ostringstream text;
  text << (report.ok() ? "valid" : "invalid") << "\n";
  for (const auto& v : report.violations) text << "  [" << v.code << "] " << v.message << "\n";
  emit(c, json{{"valid", report.ok()}, {"violations", report.to_json()}}, text.str());
  return report.ok() ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ftforge: activity models to fault trees"};
  app.require_subcommand(1);
  Config c;

  auto input = [&c](CLI::App* sub) {
    sub->add_option("input", c.input, "activity model (.act)")->required();
    sub->add_flag("--pretty", c.pretty, "human-readable output instead of JSON");
  };
  auto probabilities = [&c](CLI::App* sub) {
    sub->add_option("--probs", c.probs, "probability assignment (JSON)")->required();
    sub->add_option("--cap", c.cap, "largest action count for exhaustive enumeration");
  };

  CLI::App* transform = app.add_subcommand("transform", "write the fault tree, chain and trace");
  input(transform);
  transform->add_option("--out", c.out, "fault tree JSON (default: standard output)");
  transform->add_option("--dot-fpc", c.dot_fpc, "chain as Graphviz DOT");
  transform->add_option("--dot-ft", c.dot_ft, "fault tree as Graphviz DOT");
  transform->add_option("--trace", c.trace, "trace map JSON");

  CLI::App* analyze = app.add_subcommand("analyze", "top-event probability and minimal cut sets");
  input(analyze);
  probabilities(analyze);
  analyze->add_option("--mode", c.mode, "reported probability")->check(CLI::IsMember({"paper", "exact"}));

  CLI::App* cutsets = app.add_subcommand("cutsets", "minimal cut sets");
  input(cutsets);

  CLI::App* verify = app.add_subcommand("verify", "cross-check analysis against the execution oracle");
  input(verify);
  probabilities(verify);
  verify->add_flag("--mc", c.mc, "also run Monte Carlo");
  verify->add_option("--trials", c.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  verify->add_option("--seed", c.seed, "Monte Carlo seed");

  CLI::App* validate = app.add_subcommand("validate", "check an activity model or a fault tree JSON");
  validate->add_option("input", c.input, "model (.act) or fault tree (.json)")->required();
  validate->add_flag("--pretty", c.pretty, "human-readable output instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*transform) return cmd_transform(c);
    if (*analyze) return cmd_analyze(c);
    if (*cutsets) return cmd_cutsets(c);
    if (*verify) return cmd_verify(c);
    if (*validate) return cmd_validate(c);
  } catch (const IoError& e) {
    std::cerr << "ftforge: " << e.what() << "\n";
    return kIo;
  } catch (const Reported&) {
    return kInvalid;
  } catch (const ftforge::CapExceeded& e) {
    std::cerr << "ftforge: " << e.what() << "\n";
    return kCap;
  } catch (const ftforge::StructureError& e) {
    std::cerr << "ftforge: " << e.what() << " (at '" << e.element_id() << "')\n";
    return kInvalid;
  } catch (const ftforge::Error& e) {
    std::cerr << "ftforge: " << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}
