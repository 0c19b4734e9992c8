// vaw: exact vertex-algebra workbench CLI.
// Exit codes: 0 all checks passed, 1 at least one check failed,
// 2 usage or configuration error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vaw/parse.hpp"
#include "vaw/suite.hpp"

namespace {

using namespace vaw;

int runOpe(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    return 2;
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    line = vaw::detail::trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  int flat = 2, angular = 0;
  size_t start = 0;
  if (!lines.empty() && lines[0].rfind("patch", 0) == 0) {
    std::istringstream hd(lines[0].substr(5));
    if (!(hd >> flat >> angular) || flat < 0 || angular < 0 || flat + angular > 8)
      throw Error("ope: malformed patch directive '" + lines[0] + "'");
    start = 1;
  }
  Patch p = Patch::make(makeCoords(CoordSystem::flatAngular(flat, angular)), "ope");
  for (size_t i = start; i < lines.size(); ++i) {
    QueryResult r = parseQuery(p.c(), lines[i]);
    std::cout << lines[i] << "\n  => "
              << (std::holds_alternative<FieldExpr>(r) ? str(std::get<FieldExpr>(r))
                                                       : str(std::get<LambdaPoly>(r)))
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vaw: exact symbolic workbench for sheaf-of-vertex-algebra calculus"};
  app.require_subcommand(1);

  std::string exprFile, configPath, domain, format = "text";
  auto* ope = app.add_subcommand("ope", "evaluate expression queries from a file");
  ope->add_option("file", exprFile, "query file, one expression per line")->required();

  auto* verify = app.add_subcommand("verify", "run one verification suite");
  verify->add_option("domain", domain, "which suite to run")
      ->required()
      ->check(CLI::IsMember({"cdr", "courant", "tduality", "characters"}));
  verify->add_option("config", configPath, "suite configuration file")->required();

  auto* character = app.add_subcommand("character", "print the computed character grid");
  character->add_option("config", configPath, "suite configuration file")->required();

  auto* report = app.add_subcommand("report", "run the configured suite selection");
  report->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "records"}));
  report->add_option("config", configPath, "suite configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*ope) return runOpe(exprFile);
    if (*verify) {
      vaw::SuiteConfig cfg = vaw::loadSuiteConfigFile(configPath);
      vaw::Report rep = vaw::runSuite(cfg, domain);
      std::cout << rep.renderText();
      return rep.failed() > 0 ? 1 : 0;
    }
    if (*character) {
      vaw::SuiteConfig cfg = vaw::loadSuiteConfigFile(configPath);
      std::cout << vaw::basePointCharacter(cfg.order).str();
      return 0;
    }
    if (*report) {
      vaw::SuiteConfig cfg = vaw::loadSuiteConfigFile(configPath);
      vaw::Report rep = vaw::runSuite(cfg, cfg.suiteName);
      std::cout << (format == "records" ? rep.renderRecords() : rep.renderText());
      return rep.failed() > 0 ? 1 : 0;
    }
  } catch (const vaw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
