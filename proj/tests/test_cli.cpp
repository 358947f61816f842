#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "paracalc");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = paracalc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("paracalc_cli_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

} // namespace

TEST(Cli, KernelOfD) {
  const auto r = run({"solve", "--p", "2", "--kind", "kernel", "--s", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\n1\n"), std::string::npos) << r.out;
  EXPECT_EQ(count_of(r.out, "# element"), 1);
}

TEST(Cli, DoubleRootGivesTwoElements) {
  const auto r = run({"solve", "--p", "2", "--kind", "constant", "--coeffs", "-1,0.25"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_of(r.out, "# element"), 2);
  EXPECT_NE(r.out.find("root 0.5"), std::string::npos);
  EXPECT_NE(r.out.find("residual: "), std::string::npos);
  EXPECT_NE(r.out.find("brute_force: true"), std::string::npos);
}

TEST(Cli, ComplexLiterals) {
  EXPECT_EQ(paracalc::cli::parse_complex_literal("0.7+0.2i", "z"), paracalc::Complex(0.7, 0.2));
  EXPECT_EQ(paracalc::cli::parse_complex_literal("-i", "z"), paracalc::Complex(0.0, -1.0));
  EXPECT_EQ(paracalc::cli::parse_complex_literal("1e-3-2e+1i", "z"), paracalc::Complex(1e-3, -20.0));
  EXPECT_EQ(paracalc::cli::parse_complex_literal("3", "z"), paracalc::Complex(3.0, 0.0));
  EXPECT_THROW(paracalc::cli::parse_complex_literal("abc", "z"), paracalc::ParseError);
  EXPECT_THROW(paracalc::cli::parse_matrix_literal("1,2;3", "m"), paracalc::ParseError);
}

TEST(Cli, SolveVerifyRoundTrip) {
  TempDir dir;
  const std::vector<std::vector<std::string>> problems{
      {"--p", "3", "--kind", "constant", "--coeffs", "0.2-0.1i,0.3,-0.05i"},
      {"--p", "2", "--kind", "constant", "--coeffs", "0.1,0.2,0.3,0.4,0.5"},
      {"--p", "3", "--kind", "eigen", "--s", "2", "--lambda", "0.6+0.3i"},
      {"--p", "2", "--kind", "kernel", "--s", "4"},
      {"--p", "2", "--kind", "system", "--matrix", "0,1;-1,0"},
      {"--p", "2", "--kind", "theta_coeff", "--theta-coeffs", "0.5,0.2i,-0.1"},
  };
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const std::string path = dir.file("sol" + std::to_string(i) + ".json");
    auto args = problems[i];
    args.insert(args.begin(), "solve");
    args.push_back("--output");
    args.push_back(path);
    const auto solved = run(args);
    ASSERT_EQ(solved.code, 0) << solved.err;
    const auto checked = run({"verify", "--input", path});
    EXPECT_EQ(checked.code, 0) << checked.out << checked.err;
    EXPECT_NE(checked.out.find("verification passed"), std::string::npos);
  }
}

TEST(Cli, OutputIsByteIdentical) {
  const std::vector<std::string> args{"solve", "--p", "4", "--kind", "constant", "--coeffs", "0.3,-0.2i,0.1", "--json"};
  const auto a = run(args);
  const auto b = run(args);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const std::vector<std::string> text{"solve", "--p", "3", "--kind", "system", "--matrix", "1,2;0,1"};
  EXPECT_EQ(run(text).out, run(text).out);
}

TEST(Cli, JsonInputMatchesFlags) {
  TempDir dir;
  const std::string problem = dir.file("problem.json");
  write_text(problem, R"({"p": 2, "kind": "constant", "coeffs": [[-1, 0], 0.25]})");
  const auto from_file = run({"solve", "--input", problem, "--json"});
  const auto from_flags = run({"solve", "--p", "2", "--kind", "constant", "--coeffs", "-1,0.25", "--json"});
  EXPECT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(from_file.out, from_flags.out);
  const auto doc = paracalc::parse_json_text(from_file.out);
  EXPECT_EQ(doc["basis"].size(), 2u);
  EXPECT_TRUE(doc["report"]["passed"].get<bool>());
}

TEST(Cli, ParseErrorsExitTwo) {
  TempDir dir;
  const std::string broken = dir.file("broken.json");
  write_text(broken, "{\"p\": 2, \"kind\": ");
  auto r = run({"solve", "--input", broken});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("<document>"), std::string::npos) << r.err;

  const std::string unknown = dir.file("unknown.json");
  write_text(unknown, R"({"p": 2, "kind": "wave"})");
  r = run({"solve", "--input", unknown});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("kind"), std::string::npos) << r.err;

  const std::string missing = dir.file("missing.json");
  write_text(missing, R"({"kind": "kernel", "s": 1})");
  r = run({"solve", "--input", missing});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("problem.p"), std::string::npos) << r.err;

  r = run({"solve", "--p", "0", "--kind", "kernel", "--s", "1"});
  EXPECT_EQ(r.code, 2);
  r = run({"solve", "--p", "2", "--kind", "eigen", "--s", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("lambda"), std::string::npos) << r.err;
  r = run({"solve", "--p", "2", "--kind", "constant", "--coeffs", "1,x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--coeffs"), std::string::npos) << r.err;
  r = run({"bogus"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, CorruptedCandidateExitsThree) {
  TempDir dir;
  const std::string path = dir.file("sol.json");
  ASSERT_EQ(run({"solve", "--p", "3", "--kind", "constant", "--coeffs", "0.4,0.1", "--output", path}).code, 0);
  auto doc = paracalc::parse_json_text(read_text(path));
  auto& coeffs = doc["basis"][0]["components"][1][0]["coeffs"][0];
  coeffs[0] = coeffs[0].get<double>() * 1.01 + 0.01;
  write_text(path, paracalc::write_json(doc));
  const auto r = run({"verify", "--input", path, "--json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(paracalc::parse_json_text(r.out)["passed"].get<bool>());
}

TEST(Cli, NonlinearVerifyIsRejected) {
  TempDir dir;
  const std::string path = dir.file("nl.json");
  ASSERT_EQ(run({"structure", "--p", "3", "--m", "3", "--n", "2", "--output", path}).code, 0);
  EXPECT_EQ(run({"verify", "--input", path}).code, 2);
}

TEST(Cli, Structure) {
  auto r = run({"structure", "--p", "3", "--m", "3", "--n", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("free functions: 1 2\nfree constants: 0\nforced zero: 3\n"), std::string::npos) << r.out;
  r = run({"structure", "--p", "4", "--m", "1", "--n", "2", "--json"});
  const auto doc = paracalc::parse_json_text(r.out);
  EXPECT_EQ(doc["structure"]["free_functions"], paracalc::Json::array({0, 4}));
  r = run({"structure", "--p", "3", "--m", "9", "--n", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("m"), std::string::npos);
}

TEST(Cli, ToleranceFlag) {
  const std::vector<std::string> base{"solve", "--p", "3", "--kind", "constant", "--coeffs", "0.4,0.1", "--json"};
  auto strict = base;
  strict.insert(strict.begin(), {"--tol", "1e-30"});
  const auto r = run(strict);
  const auto doc = paracalc::parse_json_text(r.out);
  EXPECT_EQ(r.code, doc["report"]["residual"].get<double>() <= 1e-30 ? 0 : 3);
  auto loose = base;
  loose.insert(loose.begin(), {"--tol", "1e-6"});
  EXPECT_EQ(run(loose).code, 0);
  auto bad = base;
  bad.insert(bad.begin(), {"--tol", "-1"});
  EXPECT_EQ(run(bad).code, 2);
}

TEST(Cli, SelftestPrintsTenCriteria) {
  const auto r = run({"selftest"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(count_of(r.out, "PASS"), 10) << r.out;
  EXPECT_EQ(count_of(r.out, "FAIL"), 0);
}
