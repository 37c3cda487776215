#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "cli.hpp"

using namespace licorm;
using namespace licorm::cli;

namespace {

class TempDir
{
public:
  TempDir()
  {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("licorm_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }

  std::filesystem::path write(const std::string& name, const std::string& text) const
  {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p;
  }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

RunConfig config(Command c, std::optional<std::filesystem::path> input, std::string spec)
{
  RunConfig cfg;
  cfg.command = c;
  cfg.input = std::move(input);
  cfg.spec_json = std::move(spec);
  return cfg;
}

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

} // namespace

TEST(SamplesCsv, PlainHeaderAndWeights)
{
  std::istringstream plain("1\n2\n\n3\n");
  EXPECT_EQ(read_samples_csv(plain).values, (std::vector<double>{1, 2, 3}));

  std::istringstream header("value,weight\n1,1\n2,3\n");
  const auto s = read_samples_csv(header);
  EXPECT_EQ(s.values, (std::vector<double>{1, 2}));
  ASSERT_TRUE(s.weights.has_value());
  EXPECT_EQ(*s.weights, (std::vector<double>{1, 3}));
  EXPECT_EQ(to_measure(s, AtomMerge::Exact).atoms(), (std::vector<Atom>{{1, 0.25}, {2, 0.75}}));

  std::istringstream exact("0.1\n-2.5e-3\n+7\n");
  const auto e = read_samples_csv(exact);
  EXPECT_EQ(bits(e.values[0]), bits(0.1));
  EXPECT_EQ(bits(e.values[1]), bits(-2.5e-3));
  EXPECT_EQ(e.values[2], 7.0);
}

TEST(SamplesCsv, Errors)
{
  auto code = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_samples_csv(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidParams;
  };
  EXPECT_EQ(code("1\nabc\n"), ErrorCode::ParseError);
  EXPECT_EQ(code("1,1\n2\n"), ErrorCode::ParseError);
  EXPECT_EQ(code("x\n"), ErrorCode::EmptyInput);
  EXPECT_EQ(code(""), ErrorCode::EmptyInput);
  EXPECT_EQ(code("1,x\n"), ErrorCode::ParseError);
}

TEST(SpecParsing, AllTypes)
{
  EXPECT_TRUE(std::holds_alternative<CvarSpec>(parse_spec_text(R"({"type":"cvar","beta":0.5})").spec));
  const auto hm = parse_spec_text(R"({"type":"higher_moment","p":2,"c":1.2})");
  EXPECT_EQ(std::get<HigherMomentSpec>(hm.spec).c, 1.2);
  const auto k1 = parse_spec_text(R"({"type":"kusuoka","mixture":[{"beta":0,"weight":0.5},{"beta":0.5,"weight":0.5}]})");
  const auto k2 = parse_spec_text(R"({"type":"kusuoka","mixture":[[0,0.5],[0.5,0.5]]})");
  EXPECT_EQ(k1.echo, k2.echo);
  const auto ex = parse_spec_text(
      R"({"type":"explicit","support":[0,1,2],"vertices":[[0,1,0],[0.5,0,0.5]],"hull_mode":"convex_hull","p":"inf","solver":{"fw_max_iters":10}})");
  const auto& es = std::get<ExplicitSpec>(ex.spec);
  EXPECT_EQ(es.set.mode(), HullMode::ConvexHull);
  EXPECT_TRUE(es.p.is_infinite());
  EXPECT_EQ(ex.echo["p"], "inf");
  EXPECT_EQ(solver_options(RunConfig{}, ex.solver).fw_max_iters, 10u);
}

TEST(SpecParsing, EchoReparsesToSameSpec)
{
  for (const char* text : {R"({"type":"cvar","beta":0.3})", R"({"type":"higher_moment","p":1.5,"c":3})",
                           R"({"type":"kusuoka","mixture":[[0.25,1]]})",
                           R"({"type":"explicit","support":[1],"vertices":[[1]],"p":2})"}) {
    const auto once = parse_spec_text(text);
    const auto twice = parse_spec(once.echo);
    EXPECT_EQ(once.echo, twice.echo) << text;
  }
}

TEST(SpecParsing, Errors)
{
  auto code = [](const std::string& text) {
    try {
      parse_spec_text(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::EmptyInput;
  };
  EXPECT_EQ(code("{"), ErrorCode::ParseError);
  EXPECT_EQ(code("[]"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"type":"var"})"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"type":"cvar"})"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"type":"cvar","beta":"x"})"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"type":"cvar","beta":1.2})"), ErrorCode::OutOfRange);
  EXPECT_EQ(code(R"({"type":"higher_moment","p":1,"c":2})"), ErrorCode::InvalidParams);
  EXPECT_EQ(code(R"({"type":"kusuoka","mixture":[[0.5,0.7]]})"), ErrorCode::InvalidMixture);
  EXPECT_EQ(code(R"({"type":"explicit","support":[0,2],"vertices":[[0.2,0.8]]})"), ErrorCode::InvalidGeneratorSet);
  EXPECT_EQ(code(R"({"type":"explicit","support":[1],"vertices":[[1]],"p":0.5})"), ErrorCode::InvalidOrder);
}

TEST(CmdEval, Examples)
{
  TempDir dir;
  const auto four = dir.write("four.csv", "1\n2\n3\n4\n");
  auto out = run(config(Command::Eval, four, R"({"type":"cvar","beta":0.5})"));
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_NEAR(out.report["value"].get<double>(), 3.5, 1e-15);
  EXPECT_EQ(out.report["schema_version"], kSchemaVersion);
  EXPECT_EQ(out.report["measure"]["atoms"], 4);
  EXPECT_EQ(out.report["coupling"]["atoms"], 4);

  const auto one = dir.write("one.csv", "2.75\n");
  out = run(config(Command::Eval, one, R"({"type":"cvar","beta":0.9})"));
  EXPECT_EQ(out.report["value"].get<double>(), 2.75);

  const auto two = dir.write("two.csv", "sample\n0\n1\n");
  out = run(config(Command::Eval, two, R"({"type":"higher_moment","p":2,"c":1.2})"));
  EXPECT_NEAR(out.report["value"].get<double>(), 0.83166, 1e-4);
  EXPECT_NEAR(out.report["dual_certificate"]["dual_value"].get<double>(), out.report["value"].get<double>(), 1e-7);

  out = run(config(Command::Eval, four,
                   R"({"type":"explicit","support":[0,1,2],"vertices":[[0,1,0],[0.5,0,0.5]],"hull_mode":"convex_hull"})"));
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_NEAR(out.report["value"].get<double>(), 3.5, 1e-6);
  EXPECT_EQ(out.report["gap_report"]["status"], "Converged");
}

TEST(CmdEval, ErrorObjects)
{
  TempDir dir;
  const auto f = dir.write("x.csv", "1\n");
  auto out = run(config(Command::Eval, f, R"({"type":"cvar","beta":1.2})"));
  EXPECT_EQ(out.exit_code, kExitParse);
  EXPECT_EQ(out.report["error"]["message"], "beta out of range");
  EXPECT_EQ(out.report["error"]["exit_code"], kExitParse);

  out = run(config(Command::Eval, dir / "missing.csv", R"({"type":"cvar","beta":0.2})"));
  EXPECT_EQ(out.exit_code, kExitParse);

  RunConfig no_spec;
  no_spec.input = f;
  EXPECT_EQ(run(no_spec).exit_code, kExitParse);
}

TEST(CmdCheck, PassAndCorruptSpec)
{
  auto cfg = config(Command::Check, std::nullopt, R"({"type":"cvar","beta":0.5})");
  cfg.instances = 200;
  auto out = run(cfg);
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_EQ(out.report["passed"], true);
  EXPECT_EQ(out.report["tol"], 1e-9);
  EXPECT_EQ(out.report["axioms"].size(), 4u);
  EXPECT_EQ(out.report["bounds"]["checks"].size(), 3u);

  cfg = config(Command::Check, std::nullopt, R"({"type":"higher_moment","p":2,"c":1.2})");
  cfg.instances = 100;
  out = run(cfg);
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_EQ(out.report["tol"], 1e-6);

  cfg = config(Command::Check, std::nullopt, R"({"type":"cvar","beta":1.2})");
  out = run(cfg);
  EXPECT_EQ(out.exit_code, kExitParse);
  EXPECT_EQ(out.report["error"]["message"], "beta out of range");
}

TEST(CmdCheck, ViolationGivesExitOne)
{
  auto cfg = config(Command::Check, std::nullopt, R"({"type":"higher_moment","p":2,"c":1.2})");
  cfg.instances = 20;
  cfg.tol = -1.0;
  const auto out = run(cfg);
  EXPECT_EQ(out.exit_code, kExitViolation);
  EXPECT_EQ(out.report["passed"], false);
}

TEST(CmdDual, Examples)
{
  TempDir dir;
  const auto four = dir.write("four.csv", "1\n2\n3\n4\n");
  auto out = run(config(Command::Dual, four, R"({"type":"cvar","beta":0.5})"));
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_LE(out.report["gap"].get<double>(), 1e-4);
  EXPECT_NEAR(out.report["primal_lower"].get<double>(), 3.5, 1e-4);

  const auto one = dir.write("one.csv", "-1.5\n");
  out = run(config(Command::Dual, one, R"({"type":"kusuoka","mixture":[[0.2,1]]})"));
  EXPECT_LE(out.report["gap"].get<double>(), 1e-8);
  EXPECT_NEAR(out.report["dual_upper"].get<double>(), -1.5, 1e-8);

  RunConfig rnd;
  rnd.command = Command::Dual;
  rnd.random_instance = true;
  rnd.seed = 3;
  out = run(rnd);
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_EQ(out.report["status"], "Converged");

  out = run(config(Command::Dual, four, R"({"type":"higher_moment","p":2,"c":2})"));
  EXPECT_EQ(out.exit_code, kExitParse);
}

TEST(CmdDual, IterLimitIsAWarning)
{
  RunConfig rnd;
  rnd.command = Command::Dual;
  rnd.random_instance = true;
  rnd.seed = 5;
  rnd.max_iters = 1;
  rnd.target_gap = 1e-15;
  const auto out = run(rnd);
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_EQ(out.report["status"], "IterLimit");
  EXPECT_TRUE(out.report.contains("warning"));
}

TEST(CmdKusuoka, Examples)
{
  auto out = run(config(Command::Kusuoka, std::nullopt, R"({"type":"kusuoka","mixture":[[0,0.5],[0.5,0.5]]})"));
  EXPECT_EQ(out.report["image"], json::parse("[[0.5,0.5],[1.5,0.5]]"));
  out = run(config(Command::Kusuoka, std::nullopt, R"({"type":"kusuoka","mixture":[[0.75,1]]})"));
  EXPECT_EQ(out.report["image"], json::parse("[[0,0.75],[4,0.25]]"));
  out = run(config(Command::Kusuoka, std::nullopt, R"({"type":"kusuoka","mixture":[[0,1]]})"));
  EXPECT_EQ(out.report["image"], json::parse("[[1,1]]"));
  out = run(config(Command::Kusuoka, std::nullopt, R"({"type":"cvar","beta":0.1})"));
  EXPECT_EQ(out.exit_code, kExitParse);
}

TEST(Reports, RoundTripIsBitExact)
{
  TempDir dir;
  std::ostringstream csv;
  SplitMix64 rng(77);
  for (int i = 0; i < 300; ++i) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g\n", rng.uniform(-3.0, 3.0) / 7.0);
    csv << buf;
  }
  const auto input = dir.write("data.csv", csv.str());
  const std::vector<std::string> specs{
      R"({"type":"cvar","beta":0.37})",
      R"({"type":"higher_moment","p":2.5,"c":1.7})",
      R"({"type":"kusuoka","mixture":[[0.1,0.3],[0.8,0.7]]})",
      R"({"type":"explicit","support":[0,1,3],"vertices":[[0,1,0],[0.5,0.25,0.25]],"hull_mode":"convex_hull"})",
  };
  for (const auto& spec : specs) {
    auto cfg = config(Command::Eval, input, spec);
    cfg.out = dir / "report.json";
    const auto first = run(cfg);
    ASSERT_EQ(first.exit_code, kExitOk) << first.report.dump();
    write_report(first.report, cfg.out);

    std::ifstream in(*cfg.out);
    const json back = json::parse(in);
    EXPECT_EQ(bits(back["value"].get<double>()), bits(first.report["value"].get<double>())) << spec;

    auto again = config(Command::Eval, input, back["spec"].dump());
    const auto second = run(again);
    EXPECT_EQ(bits(second.report["value"].get<double>()), bits(back["value"].get<double>())) << spec;
    EXPECT_EQ(second.report, back) << spec;
  }
}
