#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "rnext/cli.hpp"
#include "rnext/config.hpp"
#include "rnext/errors.hpp"
#include "rnext/io.hpp"

using namespace rnext;
namespace fs = std::filesystem;

namespace {

RunConfig parse(std::vector<std::string> args, const std::map<std::string, std::string>& env = {}) {
    args.insert(args.begin(), "rnext");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_config(static_cast<int>(argv.size()), argv.data(), [&env](const char* name) -> const char* {
        const auto it = env.find(name);
        return it == env.end() ? nullptr : it->second.c_str();
    });
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rnext_cli_io_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string usage_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const UsageError& e) {
        return e.what();
    }
    return "<no usage error>";
}

// Rows of a '#'-commented whitespace table.
std::vector<std::vector<double>> table(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::vector<double> r;
        double x;
        while (row >> x) r.push_back(x);
        rows.push_back(r);
    }
    return rows;
}

int run_cli(const std::string& args) {
    const char* cli = std::getenv("RNEXT_CLI");
    if (!cli) return -1;
    const int status = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ParseConfig, ClassifyFlags) {
    const RunConfig c = parse({"classify", "--n", "2", "--m", "1", "--q", "0", "--lambda", "0"});
    EXPECT_EQ(c.command, "classify");
    const RNParams p = model_params(c);
    EXPECT_EQ(p.n, 2);
    EXPECT_EQ(p.m, 1.0);
    EXPECT_EQ(p.q, 0.0);
    EXPECT_EQ(p.lambda, 0.0);
}

TEST(ParseConfig, NegativeValuesAndOptionsBeforeCommand) {
    const RunConfig c = parse({"--q", "0.2", "extend", "--lambda", "-3", "--r-o", "1.5", "--mass", "2"});
    EXPECT_EQ(c.lambda, -3.0);
    EXPECT_EQ(c.q, 0.2);
    EXPECT_EQ(c.r_o, 1.5);
    EXPECT_EQ(c.mass, 2.0);
}

TEST(ParseConfig, EmptyConfigUsesDefaults) {
    RunConfig expect;
    expect.command = "selftest";
    EXPECT_EQ(parse({"selftest"}), expect);
    const fs::path dir = scratch("empty");
    write_file(dir / "c.json", "{}");
    EXPECT_EQ(parse({"selftest", "--config", (dir / "c.json").string()}), expect);
}

TEST(ParseConfig, FlagOverridesFileOverridesDefault) {
    const fs::path dir = scratch("precedence");
    write_file(dir / "c.json", R"({"t_grid": 2049, "q": 0.25})");
    const std::string file = (dir / "c.json").string();
    const RunConfig from_file = parse({"bartnik", "--config", file});
    EXPECT_EQ(from_file.t_grid, 2049);
    EXPECT_EQ(from_file.q, 0.25);
    EXPECT_EQ(from_file.theta_grid, RunConfig{}.theta_grid);
    const RunConfig flagged = parse({"bartnik", "--config", file, "--t-grid", "4097"});
    EXPECT_EQ(flagged.t_grid, 4097);
    EXPECT_EQ(flagged.q, 0.25);
}

TEST(ParseConfig, EnvironmentOverridesTolerances) {
    const fs::path dir = scratch("env");
    write_file(dir / "c.json", R"({"tol_scale": 0.5})");
    const std::string file = (dir / "c.json").string();
    const std::map<std::string, std::string> env = {{"RNEXT_TOL_SCALE", "0.25"}, {"RNEXT_CURVATURE_MARGIN", "0.1"}};
    const RunConfig c = parse({"selftest", "--config", file}, env);
    EXPECT_EQ(c.tol_scale, 0.25);
    EXPECT_EQ(c.curvature_margin, 0.1);
    EXPECT_EQ(parse({"selftest", "--tol-scale", "2"}, env).tol_scale, 2.0);
    EXPECT_NE(usage_message([&] { parse({"selftest"}, {{"RNEXT_TOL_SCALE", "x"}}); }).find("RNEXT_TOL_SCALE"),
              std::string::npos);
}

TEST(ParseConfig, Rejections) {
    EXPECT_NE(usage_message([] { parse({"classify", "--lambda", "0.5"}); }).find("lambda"), std::string::npos);
    EXPECT_THROW(parse({}), UsageError);
    EXPECT_THROW(parse({"frobnicate"}), UsageError);
    EXPECT_THROW(parse({"classify", "--no-such-flag", "1"}), UsageError);
    EXPECT_THROW(parse({"classify", "--q", "abc"}), UsageError);
    EXPECT_THROW(parse({"classify", "--n", "2.5"}), UsageError);
    EXPECT_THROW(parse({"extend"}), UsageError);
    EXPECT_THROW(parse({"extend", "--mass", "1", "--seed", "axisym", "--n", "3"}), UsageError);
    const fs::path dir = scratch("reject");
    write_file(dir / "unknown.json", R"({"t_grid": 129, "bogus": 1})");
    write_file(dir / "type.json", R"({"t_grid": "many"})");
    write_file(dir / "nested.json", R"({"n": {"value": 2}})");
    write_file(dir / "bad.json", R"({"n": 2,)");
    EXPECT_NE(usage_message([&] { parse({"classify", "--config", (dir / "unknown.json").string()}); }).find("'/bogus'"),
              std::string::npos);
    EXPECT_NE(usage_message([&] { parse({"classify", "--config", (dir / "type.json").string()}); }).find("'/t_grid'"),
              std::string::npos);
    EXPECT_NE(usage_message([&] { parse({"classify", "--config", (dir / "nested.json").string()}); }).find("'/n'"),
              std::string::npos);
    EXPECT_THROW(parse({"classify", "--config", (dir / "bad.json").string()}), UsageError);
    EXPECT_THROW(parse({"classify", "--config", (dir / "missing.json").string()}), UsageError);
}

TEST(ParseConfig, RoundTripRandomized) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    std::uniform_int_distribution<int> ints(-1000000, 1000000);
    const std::string strings[] = {"", "round", "a \"quoted\" path", "dir/file.json", "tab\tand\nnewline", "été"};
    for (int trial = 0; trial < 200; ++trial) {
        RunConfig c;
        nlohmann::json j = config_to_json(c);
        for (auto& [key, value] : j.items()) {
            if (value.is_string()) value = strings[rng() % 6];
            else if (value.is_number_integer()) value = ints(rng);
            else value = std::ldexp(mant(rng), expo(rng));
        }
        const RunConfig random = config_from_json(j);
        const RunConfig back = config_from_json(nlohmann::json::parse(dump_json(config_to_json(random))));
        EXPECT_EQ(back, random);
        EXPECT_EQ(dump_json(config_to_json(back)), dump_json(config_to_json(random)));
    }
}

TEST(ParseConfig, EveryKeyHasAFlag) {
    const nlohmann::json defaults = config_to_json(RunConfig{});
    for (const std::string& key : config_keys()) {
        if (key == "command") continue;
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        const nlohmann::json& d = defaults[key];
        const std::string value = d.is_string() ? (d.get<std::string>().empty() ? "x" : d.get<std::string>())
                                  : d.is_number_integer() ? std::to_string(d.get<int>())
                                                          : format_double(d.get<double>());
        RunConfig c;
        EXPECT_NO_THROW(c = parse({"selftest", flag, value})) << flag;
        EXPECT_EQ(dump_json(config_to_json(c)[key]), dump_json(d.is_string() ? nlohmann::json(value) : d)) << flag;
    }
}

TEST(Io, SeventeenDigits) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(-2.0), "-2");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(-INFINITY), "-inf");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::ldexp(u(rng), static_cast<int>(rng() % 600) - 300);
        EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
    }
    const nlohmann::json j = {{"a", 1.0 / 3.0}, {"b", {1, 2.5, nullptr}}, {"c", "x"}, {"d", std::nan("")}};
    EXPECT_EQ(dump_json(j, -1), R"({"a":0.33333333333333331,"b":[1,2.5,null],"c":"x","d":null})");
}

TEST(Io, AtomicWrite) {
    const fs::path dir = scratch("atomic");
    write_atomic(dir / "a.txt", "first");
    write_atomic(dir / "a.txt", "second");
    EXPECT_EQ(slurp(dir / "a.txt"), "second");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
    EXPECT_EQ(entries, 1);
    EXPECT_THROW(write_atomic(dir / "missing" / "a.txt", "x"), IoError);
}

TEST(Io, ProfileCsvRoundTrip) {
    const RNParams pr{2, 1.25, 0.75, -0.5};
    const SampledProfile u = rn_profile(pr, 4.0, 101);
    std::vector<double> margins(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) margins[i] = std::sin(1.0 + i);
    RunConfig c;
    c.command = "rn-profile";
    const std::string text = profile_csv(u, margins, config_to_json(c));
    const CsvProfile back = parse_profile_csv(text);
    ASSERT_EQ(back.profile.size(), u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_EQ(back.profile.s[i], u.s[i]);
        EXPECT_EQ(back.profile.f[i], u.f[i]);
        EXPECT_EQ(back.profile.df[i], u.df[i]);
        EXPECT_EQ(back.profile.d2f[i], u.d2f[i]);
        EXPECT_EQ(back.profile.provenance[i], u.provenance[i]);
        EXPECT_EQ(back.margins[i], margins[i]);
    }
    EXPECT_EQ(config_from_json(back.config), c);
    EXPECT_NE(text.find(std::string("\n") + kProfileCsvHeader + "\n"), std::string::npos);
    EXPECT_THROW(parse_profile_csv("s,f\n1,2\n"), IoError);
}

TEST(Run, ArtifactsAreDeterministic) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    RunConfig c = parse({"extend", "--mass", "0.55"});
    for (const fs::path& dir : {a, b}) {
        c.out = "report.json";
        c.plot_dir = "plots";
        const fs::path cwd = fs::current_path();
        fs::current_path(dir);
        fs::create_directories("plots");
        std::ostringstream sink;
        EXPECT_EQ(run(c, sink), kExitOk);
        fs::current_path(cwd);
    }
    for (const char* name : {"report.json", "report.profile.csv", "plots/profile.dat", "plots/hawking.dat", "plots/margin.dat"})
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    const nlohmann::json report = nlohmann::json::parse(slurp(a / "report.json"));
    EXPECT_EQ(report["schema_version"], kSchemaVersion);
    EXPECT_EQ(config_from_json(report["config"]), c);
    EXPECT_TRUE(report["verified"].get<bool>());
    EXPECT_NEAR(report["m_far"].get<double>(), 0.55, 1e-8);
    EXPECT_EQ(report["attachment"]["m_e"].get<double>(), 0.55);
}

TEST(Run, PlotData) {
    const fs::path dir = scratch("plot");
    RunConfig c = parse({"extend", "--mass", "0.6"});
    const ExtensionReport r = construct_extension(data_spec(c), c.mass, pipeline_config(c));
    emit_plotdata(r, PlotPaths::in_directory(dir), config_to_json(c));
    const auto prof = table(slurp(dir / "profile.dat"));
    const auto hawk = table(slurp(dir / "hawking.dat"));
    const auto marg = table(slurp(dir / "margin.dat"));
    ASSERT_EQ(prof.size(), r.profile.size());
    ASSERT_EQ(hawk.size(), r.profile.size());
    ASSERT_EQ(marg.size(), r.profile.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
        ASSERT_EQ(prof[i].size(), 2u);
        EXPECT_EQ(prof[i][1], r.profile.f[i]);
        if (i > 0) EXPECT_GE(hawk[i][1], hawk[i - 1][1] - 1e-10) << i;
        if (r.profile.provenance[i] != Provenance::Ode) EXPECT_GT(marg[i][1], 0.0) << i;
    }
    EXPECT_THROW(emit_plotdata(r, PlotPaths::in_directory(dir / "missing"), config_to_json(c)), IoError);
}

TEST(Run, ClassifyAndProfileOutputs) {
    std::ostringstream out;
    EXPECT_EQ(run(parse({"classify", "--m", "1.25", "--q", "0.75"}), out), kExitOk);
    const nlohmann::json j = nlohmann::json::parse(out.str());
    EXPECT_EQ(j["kind"], "sub-extremal");
    EXPECT_NEAR(j["r_plus"].get<double>(), 2.25, 1e-12);
    EXPECT_NEAR(j["r_minus"].get<double>(), 0.25, 1e-12);
    std::ostringstream csv;
    EXPECT_EQ(run(parse({"rn-profile", "--m", "1", "--s-max", "3", "--profile-grid", "31"}), csv), kExitOk);
    const CsvProfile p = parse_profile_csv(csv.str());
    EXPECT_EQ(p.profile.size(), 31u);
    EXPECT_EQ(p.profile.f.front(), 2.0);
    for (double m : p.margins) EXPECT_NEAR(m, 0.0, 1e-9);
}

TEST(Run, ExitCodeMapping) {
    EXPECT_EQ(exit_code_for(PreconditionError("x")), kExitPrecondition);
    EXPECT_EQ(exit_code_for(UsageError("x")), kExitPrecondition);
    EXPECT_EQ(exit_code_for(DomainError("x")), kExitPrecondition);
    EXPECT_EQ(exit_code_for(NotApplicableError("x")), kExitPrecondition);
    EXPECT_EQ(exit_code_for(SurgeryError("x")), kExitSurgery);
    EXPECT_EQ(exit_code_for(VerificationError("x")), kExitVerification);
    EXPECT_EQ(exit_code_for(NumericalError("x")), kExitVerification);
    EXPECT_EQ(exit_code_for(IoError("x")), kExitOther);
    std::ostringstream out, err;
    const char* argv[] = {"rnext", "extend", "--mass", "0.4"};
    EXPECT_EQ(cli_main(4, argv, out, err), kExitPrecondition);
    EXPECT_NE(err.str().find("m_o"), std::string::npos);
}

TEST(Binary, ExtendClassifyAndErrors) {
    if (!std::getenv("RNEXT_CLI")) GTEST_SKIP() << "RNEXT_CLI not set";
    const fs::path dir = scratch("binary");
    const std::string report = (dir / "report.json").string();
    EXPECT_EQ(run_cli("extend --n 2 --r-o 1 --q 0 --lambda 0 --mass 0.55 --out " + report), 0);
    EXPECT_TRUE(fs::exists(dir / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "report.profile.csv"));
    EXPECT_EQ(run_cli("extend --n 2 --r-o 1 --q 0 --lambda 0 --mass 0.4"), 2);
    EXPECT_EQ(run_cli("classify --n 2 --m 1 --q 0 --lambda 0"), 0);
    EXPECT_EQ(run_cli("classify --lambda 0.5"), 2);
    EXPECT_EQ(run_cli("classify --bogus 1"), 2);
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("extend --mass 0.6 --out " + (dir / "missing" / "r.json").string()), 1);
}

TEST(Binary, Selftest) {
    if (!std::getenv("RNEXT_CLI")) GTEST_SKIP() << "RNEXT_CLI not set";
    const fs::path dir = scratch("selftest");
    EXPECT_EQ(run_cli("selftest --out " + (dir / "a.txt").string()), 0);
    EXPECT_EQ(run_cli("selftest --out " + (dir / "b.txt").string()), 0);
    const std::string a = slurp(dir / "a.txt");
    EXPECT_EQ(a, slurp(dir / "b.txt"));
    EXPECT_NE(a.find("# summary pass=12 fail=0 expected_fail=0"), std::string::npos);
    EXPECT_EQ(run_cli("selftest --tol-scale 0.01 --out " + (dir / "c.txt").string()), 0);
    EXPECT_NE(slurp(dir / "c.txt").find("XFAIL"), std::string::npos);
}
