#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hypoelim-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CliResult cli(const std::string& args, const std::string& env = "") {
        const fs::path out = dir_ / "stdout.txt";
        const fs::path err = dir_ / "stderr.txt";
        const std::string command = env + " " HYPOELIM_CLI_PATH " " + args + " >" + out.string() + " 2>" +
                                    err.string();
        const int status = std::system(command.c_str());
        CliResult r;
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path benchmark_instance(const std::string& family = "normal") {
        const fs::path p = path("inst-" + family + ".json");
        const auto r = cli("gen --hypotheses 16 --family " + family + " --seed 42 --out " + p.string());
        EXPECT_EQ(r.exit_code, 0) << r.err;
        return p;
    }

private:
    fs::path dir_;
};

TEST_F(CliTest, GenWritesSeventeenActions) {
    const auto p = benchmark_instance();
    const auto doc = nlohmann::json::parse(slurp(p));
    EXPECT_EQ(doc["actions"].size(), 17u);
    EXPECT_EQ(doc["hypotheses"], 16);
}

TEST_F(CliTest, GenIsByteIdentical) {
    const auto a = path("a.json"), b = path("b.json");
    ASSERT_EQ(cli("gen --hypotheses 16 --family exponential --seed 7 --out " + a.string()).exit_code, 0);
    ASSERT_EQ(cli("gen --hypotheses 16 --family exponential --seed 7 --out " + b.string()).exit_code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(CliTest, GenUsageErrors) {
    EXPECT_EQ(cli("gen --hypotheses 1 --family normal --seed 1 --out " + path("x.json").string()).exit_code, 2);
    EXPECT_EQ(cli("gen --hypotheses 4 --family poisson --seed 1 --out " + path("x.json").string()).exit_code, 2);
    EXPECT_EQ(cli("gen --hypotheses 4 --family normal --seed 1 --out /nonexistent-dir/x.json").exit_code, 2);
    EXPECT_EQ(cli("gen --family normal").exit_code, 2);
    EXPECT_EQ(cli("").exit_code, 2);
    EXPECT_EQ(cli("frobnicate").exit_code, 2);
}

TEST_F(CliTest, VerifyBenchmarkInstance) {
    const auto r = cli("verify " + benchmark_instance().string());
    EXPECT_EQ(r.exit_code, 0);
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_TRUE(doc["a1_holds"].get<bool>());
    EXPECT_TRUE(doc["a3_holds"].get<bool>());
}

TEST_F(CliTest, VerifyDuplicatedHypothesis) {
    auto doc = nlohmann::json::parse(slurp(benchmark_instance()));
    for (auto& action : doc["actions"]) action["params"][5] = action["params"][3];
    const auto p = path("dup.json");
    std::ofstream(p) << doc.dump();
    const auto r = cli("verify " + p.string());
    EXPECT_EQ(r.exit_code, 1);
    const auto report = nlohmann::json::parse(r.out);
    EXPECT_FALSE(report["a3_holds"].get<bool>());
    EXPECT_EQ(report["violating_pairs"], nlohmann::json::parse("[[3,5]]"));
}

TEST_F(CliTest, VerifyMalformed) {
    const auto p = path("bad.json");
    std::ofstream(p) << "{ not json";
    EXPECT_EQ(cli("verify " + p.string()).exit_code, 2);
    std::ofstream(path("schema.json")) << R"({"hypotheses": 2})";
    EXPECT_EQ(cli("verify " + path("schema.json").string()).exit_code, 2);
    EXPECT_EQ(cli("verify " + path("missing.json").string()).exit_code, 2);
}

TEST_F(CliTest, RunPrintsOneResultLine) {
    const auto r = cli("run " + benchmark_instance().string() + " --algo elim --delta 1e-3 --epsilon 0.1 --seed 7");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    std::vector<std::string> all;
    while (std::getline(lines, line)) all.push_back(line);
    ASSERT_EQ(all.size(), 1u);
    const auto doc = nlohmann::json::parse(all[0]);
    EXPECT_EQ(doc["algorithm"], "elimination");
    EXPECT_GE(doc["total_samples"].get<int>(), 1);
    EXPECT_TRUE(doc.contains("declared"));
    EXPECT_TRUE(doc.contains("correct"));
}

TEST_F(CliTest, RunIsDeterministic) {
    const auto inst = benchmark_instance().string();
    EXPECT_EQ(cli("run " + inst + " --epsilon 0.1 --seed 3").out, cli("run " + inst + " --epsilon 0.1 --seed 3").out);
}

TEST_F(CliTest, RunTraceAddsStageLines) {
    const auto inst = benchmark_instance().string();
    const auto r = cli("run " + inst + " --algo elim --delta 1e-2 --epsilon 0.1 --seed 11 --trace");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    std::vector<nlohmann::json> docs;
    while (std::getline(lines, line)) docs.push_back(nlohmann::json::parse(line));
    ASSERT_GE(docs.size(), 2u);
    const auto& result = docs.back();
    EXPECT_EQ(docs.size() - 1, result["stages"].get<std::size_t>());
    for (std::size_t r = 0; r + 1 < docs.size(); ++r) {
        EXPECT_EQ(docs[r]["stage"], r + 1);
        for (const char* key : {"action", "tau", "winner", "alive_before", "alive_after"}) {
            EXPECT_TRUE(docs[r].contains(key)) << key;
        }
    }
}

TEST_F(CliTest, RunGjl) {
    const auto r = cli("run " + benchmark_instance().string() + " --algo gjl --delta 0.1 --seed 1");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["algorithm"], "gjl_as_described");
}

TEST_F(CliTest, RunHugeEpsilonHasNoSeparatingAction) {
    const auto r = cli("run " + benchmark_instance().string() + " --epsilon 1000 --seed 1");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("no separating action"), std::string::npos) << r.err;
}

TEST_F(CliTest, RunOverrunExitsThree) {
    // Two hypotheses 1e-3 apart cannot be told apart in 10 samples.
    const auto p = path("close.json");
    std::ofstream(p) << R"({"hypotheses":2,"priors":[0.5,0.5],
        "actions":[{"family":"normal_unit_variance","params":[[0.0],[0.001]]}]})";
    const auto r = cli("run " + p.string() + " --delta 1e-3 --seed 1 --max-samples-per-stage 10");
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_NE(r.err.find("overrun"), std::string::npos) << r.err;
}

TEST_F(CliTest, RunBadFlags) {
    const auto inst = benchmark_instance().string();
    EXPECT_EQ(cli("run " + inst + " --algo ucb").exit_code, 2);
    EXPECT_EQ(cli("run " + inst + " --delta 2").exit_code, 2);
    EXPECT_EQ(cli("run " + inst + " --epsilon -1").exit_code, 2);
    EXPECT_EQ(cli("run " + inst + " --delta abc").exit_code, 2);
}

TEST_F(CliTest, SweepWritesNineRows) {
    const auto inst = benchmark_instance().string();
    const auto csv = path("sweep.csv");
    const auto r = cli("sweep " + inst + " --epsilon 0 --epsilon 0.1 --gjl --delta 0.1,0.01,0.001 --trials 50 "
                       "--gjl-trials 2 --seed 42 --out " + csv.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "algorithm,family,delta,epsilon,trials,errors,p_e_hat,p_e_wilson_upper,mean_n,stderr_n,abr,capped");
    int rows = 0;
    while (std::getline(in, line)) rows += !line.empty();
    EXPECT_EQ(rows, 9);
    EXPECT_NE(r.out.find("ordering"), std::string::npos);

    const auto again = cli("sweep " + inst + " --epsilon 0 --delta 0.1 --out " + csv.string());
    EXPECT_EQ(again.exit_code, 2);
    EXPECT_NE(again.err.find("--force"), std::string::npos);

    const auto report = cli("report " + csv.string());
    EXPECT_EQ(report.exit_code, 0);
    EXPECT_NE(report.out.find("delta=0.001"), std::string::npos);
}

TEST_F(CliTest, SweepConfigFileAndWorkersEnv) {
    const auto inst = benchmark_instance().string();
    const auto cfg = path("cfg.json");
    std::ofstream(cfg) << R"({"algorithms":[{"kind":"elim","epsilon":0.1}],"delta_grid":[0.1,0.01],
                             "trials_per_cell":200,"master_seed":5})";
    const auto a = path("a.csv"), b = path("b.csv");
    ASSERT_EQ(cli("sweep " + inst + " --config " + cfg.string() + " --out " + a.string(), "HYPOELIM_WORKERS=1")
                  .exit_code,
              0);
    ASSERT_EQ(cli("sweep " + inst + " --config " + cfg.string() + " --workers 3 --out " + b.string()).exit_code, 0);
    EXPECT_EQ(slurp(a), slurp(b));

    std::ofstream(path("bad.json")) << R"({"algorithms":[{"kind":"ucb"}]})";
    EXPECT_EQ(cli("sweep " + inst + " --config " + path("bad.json").string() + " --out " + path("c.csv").string())
                  .exit_code,
              2);
    EXPECT_EQ(cli("sweep " + inst + " --epsilon 0 --delta 0.01,0.1 --out " + path("d.csv").string()).exit_code, 2);
}

TEST_F(CliTest, SweepWarnsAboutBadEpsilon) {
    const auto inst = benchmark_instance("exponential").string();
    const auto r = cli("sweep " + inst + " --epsilon 0.1 --delta 0.1 --trials 20 --out " + path("e.csv").string());
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, ReportRejectsForeignCsv) {
    std::ofstream(path("x.csv")) << "a,b,c\n1,2,3\n";
    EXPECT_EQ(cli("report " + path("x.csv").string()).exit_code, 2);
}

}  // namespace
