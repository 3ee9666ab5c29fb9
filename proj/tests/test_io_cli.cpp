#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chaoskit/config.hpp>
#include <chaoskit/io.hpp>
#include <chaoskit/kernels.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace chaoskit;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "chaoskit_io_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHAOSKIT_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::vector<std::string> split_crlf(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find("\r\n", pos);
    REQUIRE(nl != std::string::npos);  // every line must end with CRLF
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 2;
  }
  return lines;
}

const std::string kSmallFdConfig =
    "[family]\n"
    "name = FD\n"
    "levels = 3\n"
    "theta = 1.5\n"
    "[run]\n"
    "m = 16\n"
    "samples = 1200\n"
    "seed = 11\n"
    "[assumptions]\n"
    "depth = 3\n"
    "random_configs = 8\n"
    "[verify]\n"
    "suites = interpolation, energy, corollary, uniform, nonvanishing, subspace, density, norris\n"
    "integrands = t, sin-pi-t\n"
    "[sde]\n"
    "fields = elliptic-sine\n"
    "amp = 0.1\n"
    "dim = 2\n"
    "t = 1.0\n";

}  // namespace

// ---------------------------------------------------------------------------
// INI parsing

TEST_CASE("ini parser handles comments, trimming, and duplicate override") {
  std::istringstream in(
      "# leading comment\n"
      "[alpha]\n"
      "  key =  value with spaces  ; trailing comment\n"
      "num = 3\n"
      "num = 4\n"
      "\n"
      "[beta]\n"
      "flag = on\n");
  const IniData data = parse_ini(in);
  REQUIRE(data.count("alpha") == 1);
  REQUIRE(data.count("beta") == 1);
  CHECK(data.at("alpha").at("key") == "value with spaces");
  CHECK(data.at("alpha").at("num") == "4");  // later duplicate wins
  CHECK(data.at("beta").at("flag") == "on");
}

TEST_CASE("ini parser reports the offending line") {
  auto parse_text = [](const std::string& text) {
    std::istringstream in(text);
    return parse_ini(in);
  };
  CHECK_THROWS_WITH_AS(parse_text("[sec\n"), "config line 1: unterminated section", ConfigError);
  CHECK_THROWS_WITH_AS(parse_text("[a]\nnonsense\n"), "config line 2: expected key = value",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_text("key = 1\n"), "config line 1: key before any [section]",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_text("[a]\n = 1\n"), "config line 2: empty key", ConfigError);
  CHECK_THROWS_WITH_AS(parse_text("[]\n"), "config line 1: empty section name", ConfigError);
}

TEST_CASE("experiment config maps every section and rejects unknown keys") {
  std::istringstream in(kSmallFdConfig);
  const ExperimentConfig cfg = experiment_from_ini(parse_ini(in));
  CHECK(cfg.family == "FD");
  CHECK(cfg.levels == 3);
  CHECK(cfg.theta == 1.5);
  CHECK(cfg.m == 16);
  CHECK(cfg.samples == 1200);
  CHECK(cfg.seed == 11);
  CHECK(cfg.assumptions.alpha_depth == 3);
  CHECK(cfg.assumptions.n_random_configs == 8);
  CHECK(cfg.suites.size() == 8);
  CHECK(cfg.integrands == std::vector<std::string>{"t", "sin-pi-t"});
  CHECK(cfg.fields == "elliptic-sine");
  CHECK(cfg.sde_dim == 2);

  auto from_text = [](const std::string& text) {
    std::istringstream s(text);
    return experiment_from_ini(parse_ini(s));
  };
  CHECK_THROWS_WITH_AS(from_text("[family]\nbogus = 1\n"), "unknown config key: family.bogus",
                       ConfigError);
  CHECK_THROWS_WITH_AS(from_text("[mystery]\nx = 1\n"), "unknown config section: [mystery]",
                       ConfigError);
  CHECK_THROWS_AS(from_text("[run]\nm = soon\n"), ConfigError);
}

TEST_CASE("config validation rejects out-of-range values") {
  ExperimentConfig good;
  CHECK_NOTHROW(validate_config(good));
  auto broken = [&](auto mutate) {
    ExperimentConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  };
  broken([](ExperimentConfig& c) { c.m = 17; });
  broken([](ExperimentConfig& c) { c.m = 0; });
  broken([](ExperimentConfig& c) { c.samples = 0; });
  broken([](ExperimentConfig& c) { c.threads = 0; });
  broken([](ExperimentConfig& c) { c.assumptions.alpha_depth = 9; });
  broken([](ExperimentConfig& c) { c.nu = 1.0; });
  broken([](ExperimentConfig& c) { c.epsilons = {}; });
  broken([](ExperimentConfig& c) { c.epsilons = {0.25, 0.5}; });
  broken([](ExperimentConfig& c) { c.epsilons = {0.6, 0.25}; });
  broken([](ExperimentConfig& c) { c.deltas = {0.1, 0.2}; });
  broken([](ExperimentConfig& c) { c.amp = 1.0; });
  broken([](ExperimentConfig& c) { c.sde_t = 0.0; });
  broken([](ExperimentConfig& c) { c.y0 = {1.0, 2.0, 3.0}; });  // sde_dim stays 2
  broken([](ExperimentConfig& c) { c.family = ""; });
}

// ---------------------------------------------------------------------------
// JSON / CSV / SVG

TEST_CASE("tensor JSON round trip preserves every coefficient") {
  SymTensord f(2, 3);
  f.set(MultiIndex::of({1, 2}), 0.25);
  f.set(MultiIndex::of({1, 1}), -1.5);
  f.set(MultiIndex::of({3, 3}), 3.0);
  const json j = tensor_to_json(f);
  CHECK(j.at("order") == 2);
  CHECK(j.at("dim") == 3);
  CHECK(j.at("entries").size() == 3);
  const SymTensord back = tensor_from_json(j);
  SymTensord diff = f;
  diff -= back;
  CHECK(inner(diff, diff) == 0.0);

  CHECK_THROWS_AS(tensor_from_json(json::array()), std::invalid_argument);
  json bad = j;
  bad["entries"].push_back(json::array({std::vector<int>{1}, 1.0}));
  CHECK_THROWS_AS(tensor_from_json(bad), std::invalid_argument);
}

TEST_CASE("custom family loads from JSON nodes and interpolates") {
  SymTensord zero(1, 2);
  SymTensord mid(1, 2);
  mid.set(MultiIndex::of({1}), 0.3);
  SymTensord end(1, 2);
  end.set(MultiIndex::of({1}), 0.5);
  end.set(MultiIndex::of({2}), 0.2);
  json doc{{"theta", 1.2},
           {"nodes", json::array({json{{"t", 0.0}, {"tensor", tensor_to_json(zero)}},
                                  json{{"t", 0.5}, {"tensor", tensor_to_json(mid)}},
                                  json{{"t", 1.0}, {"tensor", tensor_to_json(end)}}})}};
  const std::string path = write_file(work_dir() / "family.json", doc.dump(2) + "\n");
  const KernelFamily fam = load_custom_family(path);
  CHECK(fam.name == "CUSTOM");
  CHECK(fam.order == 1);
  CHECK(fam.dim == 2);
  CHECK(fam.theta == 1.2);
  CHECK(fam.resolution == 0.5);
  // linear interpolation between the 0.5 and 1.0 nodes
  const SymTensord q = fam.at(0.75);
  CHECK(to_coords(q)(0) == Approx(0.4).epsilon(1e-12));
  CHECK(to_coords(q)(1) == Approx(0.1).epsilon(1e-12));

  json bad = doc;
  bad["nodes"][0]["tensor"] = tensor_to_json(mid);  // nonzero at t = 0
  const std::string bad_path = write_file(work_dir() / "family_bad.json", bad.dump());
  CHECK_THROWS_AS(load_custom_family(bad_path), std::invalid_argument);
  CHECK_THROWS_AS(load_custom_family((work_dir() / "missing.json").string()),
                  std::invalid_argument);
}

TEST_CASE("family factory dispatches on the configured name") {
  ExperimentConfig cfg;
  cfg.levels = 2;
  CHECK(make_family(cfg).name == "FD(2,1.500000)");
  cfg.family = "HERM2";
  CHECK(make_family(cfg).order == 2);
  cfg.family = "BLK2";
  CHECK(make_family(cfg).name == "BLK2");
  cfg.family = "NOPE";
  CHECK_THROWS_AS(make_family(cfg), ConfigError);
  cfg.family = "CUSTOM";
  cfg.family_file.clear();
  CHECK_THROWS_AS(make_family(cfg), ConfigError);
}

TEST_CASE("csv quoting follows RFC 4180") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("line\nbreak") == "\"line\nbreak\"");

  const std::string doc = csv_document({"t", "name"}, {{"0.5", "a,b"}, {"1", "c"}});
  CHECK(doc == "t,name\r\n0.5,\"a,b\"\r\n1,c\r\n");
  CHECK_THROWS_AS(csv_document({"a"}, {{"1", "2"}}), std::invalid_argument);
}

TEST_CASE("format_double survives a parse round trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 12345678.9012345, 0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("report JSON dumps with stable alphabetical keys") {
  const KernelFamily fam = make_fd(3, 1.5);
  const auto gs = standard_integrands();
  const auto rep = verify_interpolation(fam, gs[1], 0.5, 16);
  const json j = report_json(rep);
  CHECK(j.at("claim") == "interpolation-inequality");
  const std::string d1 = j.dump(2);
  const std::string d2 = json::parse(d1).dump(2);
  CHECK(d1 == d2);
  // alphabetical key order makes the byte layout reproducible
  CHECK(d1.find("\"beta_used\"") < d1.find("\"case\""));
  CHECK(d1.find("\"case\"") < d1.find("\"claim\""));
}

TEST_CASE("svg chart is deterministic and validates its input") {
  const std::vector<double> xs = {0.0, 0.5, 1.0};
  const std::string a = svg_polyline_chart(xs, {{1.0, 2.0, 1.5}}, {"series"});
  const std::string b = svg_polyline_chart(xs, {{1.0, 2.0, 1.5}}, {"series"});
  CHECK(a == b);
  CHECK(a.find("<polyline") != std::string::npos);
  CHECK(a.find("series") != std::string::npos);
  CHECK_THROWS_AS(svg_polyline_chart(xs, {{1.0, 2.0}}, {"bad"}), std::invalid_argument);
  CHECK_THROWS_AS(svg_polyline_chart(xs, {{1.0, 2.0, 1.5}}, {}), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// CLI binary

TEST_CASE("cli maps usage and config errors to exit 2") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("check") == 2);  // --config missing
  CHECK(run_cli("check --config " + (work_dir() / "absent.ini").string()) == 2);
  const std::string bad_fam =
      write_file(work_dir() / "bad_family.ini", "[family]\nname = NOPE\n");
  CHECK(run_cli("check --config " + bad_fam) == 2);
  const std::string bad_m = write_file(work_dir() / "bad_m.ini", "[family]\nname = FD\n[run]\nm = 17\n");
  CHECK(run_cli("check --config " + bad_m) == 2);
}

TEST_CASE("cli check passes on FD and fails on the degenerate two-block family") {
  const std::string cfg = write_file(work_dir() / "fd.ini", kSmallFdConfig);
  const fs::path out = work_dir() / "check_fd";
  CHECK(run_cli("check --config " + cfg + " --out " + out.string()) == 0);
  const json j = json::parse(slurp(out / "check.json"));
  CHECK(j.at("claim") == "assumptions");
  CHECK(j.at("pass") == true);
  CHECK(j.at("regularity").at("theta_hat").get<double>() == Approx(1.5).epsilon(0.07));
  CHECK(j.at("block_form").at("value").get<double>() > 0.0);

  const std::string blk = write_file(work_dir() / "blk2.ini", "[family]\nname = BLK2\n");
  const fs::path outb = work_dir() / "check_blk2";
  CHECK(run_cli("check --config " + blk + " --out " + outb.string()) == 1);
  const json jb = json::parse(slurp(outb / "check.json"));
  CHECK(jb.at("block_form").at("value") == 0.0);
  CHECK(jb.at("pass") == false);
}

TEST_CASE("cli simulate emits one csv per sample with the path layout") {
  const std::string cfg = write_file(work_dir() / "sim.ini",
                                     "[family]\nname = FD\nlevels = 3\ntheta = 1.5\n"
                                     "[run]\nm = 16\nsamples = 1\nseed = 5\n");
  const fs::path out = work_dir() / "sim_out";
  CHECK(run_cli("simulate --config " + cfg + " --out " + out.string() + " --svg") == 0);
  const KernelFamily fam = make_fd(3, 1.5);
  const auto lines = split_crlf(slurp(out / "path_0.csv"));
  REQUIRE(lines.size() == 18);  // header + m + 1 data rows
  std::string header = "t,X";
  for (int j = 1; j <= fam.dim; ++j) header += ",DX_" + std::to_string(j);
  CHECK(lines[0] == header);
  // first data row sits at t = 0 where the process starts from zero
  CHECK(lines[1].rfind("0,0,", 0) == 0);
  CHECK(fs::exists(out / "path_0.svg"));
  CHECK_FALSE(fs::exists(out / "path_1.csv"));

  // column count matches the header everywhere
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto commas = static_cast<std::size_t>(std::count(lines[i].begin(), lines[i].end(), ','));
    CHECK(commas == 1 + static_cast<std::size_t>(fam.dim));
  }
}

TEST_CASE("cli artifacts are byte-identical across thread counts") {
  const std::string cfg = write_file(work_dir() / "det.ini", kSmallFdConfig);
  const fs::path o1 = work_dir() / "det_t1";
  const fs::path o8 = work_dir() / "det_t8";
  CHECK(run_cli("verify --config " + cfg + " --threads 1 --out " + o1.string()) == 0);
  CHECK(run_cli("verify --config " + cfg + " --threads 8 --out " + o8.string()) == 0);
  CHECK(slurp(o1 / "verify.json") == slurp(o8 / "verify.json"));

  CHECK(run_cli("sde --config " + cfg + " --threads 1 --out " + o1.string()) == 0);
  CHECK(run_cli("sde --config " + cfg + " --threads 8 --out " + o8.string()) == 0);
  CHECK(slurp(o1 / "sde.json") == slurp(o8 / "sde.json"));

  const json v = json::parse(slurp(o1 / "verify.json"));
  CHECK(v.at("pass") == true);
  CHECK(v.at("suites").at("interpolation").size() == 2);
  CHECK(v.at("suites").at("norris").at("claim") == "roughness-bound");
}

TEST_CASE("cli seed override changes the sampled artifacts") {
  const std::string cfg = write_file(work_dir() / "seeds.ini",
                                     "[family]\nname = FD\nlevels = 3\ntheta = 1.5\n"
                                     "[run]\nm = 16\nsamples = 1\nseed = 5\n");
  const fs::path oa = work_dir() / "seed_a";
  const fs::path ob = work_dir() / "seed_b";
  const fs::path oc = work_dir() / "seed_c";
  CHECK(run_cli("simulate --config " + cfg + " --out " + oa.string()) == 0);
  CHECK(run_cli("simulate --config " + cfg + " --out " + ob.string()) == 0);
  CHECK(run_cli("simulate --config " + cfg + " --seed 77 --out " + oc.string()) == 0);
  CHECK(slurp(oa / "path_0.csv") == slurp(ob / "path_0.csv"));
  CHECK(slurp(oa / "path_0.csv") != slurp(oc / "path_0.csv"));
}
