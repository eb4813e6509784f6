#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>

#include "mh/closedform.hpp"

namespace fs = std::filesystem;

namespace {

fs::path binary() { return fs::path(MH_BIN); }
fs::path config_dir() { return fs::path(MH_CONFIG_DIR); }
fs::path golden_dir() { return fs::path(MH_GOLDEN_DIR); }

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "mh_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Runs the binary with the given argument string; stdout and stderr land in
// files under dir so expected failures stay quiet.
int run_tool(const std::string& args, const fs::path& dir,
             const std::string& tag = "run") {
  std::string cmd = "\"" + binary().string() + "\" " + args + " > \"" +
                    (dir / (tag + ".out")).string() + "\" 2> \"" +
                    (dir / (tag + ".err")).string() + "\"";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -1;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE_MESSAGE(is.good(), "missing file: " << p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  REQUIRE(os.good());
}

// Splits on newlines, strips carriage returns, drops the trailing empty
// piece that a final line terminator produces.
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  REQUIRE(line.find('"') == std::string::npos);
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Keyed view of a metrics table: (param, metric) -> value text.
class Report {
 public:
  explicit Report(const fs::path& csv) {
    auto lines = lines_of(read_file(csv));
    REQUIRE(!lines.empty());
    CHECK(lines[0] == "experiment,config_hash,seed,param,metric,value");
    for (size_t i = 1; i < lines.size(); ++i) {
      auto f = fields_of(lines[i]);
      REQUIRE(f.size() == 6);
      rows_[{f[3], f[4]}] = f[5];
      seeds_.push_back(f[2]);
    }
  }

  bool has(const std::string& param, const std::string& metric) const {
    return rows_.count({param, metric}) > 0;
  }

  double num(const std::string& param, const std::string& metric) const {
    auto it = rows_.find({param, metric});
    REQUIRE_MESSAGE(it != rows_.end(), "no row " << param << "/" << metric);
    return std::stod(it->second);
  }

  const std::vector<std::string>& seeds() const { return seeds_; }

 private:
  std::map<std::pair<std::string, std::string>, std::string> rows_;
  std::vector<std::string> seeds_;
};

std::string cfg(const std::string& name) {
  return "--config \"" + (config_dir() / name).string() + "\"";
}

}  // namespace

TEST_CASE("phi subcommand prints the exact rational table") {
  fs::path d = fresh_dir("phi");
  CHECK(run_tool("phi --order 3", d) == 0);
  std::string out = read_file(d / "run.out");
  CHECK(out.find("Phi(0) = 1\n") != std::string::npos);
  CHECK(out.find("Phi(1) = 3\n") != std::string::npos);
  CHECK(out.find("Phi(2) = 49/12\n") != std::string::npos);
  CHECK(out.find("Phi(3) = 197/36\n") != std::string::npos);
}

TEST_CASE("cancellation subcommand reports exact zero diagonals") {
  fs::path d = fresh_dir("cancel");
  CHECK(run_tool("cancel-verify --order 3", d) == 0);
  std::string out = read_file(d / "run.out");
  CHECK(out.find("diagonal 0: exact zero") != std::string::npos);
  CHECK(out.find("diagonal 3: exact zero") != std::string::npos);
  CHECK(out.find("cancellation holds through diagonal 3") != std::string::npos);
}

TEST_CASE("dump output matches the golden monomial listings") {
  fs::path d = fresh_dir("dump");
  for (int n = 0; n <= 4; ++n) {
    fs::path golden = golden_dir() / ("dump_" + std::to_string(n) + ".txt");
    REQUIRE_MESSAGE(fs::exists(golden), "expected golden file " << golden.string());
    CHECK(run_tool("dump --order " + std::to_string(n), d,
                   "dump" + std::to_string(n)) == 0);
    CHECK(read_file(d / ("dump" + std::to_string(n) + ".out")) ==
          read_file(golden));
  }
}

TEST_CASE("simulate writes trajectory artifacts with shrinking oscillations") {
  fs::path d = fresh_dir("simulate_logcosh");
  CHECK(run_tool("simulate " + cfg("simulate_logcosh.cfg") + " --out \"" +
                     d.string() + "\"",
                 d) == 0);

  auto traj = lines_of(read_file(d / "trajectory.csv"));
  REQUIRE(traj.size() == 1002);
  CHECK(traj[0] == "step,p_0,q_0,H");
  CHECK(fields_of(traj[1])[0] == "0");

  auto values = lines_of(read_file(d / "mh_values.csv"));
  REQUIRE(values.size() == 1002);
  CHECK(values[0] == "step,H,mh_0,mh_1,mh_2,mh_3");

  Report report(d / "simulate_report.csv");
  double pp0 = report.num("N=0", "peak_to_peak");
  double pp1 = report.num("N=1", "peak_to_peak");
  double pp2 = report.num("N=2", "peak_to_peak");
  double pp3 = report.num("N=3", "peak_to_peak");
  CHECK(pp0 > pp1);
  CHECK(pp1 > pp2);
  CHECK(pp2 > pp3);
  CHECK(pp3 > 0.0);

  std::string svg = read_file(d / "mh_orders.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
}

TEST_CASE("simulate quadratic keeps the closed-form trace flat and reruns byte-identically") {
  fs::path d1 = fresh_dir("simulate_quad_1");
  fs::path d2 = fresh_dir("simulate_quad_2");
  std::string args = "simulate " + cfg("simulate_quadratic.cfg") + " --out \"";
  CHECK(run_tool(args + d1.string() + "\"", d1) == 0);
  CHECK(run_tool(args + d2.string() + "\"", d2) == 0);

  auto values = lines_of(read_file(d1 / "mh_values.csv"));
  CHECK(values[0] == "step,H,mh_0,mh_1,mh_closed");

  Report report(d1 / "simulate_report.csv");
  CHECK(report.num("closed", "max_rel_drift") <= 1e-9);
  CHECK(report.num("N=0", "peak_to_peak") > report.num("closed", "peak_to_peak"));

  CHECK(read_file(d1 / "trajectory.csv") == read_file(d2 / "trajectory.csv"));
  CHECK(read_file(d1 / "mh_values.csv") == read_file(d2 / "mh_values.csv"));
  CHECK(read_file(d1 / "simulate_report.csv") ==
        read_file(d2 / "simulate_report.csv"));
}

TEST_CASE("simulate with zero steps emits header-only tables") {
  fs::path d = fresh_dir("simulate_empty");
  write_text(d / "empty.cfg",
             "experiment = simulate\n"
             "[hamiltonian]\n"
             "kind = quadratic\n"
             "dim = 1\n"
             "[simulate]\n"
             "z0 = 1, 0\n"
             "eta = 0.1\n"
             "steps = 0\n");
  CHECK(run_tool("simulate --config \"" + (d / "empty.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d) == 0);
  CHECK(read_file(d / "trajectory.csv") == "step,p_0,q_0,H\r\n");
  CHECK(read_file(d / "mh_values.csv") == "step,H,mh_closed\r\n");
}

TEST_CASE("order sweep flags rounding-limited fits instead of reporting them") {
  fs::path d = fresh_dir("sweep_quadratic");
  CHECK(run_tool("order-sweep " + cfg("order_sweep_quadratic.cfg") +
                     " --out \"" + d.string() + "\"",
                 d) == 0);
  Report report(d / "order_sweep_report.csv");
  CHECK(report.num("N=12", "degenerate_fit") == 1.0);
  CHECK_FALSE(report.has("N=12", "slope"));
  CHECK(report.num("N=0", "degenerate_fit") == 0.0);
  double s0 = report.num("N=0", "slope");
  CHECK(s0 >= 0.7);
  CHECK(s0 <= 1.3);
  CHECK(report.num("N=0", "phi_bound") == 1.0);
  CHECK(fs::exists(d / "order_sweep.svg"));
}

TEST_CASE("order sweep report is independent of the worker count") {
  fs::path d1 = fresh_dir("sweep_jobs_1");
  fs::path d2 = fresh_dir("sweep_jobs_2");
  std::string base = "order-sweep " + cfg("order_sweep_quadratic.cfg");
  CHECK(run_tool(base + " --jobs 1 --out \"" + d1.string() + "\"", d1) == 0);
  CHECK(run_tool(base + " --jobs 2 --out \"" + d2.string() + "\"", d2) == 0);
  CHECK(read_file(d1 / "order_sweep_report.csv") ==
        read_file(d2 / "order_sweep_report.csv"));
}

TEST_CASE("order sweep emits a finite fit for every truncation order") {
  fs::path d = fresh_dir("sweep_logcosh");
  CHECK(run_tool("order-sweep " + cfg("order_sweep_logcosh.cfg") + " --out \"" +
                     d.string() + "\"",
                 d) == 0);
  Report report(d / "order_sweep_report.csv");
  for (int n = 0; n <= 3; ++n) {
    std::string param = "N=" + std::to_string(n);
    CHECK(report.num(param, "degenerate_fit") == 0.0);
    CHECK(std::isfinite(report.num(param, "slope")));
    CHECK(std::isfinite(report.num(param, "intercept")));
    CHECK(report.num(param, "phi_hat") > 0.0);
  }
  CHECK(fs::exists(d / "order_sweep.svg"));
}

TEST_CASE("sweep slopes land in the pinned stepsize-power windows") {
  fs::path d = fresh_dir("sweep_logcosh_windows");
  CHECK(run_tool("order-sweep " + cfg("order_sweep_logcosh.cfg") + " --out \"" +
                     d.string() + "\"",
                 d) == 0);
  Report report(d / "order_sweep_report.csv");
  double s0 = report.num("N=0", "slope");
  CHECK_MESSAGE(s0 >= 1.7, "measured slope " << s0);
  CHECK_MESSAGE(s0 <= 2.3, "measured slope " << s0);
  double s3 = report.num("N=3", "slope");
  CHECK_MESSAGE(s3 >= 4.7, "measured slope " << s3);
  CHECK_MESSAGE(s3 <= 5.3, "measured slope " << s3);
}

TEST_CASE("regret run satisfies the exact identities and the decay schedule") {
  fs::path d = fresh_dir("regret");
  CHECK(run_tool("regret " + cfg("regret_weighted_cycle.cfg") + " --out \"" +
                     d.string() + "\"",
                 d) == 0);
  Report report(d / "regret_report.csv");
  std::vector<long> grid{100, 1000, 10000};
  double prev_gap = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    std::string param = "K=" + std::to_string(grid[i]);
    CHECK(report.num(param, "gap_regret_residual") <= 1e-9);
    CHECK(report.num(param, "conjugacy_residual") <= 1e-10);
    double gap = report.num(param, "avg_gap");
    CHECK(gap > 0.0);
    if (i > 0) CHECK(gap < prev_gap);
    prev_gap = gap;
    CHECK(fs::exists(d / ("regret_K" + std::to_string(grid[i]) + ".csv")));
  }
  CHECK(report.num("schedule", "gap_slope") <= -0.55);

  auto k100 = lines_of(read_file(d / "regret_K100.csv"));
  REQUIRE(k100.size() == 102);
  CHECK(k100[0] ==
        "step,a_0,a_1,a_2,b_0,b_1,b_2,x_0,x_1,x_2,y_0,y_1,y_2,gap,running_avg_gap");
  CHECK(fs::exists(d / "gap_vs_k.svg"));
}

TEST_CASE("quad-mh samples the scalar profile over the stepsize grid") {
  fs::path d = fresh_dir("quad_mh");
  CHECK(run_tool("quad-mh " + cfg("quad_mh.cfg") + " --seed 42 --out \"" +
                     d.string() + "\"",
                 d) == 0);
  auto rows = lines_of(read_file(d / "quad_mh.csv"));
  REQUIRE(rows.size() == 182);
  CHECK(rows[0] == "eta,t");
  CHECK(rows[1] == "0,1");
  double prev = 0.0;
  for (size_t i = 1; i < rows.size(); ++i) {
    double t = std::stod(fields_of(rows[i])[1]);
    CHECK(t >= prev);
    prev = t;
  }
  double t_last = std::stod(fields_of(rows.back())[1]);
  CHECK(t_last == doctest::Approx(mh::closedform::t_function(0.9, 1.0)).epsilon(1e-12));

  Report report(d / "quad_mh_report.csv");
  CHECK(report.num("grid", "t_at_eta_max") == doctest::Approx(t_last).epsilon(1e-15));
  for (const auto& s : report.seeds()) CHECK(s == "42");
  CHECK(fs::exists(d / "quad_mh.svg"));
}

TEST_CASE("examples orbit stays in its declared box and closes periodically") {
  fs::path d = fresh_dir("examples_fig");
  CHECK(run_tool("examples-fig " + cfg("examples_fig.cfg") + " --out \"" +
                     d.string() + "\"",
                 d) == 0);
  auto rows = lines_of(read_file(d / "orbits.csv"));
  REQUIRE(rows.size() == 10002);
  CHECK(rows[0] == "start,step,p,q,H");
  auto row0 = fields_of(rows[1]);
  auto row6 = fields_of(rows[7]);
  CHECK(row0[2] == "1");
  CHECK(row0[3] == "1");
  CHECK(row6[2] == row0[2]);
  CHECK(row6[3] == row0[3]);

  Report report(d / "examples_report.csv");
  CHECK(report.num("start0", "bounded") == 1.0);
  CHECK(report.num("start0", "max_radius") <= 10.0);
  CHECK(fs::exists(d / "orbits.svg"));
}

TEST_CASE("examples run fails loudly when an orbit leaves the box") {
  fs::path d = fresh_dir("examples_unbounded");
  write_text(d / "tight.cfg",
             "experiment = examples-fig\n"
             "[fig]\n"
             "power = 2\n"
             "eta = 1\n"
             "steps = 100\n"
             "starts = 1, 1\n"
             "box_radius = 0.5\n");
  CHECK(run_tool("examples-fig --config \"" + (d / "tight.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d) == 1);
  Report report(d / "examples_report.csv");
  CHECK(report.num("start0", "bounded") == 0.0);
}

TEST_CASE("examples with a single step emits exactly two points") {
  fs::path d = fresh_dir("examples_single");
  write_text(d / "single.cfg",
             "experiment = examples-fig\n"
             "[fig]\n"
             "power = 2\n"
             "eta = 1\n"
             "steps = 1\n"
             "starts = 1, 1\n"
             "box_radius = 10\n");
  CHECK(run_tool("examples-fig --config \"" + (d / "single.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d) == 0);
  auto rows = lines_of(read_file(d / "orbits.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(fields_of(rows[1])[1] == "0");
  CHECK(fields_of(rows[2])[1] == "1");
}

TEST_CASE("misuse is reported through the config exit status") {
  fs::path d = fresh_dir("misuse");

  CHECK(run_tool("bogus-subcommand", d, "unknown") == 2);
  CHECK(run_tool("", d, "nosub") == 2);
  CHECK(run_tool("simulate", d, "noconfig") == 2);
  CHECK(run_tool("--help", d, "help") == 0);

  CHECK(run_tool("simulate " + cfg("regret_weighted_cycle.cfg") + " --out \"" +
                     d.string() + "\"",
                 d, "mismatch") == 2);

  CHECK(run_tool("simulate --config \"" + (d / "missing.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d, "missing") == 2);

  write_text(d / "typo.cfg",
             "experiment = simulate\n"
             "[hamiltonian]\n"
             "kind = quadratic\n"
             "[simulate]\n"
             "z0 = 1, 0\n"
             "eta = 0.1\n"
             "steps = 10\n"
             "stepz = 10\n");
  CHECK(run_tool("simulate --config \"" + (d / "typo.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d, "typo") == 2);

  write_text(d / "negative.cfg",
             "experiment = simulate\n"
             "[hamiltonian]\n"
             "kind = quadratic\n"
             "[simulate]\n"
             "z0 = 1, 0\n"
             "eta = 0.1\n"
             "steps = -5\n");
  CHECK(run_tool("simulate --config \"" + (d / "negative.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d, "negative") == 2);

  write_text(d / "short.cfg",
             "experiment = order-sweep\n"
             "[hamiltonian]\n"
             "kind = logcosh\n"
             "[sweep]\n"
             "z0 = 1, 1\n"
             "etas = 0.1, 0.2\n"
             "steps = 10\n");
  CHECK(run_tool("order-sweep --config \"" + (d / "short.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d, "short") == 2);

  write_text(d / "radius.cfg",
             "experiment = quad-mh\n"
             "[quad]\n"
             "a = 1\n"
             "b = 1\n"
             "eta_max = 1.2\n");
  CHECK(run_tool("quad-mh --config \"" + (d / "radius.cfg").string() +
                     "\" --out \"" + d.string() + "\"",
                 d, "radius") == 2);
}

TEST_CASE("combinatorics verification prints a full pass table") {
  fs::path d = fresh_dir("comb");
  CHECK(run_tool("combinatorics-verify", d) == 0);
  std::string out = read_file(d / "run.out");
  CHECK(out.find("FAIL") == std::string::npos);
  CHECK(out.find("all checks passed") != std::string::npos);
  CHECK(out.find("quartic alternating bracket growth") != std::string::npos);
}
