#include "catch2/catch_amalgamated.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "hardycert/report.hpp"

using namespace hardycert;

namespace {

const char* kFlatPLessQ = R"({
  "p": 2.0, "q": 3.0, "dims": 2,
  "grid": {"x_min": 1e-2, "x_max": 1e2, "nodes_per_axis": 25, "spacing": "log"},
  "weight_v": {"kind": "power", "exponents": [0.0, 0.0]},
  "weight_w": {"kind": "power", "exponents": [0.0, 0.0]}
})";

const char* kPowerQLessP = R"({
  "p": 3.0, "q": 2.0, "dims": 2, "iters": 60, "seed": 7,
  "grid": {"x_min": 1e-3, "x_max": 1e3, "nodes_per_axis": 25, "spacing": "log"},
  "weight_v": {"kind": "power", "exponents": [0.5, 0.5]},
  "weight_w": {"kind": "power", "exponents": [-2.5, -2.5]}
})";

std::string config_error_field(const std::string& text) {
	try {
		RunConfig::from_text(text);
	} catch (const ConfigError& e) {
		return e.field();
	}
	return "";
}

const FunctionalValue* find(const std::vector<FunctionalValue>& fs, const std::string& name) {
	for (const auto& f : fs)
		if (f.name == name) return &f;
	return nullptr;
}

std::vector<std::string> split(const std::string& line, char sep) {
	std::vector<std::string> out;
	std::string cur;
	for (char ch : line) {
		if (ch == sep) {
			out.push_back(cur);
			cur.clear();
		} else {
			cur += ch;
		}
	}
	out.push_back(cur);
	return out;
}

std::vector<std::string> lines_of(const std::string& text) {
	std::vector<std::string> out;
	std::istringstream in(text);
	std::string line;
	while (std::getline(in, line)) out.push_back(line);
	return out;
}

// -- subprocess helpers (skipped unless the driver binary path is exported) --

std::string cli_bin() {
	const char* s = std::getenv("HARDYCERT_CLI_BIN");
	return s ? s : "";
}

int run_cli(const std::string& args) {
	const std::string cmd = cli_bin() + " " + args;
	const int st = std::system(cmd.c_str());
	return st == -1 ? -1 : WEXITSTATUS(st);
}

std::string temp_path(const std::string& stem) {
	return "/tmp/hardycert_" + std::to_string(getpid()) + "_" + stem;
}

void write_file(const std::string& path, const std::string& text) {
	std::ofstream out(path);
	out << text;
}

std::string slurp(const std::string& path) {
	std::ifstream in(path);
	std::ostringstream text;
	text << in.rdbuf();
	return text.str();
}

}  // namespace

TEST_CASE("run configurations parse every field", "[cli]") {
	const RunConfig c = RunConfig::from_text(R"({
	  "p": 2.5, "q": 1.5, "dims": 3, "iters": 17, "starts": 2, "tol": 1e-7, "seed": 99,
	  "grid": {"x_min": 0.5, "x_max": 8.0, "nodes_per_axis": 9, "spacing": "linear"},
	  "weight_v": {"kind": "power", "c": 2.0, "exponents": [0.5, 0.0, -0.5]},
	  "weight_w": {"kind": "factorized", "factors": [
	    {"edges": [1.0], "coef": [1.0, 2.0], "expo": [0.0, -3.0]},
	    {"coef": [1.0], "expo": [-2.0]},
	    {"coef": [0.5], "expo": [0.0]}]},
	  "deltas": [0.9, 0.3], "functionals": ["AMn", "AT3"]
	})");
	CHECK(c.p == 2.5);
	CHECK(c.q == 1.5);
	CHECK(c.dims == 3);
	CHECK(c.iters == 17);
	CHECK(c.starts == 2);
	CHECK(c.tol == 1e-7);
	CHECK(c.seed == 99);
	CHECK(c.grid.x_min == 0.5);
	CHECK(c.grid.x_max == 8.0);
	CHECK(c.grid.nodes_per_axis == 9);
	CHECK(c.grid.spacing == "linear");
	CHECK(c.weight_v.kind == WeightKind::Power);
	CHECK(c.weight_v.c == 2.0);
	CHECK(c.weight_w.kind == WeightKind::Factorized);
	CHECK(c.weight_w.factors.size() == 3);
	CHECK(c.deltas == std::vector<double>{0.9, 0.3});
	REQUIRE(c.functionals.has_value());
	// the generic spelling is pinned to the configured dimension
	CHECK(*c.functionals == std::vector<std::string>{"AM3", "AT3"});
}

TEST_CASE("configuration errors name the offending field", "[cli]") {
	const char* base = R"({"p": 2, "q": 3,
	  "weight_v": {"kind": "power", "exponents": [0, 0]},
	  "weight_w": {"kind": "power", "exponents": [0, 0]}%s})";
	auto with = [&](const std::string& extra) {
		char buf[4096];
		std::snprintf(buf, sizeof(buf), base, extra.c_str());
		return std::string(buf);
	};
	CHECK(config_error_field(with("")).empty());
	CHECK(config_error_field("{bad") == "json");
	CHECK(config_error_field("[1,2]") == "json");
	CHECK(config_error_field(R"({"q": 3})") == "p");
	CHECK(config_error_field(R"({"p": 1.0, "q": 3})") == "p");
	CHECK(config_error_field(R"({"p": 2, "q": "three"})") == "q");
	CHECK(config_error_field(with(R"(, "dims": 5)")) == "dims");
	CHECK(config_error_field(with(R"(, "grid": {"nodes_per_axis": 7})")) == "grid.nodes_per_axis");
	CHECK(config_error_field(with(R"(, "grid": {"spacing": "cubic"})")) == "grid.spacing");
	CHECK(config_error_field(with(R"(, "grid": {"x_min": 2.0, "x_max": 1.0})")) == "grid.x_max");
	CHECK(config_error_field(with(R"(, "grid": {"x_min": -1.0})")) == "grid.x_min");
	CHECK(config_error_field(with(R"(, "grid": {"cells": 3})")) == "grid.cells");
	CHECK(config_error_field(with(R"(, "mystery": 1)")) == "mystery");
	CHECK(config_error_field(with(R"(, "seed": -4)")) == "seed");
	CHECK(config_error_field(with(R"(, "iters": 0)")) == "iters");
	CHECK(config_error_field(with(R"(, "starts": -1)")) == "starts");
	CHECK(config_error_field(with(R"(, "tol": 0.0)")) == "tol");
	CHECK(config_error_field(with(R"(, "deltas": [0.3, 0.5])")) == "deltas");
	CHECK(config_error_field(with(R"(, "deltas": [1.5])")) == "deltas");
	CHECK(config_error_field(with(R"(, "s1": 1.5)")) == "s1");
	CHECK(config_error_field(with(R"(, "s1": 2.0, "s2": 1.5)")) == "s1");
	CHECK(config_error_field(with(R"(, "functionals": ["XX"])")) == "functionals");
	CHECK(config_error_field(R"({"p": 2, "q": 3, "weight_w": {"kind": "power", "exponents": [0, 0]}})") ==
	      "weight_v");
	CHECK(config_error_field(R"({"p": 2, "q": 3,
	  "weight_v": {"kind": "soup"},
	  "weight_w": {"kind": "power", "exponents": [0, 0]}})") == "weight_v.kind");
	CHECK(config_error_field(R"({"p": 2, "q": 3,
	  "weight_v": {"kind": "power", "c": -1.0, "exponents": [0, 0]},
	  "weight_w": {"kind": "power", "exponents": [0, 0]}})") == "weight_v.c");
	CHECK(config_error_field(R"({"p": 2, "q": 3,
	  "weight_v": {"kind": "power", "exponents": [0, 0]},
	  "weight_w": {"kind": "table", "values": [1.0, -1.0]}})") == "weight_w.values");
	CHECK(config_error_field(R"({"p": 2, "q": 3,
	  "weight_v": {"kind": "factorized", "factors": [{"edges": [2.0, 1.0]}, {}]},
	  "weight_w": {"kind": "power", "exponents": [0, 0]}})") == "weight_v.factors");
}

TEST_CASE("weight rank mismatches surface at assembly with the weight's name", "[cli]") {
	RunConfig c = RunConfig::from_text(kFlatPLessQ);
	c.weight_v.expo = {0.0, 0.0, 0.0};
	try {
		assemble_report(c, false);
		FAIL("expected a configuration error");
	} catch (const ConfigError& e) {
		CHECK(e.field() == "weight_v");
	}
	// a table weight needs one value per cell of the configured grid
	c = RunConfig::from_text(kFlatPLessQ);
	c.weight_w.kind = WeightKind::Table;
	c.weight_w.table_values = {1.0, 2.0, 3.0};
	try {
		assemble_report(c, false);
		FAIL("expected a configuration error");
	} catch (const ConfigError& e) {
		CHECK(e.field() == "weight_w");
	}
}

TEST_CASE("flat-weight report in the p < q zone", "[cli]") {
	const RunConfig c = RunConfig::from_text(kFlatPLessQ);
	const BoundsReport rep = assemble_report(c, false);
	CHECK(rep.exps.zone == Zone::PLessQ);
	for (const char* n : {"A1", "A2", "A3", "AM2", "AT2", "AM2*", "AT2*"})
		CHECK(find(rep.functionals, n) != nullptr);
	CHECK(find(rep.functionals, "B1") == nullptr);
	REQUIRE(rep.consts.alpha.has_value());
	CHECK(*rep.consts.alpha == Catch::Approx(8.0));
	REQUIRE(rep.chains.entries.size() == 2);
	CHECK(rep.chains.all_hold());
	CHECK(rep.checks_pass);
	// flat weights diverge with the domain, so every functional is flagged
	bool flagged_a1 = false;
	for (const auto& wmsg : rep.warnings)
		flagged_a1 = flagged_a1 || wmsg.find("A1: changes") == 0;
	CHECK(flagged_a1);
}

TEST_CASE("requesting zone-unavailable functionals warns and omits", "[cli]") {
	RunConfig c = RunConfig::from_text(kFlatPLessQ);
	c.p = 2.0;
	c.q = 2.0;
	c.functionals = std::vector<std::string>{"A1", "B1"};
	const BoundsReport rep = assemble_report(c, false);
	CHECK(find(rep.functionals, "A1") != nullptr);
	CHECK(find(rep.functionals, "B1") == nullptr);
	bool warned = false;
	for (const auto& wmsg : rep.warnings)
		warned = warned || wmsg.find("B1: requires q < p") == 0;
	CHECK(warned);
	CHECK(rep.checks_pass);
}

TEST_CASE("report emission is deterministic", "[cli]") {
	const RunConfig c = RunConfig::from_text(kPowerQLessP);
	const std::string a = report_json(assemble_report(c, true), "norm", c);
	const std::string b = report_json(assemble_report(c, true), "norm", c);
	CHECK(a == b);
	CHECK(a.find("\"command\": \"norm\"") != std::string::npos);
	CHECK(a.find("\"certified\"") != std::string::npos);
}

TEST_CASE("certified interval brackets the estimate when q < p", "[cli]") {
	const RunConfig c = RunConfig::from_text(kPowerQLessP);
	const BoundsReport rep = assemble_report(c, true);
	REQUIRE(rep.estimate.has_value());
	REQUIRE(rep.certified.has_value());
	const double lo = (*rep.certified)[0], hi = (*rep.certified)[1];
	CHECK(lo <= hi);
	CHECK(rep.estimate->value >= lo * (1.0 - 1e-12));
	CHECK(rep.estimate->value <= hi);
	// the lower end is the larger of the probe bound and the scaled B1 value
	const Exponents e = Exponents::make(c.p, c.q);
	const double b1 = find(rep.functionals, "B1")->value;
	CHECK(lo == Catch::Approx(std::max(rep.estimate->probe_lower, rep.consts.c_lower * b1)));
	CHECK(rep.checks_pass);
	CHECK(e.zone == Zone::QLessP);
}

TEST_CASE("zero upper weight certifies the zero interval", "[cli]") {
	RunConfig c = RunConfig::from_text(kFlatPLessQ);
	c.weight_w.kind = WeightKind::Table;
	c.weight_w.table_values.assign(24 * 24, 0.0);
	const BoundsReport rep = assemble_report(c, true);
	REQUIRE(rep.certified.has_value());
	CHECK((*rep.certified)[0] == 0.0);
	CHECK((*rep.certified)[1] == 0.0);
	CHECK(rep.estimate->value == 0.0);
	CHECK(rep.checks_pass);
}

TEST_CASE("norm estimation outside two dimensions is a configuration error", "[cli]") {
	RunConfig c = RunConfig::from_text(kPowerQLessP);
	c.dims = 3;
	c.weight_v.expo = {0.5, 0.5, 0.5};
	c.weight_w.expo = {-2.5, -2.5, -2.5};
	try {
		assemble_report(c, true);
		FAIL("expected a configuration error");
	} catch (const ConfigError& e) {
		CHECK(e.field() == "dims");
	}
	// without the estimate the same configuration reports the reductions
	const BoundsReport rep = assemble_report(c, false);
	for (const char* n : {"AM3", "AT3", "AM3*", "AT3*", "BMR3", "BPS3", "BMR3*", "BPS3*"})
		CHECK(find(rep.functionals, n) != nullptr);
	CHECK(find(rep.functionals, "A1") == nullptr);
}

TEST_CASE("range parsing", "[cli]") {
	const auto r = parse_range("p_range", "2:3:0.5");
	REQUIRE(r.size() == 3);
	CHECK(r[0] == 2.0);
	CHECK(r[2] == Catch::Approx(3.0));
	CHECK(parse_range("p_range", "2.5:2.5:1").size() == 1);
	for (const char* bad : {"", "2:3", "3:2:0.5", "2:3:0", "2:3:-1", "0.5:3:0.5", "1:3:1", "2:3:0.5x"}) {
		try {
			parse_range("p_range", bad);
			FAIL("expected a configuration error for: " << bad);
		} catch (const ConfigError& e) {
			CHECK(e.field() == "p_range");
		}
	}
}

TEST_CASE("sweep emits the fixed header and one row per pair", "[cli]") {
	RunConfig c = RunConfig::from_text(kPowerQLessP);
	c.iters = 30;
	c.p_range = "3:3:1";
	c.q_range = "2.2:2.8:0.3";
	const std::string csv = sweep_csv(c);
	const auto lines = lines_of(csv);
	REQUIRE(lines.size() == 4);
	CHECK(lines[0] == kSweepHeader);
	for (std::size_t i = 1; i < lines.size(); ++i) CHECK(split(lines[i], ',').size() == 18);
	CHECK(sweep_csv(c) == csv);  // byte-identical rerun

	// as q rises to p the first reduced functional approaches the diagonal
	// supremum functional
	const auto first = split(lines[1], ','), last = split(lines[3], ',');
	CHECK(std::stod(first[1]) == 2.2);
	CHECK(std::stod(last[1]) == Catch::Approx(2.8));
	const GridPtr<2> g = c.make_grid<2>();
	const Exponents diag = Exponents::make(3.0, 3.0);
	const ConfigFields f = ConfigFields::make(c.weight_v.instantiate<2>("weight_v", g),
	                                          c.weight_w.instantiate<2>("weight_w", g), g, diag);
	const double a1_diag = a_functional(AFunc::A1, f, diag).value;
	const double drift_far = std::fabs(std::stod(first[7]) - a1_diag);
	const double drift_near = std::fabs(std::stod(last[7]) - a1_diag);
	CHECK(drift_near < drift_far);
}

TEST_CASE("sweep rows with p = q leave undefined columns empty", "[cli]") {
	RunConfig c = RunConfig::from_text(kPowerQLessP);
	c.iters = 30;
	c.p_range = "2:2:1";
	c.q_range = "2:2:1";
	const auto lines = lines_of(sweep_csv(c));
	REQUIRE(lines.size() == 2);
	const auto row = split(lines[1], ',');
	REQUIRE(row.size() == 18);
	CHECK(row[0] == "2");
	CHECK(row[1] == "2");
	CHECK(row[2].empty());                    // r
	CHECK(row[3] == "p=q");
	for (int k = 7; k <= 11; ++k) CHECK(row[std::size_t(k)].empty());  // B family
	CHECK(row[13].empty());                   // C_upper
	CHECK(!row[4].empty());
	CHECK(!row[16].empty());
	CHECK(!row[17].empty());
}

TEST_CASE("verify suites are deterministic and cover every family", "[cli]") {
	const auto reps = run_verify_suite("all", 42, nullptr);
	CHECK(all_passed(reps));
	int ghs = 0, boxes = 0, limits = 0, zones = 0;
	for (const auto& r : reps) {
		if (r.check_name == "ghs") ++ghs;
		else if (r.check_name.rfind("boxes", 0) == 0) ++boxes;
		else if (r.check_name == "limit_AB") ++limits;
		else if (r.check_name == "zones") ++zones;
	}
	CHECK(ghs == 24);
	CHECK(boxes == 4);
	CHECK(limits == 1);
	CHECK(zones == 1);
	CHECK(verify_json("all", 42, reps) == verify_json("all", 42, run_verify_suite("all", 42, nullptr)));

	try {
		run_verify_suite("bogus", 1, nullptr);
		FAIL("expected a configuration error");
	} catch (const ConfigError& e) {
		CHECK(e.field() == "suite");
	}
}

TEST_CASE("driver subprocess round trips", "[cli]") {
	if (cli_bin().empty()) {
		WARN("HARDYCERT_CLI_BIN not set; skipping subprocess checks");
		return;
	}
	const std::string cfg = temp_path("cfg.json");
	const std::string out1 = temp_path("out1.json"), out2 = temp_path("out2.json");
	write_file(cfg, kPowerQLessP);

	CHECK(run_cli("functionals --config " + cfg + " --out " + out1 + " 2>/dev/null") == 0);
	const std::string report = slurp(out1);
	CHECK(report.find("\"command\": \"functionals\"") != std::string::npos);
	CHECK(report.find("\"B1\"") != std::string::npos);
	CHECK(report.find("\"checks_pass\": true") != std::string::npos);

	// identical configuration and seed give byte-identical reports
	CHECK(run_cli("norm --config " + cfg + " --out " + out2 + " 2>/dev/null") == 0);
	CHECK(run_cli("norm --config " + cfg + " --out " + out1 + " 2>/dev/null") == 0);
	CHECK(slurp(out1) == slurp(out2));

	// overrides reach the report
	CHECK(run_cli("functionals --config " + cfg + " --grid-nodes 17 --out " + out1 +
	              " 2>/dev/null") == 0);
	CHECK(slurp(out1).find("\"nodes_per_axis\": 17") != std::string::npos);
	CHECK(run_cli("functionals --config " + cfg + " --grid-nodes 7 2>/dev/null") == 2);

	CHECK(run_cli("verify --suite zones --seed 3 --out " + out1 + " 2>/dev/null") == 0);
	CHECK(slurp(out1).find("\"all_passed\": true") != std::string::npos);
	CHECK(run_cli("verify --suite bogus 2>/dev/null") == 2);

	write_file(cfg, "{not json");
	CHECK(run_cli("functionals --config " + cfg + " 2>/dev/null") == 2);
	CHECK(run_cli("functionals --config " + temp_path("missing.json") + " 2>/dev/null") == 2);

	// sweep: fixed header, empty range rejected
	const std::string sweep_cfg = temp_path("sweep.json");
	write_file(sweep_cfg, R"({
	  "p": 3.0, "q": 2.0, "iters": 25, "p_range": "3:3:1", "q_range": "2:2:1",
	  "grid": {"x_min": 1e-2, "x_max": 1e2, "nodes_per_axis": 17, "spacing": "log"},
	  "weight_v": {"kind": "power", "exponents": [0.5, 0.5]},
	  "weight_w": {"kind": "power", "exponents": [-2.5, -2.5]}
	})");
	CHECK(run_cli("sweep --config " + sweep_cfg + " --out " + out1 + " 2>/dev/null") == 0);
	const auto lines = lines_of(slurp(out1));
	REQUIRE(lines.size() == 2);
	CHECK(lines[0] == kSweepHeader);

	write_file(sweep_cfg, R"({
	  "p": 3.0, "q": 2.0, "p_range": "3:2:1", "q_range": "2:2:1",
	  "weight_v": {"kind": "power", "exponents": [0.5, 0.5]},
	  "weight_w": {"kind": "power", "exponents": [-2.5, -2.5]}
	})");
	CHECK(run_cli("sweep --config " + sweep_cfg + " 2>/dev/null") == 2);

	for (const std::string& p : {cfg, out1, out2, sweep_cfg}) std::remove(p.c_str());
}
