// Command-line front end: functionals / norm / verify / sweep over JSON run
// configurations. Exit status: 0 on success, 1 when a numeric check fails,
// 2 on any configuration or usage error.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "hardycert/report.hpp"

namespace {

struct CommonFlags {
	std::string config_path;
	std::string out_path;
	CLI::Option* seed_opt = nullptr;
	CLI::Option* nodes_opt = nullptr;
	CLI::Option* xmin_opt = nullptr;
	CLI::Option* xmax_opt = nullptr;
	std::uint64_t seed = 0;
	int grid_nodes = 0;
	double x_min = 0.0, x_max = 0.0;

	void add_to(CLI::App* cmd, bool config_required) {
		auto* cfg = cmd->add_option("--config", config_path, "JSON run configuration file");
		if (config_required) cfg->required();
		cmd->add_option("--out", out_path, "output file (default: stdout)");
		seed_opt = cmd->add_option("--seed", seed, "override the configured seed");
		nodes_opt = cmd->add_option("--grid-nodes", grid_nodes, "override grid nodes per axis");
		xmin_opt = cmd->add_option("--x-min", x_min, "override the domain lower corner");
		xmax_opt = cmd->add_option("--x-max", x_max, "override the domain upper corner");
	}

	hardycert::RunConfig load() const {
		std::ifstream in(config_path);
		if (!in) hardycert::cfg::fail("config", "cannot read file: " + config_path);
		std::ostringstream text;
		text << in.rdbuf();
		hardycert::RunConfig c = hardycert::RunConfig::from_text(text.str());
		apply_overrides(c);
		return c;
	}

	void apply_overrides(hardycert::RunConfig& c) const {
		if (seed_opt && seed_opt->count()) c.seed = seed;
		if (nodes_opt && nodes_opt->count()) c.grid.nodes_per_axis = grid_nodes;
		if (xmin_opt && xmin_opt->count()) c.grid.x_min = x_min;
		if (xmax_opt && xmax_opt->count()) c.grid.x_max = x_max;
		c.validate();
	}
};

void emit(const std::string& out_path, const std::string& text) {
	if (out_path.empty()) {
		std::cout << text;
		return;
	}
	std::ofstream out(out_path);
	if (!out) hardycert::cfg::fail("out", "cannot write file: " + out_path);
	out << text;
	if (!out) hardycert::cfg::fail("out", "write failed: " + out_path);
}

}  // namespace

int main(int argc, char** argv) {
	CLI::App app{"certification toolkit for weighted rectangular integral-mean inequalities"};
	app.require_subcommand(1);

	CommonFlags fn_flags, norm_flags, verify_flags, sweep_flags;
	std::string suite = "all";

	auto* fn = app.add_subcommand("functionals", "evaluate the discrete functionals and constants");
	fn_flags.add_to(fn, true);
	auto* nm = app.add_subcommand("norm", "functionals plus norm estimate and certified interval");
	norm_flags.add_to(nm, true);
	auto* vf = app.add_subcommand("verify", "run the built-in self-check suites");
	vf->add_option("--suite", suite, "ghs | lemmas | limits | zones | all");
	verify_flags.add_to(vf, false);
	auto* sw = app.add_subcommand("sweep", "CSV table over ranges of p and q");
	sweep_flags.add_to(sw, true);

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		return 2;
	}

	try {
		if (fn->parsed()) {
			const hardycert::RunConfig c = fn_flags.load();
			const hardycert::BoundsReport rep = hardycert::assemble_report(c, false);
			emit(fn_flags.out_path, hardycert::report_json(rep, "functionals", c));
			return rep.checks_pass ? 0 : 1;
		}
		if (nm->parsed()) {
			const hardycert::RunConfig c = norm_flags.load();
			const hardycert::BoundsReport rep = hardycert::assemble_report(c, true);
			emit(norm_flags.out_path, hardycert::report_json(rep, "norm", c));
			return rep.checks_pass ? 0 : 1;
		}
		if (vf->parsed()) {
			std::optional<hardycert::RunConfig> c;
			if (!verify_flags.config_path.empty()) c = verify_flags.load();
			std::uint64_t seed = c ? c->seed : 42;
			if (verify_flags.seed_opt->count()) seed = verify_flags.seed;
			const auto reps = hardycert::run_verify_suite(suite, seed, c ? &*c : nullptr);
			emit(verify_flags.out_path, hardycert::verify_json(suite, seed, reps));
			return hardycert::all_passed(reps) ? 0 : 1;
		}
		const hardycert::RunConfig c = sweep_flags.load();
		emit(sweep_flags.out_path, hardycert::sweep_csv(c));
		return 0;
	} catch (const hardycert::ConfigError& e) {
		std::cerr << "config error: " << e.field() << ": " << e.what() << "\n";
		return 2;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
}
